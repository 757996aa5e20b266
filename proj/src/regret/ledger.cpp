#include "smoothagg/regret/ledger.hpp"

#include "smoothagg/errors.hpp"

#include <algorithm>

namespace smoothagg::regret {

RegretLedger::RegretLedger(int experts, bool keep_detail)
    : experts_(experts), keep_detail_(keep_detail) {
    if (experts < 1) throw ConfigError("RegretLedger: number of experts must be positive");
}

std::size_t RegretLedger::index(int expert, long issue_time) const {
    if (expert < 1 || expert > experts_ || issue_time < 1) {
        throw DomainError("RegretLedger: expert index out of range");
    }
    return static_cast<std::size_t>(issue_time - 1) * static_cast<std::size_t>(experts_) +
           static_cast<std::size_t>(expert - 1);
}

void RegretLedger::record_step(long t, double algorithm_loss, double mixloss) {
    StepRecord rec{t, algorithm_loss, mixloss, algorithm_loss, mixloss};
    if (!steps_.empty()) {
        if (t <= steps_.back().t) throw StateError("RegretLedger: steps must increase");
        rec.cumulative_loss += steps_.back().cumulative_loss;
        rec.cumulative_mixloss += steps_.back().cumulative_mixloss;
    }
    steps_.push_back(rec);
}

void RegretLedger::record_excess(long t, int expert, long issue_time, double excess) {
    const std::size_t i = index(expert, issue_time);
    if (i >= slots_.size()) slots_.resize(i + 1);
    Slot& slot = slots_[i];
    slot.total += excess;
    if (!slot.first) slot.first = excess;
    if (keep_detail_) detail_.push_back({t, expert, issue_time, excess});
}

double RegretLedger::cumulative_loss() const {
    return steps_.empty() ? 0.0 : steps_.back().cumulative_loss;
}

double RegretLedger::cumulative_mixloss() const {
    return steps_.empty() ? 0.0 : steps_.back().cumulative_mixloss;
}

double RegretLedger::cumulative_excess(int expert, long issue_time) const {
    const std::size_t i = index(expert, issue_time);
    return i < slots_.size() ? slots_[i].total : 0.0;
}

double RegretLedger::cumulative_excess_after_first(int expert, long issue_time) const {
    const std::size_t i = index(expert, issue_time);
    if (i >= slots_.size() || !slots_[i].first) return 0.0;
    return slots_[i].total - *slots_[i].first;
}

WorstExcess RegretLedger::worst_excess(long max_issue_time, bool skip_first) const {
    WorstExcess worst;
    const std::size_t limit =
        max_issue_time < 1
            ? 0
            : std::min(slots_.size(),
                       static_cast<std::size_t>(max_issue_time) * static_cast<std::size_t>(experts_));
    for (std::size_t i = 0; i < limit; ++i) {
        const double value =
            skip_first && slots_[i].first ? slots_[i].total - *slots_[i].first : slots_[i].total;
        if (!worst.any || value > worst.value) {
            worst = {value, static_cast<int>(i % static_cast<std::size_t>(experts_)) + 1,
                     static_cast<long>(i / static_cast<std::size_t>(experts_)) + 1, true};
        }
    }
    // Experts beyond the stored slots were never recorded and sit at zero excess.
    const std::size_t wanted =
        max_issue_time < 1 ? 0
                           : static_cast<std::size_t>(max_issue_time) * static_cast<std::size_t>(experts_);
    if (wanted > limit && (!worst.any || worst.value < 0.0)) {
        worst = {0.0, static_cast<int>(limit % static_cast<std::size_t>(experts_)) + 1,
                 static_cast<long>(limit / static_cast<std::size_t>(experts_)) + 1, true};
    }
    return worst;
}

void RegretLedger::for_each_expert(long max_issue_time,
                                   const std::function<void(int, long, double)>& visit) const {
    const auto n = static_cast<std::size_t>(experts_);
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        const long tau = static_cast<long>(i / n) + 1;
        if (tau > max_issue_time) break;
        visit(static_cast<int>(i % n) + 1, tau, slots_[i].total);
    }
}

}  // namespace smoothagg::regret
