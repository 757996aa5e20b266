#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace smoothagg::regret {

struct StepRecord {
    long t = 0;
    double algorithm_loss = 0.0;
    double mixloss = 0.0;
    double cumulative_loss = 0.0;
    double cumulative_mixloss = 0.0;
};

struct ExcessRecord {
    long t = 0;
    int expert = 0;
    long issue_time = 0;
    double excess = 0.0;
};

struct WorstExcess {
    double value = 0.0;
    int expert = 0;
    long issue_time = 0;
    bool any = false;
};

/**
 * @brief Per-step learner losses plus cumulative excess losses per auxiliary expert (n, tau).
 *
 * Excess entries that are never recorded count as zero, which is the value of
 * r for steps where the expert is charged the learner's own loss.
 */
class RegretLedger {
public:
    RegretLedger(int experts, bool keep_detail = false);

    void record_step(long t, double algorithm_loss, double mixloss);
    void record_excess(long t, int expert, long issue_time, double excess);

    [[nodiscard]] const std::vector<StepRecord>& steps() const { return steps_; }
    [[nodiscard]] const std::vector<ExcessRecord>& detail() const { return detail_; }
    [[nodiscard]] double cumulative_loss() const;
    [[nodiscard]] double cumulative_mixloss() const;

    /// Sum of recorded excess for (n, tau).
    [[nodiscard]] double cumulative_excess(int expert, long issue_time) const;
    /// Cumulative excess without the first recorded entry.
    [[nodiscard]] double cumulative_excess_after_first(int expert, long issue_time) const;
    /// Max cumulative excess over experts with issue time <= max_issue_time.
    [[nodiscard]] WorstExcess worst_excess(long max_issue_time, bool skip_first = false) const;
    /// Visits (n, tau, cumulative excess) for every stored expert with tau <= max_issue_time.
    void for_each_expert(long max_issue_time,
                         const std::function<void(int, long, double)>& visit) const;

private:
    struct Slot {
        double total = 0.0;
        std::optional<double> first;
    };
    [[nodiscard]] std::size_t index(int expert, long issue_time) const;

    int experts_;
    bool keep_detail_;
    std::vector<StepRecord> steps_;
    std::vector<Slot> slots_;
    std::vector<ExcessRecord> detail_;
};

}  // namespace smoothagg::regret
