#include "smoothagg/errors.hpp"
#include "smoothagg/harness/experiments.hpp"
#include "smoothagg/longterm/aggregator.hpp"
#include "smoothagg/regret/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

namespace smoothagg::harness {

namespace {

using longterm::ExpertForecastStream;

std::vector<double> confidence_profile(ConfidencePolicy policy, int length) {
    std::vector<double> p(static_cast<std::size_t>(length), 1.0);
    if (policy == ConfidencePolicy::Decaying) {
        for (int i = 0; i < length; ++i) {
            p[static_cast<std::size_t>(i)] = 1.0 - static_cast<double>(i) / length;
        }
    }
    return p;
}

/// Outcome sequence plus expert panel for one long-term run.
class Scenario {
public:
    Scenario(const LongTermRunConfig& config, double bound)
        : config_(config), bound_(bound), length_(config.resolved_max_offset()),
          confidences_(confidence_profile(config.confidence, length_)), rng_(config.seed) {
        if (config.scenario == ScenarioKind::Synthetic) build_series();
    }

    double outcome(long u, const double* latest_forecast) const {
        switch (config_.scenario) {
            case ScenarioKind::Synthetic:
                return series_[static_cast<std::size_t>(u - 1)];
            case ScenarioKind::Alternating:
                return alternating(u);
            case ScenarioKind::Adversarial:
                // Answer whatever the learner leans towards with the opposite extreme.
                return latest_forecast != nullptr && *latest_forecast > 0.0 ? -bound_ : bound_;
        }
        return 0.0;
    }

    ExpertForecastStream stream(int n, long tau) {
        ExpertForecastStream s;
        s.expert = n;
        s.issue_time = tau;
        s.confidences = confidences_;
        s.forecasts.resize(static_cast<std::size_t>(length_));
        const int type = (n - 1) % 5;
        for (int i = 1; i <= length_; ++i) {
            const long u = tau + i;
            double c = 0.0;
            switch (config_.scenario) {
                case ScenarioKind::Synthetic:
                    c = synthetic_forecast(type, tau, u, i);
                    break;
                case ScenarioKind::Alternating:
                    c = alternating_forecast(type, u);
                    break;
                case ScenarioKind::Adversarial:
                    c = adversarial_forecast(type);
                    break;
            }
            s.forecasts[static_cast<std::size_t>(i - 1)] = std::clamp(c, -bound_, bound_);
        }
        return s;
    }

private:
    double alternating(long u) const { return u % 2 == 1 ? bound_ : -bound_; }

    void build_series() {
        const long total = config_.steps + length_ + 1;
        std::uniform_real_distribution<double> period(20.0, 60.0);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
        std::normal_distribution<double> gauss(0.0, 1.0);
        period_ = period(rng_);
        phase_ = phase(rng_);
        double ar = 0.0;
        for (long u = 1; u <= total; ++u) {
            ar = 0.8 * ar + 0.15 * bound_ * gauss(rng_);
            series_.push_back(std::clamp(seasonal(u) + ar, -bound_, bound_));
        }
    }

    double seasonal(long u) const {
        return 0.55 * bound_ * std::sin(2.0 * std::numbers::pi * static_cast<double>(u) / period_ + phase_);
    }

    double synthetic_forecast(int type, long tau, long u, int offset) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        const double truth = series_[static_cast<std::size_t>(u - 1)];
        switch (type) {
            case 0:
                return truth + 0.05 * bound_ * std::sqrt(static_cast<double>(offset)) * gauss(rng_);
            case 1:
                return series_[static_cast<std::size_t>(tau - 1)];
            case 2:
                return seasonal(u);
            case 3:
                return truth + 0.3 * bound_;
            default:
                return 0.0;
        }
    }

    double alternating_forecast(int type, long u) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        switch (type) {
            case 0:
                return -alternating(u);
            case 1:
                return alternating(u);
            case 2:
                return 0.0;
            case 3:
                return bound_;
            default:
                return alternating(u) + 0.2 * bound_ * gauss(rng_);
        }
    }

    double adversarial_forecast(int type) {
        std::uniform_real_distribution<double> uniform(-bound_, bound_);
        std::bernoulli_distribution coin(0.5);
        switch (type) {
            case 0:
                return coin(rng_) ? bound_ : -bound_;
            case 1:
                return bound_;
            case 2:
                return -bound_;
            case 3:
                return 0.0;
            default:
                return uniform(rng_);
        }
    }

    const LongTermRunConfig& config_;
    double bound_;
    int length_;
    std::vector<double> confidences_;
    std::mt19937_64 rng_;
    std::vector<double> series_;
    double period_ = 40.0;
    double phase_ = 0.0;
};

}  // namespace

LongTermRun run_longterm(const LongTermRunConfig& config) {
    if (config.steps < 1) throw ConfigError("steps must be positive");
    const core::LossSpec spec = resolve_loss(config.bound, config.eta, config.rule);

    longterm::AggregatorConfig agg_config;
    agg_config.experts = config.experts;
    agg_config.horizon = config.horizon;
    agg_config.spec = spec;
    agg_config.rule = config.rule;
    agg_config.fold_expired = config.fold_expired;
    agg_config.verify_each_step = config.verify_each_step;
    longterm::LongTermAggregator agg(agg_config);

    LongTermRun run;
    run.config = config;
    run.eta = spec.eta();
    run.ledger = regret::RegretLedger(config.experts);
    LongTermChecks& checks = run.checks;

    const long d = config.horizon;
    const double eta = spec.eta();
    const double n_log = std::log(static_cast<double>(config.experts));
    Scenario scenario(config, spec.bound());

    for (long t = 1; t <= config.steps; ++t) {
        run.outcomes.push_back(scenario.outcome(t, agg.latest_forecast_for(t)));
        std::span<const double> window;
        if (t > d) window = std::span<const double>(run.outcomes).subspan(static_cast<std::size_t>(t - d));

        const longterm::UpdateReport rep = agg.observe_and_update(t, window);
        if (rep.charged) {
            run.ledger.record_step(t, rep.algorithm_loss, rep.mixloss);
            for (const auto& e : rep.excess) run.ledger.record_excess(t, e.expert, e.issue_time, e.excess);

            checks.coordinate_gap = std::max(checks.coordinate_gap, -rep.worst_coordinate_gap);
            checks.averaged_gap = std::max(checks.averaged_gap, rep.holder_rhs - rep.holder_lhs);
            checks.holder_product_gap = std::max(checks.holder_product_gap, -rep.holder_product_gap);
            checks.identity_residual = std::max(checks.identity_residual, rep.identity_residual);

            const regret::WorstExcess worst = run.ledger.worst_excess(t - d);
            const double bound = regret::delayed_excess_bound(config.experts, t, config.horizon, eta);
            if (worst.value - bound > checks.excess_gap) {
                checks.excess_gap = worst.value - bound;
                checks.excess_lhs = worst.value;
                checks.excess_rhs = bound;
            }

            // Sum of m_t minus the expert's discounted losses, against (d/eta) ln(1 / w_{(n,tau),1}).
            const double surplus = run.ledger.cumulative_mixloss() - run.ledger.cumulative_loss();
            auto entropy = [&](long tau, double excess) {
                const double lhs = surplus + excess;
                const double rhs = static_cast<double>(d) / eta *
                                   (n_log + std::log(static_cast<double>(tau) * (tau + 1.0)));
                if (lhs - rhs > checks.entropy_gap) {
                    checks.entropy_gap = lhs - rhs;
                    checks.entropy_lhs = lhs;
                    checks.entropy_rhs = rhs;
                }
            };
            // Experts issued after t - d have only been charged h_t so far.
            entropy(t - d + 1, 0.0);
            run.ledger.for_each_expert(t, [&](int, long tau, double excess) { entropy(tau, excess); });
        }

        std::vector<ExpertForecastStream> streams;
        for (int n = 1; n <= config.experts; ++n) streams.push_back(scenario.stream(n, t));
        agg.birth_experts(t, std::move(streams));

        longterm::ForecastReport fr = agg.forecast_horizon(t);
        if (config.verify_each_step) {
            checks.mixability_violation =
                std::max(checks.mixability_violation, fr.mixability.worst_violation);
        }
        for (double g : fr.gamma) {
            checks.forecast_range_excess =
                std::max(checks.forecast_range_excess, std::abs(g) - spec.bound());
        }
        for (std::size_t c = 0; c < agg.chain_count(); ++c) {
            checks.mass_error = std::max(checks.mass_error, std::abs(agg.total_mass(c) - 1.0));
        }
        run.forecasts.push_back(std::move(fr.gamma));
    }
    return run;
}

void write_longterm_csv(const LongTermRun& run, std::ostream& out) {
    const int d = run.config.horizon;
    out << "t,y,loss_alg,mixloss";
    for (int s = 1; s <= d; ++s) out << ",gamma_" << s;
    out << '\n';
    std::size_t step = 0;
    const auto& steps = run.ledger.steps();
    for (std::size_t i = 0; i < run.outcomes.size(); ++i) {
        const long t = static_cast<long>(i) + 1;
        double loss = 0.0;
        double mix = 0.0;
        if (step < steps.size() && steps[step].t == t) {
            loss = steps[step].algorithm_loss;
            mix = steps[step].mixloss;
            ++step;
        }
        out << t << ',' << format_double(run.outcomes[i]) << ',' << format_double(loss) << ','
            << format_double(mix);
        for (double g : run.forecasts[i]) out << ',' << format_double(g);
        out << '\n';
    }
}

}  // namespace smoothagg::harness
