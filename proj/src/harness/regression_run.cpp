#include "smoothagg/errors.hpp"
#include "smoothagg/harness/experiments.hpp"
#include "smoothagg/regression/ridge.hpp"
#include "smoothagg/regression/smoothing_regressor.hpp"
#include "smoothagg/regret/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace smoothagg::harness {

std::vector<long> default_trace_taus(long steps, std::size_t window, int count) {
    const long lo = static_cast<long>(window) + 1;
    const long hi = steps - 1;
    std::vector<long> taus;
    if (hi < lo || count < 1) return taus;
    for (int j = 1; j <= count; ++j) {
        const double q = static_cast<double>(j) / (count + 1);
        const long tau = lo + std::lround(q * static_cast<double>(hi - lo));
        if (taus.empty() || taus.back() != tau) taus.push_back(tau);
    }
    return taus;
}

RegressionRun run_regression(const RegressionRunConfig& config, const SwitchingDataset& data) {
    const core::LossSpec spec = resolve_loss(config.data.bound, config.eta, config.rule);
    const long steps = static_cast<long>(data.y.size());
    if (steps < 2) throw ConfigError("regression run needs at least 2 steps");

    RegressionRun run;
    run.config = config;
    run.eta = spec.eta();
    run.taus = config.taus.empty() ? default_trace_taus(steps, config.window) : config.taus;
    for (long tau : run.taus) {
        if (tau < 1 || tau >= steps) {
            throw ConfigError("trace birth time " + std::to_string(tau) + " outside [1, T - 1]");
        }
    }
    run.ledger = regret::RegretLedger(1);

    regression::RegressorConfig reg_config;
    reg_config.dim = data.x.front().size();
    reg_config.window = config.window;
    reg_config.sigma = config.sigma;
    reg_config.spec = spec;
    reg_config.rule = config.rule;
    regression::SmoothingRegressor regressor(reg_config);

    // Full-sample least-squares baseline, fit once on the whole interval.
    std::vector<regression::Sample> all;
    all.reserve(data.y.size());
    for (std::size_t i = 0; i < data.y.size(); ++i) all.push_back({data.x[i], data.y[i]});
    const regression::RegressionExpert baseline(0, regression::ridge_fit(all, config.sigma));

    double baseline_cumulative = 0.0;
    RegressionChecks& checks = run.checks;
    for (long t = 1; t <= steps; ++t) {
        const auto i = static_cast<std::size_t>(t - 1);
        const regression::RegressionStep st = regressor.step(t, data.x[i], data.y[i]);
        run.ledger.record_step(t, st.algorithm_loss, st.mixloss);
        for (std::size_t j = 0; j < st.birth_times.size(); ++j) {
            run.ledger.record_excess(t, 1, st.birth_times[j], st.algorithm_loss - st.expert_losses[j]);
        }
        baseline_cumulative += core::square_loss(data.y[i], baseline.predict(data.x[i], spec.bound()));

        RegressionRow row;
        row.t = t;
        row.y = data.y[i];
        row.prediction = st.prediction;
        row.loss = st.algorithm_loss;
        row.mixloss = st.mixloss;
        row.bound = regret::smoothing_regret_bound(static_cast<double>(t), spec.eta());
        row.baseline_regret = run.ledger.cumulative_loss() - baseline_cumulative;
        for (long tau : run.taus) {
            row.regret_tau.push_back(t > tau ? std::optional<double>(run.ledger.cumulative_excess(1, tau))
                                             : std::nullopt);
        }
        run.rows.push_back(std::move(row));

        if (t >= 2) {
            const double bound = regret::smoothing_regret_bound(static_cast<double>(t), spec.eta());
            checks.trace_gap = std::max(checks.trace_gap, run.ledger.worst_excess(t - 1).value - bound);
            checks.trace_gap_late =
                std::max(checks.trace_gap_late, run.ledger.worst_excess(t - 1, true).value - bound);
        }
        checks.identity_residual = std::max(checks.identity_residual, st.identity_residual);
        checks.mass_error = std::max(checks.mass_error, std::abs(regressor.total_mass() - 1.0));
        checks.prediction_range_excess =
            std::max(checks.prediction_range_excess, std::abs(st.prediction) - spec.bound());
    }
    run.cumulative_loss = run.ledger.cumulative_loss();
    run.baseline_cumulative_loss = baseline_cumulative;
    return run;
}

RegressionRun run_regret_traces(const RegressionRunConfig& config) {
    for (long tau : config.taus) {
        if (tau < 1 || tau >= config.data.steps) {
            throw ConfigError("trace birth time " + std::to_string(tau) + " outside [1, T - 1]");
        }
    }
    return run_regression(config, generate_switching_dataset(config.data));
}

void write_trace_csv(const RegressionRun& run, std::ostream& out) {
    out << "t,loss_alg,bound,baseline_regret";
    for (long tau : run.taus) out << ",regret_tau_" << tau;
    out << '\n';
    for (const auto& row : run.rows) {
        out << row.t << ',' << format_double(row.loss) << ',' << format_double(row.bound) << ','
            << format_double(row.baseline_regret);
        for (const auto& r : row.regret_tau) {
            out << ',';
            if (r) out << format_double(*r);
        }
        out << '\n';
    }
}

void write_regression_csv(const RegressionRun& run, std::ostream& out) {
    out << "t,y,prediction,loss_alg,cumulative_loss,mixloss\n";
    double cumulative = 0.0;
    for (const auto& row : run.rows) {
        cumulative += row.loss;
        out << row.t << ',' << format_double(row.y) << ',' << format_double(row.prediction) << ','
            << format_double(row.loss) << ',' << format_double(cumulative) << ','
            << format_double(row.mixloss) << '\n';
    }
}

}  // namespace smoothagg::harness
