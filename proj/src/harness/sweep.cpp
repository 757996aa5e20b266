#include "smoothagg/errors.hpp"
#include "smoothagg/harness/experiments.hpp"
#include "smoothagg/regret/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <ostream>
#include <thread>

namespace smoothagg::harness {

namespace {

constexpr double kResidualTolerance = 1e-10;
constexpr double kMassTolerance = 1e-10;

VerificationRow bound_row(const std::string& id, std::uint64_t seed, const char* name, double lhs,
                          double rhs, double tolerance) {
    return {id, seed, name, lhs, rhs, rhs - lhs, lhs <= rhs + tolerance};
}

VerificationRow below_row(const std::string& id, std::uint64_t seed, const char* name, double lhs,
                          double threshold) {
    return {id, seed, name, lhs, threshold, threshold - lhs, lhs < threshold};
}

}  // namespace

const char* to_string(Algorithm a) { return a == Algorithm::LongTerm ? "longterm" : "regression"; }

const char* to_string(ScenarioKind s) {
    switch (s) {
        case ScenarioKind::Synthetic:
            return "synthetic";
        case ScenarioKind::Alternating:
            return "alternating";
        case ScenarioKind::Adversarial:
            return "adversarial";
    }
    return "?";
}

const char* to_string(ConfidencePolicy p) { return p == ConfidencePolicy::Full ? "full" : "decaying"; }

ScenarioKind parse_scenario(const std::string& name) {
    if (name == "synthetic") return ScenarioKind::Synthetic;
    if (name == "alternating") return ScenarioKind::Alternating;
    if (name == "adversarial") return ScenarioKind::Adversarial;
    throw ConfigError("unknown scenario '" + name + "'");
}

ConfidencePolicy parse_confidence(const std::string& name) {
    if (name == "full") return ConfidencePolicy::Full;
    if (name == "decaying") return ConfidencePolicy::Decaying;
    throw ConfigError("unknown confidence policy '" + name + "'");
}

core::LossSpec resolve_loss(double bound, std::optional<double> eta, core::SubstitutionRule rule) {
    if (!(bound > 0.0)) throw ConfigError("bound B must be positive");
    const double default_eta = rule == core::SubstitutionRule::Vovk ? core::vovk_eta_max(bound)
                                                                    : core::mean_eta_max(bound);
    core::LossSpec spec(bound, eta.value_or(default_eta));
    core::require_admissible(rule, spec);
    return spec;
}

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return {buf, res.ptr};
}

std::string SweepEntry::id() const {
    if (algorithm == Algorithm::LongTerm) {
        return "longterm-N" + std::to_string(longterm.experts) + "-d" +
               std::to_string(longterm.horizon) + "-T" + std::to_string(longterm.steps) + "-" +
               to_string(longterm.scenario) + "-" + to_string(longterm.confidence) + "-" +
               core::to_string(longterm.rule);
    }
    return "regression-T" + std::to_string(regression.data.steps) + "-k" +
           std::to_string(regression.data.dim) + "-h" + std::to_string(regression.window) + "-" +
           core::to_string(regression.rule);
}

bool VerificationReport::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.pass; });
}

std::size_t VerificationReport::failures() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.pass; }));
}

std::vector<SweepEntry> default_sweep_grid(double bound, core::SubstitutionRule rule,
                                           std::optional<double> eta) {
    std::vector<SweepEntry> grid;
    for (int n : {1, 3, 5}) {
        for (int d : {1, 5, 10}) {
            for (long steps : {200L, 500L}) {
                for (auto scenario :
                     {ScenarioKind::Synthetic, ScenarioKind::Alternating, ScenarioKind::Adversarial}) {
                    for (auto confidence : {ConfidencePolicy::Full, ConfidencePolicy::Decaying}) {
                        SweepEntry e;
                        e.algorithm = Algorithm::LongTerm;
                        e.longterm.experts = n;
                        e.longterm.horizon = d;
                        e.longterm.steps = steps;
                        e.longterm.bound = bound;
                        e.longterm.eta = eta;
                        e.longterm.rule = rule;
                        e.longterm.scenario = scenario;
                        e.longterm.confidence = confidence;
                        grid.push_back(e);
                    }
                }
            }
        }
    }
    for (long steps : {200L, 500L}) {
        SweepEntry e;
        e.algorithm = Algorithm::Regression;
        e.regression.data.steps = steps;
        e.regression.data.dim = 5;
        e.regression.data.segments = 3;
        e.regression.data.bound = bound;
        e.regression.window = 20;
        e.regression.eta = eta;
        e.regression.rule = rule;
        grid.push_back(e);
    }
    return grid;
}

std::vector<VerificationRow> longterm_rows(const LongTermRun& run, const std::string& id) {
    const std::uint64_t seed = run.config.seed;
    const LongTermChecks& c = run.checks;
    std::vector<VerificationRow> rows;
    if (run.config.steps > run.config.horizon) {
        rows.push_back(bound_row(id, seed, "excess_loss_bound", c.excess_lhs, c.excess_rhs,
                                 regret::kBoundSlack));
        rows.push_back(bound_row(id, seed, "relative_entropy_bound", c.entropy_lhs, c.entropy_rhs,
                                 regret::kBoundSlack));
    }
    if (run.config.verify_each_step) {
        rows.push_back(bound_row(id, seed, "substitution_grid", c.mixability_violation, 0.0,
                                 core::kSubstitutionSlack));
    }
    rows.push_back(bound_row(id, seed, "realized_coordinate_mixability", c.coordinate_gap, 0.0,
                             regret::kBoundSlack));
    rows.push_back(bound_row(id, seed, "averaged_mixability", c.averaged_gap, 0.0, regret::kBoundSlack));
    rows.push_back(bound_row(id, seed, "holder_product", c.holder_product_gap, 0.0, regret::kBoundSlack));
    rows.push_back(below_row(id, seed, "entropy_identity", c.identity_residual, kResidualTolerance));
    rows.push_back(below_row(id, seed, "mass_conservation", c.mass_error, kMassTolerance));
    rows.push_back(bound_row(id, seed, "forecast_range", c.forecast_range_excess, 0.0, 0.0));
    return rows;
}

std::vector<VerificationRow> regression_rows(const RegressionRun& run, const std::string& id) {
    const std::uint64_t seed = run.config.data.seed;
    const RegressionChecks& c = run.checks;
    std::vector<VerificationRow> rows;
    rows.push_back(bound_row(id, seed, "regression_excess_bound", c.trace_gap, 0.0, regret::kBoundSlack));
    rows.push_back(bound_row(id, seed, "regression_excess_bound_after_birth_step", c.trace_gap_late,
                             0.0, regret::kBoundSlack));
    rows.push_back(below_row(id, seed, "entropy_identity", c.identity_residual, kResidualTolerance));
    rows.push_back(below_row(id, seed, "mass_conservation", c.mass_error, kMassTolerance));
    rows.push_back(bound_row(id, seed, "forecast_range", c.prediction_range_excess, 0.0, 0.0));
    return rows;
}

VerificationReport run_bound_sweep(const std::vector<SweepEntry>& grid, int seeds,
                                   std::uint64_t base_seed, unsigned threads) {
    if (grid.empty()) throw ConfigError("bound sweep grid is empty");
    if (seeds < 1) throw ConfigError("number of seeds must be positive");
    for (const auto& e : grid) {
        if (e.algorithm == Algorithm::LongTerm) {
            (void)resolve_loss(e.longterm.bound, e.longterm.eta, e.longterm.rule);
        } else {
            (void)resolve_loss(e.regression.data.bound, e.regression.eta, e.regression.rule);
        }
    }

    struct Job {
        std::size_t entry;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (int s = 0; s < seeds; ++s) jobs.push_back({i, base_seed + static_cast<std::uint64_t>(s)});
    }

    std::vector<std::vector<VerificationRow>> results(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) try {
            SweepEntry e = grid[jobs[j].entry];
            const std::string id = e.id();
            if (e.algorithm == Algorithm::LongTerm) {
                e.longterm.seed = jobs[j].seed;
                results[j] = longterm_rows(run_longterm(e.longterm), id);
            } else {
                e.regression.data.seed = jobs[j].seed;
                results[j] = regression_rows(run_regret_traces(e.regression), id);
            }
        } catch (...) {
            errors[j] = std::current_exception();
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));
    {
        std::vector<std::jthread> pool;
        for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
        worker();
    }

    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }

    VerificationReport report;
    for (auto& r : results) {
        report.rows.insert(report.rows.end(), std::make_move_iterator(r.begin()),
                           std::make_move_iterator(r.end()));
    }
    return report;
}

void write_report_csv(const VerificationReport& report, std::ostream& out) {
    out << "config_id,seed,check_name,lhs,rhs,slack,pass\n";
    for (const auto& r : report.rows) {
        out << r.config_id << ',' << r.seed << ',' << r.check_name << ',' << format_double(r.lhs)
            << ',' << format_double(r.rhs) << ',' << format_double(r.slack) << ','
            << (r.pass ? "true" : "false") << '\n';
    }
}

}  // namespace smoothagg::harness
