#pragma once

#include "smoothagg/core/aggregation.hpp"
#include "smoothagg/harness/dataset.hpp"
#include "smoothagg/regret/ledger.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace smoothagg::harness {

enum class Algorithm { LongTerm, Regression };
enum class ScenarioKind { Synthetic, Alternating, Adversarial };
enum class ConfidencePolicy { Full, Decaying };

[[nodiscard]] const char* to_string(Algorithm a);
[[nodiscard]] const char* to_string(ScenarioKind s);
[[nodiscard]] const char* to_string(ConfidencePolicy p);
[[nodiscard]] ScenarioKind parse_scenario(const std::string& name);
[[nodiscard]] ConfidencePolicy parse_confidence(const std::string& name);

/// eta if given (checked against the rule's range), else the largest admissible value.
[[nodiscard]] core::LossSpec resolve_loss(double bound, std::optional<double> eta,
                                          core::SubstitutionRule rule);

// ---------------------------------------------------------------------------
// Long-term aggregation runs

struct LongTermRunConfig {
    int experts = 3;
    int horizon = 5;
    long steps = 200;
    double bound = 1.0;
    std::optional<double> eta;
    core::SubstitutionRule rule = core::SubstitutionRule::Vovk;
    ScenarioKind scenario = ScenarioKind::Synthetic;
    ConfidencePolicy confidence = ConfidencePolicy::Full;
    int max_offset = 0;  ///< stream length; 0 selects 4d
    std::uint64_t seed = 1;
    bool verify_each_step = true;
    bool fold_expired = true;

    [[nodiscard]] int resolved_max_offset() const { return max_offset > 0 ? max_offset : 4 * horizon; }
};

/// Worst value seen for each inequality over the whole run. Gaps are lhs - rhs, passing when <= tolerance.
struct LongTermChecks {
    double excess_gap = -1e300;  ///< max_t [max_{n, tau <= t-d} R - delayed_excess_bound(t)]
    double excess_lhs = 0.0;
    double excess_rhs = 0.0;
    double entropy_gap = -1e300;  ///< max over experts of M - (H - R) - (d/eta) ln(N tau (tau+1))
    double entropy_lhs = 0.0;
    double entropy_rhs = 0.0;
    double mixability_violation = 0.0;  ///< worst grid violation of loss(y, gamma) <= g(y)
    double coordinate_gap = 0.0;        ///< worst mixture - e^{-eta h_s} at realized outcomes
    double averaged_gap = 0.0;          ///< worst sum w e^{-eta lhat} - e^{-eta h_t}
    double holder_product_gap = 0.0;    ///< worst (averaged)^d - prod of coordinate mixtures
    double identity_residual = 0.0;
    double mass_error = 0.0;
    double forecast_range_excess = 0.0;  ///< max(|gamma| - B, 0)
};

struct LongTermRun {
    LongTermRunConfig config;
    double eta = 0.0;
    std::vector<double> outcomes;                ///< y_1..y_T
    std::vector<std::vector<double>> forecasts;  ///< gamma_t
    regret::RegretLedger ledger{1};
    LongTermChecks checks;
};

[[nodiscard]] LongTermRun run_longterm(const LongTermRunConfig& config);

void write_longterm_csv(const LongTermRun& run, std::ostream& out);

// ---------------------------------------------------------------------------
// Smoothing regression runs

struct RegressionRunConfig {
    SwitchingDatasetConfig data;
    std::size_t window = 40;
    double sigma = 0.1;
    std::optional<double> eta;
    core::SubstitutionRule rule = core::SubstitutionRule::Vovk;
    std::vector<long> taus;  ///< trace birth times; empty selects 5 evenly spaced in [h+1, T-1]
};

struct RegressionRow {
    long t = 0;
    double y = 0.0;
    double prediction = 0.0;
    double loss = 0.0;
    double mixloss = 0.0;
    double bound = 0.0;
    double baseline_regret = 0.0;
    std::vector<std::optional<double>> regret_tau;
};

struct RegressionChecks {
    double trace_gap = -1e300;       ///< max_t max_{tau <= t-1} [H_t - L^tau_t - (2/eta) ln t]
    double trace_gap_late = -1e300;  ///< same with the sums starting at tau + 1
    double identity_residual = 0.0;
    double mass_error = 0.0;
    double prediction_range_excess = 0.0;
};

struct RegressionRun {
    RegressionRunConfig config;
    double eta = 0.0;
    std::vector<long> taus;
    std::vector<RegressionRow> rows;
    double cumulative_loss = 0.0;
    double baseline_cumulative_loss = 0.0;
    regret::RegretLedger ledger{1};
    RegressionChecks checks;
};

[[nodiscard]] std::vector<long> default_trace_taus(long steps, std::size_t window, int count = 5);

/// Runs the smoothing regressor over `data`, tracking regret traces and the full-sample baseline.
[[nodiscard]] RegressionRun run_regression(const RegressionRunConfig& config,
                                           const SwitchingDataset& data);

/// Same as run_regression on a freshly generated dataset; validates the trace birth times.
[[nodiscard]] RegressionRun run_regret_traces(const RegressionRunConfig& config);

/// t, loss_alg, bound, baseline_regret, regret_tau_<tau>...
void write_trace_csv(const RegressionRun& run, std::ostream& out);
/// t, y, prediction, loss_alg, cumulative_loss, mixloss
void write_regression_csv(const RegressionRun& run, std::ostream& out);

// ---------------------------------------------------------------------------
// Bound verification sweep

struct SweepEntry {
    Algorithm algorithm = Algorithm::LongTerm;
    LongTermRunConfig longterm;
    RegressionRunConfig regression;

    [[nodiscard]] std::string id() const;
};

struct VerificationRow {
    std::string config_id;
    std::uint64_t seed = 0;
    std::string check_name;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  ///< rhs - lhs
    bool pass = false;
};

struct VerificationReport {
    std::vector<VerificationRow> rows;
    [[nodiscard]] bool all_pass() const;
    [[nodiscard]] std::size_t failures() const;
};

/// N in {1,3,5}, d in {1,5,10}, T in {200,500} over all scenarios, plus two regression runs.
[[nodiscard]] std::vector<SweepEntry> default_sweep_grid(double bound = 1.0,
                                                         core::SubstitutionRule rule =
                                                             core::SubstitutionRule::Vovk,
                                                         std::optional<double> eta = std::nullopt);

/// Rejects any entry whose eta is outside its rule's range before running anything.
[[nodiscard]] VerificationReport run_bound_sweep(const std::vector<SweepEntry>& grid, int seeds,
                                                 std::uint64_t base_seed = 1, unsigned threads = 0);

/// config_id, seed, check_name, lhs, rhs, slack, pass
void write_report_csv(const VerificationReport& report, std::ostream& out);

[[nodiscard]] std::vector<VerificationRow> longterm_rows(const LongTermRun& run,
                                                         const std::string& id);
[[nodiscard]] std::vector<VerificationRow> regression_rows(const RegressionRun& run,
                                                           const std::string& id);

/// Shortest round-trip decimal representation.
[[nodiscard]] std::string format_double(double value);

}  // namespace smoothagg::harness
