#include "smoothagg/errors.hpp"
#include "smoothagg/harness/dataset.hpp"
#include "smoothagg/harness/experiments.hpp"
#include "smoothagg/regression/ridge.hpp"
#include "smoothagg/regret/analysis.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

using namespace smoothagg;
using namespace smoothagg::harness;

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

RegressionRunConfig small_regression(std::uint64_t seed) {
    RegressionRunConfig c;
    c.data.steps = 300;
    c.data.dim = 5;
    c.data.segments = 3;
    c.data.seed = seed;
    c.window = 20;
    return c;
}

}  // namespace

TEST_CASE("switching dataset") {
    SwitchingDatasetConfig cfg;
    cfg.steps = 500;
    cfg.dim = 6;
    cfg.segments = 7;
    cfg.seed = 42;
    const SwitchingDataset a = generate_switching_dataset(cfg);
    const SwitchingDataset b = generate_switching_dataset(cfg);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.segment_starts == b.segment_starts);

    REQUIRE(a.segment_starts.size() == 7);
    CHECK(a.segment_starts.front() == 1);
    for (std::size_t i = 1; i < a.segment_starts.size(); ++i) {
        CHECK(a.segment_starts[i] > a.segment_starts[i - 1]);
        CHECK(a.segment_starts[i] <= cfg.steps);
        const auto start = static_cast<std::size_t>(a.segment_starts[i] - 1);
        CHECK(a.model_of_step[start] != a.model_of_step[start - 1]);
    }
    CHECK(a.latent.size() == 3);
    for (const auto& w : a.latent) {
        double norm = 0.0;
        for (double v : w) norm += v * v;
        CHECK(std::sqrt(norm) == doctest::Approx(cfg.resolved_radius()).epsilon(1e-12));
    }
    for (double y : a.y) CHECK(std::abs(y) <= cfg.bound);
    for (int m : a.model_of_step) CHECK((m >= 0 && m < 3));

    cfg.seed = 43;
    CHECK(generate_switching_dataset(cfg).y != a.y);

    SwitchingDatasetConfig bad = cfg;
    bad.segments = 600;
    CHECK_THROWS_AS(generate_switching_dataset(bad), ConfigError);
}

TEST_CASE("noiseless single-segment data is recovered by a window fit") {
    SwitchingDatasetConfig cfg;
    cfg.steps = 200;
    cfg.dim = 20;
    cfg.segments = 1;
    cfg.noise_std = 0.0;
    cfg.seed = 3;
    const SwitchingDataset data = generate_switching_dataset(cfg);
    REQUIRE(data.clamped == 0);
    std::vector<regression::Sample> window;
    for (std::size_t t = 100; t < 140; ++t) window.push_back({data.x[t], data.y[t]});
    const auto w = regression::ridge_fit(window, 1e-8);
    const auto& truth = data.latent[static_cast<std::size_t>(data.model_of_step[0])];
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(w[i] - truth[i]) < 1e-3);
}

TEST_CASE("loss resolution") {
    CHECK(resolve_loss(1.0, std::nullopt, core::SubstitutionRule::Vovk).eta() == 0.5);
    CHECK(resolve_loss(2.0, std::nullopt, core::SubstitutionRule::Mean).eta() == doctest::Approx(1.0 / 32));
    CHECK_THROWS_AS(resolve_loss(1.0, 1.0, core::SubstitutionRule::Vovk), ConfigError);
}

TEST_CASE("regret-trace table") {
    RegressionRunConfig cfg = small_regression(9);
    SUBCASE("default trace birth times") {
        const auto taus = default_trace_taus(300, 20);
        REQUIRE(taus.size() == 5);
        for (long tau : taus) CHECK((tau > 20 && tau < 300));
    }
    SUBCASE("last possible birth time leaves a single point") {
        cfg.taus = {299};
        const RegressionRun run = run_regret_traces(cfg);
        int filled = 0;
        for (const auto& row : run.rows) {
            if (row.regret_tau[0].has_value()) ++filled;
        }
        CHECK(filled == 1);
        std::ostringstream out;
        write_trace_csv(run, out);
        const auto text = lines(out.str());
        CHECK(text.front() == "t,loss_alg,bound,baseline_regret,regret_tau_299");
        CHECK(text.size() == 301);
    }
    SUBCASE("birth times outside [1, T-1] are rejected") {
        cfg.taus = {300};
        CHECK_THROWS_AS(run_regret_traces(cfg), ConfigError);
        cfg.taus = {0};
        CHECK_THROWS_AS(run_regret_traces(cfg), ConfigError);
    }
    SUBCASE("bound column and traces") {
        const RegressionRun run = run_regret_traces(cfg);
        for (const auto& row : run.rows) {
            CHECK(row.bound == doctest::Approx(regret::smoothing_regret_bound(static_cast<double>(row.t), run.eta)));
            for (std::size_t j = 0; j < run.taus.size(); ++j) {
                if (row.regret_tau[j]) CHECK(*row.regret_tau[j] <= row.bound + regret::kBoundSlack);
            }
        }
        CHECK(run.checks.trace_gap <= regret::kBoundSlack);
        CHECK(run.checks.trace_gap_late <= regret::kBoundSlack);
        CHECK(run.checks.identity_residual < 1e-10);
        CHECK(run.checks.mass_error < 1e-10);
        CHECK(run.rows.back().baseline_regret ==
              doctest::Approx(run.cumulative_loss - run.baseline_cumulative_loss));
    }
}

TEST_CASE("long-term runs pass every check") {
    for (auto scenario : {ScenarioKind::Synthetic, ScenarioKind::Alternating, ScenarioKind::Adversarial}) {
        for (auto policy : {ConfidencePolicy::Full, ConfidencePolicy::Decaying}) {
            LongTermRunConfig cfg;
            cfg.scenario = scenario;
            cfg.confidence = policy;
            cfg.steps = 120;
            cfg.horizon = 4;
            const LongTermRun run = run_longterm(cfg);
            const auto rows = longterm_rows(run, "case");
            for (const auto& r : rows) {
                CHECK_MESSAGE(r.pass, to_string(scenario) << "/" << to_string(policy) << " "
                                                          << r.check_name << " lhs=" << r.lhs
                                                          << " rhs=" << r.rhs);
            }
            for (const auto& g : run.forecasts) {
                for (double v : g) CHECK(std::abs(v) <= cfg.bound);
            }
        }
    }
}

TEST_CASE("mean substitution runs") {
    LongTermRunConfig cfg;
    cfg.rule = core::SubstitutionRule::Mean;
    cfg.steps = 100;
    const LongTermRun run = run_longterm(cfg);
    CHECK(run.eta == doctest::Approx(0.125));
    for (const auto& r : longterm_rows(run, "mean")) CHECK(r.pass);
}

TEST_CASE("sweep report") {
    auto grid = default_sweep_grid();
    CHECK(grid.size() >= 50);
    SUBCASE("schema") {
        std::vector<SweepEntry> few(grid.begin(), grid.begin() + 3);
        few.push_back(grid.back());
        const VerificationReport report = run_bound_sweep(few, 1, 1, 2);
        CHECK(report.all_pass());
        std::ostringstream out;
        write_report_csv(report, out);
        const auto text = lines(out.str());
        CHECK(text.front() == "config_id,seed,check_name,lhs,rhs,slack,pass");
        CHECK(text.size() == report.rows.size() + 1);
        for (std::size_t i = 1; i < text.size(); ++i) CHECK(split(text[i]).size() == 7);
    }
    SUBCASE("out-of-range eta is rejected before running") {
        auto bad = default_sweep_grid(1.0, core::SubstitutionRule::Vovk);
        bad[5].longterm.eta = 1.0;
        CHECK_THROWS_AS(run_bound_sweep(bad, 1), ConfigError);
        CHECK_THROWS_AS(run_bound_sweep(default_sweep_grid(1.0, core::SubstitutionRule::Vovk, 1.0), 1), ConfigError);
    }
}

TEST_CASE("outputs are byte-identical across runs") {
    const RegressionRunConfig cfg = small_regression(17);
    std::ostringstream a;
    std::ostringstream b;
    write_trace_csv(run_regret_traces(cfg), a);
    write_trace_csv(run_regret_traces(cfg), b);
    CHECK(a.str() == b.str());

    LongTermRunConfig lt;
    lt.scenario = ScenarioKind::Adversarial;
    std::ostringstream c;
    std::ostringstream d;
    write_longterm_csv(run_longterm(lt), c);
    write_longterm_csv(run_longterm(lt), d);
    CHECK(c.str() == d.str());

    std::vector<SweepEntry> grid = default_sweep_grid();
    grid.resize(6);
    std::ostringstream e;
    std::ostringstream f;
    write_report_csv(run_bound_sweep(grid, 2, 5, 1), e);
    write_report_csv(run_bound_sweep(grid, 2, 5, 4), f);
    CHECK(e.str() == f.str());
}

TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345.678, 0.0}) {
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.5) == "0.5");
}
