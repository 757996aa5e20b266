// Command-line driver: simulate-longterm, simulate-regression, replicate-figure1, verify-bounds.

#include "smoothagg/errors.hpp"
#include "smoothagg/harness/experiments.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace smoothagg;
using nlohmann::json;

struct Options {
    std::string config_path;
    std::string out;
    int experts = 3;
    int horizon = 5;
    double eta = 0.0;
    double bound = 1.0;
    std::size_t window = 40;
    double sigma = 0.1;
    std::string subst = "vovk";
    std::uint64_t seed = 1;
    long steps = 0;
    int segments = 7;
    int models = 3;
    std::size_t dim = 20;
    double noise = -1.0;
    double radius = 0.0;
    std::string scenario = "synthetic";
    std::string confidence = "full";
    std::vector<long> taus;
    int seeds = 1;
    unsigned threads = 0;
};

/// Copies JSON config values into `opts` for every option not given on the command line.
void apply_config(const CLI::App& app, Options& opts) {
    if (opts.config_path.empty()) return;
    std::ifstream in(opts.config_path);
    if (!in) throw ConfigError("cannot open config file " + opts.config_path);
    const json cfg = json::parse(in);
    auto take = [&](const char* key, const char* flag, auto& field) {
        if (cfg.contains(key) && app.count(flag) == 0) {
            field = cfg.at(key).get<std::remove_reference_t<decltype(field)>>();
        }
    };
    take("experts", "--experts", opts.experts);
    take("horizon", "--horizon", opts.horizon);
    take("eta", "--eta", opts.eta);
    take("bound", "--bound", opts.bound);
    take("window", "--window", opts.window);
    take("sigma", "--sigma", opts.sigma);
    take("subst", "--subst", opts.subst);
    take("seed", "--seed", opts.seed);
    take("steps", "--steps", opts.steps);
    take("segments", "--segments", opts.segments);
    take("models", "--models", opts.models);
    take("dim", "--dim", opts.dim);
    take("noise", "--noise", opts.noise);
    take("radius", "--radius", opts.radius);
    take("scenario", "--scenario", opts.scenario);
    take("confidence", "--confidence", opts.confidence);
    take("taus", "--taus", opts.taus);
    take("seeds", "--seeds", opts.seeds);
    take("out", "--out", opts.out);
}

std::optional<double> eta_of(const Options& o) {
    return o.eta > 0.0 ? std::optional<double>(o.eta) : std::nullopt;
}

harness::RegressionRunConfig regression_config(const Options& o) {
    harness::RegressionRunConfig c;
    c.data.steps = o.steps > 0 ? o.steps : 3000;
    c.data.dim = o.dim;
    c.data.segments = o.segments;
    c.data.models = o.models;
    c.data.bound = o.bound;
    c.data.noise_std = o.noise;
    c.data.latent_radius = o.radius;
    c.data.seed = o.seed;
    c.window = o.window;
    c.sigma = o.sigma;
    c.eta = eta_of(o);
    c.rule = core::parse_substitution_rule(o.subst);
    c.taus = o.taus;
    return c;
}

template <typename Writer>
void emit(const std::string& path, Writer&& write) {
    if (path.empty() || path == "-") {
        write(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file " + path);
    write(out);
}

bool all_pass(const std::vector<harness::VerificationRow>& rows) {
    for (const auto& r : rows) {
        if (!r.pass) return false;
    }
    return true;
}

void print_rows(const std::vector<harness::VerificationRow>& rows) {
    for (const auto& r : rows) {
        std::cerr << (r.pass ? "PASS " : "FAIL ") << r.check_name << "  lhs=" << r.lhs
                  << " rhs=" << r.rhs << " slack=" << r.slack << '\n';
    }
}

int simulate_longterm(const Options& o) {
    harness::LongTermRunConfig c;
    c.experts = o.experts;
    c.horizon = o.horizon;
    c.steps = o.steps > 0 ? o.steps : 200;
    c.bound = o.bound;
    c.eta = eta_of(o);
    c.rule = core::parse_substitution_rule(o.subst);
    c.scenario = harness::parse_scenario(o.scenario);
    c.confidence = harness::parse_confidence(o.confidence);
    c.seed = o.seed;
    const harness::LongTermRun run = harness::run_longterm(c);
    emit(o.out, [&](std::ostream& os) { harness::write_longterm_csv(run, os); });
    const auto rows = harness::longterm_rows(run, "simulate-longterm");
    print_rows(rows);
    std::cerr << "cumulative loss " << run.ledger.cumulative_loss() << '\n';
    return all_pass(rows) ? 0 : 1;
}

int simulate_regression(const Options& o) {
    const harness::RegressionRun run = harness::run_regret_traces(regression_config(o));
    emit(o.out, [&](std::ostream& os) { harness::write_regression_csv(run, os); });
    const auto rows = harness::regression_rows(run, "simulate-regression");
    print_rows(rows);
    std::cerr << "cumulative loss " << run.cumulative_loss << ", full-sample baseline "
              << run.baseline_cumulative_loss << '\n';
    return all_pass(rows) ? 0 : 1;
}

int replicate_figure1(const Options& o) {
    const harness::RegressionRun run = harness::run_regret_traces(regression_config(o));
    emit(o.out, [&](std::ostream& os) { harness::write_trace_csv(run, os); });
    const auto rows = harness::regression_rows(run, "replicate-figure1");
    print_rows(rows);
    std::cerr << "final bound " << run.rows.back().bound << ", cumulative loss "
              << run.cumulative_loss << ", full-sample baseline " << run.baseline_cumulative_loss
              << '\n';
    return all_pass(rows) ? 0 : 1;
}

int verify_bounds(const Options& o) {
    const auto rule = core::parse_substitution_rule(o.subst);
    const auto grid = harness::default_sweep_grid(o.bound, rule, eta_of(o));
    const harness::VerificationReport report =
        harness::run_bound_sweep(grid, o.seeds, o.seed, o.threads);
    emit(o.out, [&](std::ostream& os) { harness::write_report_csv(report, os); });
    std::cerr << report.rows.size() << " checks, " << report.failures() << " failing\n";
    return report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Long-horizon forecast aggregation with expert advice"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "JSON file with the run configuration");
        sub->add_option("--out", o.out, "Output CSV path (stdout if omitted)");
        sub->add_option("--eta", o.eta, "Learning rate (default: largest admissible)");
        sub->add_option("--bound", o.bound, "Outcome bound B");
        sub->add_option("--subst", o.subst, "Substitution rule")->check(CLI::IsMember({"vovk", "mean"}));
        sub->add_option("--seed", o.seed, "Random seed");
        sub->add_option("--steps", o.steps, "Number of steps T");
    };
    auto dataset = [&](CLI::App* sub) {
        sub->add_option("--window", o.window, "Sliding window length h");
        sub->add_option("--sigma", o.sigma, "Ridge regularization");
        sub->add_option("--segments", o.segments, "Number of regime segments K");
        sub->add_option("--models", o.models, "Number of latent linear models");
        sub->add_option("--dim", o.dim, "Signal dimension");
        sub->add_option("--noise", o.noise, "Noise standard deviation (default 0.05 x latent radius)");
        sub->add_option("--radius", o.radius, "Norm of the latent weight vectors (default B/3)");
        sub->add_option("--taus", o.taus, "Birth times of the traced experts");
    };

    auto* lt = app.add_subcommand("simulate-longterm", "Run the delayed-feedback aggregator on a scenario");
    common(lt);
    lt->add_option("--experts", o.experts, "Number of real experts N");
    lt->add_option("--horizon", o.horizon, "Forecast horizon d");
    lt->add_option("--scenario", o.scenario)->check(CLI::IsMember({"synthetic", "alternating", "adversarial"}));
    lt->add_option("--confidence", o.confidence)->check(CLI::IsMember({"full", "decaying"}));

    auto* rg = app.add_subcommand("simulate-regression", "Run the smoothing regressor on switching data");
    common(rg);
    dataset(rg);

    auto* fig = app.add_subcommand("replicate-figure1", "Regret traces of the smoothing regressor");
    common(fig);
    dataset(fig);

    auto* vb = app.add_subcommand("verify-bounds", "Sweep runs and check every regret inequality");
    common(vb);
    vb->add_option("--seeds", o.seeds, "Seeds per configuration");
    vb->add_option("--threads", o.threads, "Worker threads (0: hardware concurrency)");
    vb->add_option("--horizon", o.horizon, "Ignored; the sweep grid fixes d");

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* active = app.get_subcommands().front();
        apply_config(*active, o);
        if (active == lt) return simulate_longterm(o);
        if (active == rg) return simulate_regression(o);
        if (active == fig) return replicate_figure1(o);
        return verify_bounds(o);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
