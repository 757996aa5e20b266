#include "smoothagg/core/aggregation.hpp"
#include "smoothagg/errors.hpp"
#include "smoothagg/longterm/aggregator.hpp"
#include "smoothagg/regret/analysis.hpp"
#include "smoothagg/regret/ledger.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace smoothagg;
using namespace smoothagg::regret;

namespace {

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n, double zero_prob = 0.0) {
    std::exponential_distribution<double> e(1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> w(n);
    double total = 0.0;
    for (double& x : w) {
        x = u(rng) < zero_prob ? 0.0 : e(rng);
        total += x;
    }
    if (total == 0.0) {
        w[0] = 1.0;
        total = 1.0;
    }
    for (double& x : w) x /= total;
    return w;
}

}  // namespace

TEST_CASE("discounted excess") {
    const std::vector<double> h{1.0, 1.0};
    const std::vector<double> l{0.0, 0.0};
    CHECK(discounted_excess(h, l, std::vector<double>{0.0, 0.0}) == 0.0);
    CHECK(discounted_excess(h, h, std::vector<double>{1.0, 1.0}) == 0.0);
    CHECK(discounted_excess(h, l, std::vector<double>{1.0, 0.5}) == doctest::Approx(0.75));
    CHECK_THROWS_AS(discounted_excess(h, l, std::vector<double>{1.0}), DimensionError);
}

TEST_CASE("bound formulas") {
    CHECK(delayed_excess_bound(1, 6, 5, 0.5) == doctest::Approx(10.0 * 2.0 * std::log(2.0)));
    CHECK(delayed_excess_bound(3, 100, 5, 0.5) == doctest::Approx(102.2731).epsilon(1e-6));
    CHECK(delayed_excess_bound(1, 3000, 1, 0.5) == doctest::Approx(32.0255).epsilon(1e-6));
    CHECK_THROWS_AS(delayed_excess_bound(2, 5, 5, 0.5), DomainError);
    CHECK(smoothing_regret_bound(std::exp(1.0), 2.0) == doctest::Approx(1.0));
    CHECK(smoothing_regret_bound(3000.0, 0.5) == doctest::Approx(32.0255).epsilon(1e-6));
}

TEST_CASE("mixloss") {
    CHECK(mixloss(std::vector<double>{0.3, 0.7}, std::vector<double>{0.4, 0.4}, 0.5) ==
          doctest::Approx(0.4).epsilon(1e-14));
    CHECK(mixloss(std::vector<double>{0.5, 0.5}, std::vector<double>{0.0, std::log(2.0) / 0.5}, 0.5) ==
          doctest::Approx(-std::log(0.75) / 0.5).epsilon(1e-14));
}

TEST_CASE("relative-entropy identity for one update") {
    std::mt19937_64 rng(1000);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 12);
        const auto w = random_simplex(rng, n);
        const auto q = random_simplex(rng, n, 0.3);
        const double eta = 0.01 + 2.0 * u(rng);
        std::vector<double> l(n);
        for (double& x : l) x = 4.0 * u(rng);
        worst = std::max(worst, entropy_identity_residual(q, w, l, eta));
    }
    CHECK(worst < 1e-10);

    const std::vector<double> w{0.2, 0.5, 0.3};
    const std::vector<double> l{0.1, 0.9, 0.4};
    CHECK(entropy_identity_residual(core::exp_weight_update(w, l, 0.5), w, l, 0.5) < 1e-10);
    CHECK(entropy_identity_residual(std::vector<double>{0.0, 1.0, 0.0}, w, l, 0.5) < 1e-10);
    CHECK_THROWS_AS(entropy_identity_residual(std::vector<double>{0.5, 0.5, 0.0},
                                   std::vector<double>{1.0, 0.0, 0.0}, l, 0.5),
                    DivergenceError);
}

TEST_CASE("delayed entropy bound") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    SUBCASE("classical bound at d = 1") {
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t m = 2 + static_cast<std::size_t>(trial % 6);
            const std::vector<double> prior(m, 1.0 / static_cast<double>(m));
            std::vector<std::vector<double>> losses(60, std::vector<double>(m));
            for (auto& row : losses) {
                for (double& x : row) x = u(rng);
            }
            const DelayedTrace trace = run_delayed_weights(prior, losses, 1, 0.5);
            for (std::size_t i = 0; i < m; ++i) {
                std::vector<double> q(m, 0.0);
                q[i] = 1.0;
                const DelayedEntropyCheck c = verify_delayed_entropy_bound(trace, q);
                CHECK(c.rhs == doctest::Approx(std::log(static_cast<double>(m)) / 0.5).epsilon(1e-14));
                CHECK(c.pass);
                CHECK(c.telescoping_error < 1e-9);
                // Sum of mixlosses against the cumulative loss of expert i.
                double mix = 0.0;
                double li = 0.0;
                for (std::size_t t = 0; t < losses.size(); ++t) {
                    mix += trace.mixlosses[t + 1];
                    li += losses[t][i];
                }
                CHECK(mix <= li + std::log(static_cast<double>(m)) / 0.5 + kBoundSlack);
            }
        }
    }
    SUBCASE("random delayed traces") {
        for (int trial = 0; trial < 200; ++trial) {
            const int d = 1 + trial % 6;
            const std::size_t m = 1 + static_cast<std::size_t>(trial % 5);
            const auto prior = random_simplex(rng, m);
            std::vector<std::vector<double>> losses(30, std::vector<double>(m));
            for (auto& row : losses) {
                for (double& x : row) x = 2.0 * u(rng);
            }
            const DelayedTrace trace = run_delayed_weights(prior, losses, d, 0.3);
            const auto q = random_simplex(rng, m, 0.4);
            const DelayedEntropyCheck c = verify_delayed_entropy_bound(trace, q);
            CHECK(c.pass);
            CHECK(c.telescoping_error < 1e-9);
        }
    }
    SUBCASE("zero losses") {
        const std::vector<double> prior{0.25, 0.75};
        const std::vector<std::vector<double>> zeros(10, std::vector<double>(2, 0.0));
        const DelayedEntropyCheck c = verify_delayed_entropy_bound(run_delayed_weights(prior, zeros, 3, 0.5),
                                                    std::vector<double>{1.0, 0.0});
        CHECK(std::abs(c.lhs) < 1e-14);
        CHECK(c.pass);
    }
    SUBCASE("expert prior over a finite issue-time family") {
        // M = N (T - d) auxiliary experts with prior nu(tau)/N renormalized; the bound for
        // a unit q on (n, tau) is (d/eta) ln(1/w_(n,tau)) <= (d/eta) ln(N (T-d) (T-d+1)).
        const int n_experts = 2;
        const int d = 3;
        const long T = 25;
        const long taus = T - d;
        std::vector<double> prior;
        double total = 0.0;
        for (long tau = 1; tau <= taus; ++tau) {
            for (int n = 0; n < n_experts; ++n) {
                prior.push_back(longterm::prior_weight(tau) / n_experts);
                total += prior.back();
            }
        }
        for (double& p : prior) p /= total;
        std::vector<std::vector<double>> losses(static_cast<std::size_t>(T - d),
                                                std::vector<double>(prior.size()));
        for (auto& row : losses) {
            for (double& x : row) x = u(rng);
        }
        const DelayedTrace trace = run_delayed_weights(prior, losses, d, 0.5);
        const double cap = d / 0.5 * std::log(n_experts * static_cast<double>(taus) * (taus + 1.0));
        for (std::size_t i = 0; i < prior.size(); ++i) {
            std::vector<double> q(prior.size(), 0.0);
            q[i] = 1.0;
            const DelayedEntropyCheck c = verify_delayed_entropy_bound(trace, q);
            CHECK(c.pass);
            CHECK(c.rhs <= cap + 1e-12);
        }
    }
}

TEST_CASE("Hoelder chaining") {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const core::LossSpec spec(1.0, 0.5);

    SUBCASE("d = 1 is the coordinate inequality") {
        const std::vector<double> w{0.4, 0.6};
        const std::vector<double> c{0.3, -0.5};
        const double gamma = core::subst_vovk(c, w, spec);
        const double y = 0.9;
        const HolderCheck h = verify_holder_step(std::vector<double>{core::square_loss(y, gamma)},
                                                 {{core::square_loss(y, c[0])}, {core::square_loss(y, c[1])}},
                                                 w, 0.5);
        CHECK(h.pass);
        CHECK(h.rhs == doctest::Approx(h.coordinate_product).epsilon(1e-15));
    }
    SUBCASE("identical experts") {
        const HolderCheck h = verify_holder_step(std::vector<double>{0.2, 0.4},
                                                 {{0.2, 0.4}, {0.2, 0.4}}, std::vector<double>{0.5, 0.5}, 0.5);
        CHECK(h.pass);
        CHECK(h.lhs == doctest::Approx(h.rhs).epsilon(1e-15));
    }
    SUBCASE("random five-coordinate steps") {
        int passed = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            const std::size_t m = 1 + static_cast<std::size_t>(trial % 8);
            const auto w = random_simplex(rng, m);
            std::vector<std::vector<double>> expert_losses(m, std::vector<double>(5));
            std::vector<double> alg(5);
            for (std::size_t s = 0; s < 5; ++s) {
                std::vector<double> c(m);
                for (double& x : c) x = u(rng);
                const double gamma = core::subst_vovk(c, w, spec);
                const double y = u(rng);
                alg[s] = core::square_loss(y, gamma);
                for (std::size_t i = 0; i < m; ++i) expert_losses[i][s] = core::square_loss(y, c[i]);
            }
            const HolderCheck h = verify_holder_step(alg, expert_losses, w, 0.5);
            CHECK(h.coordinate_product >= std::pow(h.rhs, 5.0) - 1e-15);
            if (h.pass) ++passed;
        }
        CHECK(passed == 1000);
    }
}

TEST_CASE("aggregator steps satisfy the chained inequality") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    longterm::AggregatorConfig cfg;
    cfg.experts = 2;
    cfg.horizon = 5;
    longterm::LongTermAggregator agg(cfg);
    int steps = 0;
    for (long t = 1; t <= 1005; ++t) {
        std::vector<double> y;
        if (t > 5) {
            for (int s = 0; s < 5; ++s) y.push_back(u(rng));
        }
        const auto r = agg.observe_and_update(t, y);
        if (r.charged) {
            CHECK(r.worst_coordinate_gap >= -kBoundSlack);
            CHECK(r.holder_product_gap >= -kBoundSlack);
            CHECK(r.holder_lhs >= r.holder_rhs - kBoundSlack);
            CHECK(r.identity_residual < 1e-10);
            ++steps;
        }
        std::vector<longterm::ExpertForecastStream> born;
        for (int n = 1; n <= 2; ++n) {
            longterm::ExpertForecastStream s;
            s.expert = n;
            s.issue_time = t;
            for (int i = 0; i < 8; ++i) {
                s.forecasts.push_back(u(rng));
                s.confidences.push_back(0.5 + 0.5 * u(rng));
            }
            born.push_back(s);
        }
        agg.birth_experts(t, born);
        agg.forecast_horizon(t);
    }
    CHECK(steps == 1000);
}

TEST_CASE("ledger") {
    RegretLedger ledger(2, true);
    ledger.record_step(1, 0.5, 0.4);
    ledger.record_step(2, 0.25, 0.2);
    CHECK(ledger.cumulative_loss() == doctest::Approx(0.75));
    CHECK(ledger.cumulative_mixloss() == doctest::Approx(0.6));
    CHECK(ledger.steps().back().cumulative_loss == doctest::Approx(0.75));

    ledger.record_excess(2, 1, 1, 0.3);
    ledger.record_excess(3, 1, 1, -0.1);
    ledger.record_excess(3, 2, 2, -0.4);
    CHECK(ledger.cumulative_excess(1, 1) == doctest::Approx(0.2));
    CHECK(ledger.cumulative_excess_after_first(1, 1) == doctest::Approx(-0.1));
    CHECK(ledger.cumulative_excess(2, 5) == 0.0);
    CHECK(ledger.detail().size() == 3);

    const WorstExcess w = ledger.worst_excess(2);
    CHECK(w.value == doctest::Approx(0.2));
    CHECK(w.expert == 1);
    // Expert (2, 1) was never charged, so it sits at zero.
    const WorstExcess only_second = ledger.worst_excess(2, true);
    CHECK(only_second.value == doctest::Approx(0.0));

    int visited = 0;
    ledger.for_each_expert(1, [&](int, long tau, double) {
        CHECK(tau <= 1);
        ++visited;
    });
    CHECK(visited >= 1);
}
