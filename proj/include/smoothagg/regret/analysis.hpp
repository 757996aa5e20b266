#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace smoothagg::regret {

/// Absolute slack used in every bound comparison.
inline constexpr double kBoundSlack = 1e-9;

/// (1/d) sum_s p_s (h_s - l_s).
[[nodiscard]] double discounted_excess(std::span<const double> h_coords,
                                       std::span<const double> l_coords,
                                       std::span<const double> p_coords);

/// (d/eta)(ln N + 2 ln(T - d + 1)); throws DomainError for T <= d.
[[nodiscard]] double delayed_excess_bound(int experts, long steps, int horizon, double eta);

/// (2/eta) ln T. T is real-valued so the bound curve can be evaluated anywhere.
[[nodiscard]] double smoothing_regret_bound(double steps, double eta);

/// -(1/eta) ln sum_i w_i e^{-eta l_i}.
[[nodiscard]] double mixloss(std::span<const double> weights, std::span<const double> losses,
                             double eta);

/// |m - q.l - (1/eta)(D(q||w) - D(q||w_updated))|.
[[nodiscard]] double entropy_identity_residual(std::span<const double> q, std::span<const double> w,
                                    std::span<const double> losses, double eta);

/**
 * @brief Exponential weights run on the d-delayed schedule w_{t+d} = update(w_t).
 *
 * Steps t = 1..d carry zero losses, so w_t = w_updated_t = prior for t <= d.
 * Index 0 of every vector is step 1.
 */
struct DelayedTrace {
    int horizon = 1;
    double eta = 1.0;
    std::vector<std::vector<double>> losses;   ///< l_t, zero rows for t <= d
    std::vector<std::vector<double>> weights;  ///< w_t
    std::vector<std::vector<double>> updated;  ///< w^mu_t
    std::vector<double> mixlosses;             ///< m_t, 0 for t <= d
};

/// Builds a trace from the prior and the losses of steps d+1..T (rows of `charged_losses`).
[[nodiscard]] DelayedTrace run_delayed_weights(std::span<const double> prior,
                                               const std::vector<std::vector<double>>& charged_losses,
                                               int horizon, double eta);

struct DelayedEntropyCheck {
    double lhs = 0.0;         ///< sum_t m_t - sum_t q.l_t
    double telescoped = 0.0;  ///< (1/eta) sum_{t<=d} D(q||w^mu_t) - tail terms at T
    double rhs = 0.0;         ///< (d/eta) max_{i, t<=d} ln(1/w^mu_{i,t})
    double telescoping_error = 0.0;
    bool pass = false;
};

/**
 * Checks sum m_t - sum q.l_t <= (d/eta) max ln(1/w^mu_{i,t}) + slack, the max
 * running over i in the support of q (at least as tight as over all i). Also
 * reports how far the left side is from its telescoped relative-entropy form.
 */
[[nodiscard]] DelayedEntropyCheck verify_delayed_entropy_bound(const DelayedTrace& trace, std::span<const double> q);

struct HolderCheck {
    double lhs = 0.0;                 ///< e^{-eta mean_s h_s}
    double rhs = 0.0;                 ///< sum_i w_i e^{-eta mean_s l_{i,s}}
    double coordinate_product = 0.0;  ///< prod_s sum_i w_i e^{-eta l_{i,s}}
    bool pass = false;
};

/**
 * Chains the per-coordinate inequalities e^{-eta h_s} >= sum_i w_i e^{-eta l_{i,s}}
 * into the averaged one via Hoelder. `expert_losses` has one row of d losses per expert.
 */
[[nodiscard]] HolderCheck verify_holder_step(std::span<const double> alg_losses,
                                             const std::vector<std::vector<double>>& expert_losses,
                                             std::span<const double> weights, double eta);

}  // namespace smoothagg::regret
