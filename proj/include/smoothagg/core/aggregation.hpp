#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace smoothagg::core {

/// Learning rate above which the Vovk substitution stops guaranteeing mixability: 1/(2B^2).
[[nodiscard]] double vovk_eta_max(double bound);
/// Exp-concavity range of the square loss, used by the mean substitution: 1/(8B^2).
[[nodiscard]] double mean_eta_max(double bound);

/**
 * @brief Square loss on outcomes and forecasts bounded by B, with learning rate eta.
 *
 * The constructor only checks B > 0 and eta > 0; the admissible range of eta
 * depends on the substitution rule and is checked by require_admissible().
 */
class LossSpec {
public:
    LossSpec(double bound, double eta);

    [[nodiscard]] double bound() const { return bound_; }
    [[nodiscard]] double eta() const { return eta_; }

    [[nodiscard]] bool contains(double value) const;

private:
    double bound_;
    double eta_;
};

enum class SubstitutionRule { Vovk, Mean };

[[nodiscard]] const char* to_string(SubstitutionRule rule);
/// Parses "vovk" or "mean"; throws ConfigError otherwise.
[[nodiscard]] SubstitutionRule parse_substitution_rule(const std::string& name);

/// Throws ConfigError when eta exceeds the range in which `rule` satisfies the mixability inequality.
void require_admissible(SubstitutionRule rule, const LossSpec& spec);

using WeightVector = std::vector<double>;
using ForecastVector = std::vector<double>;

/// Tolerance on |sum(w) - 1| for a valid weight vector.
inline constexpr double kWeightSumTolerance = 1e-12;

/// Throws DimensionError / DomainError unless `weights` is a probability vector.
void validate_weights(std::span<const double> weights);

[[nodiscard]] double square_loss(double y, double gamma);

/// ln(sum_i exp(v_i)); -inf for an empty range or all -inf entries.
[[nodiscard]] double log_sum_exp(std::span<const double> values);

/// g(y) = -(1/eta) ln sum_i p_i exp(-eta (y - c_i)^2).
[[nodiscard]] double superprediction(double y, std::span<const double> forecasts,
                                     std::span<const double> weights, const LossSpec& spec);

/**
 * @brief Vovk's substitution for the square loss, gamma = (g(-B) - g(B)) / (4B).
 *
 * Evaluated as a difference of two log-sum-exp reductions and clamped to
 * [-B, B]. Requires eta <= 1/(2B^2).
 */
[[nodiscard]] double subst_vovk(std::span<const double> forecasts, std::span<const double> weights,
                                const LossSpec& spec);

/// Weighted mean of the forecasts.
[[nodiscard]] double subst_mean(std::span<const double> forecasts, std::span<const double> weights);

[[nodiscard]] double substitute(SubstitutionRule rule, std::span<const double> forecasts,
                                std::span<const double> weights, const LossSpec& spec);

/// w_i exp(-eta l_i), renormalized. The minimum eta*l_i over supported entries is factored out first.
[[nodiscard]] WeightVector exp_weight_update(std::span<const double> weights,
                                             std::span<const double> losses, double eta);

/// D(q || p) with 0 ln 0 = 0. Throws DivergenceError if q_i > 0 and p_i = 0.
[[nodiscard]] double relative_entropy(std::span<const double> q, std::span<const double> p);

struct SubstitutionCheck {
    bool pass = true;
    double worst_violation = 0.0;  ///< max over the grid of loss(y, gamma) - g(y)
    double worst_y = 0.0;
};

inline constexpr double kSubstitutionSlack = 1e-9;

/// Checks loss(y, gamma) <= g(y) + 1e-9 on `grid_points` equally spaced outcomes in [-B, B].
[[nodiscard]] SubstitutionCheck verify_substitution(double gamma, std::span<const double> forecasts,
                                                    std::span<const double> weights,
                                                    const LossSpec& spec, std::size_t grid_points);

}  // namespace smoothagg::core
