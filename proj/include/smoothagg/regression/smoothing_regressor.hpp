#pragma once

#include "smoothagg/core/aggregation.hpp"
#include "smoothagg/regression/ridge.hpp"

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

namespace smoothagg::regression {

/// Linear prediction function frozen at its birth time.
class RegressionExpert {
public:
    RegressionExpert(long birth_time, std::vector<double> coefficients);

    [[nodiscard]] long birth_time() const { return birth_time_; }
    [[nodiscard]] const std::vector<double>& coefficients() const { return coefficients_; }

    [[nodiscard]] double raw(std::span<const double> x) const;
    /// Prediction clamped to [-bound, bound].
    [[nodiscard]] double predict(std::span<const double> x, double bound) const;

private:
    long birth_time_;
    std::vector<double> coefficients_;
};

/**
 * Expert born at `birth_time` = t + 1 from the samples seen up to t. `recent`
 * holds the latest samples, newest last. For t > window the expert is the ridge
 * fit on the last `window` samples, otherwise the zero function.
 */
[[nodiscard]] RegressionExpert fit_window_expert(std::span<const Sample> recent, long birth_time,
                                                 std::size_t window, double sigma, std::size_t dim);

struct RegressorConfig {
    std::size_t dim = 20;
    std::size_t window = 40;
    double sigma = 1.0;
    core::LossSpec spec{1.0, 0.5};
    core::SubstitutionRule rule = core::SubstitutionRule::Vovk;
    /// Experts whose weight falls below this move to the dead mass (0 disables).
    double prune_below = 0.0;
};

struct RegressionStep {
    long t = 0;
    double prediction = 0.0;      ///< F_t(x_t)
    double algorithm_loss = 0.0;  ///< h_t
    std::vector<long> birth_times;
    std::vector<double> expert_losses;  ///< aligned with birth_times
    double mixloss = 0.0;
    double identity_residual = 0.0;
};

/**
 * @brief Online aggregation of frozen regression functions, one born per step.
 *
 * Weights use the same prior and lazy reservoir as the long-term aggregator
 * with d = 1. Expert predictions are clamped to [-B, B] before substitution.
 */
class SmoothingRegressor {
public:
    explicit SmoothingRegressor(RegressorConfig config);

    /// F_{t+1}(x) for the current clock t.
    [[nodiscard]] double predict(std::span<const double> x) const;

    /// Observes (x_t, y_t), charges losses, updates weights and spawns expert t + 1.
    RegressionStep step(long t, std::span<const double> x, double y);

    [[nodiscard]] const RegressorConfig& config() const { return config_; }
    [[nodiscard]] long clock() const { return clock_; }
    [[nodiscard]] const std::vector<RegressionExpert>& experts() const { return experts_; }
    [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
    [[nodiscard]] double reservoir_mass() const { return reservoir_; }
    [[nodiscard]] double dead_mass() const { return dead_; }
    [[nodiscard]] double total_mass() const;

private:
    void spawn(long birth_time);
    void check_signal(std::span<const double> x) const;
    [[nodiscard]] double aggregate(std::span<const double> predictions) const;

    RegressorConfig config_;
    long clock_ = 0;
    std::vector<RegressionExpert> experts_;
    std::vector<double> weights_;
    double reservoir_ = 1.0;
    double dead_ = 0.0;
    std::deque<Sample> recent_;
};

}  // namespace smoothagg::regression
