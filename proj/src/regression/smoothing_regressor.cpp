#include "smoothagg/regression/smoothing_regressor.hpp"

#include "smoothagg/errors.hpp"
#include "smoothagg/longterm/aggregator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace smoothagg::regression {

RegressionExpert::RegressionExpert(long birth_time, std::vector<double> coefficients)
    : birth_time_(birth_time), coefficients_(std::move(coefficients)) {}

double RegressionExpert::raw(std::span<const double> x) const {
    if (x.size() != coefficients_.size()) throw DomainError("signal dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += coefficients_[i] * x[i];
    return acc;
}

double RegressionExpert::predict(std::span<const double> x, double bound) const {
    return std::clamp(raw(x), -bound, bound);
}

RegressionExpert fit_window_expert(std::span<const Sample> recent, long birth_time,
                                   std::size_t window, double sigma, std::size_t dim) {
    const long t = birth_time - 1;
    if (t <= static_cast<long>(window)) return {birth_time, std::vector<double>(dim, 0.0)};
    if (recent.size() < window) throw StateError("fit_window_expert: fewer samples than the window");
    return {birth_time, ridge_fit(recent.last(window), sigma)};
}

SmoothingRegressor::SmoothingRegressor(RegressorConfig config) : config_(std::move(config)) {
    if (config_.dim == 0) throw ConfigError("signal dimension must be positive");
    if (config_.window == 0) throw ConfigError("window h must be positive");
    if (!(config_.sigma > 0.0)) throw ConfigError("ridge sigma must be positive");
    core::require_admissible(config_.rule, config_.spec);
    spawn(1);
}

void SmoothingRegressor::spawn(long birth_time) {
    std::vector<Sample> tail(recent_.begin(), recent_.end());
    experts_.push_back(
        fit_window_expert(tail, birth_time, config_.window, config_.sigma, config_.dim));
    const double grant = longterm::birth_grant(reservoir_, birth_time, 1);
    weights_.push_back(grant);
    reservoir_ -= grant;
}

double SmoothingRegressor::total_mass() const {
    double total = reservoir_ + dead_;
    for (double w : weights_) total += w;
    return total;
}

void SmoothingRegressor::check_signal(std::span<const double> x) const {
    if (x.size() != config_.dim) {
        throw DomainError("signal has dimension " + std::to_string(x.size()) + ", expected " +
                          std::to_string(config_.dim));
    }
}

double SmoothingRegressor::aggregate(std::span<const double> predictions) const {
    double alive = 0.0;
    for (double w : weights_) alive += w;
    std::vector<double> normalized(weights_.size());
    for (std::size_t i = 0; i < weights_.size(); ++i) normalized[i] = weights_[i] / alive;
    return core::substitute(config_.rule, predictions, normalized, config_.spec);
}

double SmoothingRegressor::predict(std::span<const double> x) const {
    check_signal(x);
    std::vector<double> predictions(experts_.size());
    for (std::size_t i = 0; i < experts_.size(); ++i) {
        predictions[i] = experts_[i].predict(x, config_.spec.bound());
    }
    return aggregate(predictions);
}

RegressionStep SmoothingRegressor::step(long t, std::span<const double> x, double y) {
    if (t != clock_ + 1) {
        throw StateError("step(" + std::to_string(t) + ") out of order; clock is " +
                         std::to_string(clock_));
    }
    check_signal(x);
    if (!config_.spec.contains(y)) {
        throw DomainError("outcome " + std::to_string(y) + " outside [-B, B]");
    }
    const double eta = config_.spec.eta();

    RegressionStep out;
    out.t = t;
    std::vector<double> predictions(experts_.size());
    out.birth_times.resize(experts_.size());
    out.expert_losses.resize(experts_.size());
    for (std::size_t i = 0; i < experts_.size(); ++i) {
        predictions[i] = experts_[i].predict(x, config_.spec.bound());
        out.birth_times[i] = experts_[i].birth_time();
        out.expert_losses[i] = core::square_loss(y, predictions[i]);
    }
    out.prediction = aggregate(predictions);
    out.algorithm_loss = core::square_loss(y, out.prediction);

    const double rest = reservoir_ + dead_;
    const auto upd =
        longterm::lazy_exp_update(weights_, out.expert_losses, rest, out.algorithm_loss, eta);
    out.mixloss = upd.mixloss;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (weights_[i] > 0.0 && upd.weights[i] > 0.0) {
            const double identity =
                out.expert_losses[i] + std::log(upd.weights[i] / weights_[i]) / eta;
            out.identity_residual = std::max(out.identity_residual, std::abs(upd.mixloss - identity));
        }
    }
    weights_ = upd.weights;
    const double scale = rest > 0.0 ? upd.rest_mass / rest : 0.0;
    reservoir_ *= scale;
    dead_ *= scale;

    if (config_.prune_below > 0.0) {
        for (std::size_t i = 0; i < weights_.size();) {
            if (weights_[i] < config_.prune_below && experts_.size() > 1) {
                dead_ += weights_[i];
                weights_.erase(weights_.begin() + static_cast<std::ptrdiff_t>(i));
                experts_.erase(experts_.begin() + static_cast<std::ptrdiff_t>(i));
            } else {
                ++i;
            }
        }
    }

    recent_.push_back({std::vector<double>(x.begin(), x.end()), y});
    while (recent_.size() > config_.window) recent_.pop_front();
    clock_ = t;
    spawn(t + 1);
    return out;
}

}  // namespace smoothagg::regression
