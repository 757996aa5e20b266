#include "smoothagg/core/aggregation.hpp"

#include "smoothagg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace smoothagg::core {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Relative slack on the eta range so that eta = 1/(2B^2) computed by a caller
// with different rounding is still admitted.
constexpr double kEtaRangeRelTol = 1e-12;

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw DimensionError(std::string(what) + ": length mismatch (" + std::to_string(a) +
                             " vs " + std::to_string(b) + ")");
    }
}

// ln sum_i p_i exp(-eta (y - c_i)^2), skipping zero-weight experts.
double log_mixture(double y, std::span<const double> forecasts, std::span<const double> weights,
                   double eta) {
    std::vector<double> terms;
    terms.reserve(forecasts.size());
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        if (weights[i] > 0.0) {
            terms.push_back(std::log(weights[i]) - eta * square_loss(y, forecasts[i]));
        }
    }
    return log_sum_exp(terms);
}

}  // namespace

double vovk_eta_max(double bound) { return 1.0 / (2.0 * bound * bound); }
double mean_eta_max(double bound) { return 1.0 / (8.0 * bound * bound); }

LossSpec::LossSpec(double bound, double eta) : bound_(bound), eta_(eta) {
    if (!(bound > 0.0) || !std::isfinite(bound)) {
        throw ConfigError("outcome bound B must be positive and finite");
    }
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw ConfigError("learning rate eta must be positive and finite");
    }
}

bool LossSpec::contains(double value) const {
    return std::isfinite(value) && value >= -bound_ && value <= bound_;
}

const char* to_string(SubstitutionRule rule) {
    return rule == SubstitutionRule::Vovk ? "vovk" : "mean";
}

SubstitutionRule parse_substitution_rule(const std::string& name) {
    if (name == "vovk") return SubstitutionRule::Vovk;
    if (name == "mean") return SubstitutionRule::Mean;
    throw ConfigError("unknown substitution rule '" + name + "' (expected vovk or mean)");
}

void require_admissible(SubstitutionRule rule, const LossSpec& spec) {
    const double limit =
        rule == SubstitutionRule::Vovk ? vovk_eta_max(spec.bound()) : mean_eta_max(spec.bound());
    if (spec.eta() > limit * (1.0 + kEtaRangeRelTol)) {
        throw ConfigError(std::string("eta = ") + std::to_string(spec.eta()) +
                          " exceeds the admissible limit " + std::to_string(limit) + " for the " +
                          to_string(rule) + " substitution");
    }
}

void validate_weights(std::span<const double> weights) {
    if (weights.empty()) {
        throw DimensionError("weight vector is empty");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw DomainError("weights must be finite and non-negative");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > kWeightSumTolerance) {
        throw DomainError("weights must sum to 1 (got " + std::to_string(sum) + ")");
    }
}

double square_loss(double y, double gamma) {
    const double diff = y - gamma;
    return diff * diff;
}

double log_sum_exp(std::span<const double> values) {
    if (values.empty()) return kNegInf;
    const double top = *std::max_element(values.begin(), values.end());
    if (top == kNegInf) return kNegInf;
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - top);
    return top + std::log(acc);
}

double superprediction(double y, std::span<const double> forecasts, std::span<const double> weights,
                       const LossSpec& spec) {
    require_same_size(forecasts.size(), weights.size(), "superprediction");
    if (forecasts.empty()) throw DimensionError("superprediction: no experts");
    return -log_mixture(y, forecasts, weights, spec.eta()) / spec.eta();
}

double subst_vovk(std::span<const double> forecasts, std::span<const double> weights,
                  const LossSpec& spec) {
    require_same_size(forecasts.size(), weights.size(), "subst_vovk");
    require_admissible(SubstitutionRule::Vovk, spec);
    validate_weights(weights);
    const double b = spec.bound();
    const double eta = spec.eta();
    // (g(-B) - g(B)) / 4B = (1/(4 eta B)) [ln sum p e^{-eta(B-c)^2} - ln sum p e^{-eta(B+c)^2}]
    const double gamma =
        (log_mixture(b, forecasts, weights, eta) - log_mixture(-b, forecasts, weights, eta)) /
        (4.0 * eta * b);
    return std::clamp(gamma, -b, b);
}

double subst_mean(std::span<const double> forecasts, std::span<const double> weights) {
    require_same_size(forecasts.size(), weights.size(), "subst_mean");
    if (forecasts.empty()) throw DimensionError("subst_mean: no experts");
    double acc = 0.0;
    for (std::size_t i = 0; i < forecasts.size(); ++i) acc += forecasts[i] * weights[i];
    return acc;
}

double substitute(SubstitutionRule rule, std::span<const double> forecasts,
                  std::span<const double> weights, const LossSpec& spec) {
    if (rule == SubstitutionRule::Vovk) return subst_vovk(forecasts, weights, spec);
    return std::clamp(subst_mean(forecasts, weights), -spec.bound(), spec.bound());
}

WeightVector exp_weight_update(std::span<const double> weights, std::span<const double> losses,
                               double eta) {
    require_same_size(weights.size(), losses.size(), "exp_weight_update");
    double min_scaled = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!std::isfinite(losses[i])) throw DomainError("exp_weight_update: non-finite loss");
        if (weights[i] > 0.0) min_scaled = std::min(min_scaled, eta * losses[i]);
    }
    WeightVector updated(weights.size(), 0.0);
    if (!std::isfinite(min_scaled)) return updated;  // no support

    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0.0) {
            updated[i] = weights[i] * std::exp(min_scaled - eta * losses[i]);
            total += updated[i];
        }
    }
    for (double& w : updated) w /= total;
    return updated;
}

double relative_entropy(std::span<const double> q, std::span<const double> p) {
    require_same_size(q.size(), p.size(), "relative_entropy");
    double acc = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] <= 0.0) continue;
        if (p[i] <= 0.0) {
            throw DivergenceError("relative_entropy: q has mass where p vanishes (index " +
                                  std::to_string(i) + ")");
        }
        acc += q[i] * std::log(q[i] / p[i]);
    }
    return acc;
}

SubstitutionCheck verify_substitution(double gamma, std::span<const double> forecasts,
                                      std::span<const double> weights, const LossSpec& spec,
                                      std::size_t grid_points) {
    if (grid_points < 3) throw ConfigError("verify_substitution needs at least 3 grid points");
    require_same_size(forecasts.size(), weights.size(), "verify_substitution");
    const double b = spec.bound();
    SubstitutionCheck check;
    check.worst_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < grid_points; ++j) {
        const double y = -b + 2.0 * b * static_cast<double>(j) / static_cast<double>(grid_points - 1);
        const double gap = square_loss(y, gamma) - superprediction(y, forecasts, weights, spec);
        if (gap > check.worst_violation) {
            check.worst_violation = gap;
            check.worst_y = y;
        }
    }
    check.pass = check.worst_violation <= kSubstitutionSlack;
    return check;
}

}  // namespace smoothagg::core
