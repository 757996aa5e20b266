#include "smoothagg/regret/analysis.hpp"

#include "smoothagg/core/aggregation.hpp"
#include "smoothagg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace smoothagg::regret {

double discounted_excess(std::span<const double> h_coords, std::span<const double> l_coords,
                         std::span<const double> p_coords) {
    if (h_coords.size() != l_coords.size() || h_coords.size() != p_coords.size()) {
        throw DimensionError("discounted_excess: coordinate vectors differ in length");
    }
    if (h_coords.empty()) throw DimensionError("discounted_excess: empty horizon");
    double acc = 0.0;
    for (std::size_t s = 0; s < h_coords.size(); ++s) acc += p_coords[s] * (h_coords[s] - l_coords[s]);
    return acc / static_cast<double>(h_coords.size());
}

double delayed_excess_bound(int experts, long steps, int horizon, double eta) {
    if (steps <= horizon) {
        throw DomainError("delayed_excess_bound needs T >= d + 1 (T = " + std::to_string(steps) +
                          ", d = " + std::to_string(horizon) + ")");
    }
    return horizon / eta *
           (std::log(static_cast<double>(experts)) +
            2.0 * std::log(static_cast<double>(steps - horizon + 1)));
}

double smoothing_regret_bound(double steps, double eta) { return 2.0 / eta * std::log(steps); }

double mixloss(std::span<const double> weights, std::span<const double> losses, double eta) {
    if (weights.size() != losses.size()) throw DimensionError("mixloss: length mismatch");
    std::vector<double> terms;
    terms.reserve(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0.0) terms.push_back(std::log(weights[i]) - eta * losses[i]);
    }
    return -core::log_sum_exp(terms) / eta;
}

double entropy_identity_residual(std::span<const double> q, std::span<const double> w,
                      std::span<const double> losses, double eta) {
    if (q.size() != w.size() || w.size() != losses.size()) {
        throw DimensionError("entropy_identity_residual: length mismatch");
    }
    const std::vector<double> updated = core::exp_weight_update(w, losses, eta);
    double ql = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) ql += q[i] * losses[i];
    const double m = mixloss(w, losses, eta);
    const double divergence_gap =
        core::relative_entropy(q, w) - core::relative_entropy(q, updated);
    return std::abs(m - ql - divergence_gap / eta);
}

DelayedTrace run_delayed_weights(std::span<const double> prior,
                                 const std::vector<std::vector<double>>& charged_losses,
                                 int horizon, double eta) {
    if (horizon < 1) throw ConfigError("run_delayed_weights: horizon must be positive");
    if (prior.empty()) throw DimensionError("run_delayed_weights: empty prior");
    DelayedTrace trace;
    trace.horizon = horizon;
    trace.eta = eta;
    const std::size_t d = static_cast<std::size_t>(horizon);
    const std::size_t steps = d + charged_losses.size();
    const std::vector<double> start(prior.begin(), prior.end());
    for (std::size_t t = 0; t < steps; ++t) {
        if (t < d) {
            trace.losses.emplace_back(prior.size(), 0.0);
            trace.weights.push_back(start);
            trace.updated.push_back(start);
            trace.mixlosses.push_back(0.0);
            continue;
        }
        const auto& row = charged_losses[t - d];
        if (row.size() != prior.size()) throw DimensionError("run_delayed_weights: loss row length");
        trace.losses.push_back(row);
        trace.weights.push_back(trace.updated[t - d]);
        trace.mixlosses.push_back(mixloss(trace.weights[t], row, eta));
        trace.updated.push_back(core::exp_weight_update(trace.weights[t], row, eta));
    }
    return trace;
}

DelayedEntropyCheck verify_delayed_entropy_bound(const DelayedTrace& trace, std::span<const double> q) {
    const std::size_t d = static_cast<std::size_t>(trace.horizon);
    const std::size_t steps = trace.weights.size();
    const double eta = trace.eta;
    DelayedEntropyCheck out;

    for (std::size_t t = d; t < steps; ++t) {
        double ql = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) ql += q[i] * trace.losses[t][i];
        out.lhs += trace.mixlosses[t] - ql;
    }

    double head = 0.0;
    double tail = 0.0;
    for (std::size_t t = 0; t < std::min(d, steps); ++t) {
        head += core::relative_entropy(q, trace.updated[t]);
    }
    for (std::size_t t = steps > d ? steps - d : 0; t < steps; ++t) {
        tail += core::relative_entropy(q, trace.updated[t]);
    }
    out.telescoped = (head - tail) / eta;
    out.telescoping_error = std::abs(out.lhs - out.telescoped);

    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < std::min(d, steps); ++t) {
        for (std::size_t i = 0; i < q.size(); ++i) {
            if (q[i] > 0.0) worst = std::max(worst, -std::log(trace.updated[t][i]));
        }
    }
    out.rhs = static_cast<double>(d) / eta * worst;
    out.pass = out.lhs <= out.rhs + kBoundSlack;
    return out;
}

HolderCheck verify_holder_step(std::span<const double> alg_losses,
                               const std::vector<std::vector<double>>& expert_losses,
                               std::span<const double> weights, double eta) {
    if (expert_losses.size() != weights.size()) throw DimensionError("verify_holder_step: weights");
    const std::size_t d = alg_losses.size();
    if (d == 0) throw DimensionError("verify_holder_step: empty horizon");
    HolderCheck out;
    double mean_h = 0.0;
    for (double h : alg_losses) mean_h += h;
    out.lhs = std::exp(-eta * mean_h / static_cast<double>(d));

    std::vector<double> coord(d, 0.0);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (expert_losses[i].size() != d) throw DimensionError("verify_holder_step: loss row length");
        double mean_l = 0.0;
        for (std::size_t s = 0; s < d; ++s) {
            coord[s] += weights[i] * std::exp(-eta * expert_losses[i][s]);
            mean_l += expert_losses[i][s];
        }
        out.rhs += weights[i] * std::exp(-eta * mean_l / static_cast<double>(d));
    }
    out.coordinate_product = 1.0;
    for (double c : coord) out.coordinate_product *= c;
    out.pass = out.lhs >= out.rhs - kBoundSlack;
    return out;
}

}  // namespace smoothagg::regret
