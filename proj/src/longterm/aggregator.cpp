#include "smoothagg/longterm/aggregator.hpp"

#include "smoothagg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace smoothagg::longterm {

using core::square_loss;

double prior_weight(long tau) {
    const double t = static_cast<double>(tau);
    return 1.0 / (t * (t + 1.0));
}

double unborn_prior_mass(long t) { return 1.0 / (static_cast<double>(t) + 1.0); }

double birth_grant(double reservoir, long tau, int experts) {
    // reservoir * (nu(tau) / N) / (sum_{tau' >= tau} nu(tau')), the latter being 1/tau
    return reservoir * (prior_weight(tau) / experts) / unborn_prior_mass(tau - 1);
}

LazyUpdate lazy_exp_update(std::span<const double> weights, std::span<const double> losses,
                           double rest_mass, double rest_loss, double eta) {
    if (weights.size() != losses.size()) {
        throw DimensionError("lazy_exp_update: weights and losses differ in length");
    }
    double shift = rest_loss;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0.0) shift = std::min(shift, losses[i]);
    }
    LazyUpdate out;
    out.weights.resize(weights.size());
    const double rest_factor = std::exp(-eta * (rest_loss - shift));
    double divisor = rest_mass * rest_factor;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        out.weights[i] = weights[i] > 0.0 ? weights[i] * std::exp(-eta * (losses[i] - shift)) : 0.0;
        divisor += out.weights[i];
    }
    for (double& w : out.weights) w /= divisor;
    out.rest_mass = rest_mass * rest_factor / divisor;
    out.mixloss = shift - std::log(divisor) / eta;
    return out;
}

EffectiveWeights normalize_effective(std::span<const double> weights,
                                     std::span<const double> confidences) {
    if (weights.size() != confidences.size()) {
        throw DimensionError("normalize_effective: weights and confidences differ in length");
    }
    EffectiveWeights out;
    out.weights.resize(weights.size(), 0.0);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        out.weights[i] = weights[i] * confidences[i];
        out.denominator += out.weights[i];
    }
    out.degenerate = !(out.denominator > 0.0);
    if (!out.degenerate) {
        for (double& w : out.weights) w /= out.denominator;
    }
    return out;
}

LongTermAggregator::LongTermAggregator(AggregatorConfig config) : config_(std::move(config)) {
    if (config_.experts < 1) throw ConfigError("number of experts N must be positive");
    if (config_.horizon < 1) throw ConfigError("horizon d must be positive");
    if (config_.grid_points < 3) throw ConfigError("grid_points must be at least 3");
    core::require_admissible(config_.rule, config_.spec);
    const auto chains = static_cast<std::size_t>(config_.horizon);
    reservoir_.assign(chains, 1.0);
    dead_.assign(chains, 0.0);
    born_flags_.assign(static_cast<std::size_t>(config_.experts), false);
}

std::size_t LongTermAggregator::chain_for(long t) const {
    return static_cast<std::size_t>((t - 1) % config_.horizon);
}

double LongTermAggregator::total_mass(std::size_t chain) const {
    double total = reservoir_.at(chain) + dead_.at(chain);
    for (const auto& e : alive_) total += e.chain_weights[chain];
    return total;
}

const LongTermAggregator::Issued* LongTermAggregator::issued_at(long t) const {
    for (const auto& entry : issued_) {
        if (entry.t == t) return &entry;
    }
    return nullptr;
}

const double* LongTermAggregator::latest_forecast_for(long when) const {
    for (auto it = issued_.rbegin(); it != issued_.rend(); ++it) {
        const long s = when - it->t;
        if (s >= 1 && s <= config_.horizon) return &it->gamma[static_cast<std::size_t>(s - 1)];
    }
    return nullptr;
}

void LongTermAggregator::fold_expired(long t) {
    const long d = config_.horizon;
    auto expired = [&](const AliveExpert& e) {
        // The segment charged at t starts at offset t - d - tau + 1; nothing later has confidence.
        return t - d - e.issue_time() + 1 > e.last_active_offset;
    };
    for (const auto& e : alive_) {
        if (!expired(e)) continue;
        for (std::size_t c = 0; c < dead_.size(); ++c) dead_[c] += e.chain_weights[c];
    }
    std::erase_if(alive_, expired);
}

UpdateReport LongTermAggregator::observe_and_update(long t, std::span<const double> outcomes) {
    if (phase_ != Phase::Forecasted || t != clock_ + 1) {
        throw StateError("observe_and_update(" + std::to_string(t) + ") out of order; clock is " +
                         std::to_string(clock_));
    }
    const long d = config_.horizon;
    const double eta = config_.spec.eta();
    UpdateReport report;
    report.t = t;

    if (t > d) {
        if (outcomes.size() != static_cast<std::size_t>(d)) {
            throw DimensionError("observe_and_update expects d = " + std::to_string(d) + " outcomes");
        }
        for (double y : outcomes) {
            if (!config_.spec.contains(y)) {
                throw DomainError("outcome " + std::to_string(y) + " outside [-B, B]");
            }
        }
        const Issued* past = issued_at(t - d);
        if (past == nullptr) {
            throw StateError("forecast issued at t - d = " + std::to_string(t - d) + " is missing");
        }

        if (config_.fold_expired) {
            const std::size_t before = alive_.size();
            fold_expired(t);
            report.folded = before - alive_.size();
        }

        const auto ud = static_cast<std::size_t>(d);
        report.charged = true;
        report.coord_losses.resize(ud);
        double h = 0.0;
        for (std::size_t s = 0; s < ud; ++s) {
            report.coord_losses[s] = square_loss(outcomes[s], past->gamma[s]);
            h += report.coord_losses[s];
        }
        h /= static_cast<double>(d);
        report.algorithm_loss = h;

        const std::size_t chain = chain_for(t);
        const double rest = reservoir_[chain] + dead_[chain];
        std::vector<double> old_weights(alive_.size());
        std::vector<double> hat_losses(alive_.size(), h);
        // Per-coordinate mixtures, seeded with everything charged h_{t,s}.
        std::vector<double> coord_mix(ud);
        for (std::size_t s = 0; s < ud; ++s) {
            coord_mix[s] = rest * std::exp(-eta * report.coord_losses[s]);
        }

        for (std::size_t i = 0; i < alive_.size(); ++i) {
            const AliveExpert& e = alive_[i];
            const double w = e.chain_weights[chain];
            old_weights[i] = w;
            if (e.issue_time() > t - d) {
                for (std::size_t s = 0; s < ud; ++s) {
                    coord_mix[s] += w * std::exp(-eta * report.coord_losses[s]);
                }
                continue;
            }
            double hat = 0.0;
            double excess = 0.0;
            for (std::size_t s = 0; s < ud; ++s) {
                const long offset = t - d - e.issue_time() + static_cast<long>(s) + 1;
                const double p = e.stream.confidence_at(offset);
                const double hs = report.coord_losses[s];
                double hat_s = hs;
                if (p > 0.0) {
                    const double ls = square_loss(outcomes[s], e.stream.forecast_at(offset));
                    hat_s = p * ls + (1.0 - p) * hs;
                    excess += p * (hs - ls);
                }
                hat += hat_s;
                coord_mix[s] += w * std::exp(-eta * hat_s);
            }
            hat /= static_cast<double>(d);
            excess /= static_cast<double>(d);
            hat_losses[i] = hat;
            report.excess.push_back({e.expert(), e.issue_time(), excess, hat});
        }

        const LazyUpdate upd = lazy_exp_update(old_weights, hat_losses, rest, h, eta);
        report.mixloss = upd.mixloss;

        report.holder_lhs = std::exp(-eta * h);
        report.holder_rhs = std::exp(-eta * upd.mixloss);
        double product = 1.0;
        report.worst_coordinate_gap = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < ud; ++s) {
            product *= coord_mix[s];
            report.worst_coordinate_gap =
                std::min(report.worst_coordinate_gap,
                         std::exp(-eta * report.coord_losses[s]) - coord_mix[s]);
        }
        report.holder_product_gap = product - std::pow(report.holder_rhs, static_cast<double>(d));

        for (std::size_t i = 0; i < alive_.size(); ++i) {
            if (old_weights[i] > 0.0 && upd.weights[i] > 0.0) {
                const double identity = hat_losses[i] + std::log(upd.weights[i] / old_weights[i]) / eta;
                report.identity_residual =
                    std::max(report.identity_residual, std::abs(upd.mixloss - identity));
            }
            alive_[i].chain_weights[chain] = upd.weights[i];
        }
        // The lump keeps its split: both parts were charged the same loss.
        const double scale = rest > 0.0 ? upd.rest_mass / rest : 0.0;
        reservoir_[chain] *= scale;
        dead_[chain] *= scale;
    }

    clock_ = t;
    phase_ = Phase::Updated;
    born_this_step_ = 0;
    std::fill(born_flags_.begin(), born_flags_.end(), false);
    return report;
}

void LongTermAggregator::birth_experts(long t, std::vector<ExpertForecastStream> streams) {
    if (phase_ != Phase::Updated || t != clock_) {
        throw StateError("birth_experts(" + std::to_string(t) + ") must follow observe_and_update(" +
                         std::to_string(t) + ")");
    }
    // Validate everything before touching the state.
    std::vector<bool> seen = born_flags_;
    for (const auto& s : streams) {
        if (s.issue_time != t) {
            throw StateError("stream issue time " + std::to_string(s.issue_time) +
                             " does not match birth time " + std::to_string(t));
        }
        if (s.expert < 1 || s.expert > config_.experts) {
            throw ConfigError("expert id " + std::to_string(s.expert) + " outside [1, N]");
        }
        auto flag = seen[static_cast<std::size_t>(s.expert - 1)];
        if (flag) {
            throw StateError("duplicate birth of expert (" + std::to_string(s.expert) + ", " +
                             std::to_string(t) + ")");
        }
        seen[static_cast<std::size_t>(s.expert - 1)] = true;
        if (s.confidences.size() != s.forecasts.size()) {
            throw DimensionError("stream forecasts and confidences differ in length");
        }
        for (double c : s.forecasts) {
            if (!config_.spec.contains(c)) {
                throw DomainError("expert forecast " + std::to_string(c) + " outside [-B, B]");
            }
        }
        for (double p : s.confidences) {
            if (!(p >= 0.0 && p <= 1.0)) throw DomainError("confidence outside [0, 1]");
        }
    }

    for (auto& s : streams) {
        AliveExpert e;
        e.last_active_offset = s.last_active_offset();
        e.stream = std::move(s);
        e.chain_weights.resize(reservoir_.size());
        for (std::size_t c = 0; c < reservoir_.size(); ++c) {
            e.chain_weights[c] = birth_grant(reservoir_[c], t, config_.experts);
        }
        alive_.push_back(std::move(e));
        ++born_this_step_;
    }
    born_flags_ = std::move(seen);
    // Each newborn took reservoir / (N (t + 1)); take the whole share once all N are born so the
    // grants above all see the same reservoir.
    if (born_this_step_ == config_.experts) {
        for (double& r : reservoir_) r -= r / (static_cast<double>(t) + 1.0);
    }
}

EffectiveWeights LongTermAggregator::effective_weights(int s) const {
    if (s < 1 || s > config_.horizon) throw DomainError("coordinate s outside [1, d]");
    const std::size_t chain = chain_for(clock_);
    std::vector<double> w(alive_.size());
    std::vector<double> p(alive_.size());
    for (std::size_t i = 0; i < alive_.size(); ++i) {
        w[i] = alive_[i].chain_weights[chain];
        p[i] = alive_[i].stream.confidence_at(clock_ - alive_[i].issue_time() + s);
    }
    return normalize_effective(w, p);
}

ForecastReport LongTermAggregator::forecast_horizon(long t) {
    if (phase_ != Phase::Updated || t != clock_) {
        throw StateError("forecast_horizon(" + std::to_string(t) + ") out of order");
    }
    if (born_this_step_ != config_.experts) {
        throw StateError("forecast_horizon(" + std::to_string(t) + ") before all N experts were born");
    }
    const long d = config_.horizon;
    ForecastReport report;
    report.t = t;
    report.gamma.resize(static_cast<std::size_t>(d));
    report.degenerate.resize(static_cast<std::size_t>(d));
    for (int s = 1; s <= d; ++s) {
        const auto us = static_cast<std::size_t>(s - 1);
        const EffectiveWeights eff = effective_weights(s);
        report.degenerate[us] = eff.degenerate;
        if (eff.degenerate) {
            const double* prior = latest_forecast_for(t + s);
            report.gamma[us] = prior != nullptr ? *prior : 0.0;
            continue;
        }
        std::vector<double> c;
        std::vector<double> w;
        for (std::size_t i = 0; i < alive_.size(); ++i) {
            if (eff.weights[i] <= 0.0) continue;
            c.push_back(alive_[i].stream.forecast_at(t - alive_[i].issue_time() + s));
            w.push_back(eff.weights[i]);
        }
        // Renormalize after dropping zeros so the sum check holds to rounding.
        double total = 0.0;
        for (double x : w) total += x;
        for (double& x : w) x /= total;
        report.gamma[us] = core::substitute(config_.rule, c, w, config_.spec);
    }

    if (config_.verify_each_step) report.mixability = check_mixability(report.gamma);

    issued_.push_back({t, report.gamma});
    while (issued_.size() > static_cast<std::size_t>(d)) issued_.pop_front();
    phase_ = Phase::Forecasted;
    return report;
}

MixabilityReport LongTermAggregator::check_mixability(std::span<const double> gamma) const {
    if (gamma.size() != static_cast<std::size_t>(config_.horizon)) {
        throw DimensionError("check_mixability expects d coordinates");
    }
    MixabilityReport report;
    report.worst_violation = -std::numeric_limits<double>::infinity();
    for (int s = 1; s <= config_.horizon; ++s) {
        CoordinateCheck cc;
        const EffectiveWeights eff = effective_weights(s);
        cc.degenerate = eff.degenerate;
        if (!eff.degenerate) {
            std::vector<double> c;
            std::vector<double> w;
            for (std::size_t i = 0; i < alive_.size(); ++i) {
                if (eff.weights[i] <= 0.0) continue;
                c.push_back(alive_[i].stream.forecast_at(clock_ - alive_[i].issue_time() + s));
                w.push_back(eff.weights[i]);
            }
            cc.check = core::verify_substitution(gamma[static_cast<std::size_t>(s - 1)], c, w,
                                                 config_.spec, config_.grid_points);
            report.pass = report.pass && cc.check.pass;
            report.worst_violation = std::max(report.worst_violation, cc.check.worst_violation);
        }
        report.coordinates.push_back(cc);
    }
    if (!std::isfinite(report.worst_violation)) report.worst_violation = 0.0;  // all degenerate
    return report;
}

MixabilityReport LongTermAggregator::per_step_mixability_check() const {
    if (issued_.empty() || issued_.back().t != clock_ || phase_ != Phase::Forecasted) {
        throw StateError("no forecast issued at the current clock");
    }
    return check_mixability(issued_.back().gamma);
}

}  // namespace smoothagg::longterm
