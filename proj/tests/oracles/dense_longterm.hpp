#pragma once

// Full-enumeration reference for the delayed aggregator: every auxiliary expert
// (n, tau) with tau <= T gets an explicit weight from step 1 on, plus a single
// lump for all tau > T. No reservoir, no folding.

#include "smoothagg/core/aggregation.hpp"
#include "smoothagg/longterm/expert_stream.hpp"

#include <cmath>
#include <map>
#include <vector>

namespace oracle {

using smoothagg::core::LossSpec;
using smoothagg::core::SubstitutionRule;
using smoothagg::longterm::ExpertForecastStream;

class DenseLongTerm {
public:
    DenseLongTerm(int experts, int horizon, long steps, LossSpec spec, SubstitutionRule rule)
        : n_(experts), d_(horizon), T_(steps), spec_(spec), rule_(rule) {
        const std::size_t m = static_cast<std::size_t>(n_) * static_cast<std::size_t>(T_);
        std::vector<double> prior(m);
        for (long tau = 1; tau <= T_; ++tau) {
            for (int n = 1; n <= n_; ++n) {
                prior[idx(n, tau)] = 1.0 / (static_cast<double>(tau) * (tau + 1.0)) / n_;
            }
        }
        w_.assign(static_cast<std::size_t>(d_), prior);
        tail_.assign(static_cast<std::size_t>(d_), 1.0 / (static_cast<double>(T_) + 1.0));
        streams_.resize(m);
    }

    [[nodiscard]] std::size_t idx(int n, long tau) const {
        return static_cast<std::size_t>(tau - 1) * static_cast<std::size_t>(n_) +
               static_cast<std::size_t>(n - 1);
    }
    [[nodiscard]] std::size_t chain(long t) const { return static_cast<std::size_t>((t - 1) % d_); }
    [[nodiscard]] double weight(std::size_t c, int n, long tau) const { return w_[c][idx(n, tau)]; }
    [[nodiscard]] double tail(std::size_t c) const { return tail_[c]; }

    /// Sum of weights for experts with tau > t, plus the tail.
    [[nodiscard]] double unborn_mass(std::size_t c, long t) const {
        double total = tail_[c];
        for (long tau = t + 1; tau <= T_; ++tau) {
            for (int n = 1; n <= n_; ++n) total += w_[c][idx(n, tau)];
        }
        return total;
    }

    /// One full step: update with y_{t-d+1..t}, register the streams born at t, forecast.
    std::vector<double> step(long t, const std::vector<double>& outcomes,
                             const std::vector<ExpertForecastStream>& born) {
        const double eta = spec_.eta();
        if (t > d_) {
            const std::vector<double>& past = issued_.at(t - d_);
            std::vector<double> hs(static_cast<std::size_t>(d_));
            double h = 0.0;
            for (int s = 0; s < d_; ++s) {
                hs[s] = (outcomes[s] - past[s]) * (outcomes[s] - past[s]);
                h += hs[s];
            }
            h /= d_;
            auto& w = w_[chain(t)];
            double total = tail_[chain(t)] * std::exp(-eta * h);
            for (long tau = 1; tau <= T_; ++tau) {
                for (int n = 1; n <= n_; ++n) {
                    double loss = h;
                    if (tau <= t - d_) {
                        const auto& st = streams_[idx(n, tau)];
                        loss = 0.0;
                        for (int s = 0; s < d_; ++s) {
                            const long offset = t - d_ - tau + s + 1;
                            const double p = st.confidence_at(offset);
                            const double c = st.forecast_at(offset);
                            loss += p * (outcomes[s] - c) * (outcomes[s] - c) + (1.0 - p) * hs[s];
                        }
                        loss /= d_;
                    }
                    w[idx(n, tau)] *= std::exp(-eta * loss);
                    total += w[idx(n, tau)];
                }
            }
            for (double& x : w) x /= total;
            tail_[chain(t)] = tail_[chain(t)] * std::exp(-eta * h) / total;
        }
        for (const auto& s : born) streams_[idx(s.expert, s.issue_time)] = s;

        std::vector<double> gamma(static_cast<std::size_t>(d_));
        const auto& w = w_[chain(t)];
        for (int s = 1; s <= d_; ++s) {
            std::vector<double> c;
            std::vector<double> pw;
            double denom = 0.0;
            for (long tau = 1; tau <= t; ++tau) {
                for (int n = 1; n <= n_; ++n) {
                    const auto& st = streams_[idx(n, tau)];
                    const double v = st.confidence_at(t - tau + s) * w[idx(n, tau)];
                    if (v > 0.0) {
                        c.push_back(st.forecast_at(t - tau + s));
                        pw.push_back(v);
                        denom += v;
                    }
                }
            }
            if (denom > 0.0) {
                for (double& x : pw) x /= denom;
                double total = 0.0;
                for (double x : pw) total += x;
                for (double& x : pw) x /= total;
                gamma[s - 1] = smoothagg::core::substitute(rule_, c, pw, spec_);
            } else {
                gamma[s - 1] = 0.0;
                for (long u = t - 1; u >= t + s - d_ && u >= 1; --u) {
                    if (issued_.count(u)) {
                        gamma[s - 1] = issued_.at(u)[static_cast<std::size_t>(t + s - u - 1)];
                        break;
                    }
                }
            }
        }
        issued_[t] = gamma;
        return gamma;
    }

private:
    int n_;
    int d_;
    long T_;
    LossSpec spec_;
    SubstitutionRule rule_;
    std::vector<std::vector<double>> w_;
    std::vector<double> tail_;
    std::vector<ExpertForecastStream> streams_;
    std::map<long, std::vector<double>> issued_;
};

}  // namespace oracle
