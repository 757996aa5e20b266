#pragma once

#include "smoothagg/core/aggregation.hpp"
#include "smoothagg/longterm/expert_stream.hpp"

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

namespace smoothagg::longterm {

/// Prior weight of issue time tau: 1 / (tau (tau + 1)).
[[nodiscard]] double prior_weight(long tau);
/// Prior mass of all issue times strictly after t: 1 / (t + 1).
[[nodiscard]] double unborn_prior_mass(long t);
/// Weight granted to one newborn expert issued at tau out of a reservoir holding every issue time >= tau.
[[nodiscard]] double birth_grant(double reservoir, long tau, int experts);

struct LazyUpdate {
    std::vector<double> weights;  ///< updated explicit weights
    double rest_mass = 0.0;       ///< updated mass of everything charged the common loss
    double mixloss = 0.0;         ///< -(1/eta) ln of the pre-normalization divisor
};

/**
 * @brief Exponential update of explicit weights plus one lump of mass charged `rest_loss`.
 *
 * The divisor is sum_i w_i e^{-eta l_i} + e^{-eta rest_loss} * rest_mass, evaluated
 * after factoring out the smallest scaled loss.
 */
[[nodiscard]] LazyUpdate lazy_exp_update(std::span<const double> weights,
                                         std::span<const double> losses, double rest_mass,
                                         double rest_loss, double eta);

struct EffectiveWeights {
    std::vector<double> weights;  ///< p_i w_i / sum_j p_j w_j, aligned with the inputs
    double denominator = 0.0;
    bool degenerate = true;       ///< no expert carries positive p * w
};

[[nodiscard]] EffectiveWeights normalize_effective(std::span<const double> weights,
                                                   std::span<const double> confidences);

struct AggregatorConfig {
    int experts = 1;
    int horizon = 1;
    core::LossSpec spec{1.0, 0.5};
    core::SubstitutionRule rule = core::SubstitutionRule::Vovk;
    /// Move experts whose confidences are exhausted into a dead-mass scalar charged h_t.
    bool fold_expired = true;
    /// Run the grid mixability check on every issued coordinate.
    bool verify_each_step = false;
    std::size_t grid_points = 201;
};

/// Auxiliary expert (n, tau) with one weight per interleaved chain.
struct AliveExpert {
    ExpertForecastStream stream;
    long last_active_offset = 0;
    std::vector<double> chain_weights;

    [[nodiscard]] int expert() const { return stream.expert; }
    [[nodiscard]] long issue_time() const { return stream.issue_time; }
};

struct ExpertExcess {
    int expert = 0;
    long issue_time = 0;
    double excess = 0.0;    ///< (1/d) sum_s p_s (h_s - l_s)
    double hat_loss = 0.0;  ///< (1/d) sum_s (p_s l_s + (1 - p_s) h_s)
};

struct UpdateReport {
    long t = 0;
    bool charged = false;  ///< false for t <= d
    std::vector<double> coord_losses;
    double algorithm_loss = 0.0;  ///< h_t
    double mixloss = 0.0;         ///< m_t over the whole expert family
    /// Averaged inequality e^{-eta h_t} >= sum w e^{-eta lhat}.
    double holder_lhs = 1.0;
    double holder_rhs = 1.0;
    /// min over s of e^{-eta h_{t,s}} - sum w e^{-eta lhat_s}.
    double worst_coordinate_gap = 0.0;
    /// prod_s mix_s - (averaged mixture)^d; non-negative by Hoelder.
    double holder_product_gap = 0.0;
    /// max over alive experts of |m_t - lhat - (1/eta) ln(w_new / w_old)|.
    double identity_residual = 0.0;
    std::vector<ExpertExcess> excess;  ///< alive experts with tau <= t - d
    std::size_t folded = 0;
};

struct CoordinateCheck {
    bool degenerate = false;
    core::SubstitutionCheck check;
};

struct MixabilityReport {
    bool pass = true;
    double worst_violation = 0.0;
    std::vector<CoordinateCheck> coordinates;
};

struct ForecastReport {
    long t = 0;
    std::vector<double> gamma;
    std::vector<bool> degenerate;
    MixabilityReport mixability;  ///< filled only with verify_each_step
};

/**
 * @brief Delayed-feedback aggregator over the auxiliary experts (n, tau).
 *
 * Every real expert n issues a forecast stream at each time tau, turning into
 * the auxiliary expert (n, tau). The family is infinite; only born experts get
 * explicit weights and the unborn ones share a reservoir scalar that keeps the
 * prior proportions, since they all suffer the learner's loss.
 *
 * Weights follow the delayed schedule w_{t+d} = update(w_t), so the state holds
 * d interleaved chains; chain (t - 1) mod d is updated and used at time t.
 *
 * Per step t the protocol is observe_and_update(t, y_{t-d+1..t}),
 * birth_experts(t, streams) with one stream per real expert, then
 * forecast_horizon(t).
 */
class LongTermAggregator {
public:
    explicit LongTermAggregator(AggregatorConfig config);

    UpdateReport observe_and_update(long t, std::span<const double> outcomes);
    void birth_experts(long t, std::vector<ExpertForecastStream> streams);
    ForecastReport forecast_horizon(long t);

    /// Effective weights over alive experts for coordinate s of the forecast at the current clock.
    [[nodiscard]] EffectiveWeights effective_weights(int s) const;

    /// Grid check of the mixability inequality for `gamma` against the current state.
    [[nodiscard]] MixabilityReport check_mixability(std::span<const double> gamma) const;
    /// Same check for the most recently issued forecast.
    [[nodiscard]] MixabilityReport per_step_mixability_check() const;

    [[nodiscard]] const AggregatorConfig& config() const { return config_; }
    [[nodiscard]] long clock() const { return clock_; }
    [[nodiscard]] int horizon() const { return config_.horizon; }
    [[nodiscard]] std::size_t chain_count() const { return reservoir_.size(); }
    /// Chain holding w_t at update time t (and w_{t+d} after it).
    [[nodiscard]] std::size_t chain_for(long t) const;

    [[nodiscard]] const std::vector<AliveExpert>& alive_experts() const { return alive_; }
    [[nodiscard]] double reservoir_mass(std::size_t chain) const { return reservoir_.at(chain); }
    [[nodiscard]] double dead_mass(std::size_t chain) const { return dead_.at(chain); }
    /// sum of alive weights + reservoir + dead mass for one chain.
    [[nodiscard]] double total_mass(std::size_t chain) const;

    /// Latest issued forecast covering absolute time `when`, if any.
    [[nodiscard]] const double* latest_forecast_for(long when) const;

private:
    enum class Phase { Forecasted, Updated };

    struct Issued {
        long t;
        std::vector<double> gamma;
    };

    [[nodiscard]] const Issued* issued_at(long t) const;
    void fold_expired(long t);

    AggregatorConfig config_;
    long clock_ = 0;
    Phase phase_ = Phase::Forecasted;
    int born_this_step_ = 0;
    std::vector<bool> born_flags_;

    std::vector<AliveExpert> alive_;
    std::vector<double> reservoir_;
    std::vector<double> dead_;
    std::deque<Issued> issued_;  ///< last d forecasts, oldest first
};

}  // namespace smoothagg::longterm
