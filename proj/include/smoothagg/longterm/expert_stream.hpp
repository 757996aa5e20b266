#pragma once

#include <cstddef>
#include <vector>

namespace smoothagg::longterm {

/**
 * @brief Forecasts issued by real expert `expert` at time `issue_time`.
 *
 * forecasts[i - 1] is the forecast for absolute time issue_time + i, with
 * confidence confidences[i - 1]. Offsets beyond the supplied sequence carry
 * confidence 0.
 */
struct ExpertForecastStream {
    int expert = 1;
    long issue_time = 1;
    std::vector<double> forecasts;
    std::vector<double> confidences;

    /// Forecast for offset >= 1; 0 beyond the supplied sequence (never used with nonzero confidence).
    [[nodiscard]] double forecast_at(long offset) const {
        return offset >= 1 && static_cast<std::size_t>(offset) <= forecasts.size()
                   ? forecasts[static_cast<std::size_t>(offset - 1)]
                   : 0.0;
    }
    [[nodiscard]] double confidence_at(long offset) const {
        return offset >= 1 && static_cast<std::size_t>(offset) <= confidences.size()
                   ? confidences[static_cast<std::size_t>(offset - 1)]
                   : 0.0;
    }
    /// Largest offset with positive confidence, 0 if none.
    [[nodiscard]] long last_active_offset() const {
        for (std::size_t i = confidences.size(); i > 0; --i) {
            if (confidences[i - 1] > 0.0) return static_cast<long>(i);
        }
        return 0;
    }
};

}  // namespace smoothagg::longterm
