#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace smoothagg::harness {

/**
 * @brief Piecewise-linear regression data with a switching latent weight vector.
 *
 * Signals are i.i.d. standard normal in `dim` dimensions. The time axis is cut
 * into `segments` random consecutive parts, each assigned one of `models` latent
 * vectors drawn uniformly on a sphere of radius `latent_radius`, and
 * y_t = <w, x_t> + noise, clamped to [-bound, bound].
 */
struct SwitchingDatasetConfig {
    long steps = 3000;
    std::size_t dim = 20;
    int segments = 7;
    int models = 3;
    double bound = 1.0;
    double latent_radius = 0.0;  ///< 0 selects bound / 3
    double noise_std = -1.0;     ///< negative selects 0.05 * latent_radius
    std::uint64_t seed = 1;

    [[nodiscard]] double resolved_radius() const;
    [[nodiscard]] double resolved_noise() const;
};

struct SwitchingDataset {
    std::vector<std::vector<double>> x;  ///< x[t - 1]
    std::vector<double> y;
    std::vector<int> model_of_step;      ///< latent model index per step
    std::vector<long> segment_starts;    ///< first step of each segment, starting with 1
    std::vector<std::vector<double>> latent;
    std::size_t clamped = 0;             ///< outcomes that hit the bound
};

[[nodiscard]] SwitchingDataset generate_switching_dataset(const SwitchingDatasetConfig& config);

}  // namespace smoothagg::harness
