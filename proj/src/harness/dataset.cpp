#include "smoothagg/harness/dataset.hpp"

#include "smoothagg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace smoothagg::harness {

double SwitchingDatasetConfig::resolved_radius() const {
    return latent_radius > 0.0 ? latent_radius : bound / 3.0;
}

double SwitchingDatasetConfig::resolved_noise() const {
    return noise_std >= 0.0 ? noise_std : 0.05 * resolved_radius();
}

SwitchingDataset generate_switching_dataset(const SwitchingDatasetConfig& config) {
    if (config.steps < 2) throw ConfigError("dataset needs at least 2 steps");
    if (config.dim == 0) throw ConfigError("signal dimension must be positive");
    if (config.models < 1) throw ConfigError("need at least one latent model");
    if (config.segments < 1 || (config.segments > 1 && config.segments - 1 > config.steps - 2)) {
        throw ConfigError("segments must lie in [1, T - 1]");
    }
    if (!(config.bound > 0.0)) throw ConfigError("bound must be positive");

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    SwitchingDataset data;

    const double radius = config.resolved_radius();
    for (int m = 0; m < config.models; ++m) {
        std::vector<double> w(config.dim);
        double norm = 0.0;
        for (double& v : w) {
            v = gauss(rng);
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (double& v : w) v *= radius / norm;
        data.latent.push_back(std::move(w));
    }

    // K - 1 distinct cut points in [2, T - 1], each starting a new segment.
    std::vector<long> candidates(static_cast<std::size_t>(config.steps - 2));
    std::iota(candidates.begin(), candidates.end(), 2L);
    const auto cuts = static_cast<std::size_t>(config.segments - 1);
    for (std::size_t i = 0; i < cuts; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
        std::swap(candidates[i], candidates[pick(rng)]);
    }
    data.segment_starts.push_back(1);
    data.segment_starts.insert(data.segment_starts.end(), candidates.begin(),
                               candidates.begin() + static_cast<std::ptrdiff_t>(cuts));
    std::sort(data.segment_starts.begin(), data.segment_starts.end());

    // Consecutive segments use different models whenever there is a choice.
    std::vector<int> segment_model;
    std::uniform_int_distribution<int> first(0, config.models - 1);
    segment_model.push_back(first(rng));
    for (std::size_t k = 1; k < data.segment_starts.size(); ++k) {
        if (config.models == 1) {
            segment_model.push_back(0);
            continue;
        }
        std::uniform_int_distribution<int> other(0, config.models - 2);
        int m = other(rng);
        if (m >= segment_model.back()) ++m;
        segment_model.push_back(m);
    }

    const double noise = config.resolved_noise();
    std::size_t segment = 0;
    for (long t = 1; t <= config.steps; ++t) {
        while (segment + 1 < data.segment_starts.size() && data.segment_starts[segment + 1] <= t) {
            ++segment;
        }
        const int m = segment_model[segment];
        std::vector<double> x(config.dim);
        double y = 0.0;
        for (std::size_t i = 0; i < config.dim; ++i) {
            x[i] = gauss(rng);
            y += data.latent[static_cast<std::size_t>(m)][i] * x[i];
        }
        if (noise > 0.0) y += noise * gauss(rng);
        if (std::abs(y) > config.bound) {
            y = std::clamp(y, -config.bound, config.bound);
            ++data.clamped;
        }
        data.x.push_back(std::move(x));
        data.y.push_back(y);
        data.model_of_step.push_back(m);
    }
    return data;
}

}  // namespace smoothagg::harness
