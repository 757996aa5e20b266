#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace smoothagg::regression {

struct Sample {
    std::vector<double> x;
    double y = 0.0;
};

/// Solves (sigma I + X'X) w = X'y by Cholesky. Rows of X are the window's signals.
[[nodiscard]] std::vector<double> ridge_fit(std::span<const Sample> window, double sigma);

/// ||(sigma I + X'X) w - X'y||_2 and ||X'y||_2, for checking a solution.
struct RidgeResidual {
    double residual = 0.0;
    double rhs_norm = 0.0;
};
[[nodiscard]] RidgeResidual ridge_residual(std::span<const Sample> window, double sigma,
                                           std::span<const double> w);

}  // namespace smoothagg::regression
