#include "smoothagg/regression/ridge.hpp"

#include "smoothagg/errors.hpp"

#include <Eigen/Dense>

namespace smoothagg::regression {

namespace {

struct NormalEquations {
    Eigen::MatrixXd lhs;
    Eigen::VectorXd rhs;
};

NormalEquations normal_equations(std::span<const Sample> window, double sigma) {
    if (window.empty()) throw ConfigError("ridge_fit: empty window");
    if (!(sigma > 0.0)) throw ConfigError("ridge_fit: sigma must be positive");
    const auto k = static_cast<Eigen::Index>(window.front().x.size());
    Eigen::MatrixXd X(static_cast<Eigen::Index>(window.size()), k);
    Eigen::VectorXd y(static_cast<Eigen::Index>(window.size()));
    for (std::size_t r = 0; r < window.size(); ++r) {
        if (static_cast<Eigen::Index>(window[r].x.size()) != k) {
            throw DimensionError("ridge_fit: signals of different dimension in one window");
        }
        const auto row = static_cast<Eigen::Index>(r);
        X.row(row) = Eigen::Map<const Eigen::RowVectorXd>(window[r].x.data(), k);
        y(row) = window[r].y;
    }
    NormalEquations eq;
    eq.lhs = X.transpose() * X;
    eq.lhs.diagonal().array() += sigma;
    eq.rhs = X.transpose() * y;
    return eq;
}

}  // namespace

std::vector<double> ridge_fit(std::span<const Sample> window, double sigma) {
    const NormalEquations eq = normal_equations(window, sigma);
    const Eigen::VectorXd w = eq.lhs.llt().solve(eq.rhs);
    return {w.data(), w.data() + w.size()};
}

RidgeResidual ridge_residual(std::span<const Sample> window, double sigma,
                             std::span<const double> w) {
    const NormalEquations eq = normal_equations(window, sigma);
    if (static_cast<Eigen::Index>(w.size()) != eq.rhs.size()) {
        throw DimensionError("ridge_residual: coefficient length mismatch");
    }
    const Eigen::Map<const Eigen::VectorXd> coef(w.data(), static_cast<Eigen::Index>(w.size()));
    return {(eq.lhs * coef - eq.rhs).norm(), eq.rhs.norm()};
}

}  // namespace smoothagg::regression
