#include "pfreq/hermite.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

#include "pfreq/errors.hpp"

namespace pfreq::hermite {

void orthonormal_values(double x, std::span<double> out) {
    if (out.empty()) return;
    const double y = x / std::numbers::sqrt2;
    out[0] = 1.0 / std::sqrt(2.0 * std::sqrt(std::numbers::pi));
    if (out.size() == 1) return;
    out[1] = y * out[0];
    for (std::size_t n = 1; n + 1 < out.size(); ++n) {
        const double dn = static_cast<double>(n);
        out[n + 1] = (y * out[n] - std::sqrt(dn) * out[n - 1]) / std::sqrt(dn + 1.0);
    }
}

GaussRule gauss_rule(int order) {
    if (order < 1) throw Error(ErrorKind::invalid_input, "Gauss rule order must be positive");
    const auto m = static_cast<std::size_t>(order);

    Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
    Eigen::VectorXd sub(order > 1 ? order - 1 : 0);
    for (int n = 1; n < order; ++n) sub(n - 1) = std::sqrt(2.0 * n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::numerical_failure, "Jacobi matrix eigensolve failed");
    }

    GaussRule rule;
    rule.nodes.resize(m);
    rule.weights.resize(m);
    std::vector<double> p(m + 1);
    for (std::size_t k = 0; k < m; ++k) {
        double x = solver.eigenvalues()(static_cast<Eigen::Index>(k));
        for (int it = 0; it < 3; ++it) {
            orthonormal_values(x, p);
            const double dp = std::sqrt(static_cast<double>(m) / 2.0) * p[m - 1];
            if (dp == 0.0) break;
            x -= p[m] / dp;
        }
        rule.nodes[k] = x;
    }
    // Symmetrize so odd moments vanish exactly.
    for (std::size_t k = 0; k < m / 2; ++k) {
        const double half = 0.5 * (rule.nodes[m - 1 - k] - rule.nodes[k]);
        rule.nodes[k] = -half;
        rule.nodes[m - 1 - k] = half;
    }
    if (m % 2 == 1) rule.nodes[m / 2] = 0.0;

    std::vector<double> pm(m);
    for (std::size_t k = 0; k < m; ++k) {
        orthonormal_values(rule.nodes[k], pm);
        double s = 0.0;
        for (double v : pm) s += v * v;
        rule.weights[k] = 1.0 / s;
    }
    for (std::size_t k = 0; k < m / 2; ++k) {
        const double w = 0.5 * (rule.weights[k] + rule.weights[m - 1 - k]);
        rule.weights[k] = w;
        rule.weights[m - 1 - k] = w;
    }
    return rule;
}

}  // namespace pfreq::hermite
