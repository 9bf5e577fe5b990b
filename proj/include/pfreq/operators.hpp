#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "pfreq/field.hpp"
#include "pfreq/report.hpp"

namespace pfreq {

/// Extra nodal matrix entry added on top of the assembled operator. Only used to build
/// deliberately broken operators for negative controls.
struct OperatorDefect {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Discrete drift Laplacian L = e^{phi} div(e^{-phi} grad .) on a WeightedGeometry.
///
/// Periodic grids use the divergence-form edge stencil: with stiffness K assembled edge
/// by edge from the conductances, (L u)_i = -(K u)_i / mu_i, so <u, L v>_mu = -u^T K v is
/// symmetric by construction and equals minus the energy pairing. On the conformal torus
/// mu carries e^{2 psi - phi}, which realizes the nodal prefactor e^{phi - 2 psi}.
/// Gauss-line applies L = P diag(-n/2) P^T M in the Hermite collocation basis.
class DriftOperator {
public:
    explicit DriftOperator(GeometryPtr geometry);

    const GeometryPtr& geometry() const noexcept { return geometry_; }
    const WeightedGeometry& geom() const noexcept { return *geometry_; }
    std::size_t size() const noexcept { return geometry_->node_count(); }

    /// Applies L to every column of `values` (nodes x N).
    Eigen::MatrixXd apply_values(const Eigen::MatrixXd& values) const;
    Field apply(const Field& u) const;

    /// K with <u, L v>_mu = -u^T K v. Periodic grids only.
    const Eigen::SparseMatrix<double>& stiffness() const;
    /// Nodal matrix of L including any defects.
    Eigen::MatrixXd dense() const;
    /// sqrt(mu) L sqrt(mu)^{-1} built from the structural factors (defects excluded).
    Eigen::MatrixXd symmetrized() const;

    DriftOperator with_defect(std::size_t row, std::size_t col, double value) const;
    std::span<const OperatorDefect> defects() const noexcept { return defects_; }

private:
    GeometryPtr geometry_;
    std::shared_ptr<const Eigen::SparseMatrix<double>> stiffness_;
    std::vector<OperatorDefect> defects_;
};

DriftOperator assemble(GeometryPtr geometry);
Field apply(const DriftOperator& op, const Field& u);

/// Solves (I - alpha L) x = rhs for a fixed alpha >= 0.
class ImplicitSolver {
public:
    ImplicitSolver(const DriftOperator& op, double alpha);

    Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

/// Full eigendecomposition of L: u = from_coeff * c, c = to_coeff * u, and L acts on c
/// as diag(eigenvalues). Eigenvalues are nonincreasing starting near 0.
class SpectralDecomposition {
public:
    SpectralDecomposition(GeometryPtr geometry, Eigen::VectorXd eigenvalues, Eigen::MatrixXd to_coeff,
                          Eigen::MatrixXd from_coeff);

    const GeometryPtr& geometry() const noexcept { return geometry_; }
    const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
    const Eigen::MatrixXd& to_coeff() const noexcept { return to_coeff_; }
    const Eigen::MatrixXd& from_coeff() const noexcept { return from_coeff_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues_.size()); }

    Eigen::MatrixXd coefficients(const Field& u) const;
    Field synthesize(const Eigen::MatrixXd& coeff) const;

private:
    GeometryPtr geometry_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd to_coeff_;
    Eigen::MatrixXd from_coeff_;
};

/// Similarity transform with sqrt(mu) followed by a dense symmetric eigensolve; the
/// gauss-line operator is diagonal in its Hermite basis and is returned directly.
SpectralDecomposition decompose(const DriftOperator& op);

struct EigenPair {
    double eigenvalue;
    Field eigenfield;  // unit mu-norm
};

/// The k algebraically largest eigenpairs with mu-orthonormal eigenfields.
std::vector<EigenPair> eigenpairs(const DriftOperator& op, std::size_t k);
std::vector<EigenPair> eigenpairs(const SpectralDecomposition& spectrum, std::size_t k);

/// Random-pair test of <u, L v> = <L u, v> = -E(u, v), normalized by |u| |v|.
CheckReport check_self_adjoint(const DriftOperator& op, int trials, std::uint64_t seed, double tol = 1e-10);

}  // namespace pfreq
