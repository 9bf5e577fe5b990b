#include "pfreq/operators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <string>

#include "pfreq/errors.hpp"
#include "pfreq/random.hpp"

namespace pfreq {

namespace {

Eigen::VectorXd measure_of(const WeightedGeometry& g) {
    return Eigen::Map<const Eigen::VectorXd>(g.measure().data(), static_cast<Eigen::Index>(g.node_count()));
}

Eigen::VectorXd hermite_eigenvalues(int order) {
    Eigen::VectorXd lambda(order);
    for (int n = 0; n < order; ++n) lambda(n) = -0.5 * n;
    return lambda;
}

}  // namespace

DriftOperator::DriftOperator(GeometryPtr geometry) : geometry_(std::move(geometry)) {
    if (!geometry_) throw Error(ErrorKind::invalid_input, "operator needs a geometry");
    if (!geometry_->periodic()) return;
    const auto n = static_cast<Eigen::Index>(geometry_->node_count());
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(4 * geometry_->edges().size());
    for (const Edge& e : geometry_->edges()) {
        const auto i = static_cast<Eigen::Index>(e.from);
        const auto j = static_cast<Eigen::Index>(e.to);
        entries.emplace_back(i, i, e.conductance);
        entries.emplace_back(j, j, e.conductance);
        entries.emplace_back(i, j, -e.conductance);
        entries.emplace_back(j, i, -e.conductance);
    }
    auto K = std::make_shared<Eigen::SparseMatrix<double>>(n, n);
    K->setFromTriplets(entries.begin(), entries.end());
    stiffness_ = std::move(K);
}

Eigen::MatrixXd DriftOperator::apply_values(const Eigen::MatrixXd& values) const {
    const WeightedGeometry& g = *geometry_;
    if (values.rows() != static_cast<Eigen::Index>(g.node_count())) {
        throw Error(ErrorKind::incompatible_fields, "value array does not match the operator size");
    }
    const Eigen::VectorXd mu = measure_of(g);
    Eigen::MatrixXd out;
    if (g.periodic()) {
        // Edge fluxes in divergence form, then division by the nodal measure.
        out = Eigen::MatrixXd::Zero(values.rows(), values.cols());
        for (const Edge& e : g.edges()) {
            const auto i = static_cast<Eigen::Index>(e.from);
            const auto j = static_cast<Eigen::Index>(e.to);
            for (Eigen::Index c = 0; c < values.cols(); ++c) {
                const double flux = e.conductance * (values(j, c) - values(i, c));
                out(i, c) += flux;
                out(j, c) -= flux;
            }
        }
        out = mu.cwiseInverse().asDiagonal() * out;
    } else {
        // Shifting by the value at the heaviest node annihilates constants exactly.
        Eigen::Index ref = 0;
        mu.maxCoeff(&ref);
        const Eigen::MatrixXd shifted = values.rowwise() - values.row(ref);
        const Eigen::MatrixXd& P = g.hermite().values;
        const Eigen::MatrixXd coeff = P.transpose() * (mu.asDiagonal() * shifted);
        out = P * (hermite_eigenvalues(g.hermite().order).asDiagonal() * coeff);
    }
    for (const OperatorDefect& d : defects_) {
        out.row(static_cast<Eigen::Index>(d.row)) += d.value * values.row(static_cast<Eigen::Index>(d.col));
    }
    return out;
}

Field DriftOperator::apply(const Field& u) const {
    if (u.geometry() != geometry_) {
        throw Error(ErrorKind::incompatible_fields, "field and operator live on different geometries");
    }
    return u.with_values(apply_values(u.values()));
}

const Eigen::SparseMatrix<double>& DriftOperator::stiffness() const {
    if (!stiffness_) throw Error(ErrorKind::invalid_input, "stiffness matrix exists only on periodic grids");
    return *stiffness_;
}

Eigen::MatrixXd DriftOperator::dense() const {
    const auto n = static_cast<Eigen::Index>(size());
    return apply_values(Eigen::MatrixXd::Identity(n, n));
}

Eigen::MatrixXd DriftOperator::symmetrized() const {
    const WeightedGeometry& g = *geometry_;
    const Eigen::VectorXd root = measure_of(g).cwiseSqrt();
    if (g.periodic()) {
        const Eigen::MatrixXd K = Eigen::MatrixXd(*stiffness_);
        const Eigen::VectorXd inv = root.cwiseInverse();
        return -(inv.asDiagonal() * K * inv.asDiagonal());
    }
    const Eigen::MatrixXd Q = root.asDiagonal() * g.hermite().values;
    return Q * hermite_eigenvalues(g.hermite().order).asDiagonal() * Q.transpose();
}

DriftOperator DriftOperator::with_defect(std::size_t row, std::size_t col, double value) const {
    if (row >= size() || col >= size()) throw Error(ErrorKind::invalid_input, "defect index out of range");
    DriftOperator copy = *this;
    copy.defects_.push_back({row, col, value});
    return copy;
}

DriftOperator assemble(GeometryPtr geometry) { return DriftOperator(std::move(geometry)); }

Field apply(const DriftOperator& op, const Field& u) { return op.apply(u); }

struct ImplicitSolver::Impl {
    double alpha = 0.0;
    Eigen::VectorXd measure;
    // periodic grids: (M + alpha K) x = M rhs
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    bool use_ldlt = false;
    // gauss-line: x = P diag(1 / (1 - alpha lambda)) P^T M rhs
    Eigen::MatrixXd basis;
    Eigen::VectorXd factors;
    bool use_basis = false;
    // operators with defects: dense LU of I - alpha L
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
};

ImplicitSolver::ImplicitSolver(const DriftOperator& op, double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw Error(ErrorKind::invalid_input, "implicit solver needs a finite alpha >= 0");
    }
    auto impl = std::make_shared<Impl>();
    impl->alpha = alpha;
    const WeightedGeometry& g = op.geom();
    impl->measure = measure_of(g);
    if (!op.defects().empty()) {
        const auto n = static_cast<Eigen::Index>(op.size());
        impl->lu.compute(Eigen::MatrixXd::Identity(n, n) - alpha * op.dense());
    } else if (g.periodic()) {
        Eigen::SparseMatrix<double> A = alpha * op.stiffness();
        for (Eigen::Index i = 0; i < A.rows(); ++i) A.coeffRef(i, i) += impl->measure(i);
        impl->ldlt.compute(A);
        if (impl->ldlt.info() != Eigen::Success) {
            throw Error(ErrorKind::numerical_failure, "implicit system factorization failed");
        }
        impl->use_ldlt = true;
    } else {
        impl->basis = g.hermite().values;
        const Eigen::VectorXd lambda = hermite_eigenvalues(g.hermite().order);
        impl->factors = (1.0 - alpha * lambda.array()).inverse().matrix();
        impl->use_basis = true;
    }
    impl_ = std::move(impl);
}

Eigen::MatrixXd ImplicitSolver::solve(const Eigen::MatrixXd& rhs) const {
    const Impl& s = *impl_;
    Eigen::MatrixXd x;
    if (s.use_ldlt) {
        x = s.ldlt.solve(s.measure.asDiagonal() * rhs);
        if (s.ldlt.info() != Eigen::Success) throw Error(ErrorKind::numerical_failure, "implicit solve failed");
    } else if (s.use_basis) {
        x = s.basis * (s.factors.asDiagonal() * (s.basis.transpose() * (s.measure.asDiagonal() * rhs)));
    } else {
        x = s.lu.solve(rhs);
    }
    if (!x.allFinite()) throw Error(ErrorKind::numerical_failure, "implicit solve produced non-finite values");
    return x;
}

SpectralDecomposition::SpectralDecomposition(GeometryPtr geometry, Eigen::VectorXd eigenvalues,
                                             Eigen::MatrixXd to_coeff, Eigen::MatrixXd from_coeff)
    : geometry_(std::move(geometry)),
      eigenvalues_(std::move(eigenvalues)),
      to_coeff_(std::move(to_coeff)),
      from_coeff_(std::move(from_coeff)) {}

Eigen::MatrixXd SpectralDecomposition::coefficients(const Field& u) const {
    if (u.geometry() != geometry_) {
        throw Error(ErrorKind::incompatible_fields, "field does not live on the decomposed geometry");
    }
    return to_coeff_ * u.values();
}

Field SpectralDecomposition::synthesize(const Eigen::MatrixXd& coeff) const {
    return Field(geometry_, from_coeff_ * coeff);
}

SpectralDecomposition decompose(const DriftOperator& op) {
    if (!op.defects().empty()) {
        throw Error(ErrorKind::invalid_input, "cannot decompose an operator carrying defects");
    }
    const WeightedGeometry& g = op.geom();
    const Eigen::VectorXd mu = measure_of(g);
    if (!g.periodic()) {
        const Eigen::MatrixXd& P = g.hermite().values;
        return SpectralDecomposition(op.geometry(), hermite_eigenvalues(g.hermite().order),
                                     P.transpose() * mu.asDiagonal(), P);
    }
    const Eigen::VectorXd root = mu.cwiseSqrt();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op.symmetrized());
    if (solver.info() != Eigen::Success) throw Error(ErrorKind::numerical_failure, "symmetric eigensolve failed");
    // Eigen orders ascending; reverse to start at the kernel.
    const Eigen::VectorXd lambda = solver.eigenvalues().reverse();
    const Eigen::MatrixXd V = solver.eigenvectors().rowwise().reverse();
    return SpectralDecomposition(op.geometry(), lambda, V.transpose() * root.asDiagonal(),
                                 root.cwiseInverse().asDiagonal() * V);
}

std::vector<EigenPair> eigenpairs(const SpectralDecomposition& spectrum, std::size_t k) {
    if (k == 0 || k > spectrum.size()) {
        throw Error(ErrorKind::invalid_input, "requested " + std::to_string(k) + " eigenpairs from an operator of size " +
                                                  std::to_string(spectrum.size()));
    }
    std::vector<EigenPair> out;
    out.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        Field e(spectrum.geometry(), spectrum.from_coeff().col(col));
        const double norm = weighted_norm(e);
        // Fix the sign so the largest-magnitude entry is positive (reproducible output).
        Eigen::Index arg = 0;
        e.values().col(0).cwiseAbs().maxCoeff(&arg);
        const double sign = e.values()(arg, 0) < 0.0 ? -1.0 : 1.0;
        out.push_back({spectrum.eigenvalues()(col), e.scaled(sign / norm)});
    }
    return out;
}

std::vector<EigenPair> eigenpairs(const DriftOperator& op, std::size_t k) {
    if (k == 0 || k > op.size()) {
        throw Error(ErrorKind::invalid_input,
                    "requested " + std::to_string(k) + " eigenpairs from an operator of size " + std::to_string(op.size()));
    }
    return eigenpairs(decompose(op), k);
}

CheckReport check_self_adjoint(const DriftOperator& op, int trials, std::uint64_t seed, double tol) {
    if (trials < 1) throw Error(ErrorKind::invalid_input, "self-adjointness check needs trials >= 1");
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>(op.size());
    double worst_asym = 0.0;
    double worst_energy = 0.0;
    std::size_t worst_trial = 0;
    double worst = -1.0;
    for (int t = 0; t < trials; ++t) {
        Eigen::VectorXd a(n), b(n);
        for (Eigen::Index i = 0; i < n; ++i) a(i) = normal(rng);
        for (Eigen::Index i = 0; i < n; ++i) b(i) = normal(rng);
        const Field u(op.geometry(), a);
        const Field v(op.geometry(), b);
        const double scale = weighted_norm(u) * weighted_norm(v);
        const double u_Lv = weighted_inner(u, op.apply(v));
        const double Lu_v = weighted_inner(op.apply(u), v);
        const double asym = std::abs(u_Lv - Lu_v) / scale;
        const double energy = std::abs(u_Lv + energy_pairing(u, v)) / scale;
        worst_asym = std::max(worst_asym, asym);
        worst_energy = std::max(worst_energy, energy);
        if (std::max(asym, energy) > worst) {
            worst = std::max(asym, energy);
            worst_trial = static_cast<std::size_t>(t);
        }
    }
    CheckReport r;
    r.name = "self_adjoint";
    r.set_margin(-std::max(worst_asym, worst_energy), worst_trial, tol);
    r.aux["max_asymmetry"] = worst_asym;
    r.aux["max_energy_defect"] = worst_energy;
    r.aux["trials"] = trials;
    r.notes["location_unit"] = "trial";
    return r;
}

}  // namespace pfreq
