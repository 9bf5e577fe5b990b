#include "pfreq/evolution.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "pfreq/errors.hpp"

namespace pfreq {

PerturbationSpec::PerturbationSpec(std::vector<SpaceTimeFn> drift, SpaceTimeFn potential, TimeFn bound)
    : drift_(std::move(drift)), potential_(std::move(potential)), bound_(std::move(bound)) {
    if (!bound_) throw Error(ErrorKind::invalid_input, "perturbation needs a bound C(t)");
    for (const auto& b : drift_) {
        if (!b) throw Error(ErrorKind::invalid_input, "drift component is empty");
    }
}

namespace {

void require_nonzero(const Field& u0) {
    if (u0.values().isZero(0.0)) throw Error(ErrorKind::degenerate_input, "initial field is identically zero");
}

void require_on(const DriftOperator& op, const Field& u0) {
    if (u0.geometry() != op.geometry()) {
        throw Error(ErrorKind::incompatible_fields, "initial field and operator live on different geometries");
    }
}

double certify(const PerturbationSpec& pert, const WeightedGeometry& g, double t) {
    const double C = pert.bound()(t);
    if (!std::isfinite(C) || C < 0.0) {
        throw Error(ErrorKind::certification_failure, "bound C(t) is negative or non-finite at t = " + std::to_string(t));
    }
    const PerturbationNorms norms = perturbation_norms(pert, g, t);
    const double slack = 1e-12 * C + 1e-15;
    if (norms.drift > C + slack || norms.potential > C + slack) {
        throw Error(ErrorKind::certification_failure,
                    "perturbation exceeds its bound at t = " + std::to_string(t) + ": sup|b| = " +
                        std::to_string(norms.drift) + ", sup|c| = " + std::to_string(norms.potential) +
                        ", C = " + std::to_string(C));
    }
    return C;
}

// Shared Crank-Nicolson driver; `pert` null means the unperturbed scheme.
Trajectory crank_nicolson(const DriftOperator& op, const Field& u0, const TimeGrid& grid,
                          const PerturbationSpec* pert) {
    require_on(op, u0);
    require_nonzero(u0);
    const double dt = grid.dt();
    const ImplicitSolver solver(op, 0.5 * dt);
    const bool forced = pert != nullptr && pert->has_terms();

    std::optional<PerturbationRecord> record;
    if (pert != nullptr) {
        record = PerturbationRecord{{}, pert->gradient_only()};
        record->bound.reserve(grid.size());
        record->bound.push_back(certify(*pert, op.geom(), grid.time(0)));
    }

    std::vector<Field> fields;
    fields.reserve(grid.size());
    fields.push_back(u0);
    Eigen::MatrixXd prev = u0.values();
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        const Field& u = fields.back();
        const Eigen::MatrixXd Lu = op.apply_values(u.values());
        Eigen::MatrixXd rhs = u.values() + (0.5 * dt) * Lu;
        if (forced) {
            const double t_mid = grid.time(k) + 0.5 * dt;
            certify(*pert, op.geom(), t_mid);
            Eigen::MatrixXd mid;
            if (k == 0) {
                mid = u.values() + (0.5 * dt) * (Lu + perturbation_forcing(*pert, u, grid.time(k)));
            } else {
                mid = 1.5 * u.values() - 0.5 * prev;
            }
            rhs += dt * perturbation_forcing(*pert, u.with_values(mid), t_mid);
        }
        prev = u.values();
        fields.push_back(u.with_values(solver.solve(rhs)));
        if (record) record->bound.push_back(certify(*pert, op.geom(), grid.time(k + 1)));
    }
    return Trajectory(grid, std::move(fields), Provenance::implicit_step, std::move(record));
}

}  // namespace

PerturbationNorms perturbation_norms(const PerturbationSpec& pert, const WeightedGeometry& g, double t) {
    if (!pert.drift().empty() && pert.drift().size() != static_cast<std::size_t>(g.dimension())) {
        throw Error(ErrorKind::invalid_input, "drift needs one component per geometry axis, got " +
                                                  std::to_string(pert.drift().size()));
    }
    PerturbationNorms norms;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        const auto x = g.coordinate(i);
        if (!pert.drift().empty()) {
            double s = 0.0;
            for (const auto& b : pert.drift()) {
                const double v = b(x, t);
                s += v * v;
            }
            // |b|_g for the conformal metric e^{2 psi} (flat)
            const double norm = std::exp(g.psi()[i]) * std::sqrt(s);
            if (!std::isfinite(norm)) throw Error(ErrorKind::certification_failure, "drift is not finite");
            norms.drift = std::max(norms.drift, norm);
        }
        if (pert.potential()) {
            const double c = pert.potential()(x, t);
            if (!std::isfinite(c)) throw Error(ErrorKind::certification_failure, "potential is not finite");
            norms.potential = std::max(norms.potential, std::abs(c));
        }
    }
    return norms;
}

Eigen::MatrixXd perturbation_forcing(const PerturbationSpec& pert, const Field& u, double t) {
    const WeightedGeometry& g = u.geom();
    const auto n = static_cast<Eigen::Index>(u.node_count());
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, u.components());
    if (!pert.drift().empty()) {
        if (pert.drift().size() != static_cast<std::size_t>(g.dimension())) {
            throw Error(ErrorKind::invalid_input, "drift needs one component per geometry axis");
        }
        const std::vector<Eigen::MatrixXd> grad = nodal_gradient(u);
        for (std::size_t d = 0; d < grad.size(); ++d) {
            Eigen::VectorXd b(n);
            for (Eigen::Index i = 0; i < n; ++i) b(i) = pert.drift()[d](g.coordinate(static_cast<std::size_t>(i)), t);
            f += b.asDiagonal() * grad[d];
        }
    }
    if (pert.potential()) {
        Eigen::VectorXd c(n);
        for (Eigen::Index i = 0; i < n; ++i) c(i) = pert.potential()(g.coordinate(static_cast<std::size_t>(i)), t);
        f += c.asDiagonal() * u.values();
    }
    return f;
}

Trajectory evolve_exact(const SpectralDecomposition& spectrum, const Field& u0, const TimeGrid& grid) {
    require_nonzero(u0);
    const Eigen::MatrixXd c0 = spectrum.coefficients(u0);
    const Eigen::VectorXd& lambda = spectrum.eigenvalues();
    std::vector<Field> fields;
    fields.reserve(grid.size());
    fields.push_back(u0);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double elapsed = grid.time(k) - grid.a();
        const Eigen::VectorXd decay = (elapsed * lambda.array()).exp().matrix();
        fields.push_back(spectrum.synthesize(decay.asDiagonal() * c0));
    }
    return Trajectory(grid, std::move(fields), Provenance::spectral_exact);
}

Trajectory evolve_exact(const DriftOperator& op, const Field& u0, const TimeGrid& grid) {
    require_on(op, u0);
    require_nonzero(u0);
    return evolve_exact(decompose(op), u0, grid);
}

Trajectory evolve_cn(const DriftOperator& op, const Field& u0, const TimeGrid& grid) {
    return crank_nicolson(op, u0, grid, nullptr);
}

Trajectory evolve_perturbed(const DriftOperator& op, const Field& u0, const TimeGrid& grid,
                            const PerturbationSpec& pert) {
    return crank_nicolson(op, u0, grid, &pert);
}

Trajectory gauge_transform(const Trajectory& traj, const GaugeSpec& gauge) {
    if (!gauge.lambda) return traj;
    const TimeGrid& grid = traj.grid();
    std::vector<Field> fields;
    fields.reserve(traj.size());
    double integral = 0.0;
    double previous = gauge.lambda(grid.time(0));
    if (!std::isfinite(previous)) throw Error(ErrorKind::invalid_input, "gauge lambda(t) is not finite");
    fields.push_back(traj.at(0));
    for (std::size_t k = 1; k < traj.size(); ++k) {
        const double current = gauge.lambda(grid.time(k));
        if (!std::isfinite(current)) throw Error(ErrorKind::invalid_input, "gauge lambda(t) is not finite");
        integral += 0.5 * (previous + current) * (grid.time(k) - grid.time(k - 1));
        previous = current;
        fields.push_back(traj.at(k).scaled(std::exp(-integral)));
    }
    return Trajectory(grid, std::move(fields), traj.provenance(), traj.perturbation());
}

}  // namespace pfreq
