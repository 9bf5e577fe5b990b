#include "pfreq/field.hpp"

#include <cmath>
#include <string>

#include "pfreq/errors.hpp"

namespace pfreq {

Field::Field(GeometryPtr geometry, Eigen::MatrixXd values)
    : geometry_(std::move(geometry)), values_(std::move(values)) {
    if (!geometry_) throw Error(ErrorKind::invalid_input, "field needs a geometry");
    if (values_.rows() != static_cast<Eigen::Index>(geometry_->node_count()) || values_.cols() < 1) {
        throw Error(ErrorKind::invalid_input, "field value array does not match node_count x N");
    }
    if (!values_.allFinite()) throw Error(ErrorKind::invalid_input, "field has non-finite entries");
}

Field Field::zeros(GeometryPtr geometry, int components) {
    const auto n = static_cast<Eigen::Index>(geometry->node_count());
    return Field(std::move(geometry), Eigen::MatrixXd::Zero(n, components));
}

Field Field::constant(GeometryPtr geometry, double value, int components) {
    const auto n = static_cast<Eigen::Index>(geometry->node_count());
    return Field(std::move(geometry), Eigen::MatrixXd::Constant(n, components, value));
}

Field Field::sample(GeometryPtr geometry, const std::function<double(std::span<const double>)>& f) {
    Eigen::MatrixXd v(static_cast<Eigen::Index>(geometry->node_count()), 1);
    for (std::size_t i = 0; i < geometry->node_count(); ++i) {
        v(static_cast<Eigen::Index>(i), 0) = f(geometry->coordinate(i));
    }
    return Field(std::move(geometry), std::move(v));
}

Field Field::component(int c) const {
    if (c < 0 || c >= components()) throw Error(ErrorKind::invalid_input, "component index out of range");
    return Field(geometry_, values_.col(c));
}

void require_compatible(const Field& u, const Field& v) {
    if (u.geometry() != v.geometry()) {
        throw Error(ErrorKind::incompatible_fields, "fields live on different geometries");
    }
    if (u.components() != v.components()) {
        throw Error(ErrorKind::incompatible_fields,
                    "component counts differ: " + std::to_string(u.components()) + " vs " +
                        std::to_string(v.components()));
    }
}

namespace {

Eigen::Map<const Eigen::VectorXd> measure_vector(const WeightedGeometry& g) {
    return {g.measure().data(), static_cast<Eigen::Index>(g.node_count())};
}

// Hermite coefficients c_n = sum_k mu_k p_n(x_k) u_k, one column per component.
Eigen::MatrixXd hermite_coefficients(const Field& u) {
    const auto& basis = u.geom().hermite();
    return basis.values.transpose() * (measure_vector(u.geom()).asDiagonal() * u.values());
}

}  // namespace

double weighted_inner(const Field& u, const Field& v) {
    require_compatible(u, v);
    const auto mu = measure_vector(u.geom());
    double s = 0.0;
    for (Eigen::Index c = 0; c < u.values().cols(); ++c) {
        s += (mu.array() * u.values().col(c).array() * v.values().col(c).array()).sum();
    }
    return s;
}

double weighted_norm(const Field& u) { return std::sqrt(weighted_inner(u, u)); }

double energy_pairing(const Field& u, const Field& v) {
    require_compatible(u, v);
    const WeightedGeometry& g = u.geom();
    if (!g.periodic()) {
        const Eigen::MatrixXd cu = hermite_coefficients(u);
        const Eigen::MatrixXd cv = hermite_coefficients(v);
        double s = 0.0;
        for (Eigen::Index n = 1; n < cu.rows(); ++n) {
            s += 0.5 * static_cast<double>(n) * cu.row(n).dot(cv.row(n));
        }
        return s;
    }
    const auto& U = u.values();
    const auto& V = v.values();
    double s = 0.0;
    for (const Edge& e : g.edges()) {
        const auto i = static_cast<Eigen::Index>(e.from);
        const auto j = static_cast<Eigen::Index>(e.to);
        for (Eigen::Index c = 0; c < U.cols(); ++c) {
            s += e.conductance * (U(j, c) - U(i, c)) * (V(j, c) - V(i, c));
        }
    }
    return s;
}

double dirichlet_energy(const Field& u) { return energy_pairing(u, u); }

std::vector<Eigen::MatrixXd> nodal_gradient(const Field& u) {
    const WeightedGeometry& g = u.geom();
    const auto n = static_cast<Eigen::Index>(g.node_count());
    const Eigen::Index cols = u.values().cols();
    if (!g.periodic()) {
        const Eigen::MatrixXd coeff = hermite_coefficients(u);
        Eigen::MatrixXd shifted = Eigen::MatrixXd::Zero(coeff.rows(), cols);
        for (Eigen::Index k = 1; k < coeff.rows(); ++k) {
            shifted.row(k - 1) = std::sqrt(0.5 * static_cast<double>(k)) * coeff.row(k);
        }
        return {g.hermite().values * shifted};
    }
    const std::vector<double> h = g.spacing();
    std::vector<Eigen::MatrixXd> grad(static_cast<std::size_t>(g.dimension()), Eigen::MatrixXd::Zero(n, cols));
    const auto& U = u.values();
    for (const Edge& e : g.edges()) {
        const auto i = static_cast<Eigen::Index>(e.from);
        const auto j = static_cast<Eigen::Index>(e.to);
        const double scale = 0.5 / h[static_cast<std::size_t>(e.axis)];
        auto& G = grad[static_cast<std::size_t>(e.axis)];
        for (Eigen::Index c = 0; c < cols; ++c) {
            const double d = scale * (U(j, c) - U(i, c));
            G(i, c) += d;
            G(j, c) += d;
        }
    }
    return grad;
}

TimeGrid::TimeGrid(double a, double b, std::size_t steps) : a_(a), b_(b), steps_(steps) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
        throw Error(ErrorKind::invalid_input, "time grid needs finite a < b");
    }
    if (steps == 0) throw Error(ErrorKind::invalid_input, "time grid needs steps >= 1");
}

double TimeGrid::time(std::size_t k) const {
    if (k > steps_) throw Error(ErrorKind::invalid_input, "time index beyond the grid");
    if (k == steps_) return b_;
    return a_ + dt() * static_cast<double>(k);
}

std::vector<double> TimeGrid::times() const {
    std::vector<double> t(size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = time(k);
    return t;
}

std::string_view to_string(Provenance p) {
    switch (p) {
        case Provenance::spectral_exact: return "spectral-exact";
        case Provenance::implicit_step: return "implicit-step";
        case Provenance::analytic_oracle: return "analytic-oracle";
    }
    return "unknown";
}

Trajectory::Trajectory(TimeGrid grid, std::vector<Field> fields, Provenance provenance,
                       std::optional<PerturbationRecord> perturbation)
    : grid_(grid), fields_(std::move(fields)), provenance_(provenance), perturbation_(std::move(perturbation)) {
    if (fields_.size() != grid_.size()) {
        throw Error(ErrorKind::invalid_input, "trajectory needs one field per time sample");
    }
    for (const Field& f : fields_) require_compatible(fields_.front(), f);
    if (perturbation_ && perturbation_->bound.size() != grid_.size()) {
        throw Error(ErrorKind::invalid_input, "perturbation bound needs one value per time sample");
    }
}

}  // namespace pfreq
