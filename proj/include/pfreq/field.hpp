#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pfreq/geometry.hpp"

namespace pfreq {

/// R^N-valued grid function; values(node, component).
class Field {
public:
    Field(GeometryPtr geometry, Eigen::MatrixXd values);

    static Field zeros(GeometryPtr geometry, int components = 1);
    static Field constant(GeometryPtr geometry, double value, int components = 1);
    /// Samples a scalar function of the node coordinates.
    static Field sample(GeometryPtr geometry, const std::function<double(std::span<const double>)>& f);

    const GeometryPtr& geometry() const noexcept { return geometry_; }
    const WeightedGeometry& geom() const noexcept { return *geometry_; }
    int components() const noexcept { return static_cast<int>(values_.cols()); }
    std::size_t node_count() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    const Eigen::MatrixXd& values() const noexcept { return values_; }
    double operator()(std::size_t node, int component = 0) const {
        return values_(static_cast<Eigen::Index>(node), component);
    }

    Field component(int c) const;
    Field with_values(Eigen::MatrixXd values) const { return Field(geometry_, std::move(values)); }
    Field scaled(double factor) const { return with_values(values_ * factor); }

private:
    GeometryPtr geometry_;
    Eigen::MatrixXd values_;
};

/// Throws incompatible-fields unless u and v share a geometry and component count.
void require_compatible(const Field& u, const Field& v);

/// sum_i mu_i <u_i, v_i>
double weighted_inner(const Field& u, const Field& v);
double weighted_norm(const Field& u);

/// Discrete weighted Dirichlet pairing: the bilinear form whose negative is <u, L v>_mu.
double energy_pairing(const Field& u, const Field& v);
/// Positive energy sum |grad u|^2 e^{-phi}; D = -dirichlet_energy(u).
double dirichlet_energy(const Field& u);

/// Coordinate partial derivatives at nodes, one matrix (nodes x N) per axis. Periodic
/// grids average the two adjacent edge differences (centered stencil); gauss-line
/// differentiates the Hermite interpolant.
std::vector<Eigen::MatrixXd> nodal_gradient(const Field& u);

class TimeGrid {
public:
    TimeGrid(double a, double b, std::size_t steps);

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    std::size_t steps() const noexcept { return steps_; }
    std::size_t size() const noexcept { return steps_ + 1; }
    double dt() const noexcept { return (b_ - a_) / static_cast<double>(steps_); }
    double time(std::size_t k) const;
    std::vector<double> times() const;

private:
    double a_;
    double b_;
    std::size_t steps_;
};

enum class Provenance { spectral_exact, implicit_step, analytic_oracle };

std::string_view to_string(Provenance p);

/// Certified perturbation bound C(t_k) recorded by the perturbed integrator.
struct PerturbationRecord {
    std::vector<double> bound;
    bool gradient_only = true;
};

class Trajectory {
public:
    Trajectory(TimeGrid grid, std::vector<Field> fields, Provenance provenance,
               std::optional<PerturbationRecord> perturbation = std::nullopt);

    const TimeGrid& grid() const noexcept { return grid_; }
    const std::vector<Field>& fields() const noexcept { return fields_; }
    const Field& at(std::size_t k) const { return fields_.at(k); }
    std::size_t size() const noexcept { return fields_.size(); }
    Provenance provenance() const noexcept { return provenance_; }
    const std::optional<PerturbationRecord>& perturbation() const noexcept { return perturbation_; }
    const GeometryPtr& geometry() const { return fields_.front().geometry(); }

private:
    TimeGrid grid_;
    std::vector<Field> fields_;
    Provenance provenance_;
    std::optional<PerturbationRecord> perturbation_;
};

}  // namespace pfreq
