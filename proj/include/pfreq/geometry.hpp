#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace pfreq {

enum class GeometryKind { circle, torus2d, gauss_line };

std::string_view to_string(GeometryKind kind);

/// One periodic-grid edge. `conductance` is e^{-phi} at the edge midpoint times the
/// cell volume over the squared spacing along `axis`, so the discrete Dirichlet energy
/// is sum_e conductance_e * (u_to - u_from)^2.
struct Edge {
    std::size_t from;
    std::size_t to;
    int axis;
    double conductance;
};

/// Hermite collocation basis on the Gauss nodes: values(k, n) = p_n(x_k).
struct HermiteBasis {
    int order = 0;
    Eigen::MatrixXd values;
};

struct GeometryData {
    GeometryKind kind = GeometryKind::circle;
    int dimension = 1;
    std::vector<std::size_t> shape;   // nodes per axis
    std::vector<double> lengths;      // period per axis (periodic kinds)
    std::vector<double> coordinates;  // node-major, `dimension` entries per node
    std::vector<double> phi;
    std::vector<double> psi;
    std::vector<double> measure;
    std::vector<Edge> edges;
    HermiteBasis hermite;
};

/// Discretized weighted manifold. Immutable once built; the constructor enforces the
/// invariants (positive finite measure, full periodic neighbor sets, Gauss weight on the
/// gauss-line kind).
class WeightedGeometry {
public:
    explicit WeightedGeometry(GeometryData data);

    GeometryKind kind() const noexcept { return data_.kind; }
    int dimension() const noexcept { return data_.dimension; }
    std::size_t node_count() const noexcept { return data_.measure.size(); }
    std::span<const std::size_t> shape() const noexcept { return data_.shape; }
    std::span<const double> lengths() const noexcept { return data_.lengths; }

    std::span<const double> coordinate(std::size_t node) const;
    std::span<const double> phi() const noexcept { return data_.phi; }
    std::span<const double> psi() const noexcept { return data_.psi; }
    std::span<const double> measure() const noexcept { return data_.measure; }
    std::span<const Edge> edges() const noexcept { return data_.edges; }
    const HermiteBasis& hermite() const noexcept { return data_.hermite; }

    bool periodic() const noexcept { return data_.kind != GeometryKind::gauss_line; }
    /// Grid spacing per axis; empty for gauss-line.
    std::vector<double> spacing() const;
    double total_measure() const;

private:
    GeometryData data_;
};

using GeometryPtr = std::shared_ptr<const WeightedGeometry>;

/// Periodic circle; phi sampled per node. Edge weights use exp(-(phi_i + phi_j)/2),
/// the geometric mean of the endpoint weights.
GeometryPtr make_circle(std::size_t nodes, double length, std::span<const double> phi);
/// Periodic circle with phi evaluated at nodes and at arithmetic edge midpoints.
GeometryPtr make_circle(std::size_t nodes, double length, const std::function<double(double)>& phi);

/// Flat torus with conformal metric e^{2 psi}(dx^2 + dy^2). Node index = ix + nx * iy.
GeometryPtr make_torus(std::size_t nx, std::size_t ny, double lx, double ly,
                       std::span<const double> phi, std::span<const double> psi);
GeometryPtr make_torus(std::size_t nx, std::size_t ny, double lx, double ly,
                       const std::function<double(double, double)>& phi,
                       const std::function<double(double, double)>& psi);

/// Gauss space (R, e^{-x^2/4} dx) in Hermite collocation form with `order` nodes.
GeometryPtr make_gauss_line(int order);

}  // namespace pfreq
