#include "pfreq/geometry.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "pfreq/errors.hpp"
#include "pfreq/hermite.hpp"

namespace pfreq {

std::string_view to_string(GeometryKind kind) {
    switch (kind) {
        case GeometryKind::circle: return "circle";
        case GeometryKind::torus2d: return "torus2d";
        case GeometryKind::gauss_line: return "gauss-line";
    }
    return "unknown";
}

namespace {

void require_finite(std::span<const double> values, const char* name) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw Error(ErrorKind::invalid_input,
                        std::string(name) + " is not finite at node " + std::to_string(i));
        }
    }
}

void require_grid(std::size_t nodes, double length, const char* axis) {
    if (nodes < 4) {
        throw Error(ErrorKind::invalid_input,
                    std::string(axis) + " needs at least 4 nodes, got " + std::to_string(nodes));
    }
    if (!(length > 0.0) || !std::isfinite(length)) {
        throw Error(ErrorKind::invalid_input, std::string(axis) + " length must be positive");
    }
}

}  // namespace

WeightedGeometry::WeightedGeometry(GeometryData data) : data_(std::move(data)) {
    const std::size_t n = data_.measure.size();
    if (n == 0) throw Error(ErrorKind::invalid_input, "geometry has no nodes");
    if (data_.phi.size() != n || data_.psi.size() != n ||
        data_.coordinates.size() != n * static_cast<std::size_t>(data_.dimension)) {
        throw Error(ErrorKind::invalid_input, "geometry arrays disagree on node count");
    }
    require_finite(data_.phi, "phi");
    require_finite(data_.psi, "psi");
    require_finite(data_.coordinates, "coordinate");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(data_.measure[i] > 0.0) || !std::isfinite(data_.measure[i])) {
            throw Error(ErrorKind::invalid_input,
                        "measure must be positive and finite at node " + std::to_string(i));
        }
    }
    if (periodic()) {
        // Every node must have both neighbors along every axis.
        std::vector<int> degree(n, 0);
        for (const Edge& e : data_.edges) {
            if (e.from >= n || e.to >= n || !(e.conductance > 0.0) || !std::isfinite(e.conductance)) {
                throw Error(ErrorKind::invalid_input, "malformed edge");
            }
            ++degree[e.from];
            ++degree[e.to];
        }
        for (int d : degree) {
            if (d != 2 * data_.dimension) {
                throw Error(ErrorKind::invalid_input, "periodic grid has an incomplete neighbor set");
            }
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double x = data_.coordinates[i];
            if (std::abs(data_.phi[i] - 0.25 * x * x) > 1e-14 * (1.0 + x * x)) {
                throw Error(ErrorKind::invalid_input, "gauss-line weight must be |x|^2/4");
            }
        }
        if (data_.hermite.values.rows() != static_cast<Eigen::Index>(n) ||
            data_.hermite.values.cols() != data_.hermite.order) {
            throw Error(ErrorKind::invalid_input, "gauss-line basis has the wrong shape");
        }
    }
}

std::span<const double> WeightedGeometry::coordinate(std::size_t node) const {
    const auto d = static_cast<std::size_t>(data_.dimension);
    return std::span<const double>(data_.coordinates).subspan(node * d, d);
}

std::vector<double> WeightedGeometry::spacing() const {
    std::vector<double> h;
    if (!periodic()) return h;
    for (std::size_t a = 0; a < data_.shape.size(); ++a) {
        h.push_back(data_.lengths[a] / static_cast<double>(data_.shape[a]));
    }
    return h;
}

double WeightedGeometry::total_measure() const {
    return std::accumulate(data_.measure.begin(), data_.measure.end(), 0.0);
}

namespace {

GeometryPtr circle_from(std::size_t nodes, double length, std::vector<double> phi,
                        const std::function<double(std::size_t)>& edge_phi) {
    const double h = length / static_cast<double>(nodes);
    GeometryData data;
    data.kind = GeometryKind::circle;
    data.dimension = 1;
    data.shape = {nodes};
    data.lengths = {length};
    data.coordinates.resize(nodes);
    data.measure.resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        data.coordinates[i] = h * static_cast<double>(i);
        data.measure[i] = h * std::exp(-phi[i]);
    }
    data.psi.assign(nodes, 0.0);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double mid = edge_phi(i);
        if (!std::isfinite(mid)) throw Error(ErrorKind::invalid_input, "phi is not finite at an edge midpoint");
        data.edges.push_back({i, (i + 1) % nodes, 0, std::exp(-mid) / h});
    }
    data.phi = std::move(phi);
    return std::make_shared<const WeightedGeometry>(std::move(data));
}

GeometryPtr torus_from(std::size_t nx, std::size_t ny, double lx, double ly, std::vector<double> phi,
                       std::vector<double> psi,
                       const std::function<double(std::size_t, int)>& edge_phi) {
    const double hx = lx / static_cast<double>(nx);
    const double hy = ly / static_cast<double>(ny);
    const std::size_t n = nx * ny;
    GeometryData data;
    data.kind = GeometryKind::torus2d;
    data.dimension = 2;
    data.shape = {nx, ny};
    data.lengths = {lx, ly};
    data.coordinates.resize(2 * n);
    data.measure.resize(n);
    for (std::size_t iy = 0; iy < ny; ++iy) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const std::size_t i = ix + nx * iy;
            data.coordinates[2 * i] = hx * static_cast<double>(ix);
            data.coordinates[2 * i + 1] = hy * static_cast<double>(iy);
            data.measure[i] = hx * hy * std::exp(2.0 * psi[i] - phi[i]);
        }
    }
    // Dirichlet energy is conformally invariant in 2D, so edges carry no psi.
    for (std::size_t iy = 0; iy < ny; ++iy) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const std::size_t i = ix + nx * iy;
            const double mx = edge_phi(i, 0);
            const double my = edge_phi(i, 1);
            if (!std::isfinite(mx) || !std::isfinite(my)) {
                throw Error(ErrorKind::invalid_input, "phi is not finite at an edge midpoint");
            }
            data.edges.push_back({i, (ix + 1) % nx + nx * iy, 0, std::exp(-mx) * hy / hx});
            data.edges.push_back({i, ix + nx * ((iy + 1) % ny), 1, std::exp(-my) * hx / hy});
        }
    }
    data.phi = std::move(phi);
    data.psi = std::move(psi);
    return std::make_shared<const WeightedGeometry>(std::move(data));
}

}  // namespace

GeometryPtr make_circle(std::size_t nodes, double length, std::span<const double> phi) {
    require_grid(nodes, length, "circle");
    if (phi.size() != nodes) throw Error(ErrorKind::invalid_input, "phi must have one value per node");
    require_finite(phi, "phi");
    std::vector<double> p(phi.begin(), phi.end());
    return circle_from(nodes, length, p,
                       [&p, nodes](std::size_t i) { return 0.5 * (p[i] + p[(i + 1) % nodes]); });
}

GeometryPtr make_circle(std::size_t nodes, double length, const std::function<double(double)>& phi) {
    require_grid(nodes, length, "circle");
    const double h = length / static_cast<double>(nodes);
    std::vector<double> p(nodes);
    for (std::size_t i = 0; i < nodes; ++i) p[i] = phi(h * static_cast<double>(i));
    require_finite(p, "phi");
    return circle_from(nodes, length, std::move(p),
                       [&phi, h](std::size_t i) { return phi(h * (static_cast<double>(i) + 0.5)); });
}

GeometryPtr make_torus(std::size_t nx, std::size_t ny, double lx, double ly,
                       std::span<const double> phi, std::span<const double> psi) {
    require_grid(nx, lx, "torus x-axis");
    require_grid(ny, ly, "torus y-axis");
    const std::size_t n = nx * ny;
    if (phi.size() != n || psi.size() != n) {
        throw Error(ErrorKind::invalid_input, "phi and psi must have one value per node");
    }
    require_finite(phi, "phi");
    require_finite(psi, "psi");
    std::vector<double> p(phi.begin(), phi.end());
    return torus_from(nx, ny, lx, ly, p, {psi.begin(), psi.end()},
                      [&p, nx, ny](std::size_t i, int axis) {
                          const std::size_t ix = i % nx;
                          const std::size_t iy = i / nx;
                          const std::size_t j =
                              axis == 0 ? (ix + 1) % nx + nx * iy : ix + nx * ((iy + 1) % ny);
                          return 0.5 * (p[i] + p[j]);
                      });
}

GeometryPtr make_torus(std::size_t nx, std::size_t ny, double lx, double ly,
                       const std::function<double(double, double)>& phi,
                       const std::function<double(double, double)>& psi) {
    require_grid(nx, lx, "torus x-axis");
    require_grid(ny, ly, "torus y-axis");
    const double hx = lx / static_cast<double>(nx);
    const double hy = ly / static_cast<double>(ny);
    std::vector<double> p(nx * ny), q(nx * ny);
    for (std::size_t iy = 0; iy < ny; ++iy) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double x = hx * static_cast<double>(ix);
            const double y = hy * static_cast<double>(iy);
            p[ix + nx * iy] = phi(x, y);
            q[ix + nx * iy] = psi(x, y);
        }
    }
    require_finite(p, "phi");
    require_finite(q, "psi");
    return torus_from(nx, ny, lx, ly, std::move(p), std::move(q),
                      [&phi, nx, hx, hy](std::size_t i, int axis) {
                          const double x = hx * static_cast<double>(i % nx);
                          const double y = hy * static_cast<double>(i / nx);
                          return axis == 0 ? phi(x + 0.5 * hx, y) : phi(x, y + 0.5 * hy);
                      });
}

GeometryPtr make_gauss_line(int order) {
    if (order < 4) {
        throw Error(ErrorKind::invalid_input,
                    "gauss-line needs order >= 4, got " + std::to_string(order));
    }
    const hermite::GaussRule rule = hermite::gauss_rule(order);
    const auto m = static_cast<std::size_t>(order);
    GeometryData data;
    data.kind = GeometryKind::gauss_line;
    data.dimension = 1;
    data.shape = {m};
    data.coordinates = rule.nodes;
    data.measure = rule.weights;
    data.psi.assign(m, 0.0);
    data.phi.resize(m);
    for (std::size_t k = 0; k < m; ++k) data.phi[k] = 0.25 * rule.nodes[k] * rule.nodes[k];
    data.hermite.order = order;
    data.hermite.values.resize(order, order);
    std::vector<double> p(m);
    for (std::size_t k = 0; k < m; ++k) {
        hermite::orthonormal_values(rule.nodes[k], p);
        for (std::size_t n = 0; n < m; ++n) {
            data.hermite.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) = p[n];
        }
    }
    return std::make_shared<const WeightedGeometry>(std::move(data));
}

}  // namespace pfreq
