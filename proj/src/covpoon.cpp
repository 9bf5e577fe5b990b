#include "pfreq/covpoon.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pfreq/errors.hpp"
#include "pfreq/hermite.hpp"

namespace pfreq {

std::string_view to_string(OracleKind kind) {
    switch (kind) {
        case OracleKind::constant: return "constant";
        case OracleKind::linear: return "linear";
        case OracleKind::caloric_quadratic: return "caloric-quadratic";
        case OracleKind::heat_kernel: return "heat-kernel";
        case OracleKind::custom_polynomial: return "custom-polynomial";
    }
    return "unknown";
}

OracleKind oracle_kind_from_string(std::string_view name) {
    for (OracleKind k : {OracleKind::constant, OracleKind::linear, OracleKind::caloric_quadratic,
                         OracleKind::heat_kernel, OracleKind::custom_polynomial}) {
        if (to_string(k) == name) return k;
    }
    throw Error(ErrorKind::invalid_input, "unsupported oracle kind '" + std::string(name) + "'");
}

HeatOracle::HeatOracle(OracleKind kind, int dimension, std::vector<Polynomial> time_terms, double kernel_pole,
                       bool caloric)
    : kind_(kind), dimension_(dimension), terms_(std::move(time_terms)), kernel_pole_(kernel_pole), caloric_(caloric) {
    if (dimension_ != 1 && dimension_ != 2) {
        throw Error(ErrorKind::invalid_input, "oracles support n in {1, 2}, got " + std::to_string(dimension_));
    }
    if (kind_ == OracleKind::heat_kernel && !(kernel_pole_ < 0.0)) {
        throw Error(ErrorKind::invalid_input, "heat-kernel pole must lie at negative time");
    }
}

int HeatOracle::polynomial_degree() const {
    if (kind_ == OracleKind::heat_kernel) return -1;
    int d = 0;
    for (const Polynomial& q : terms_) d = std::max(d, q.degree());
    return d;
}

bool HeatOracle::defined_at(double t) const {
    if (!(t < 0.0)) return false;
    return kind_ != OracleKind::heat_kernel || t > kernel_pole_;
}

void HeatOracle::require_defined(double t) const {
    if (!defined_at(t)) {
        throw Error(ErrorKind::invalid_input,
                    std::string(to_string(kind_)) + " oracle is not defined at t = " + std::to_string(t));
    }
}

namespace {

struct KernelTerms {
    double u;
    double tau;
    double r2;
};

KernelTerms kernel(std::span<const double> x, double t, double pole, int n) {
    const double tau = t - pole;
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    const double u = std::pow(4.0 * std::numbers::pi * tau, -0.5 * n) * std::exp(-r2 / (4.0 * tau));
    return {u, tau, r2};
}

}  // namespace

double HeatOracle::value(std::span<const double> x, double t) const {
    require_defined(t);
    if (kind_ == OracleKind::heat_kernel) return kernel(x, t, kernel_pole_, dimension_).u;
    double s = 0.0, tp = 1.0;
    for (const Polynomial& q : terms_) {
        s += tp * q(x);
        tp *= t;
    }
    return s;
}

double HeatOracle::time_derivative(std::span<const double> x, double t) const {
    require_defined(t);
    if (kind_ == OracleKind::heat_kernel) {
        const auto k = kernel(x, t, kernel_pole_, dimension_);
        return k.u * (k.r2 / (4.0 * k.tau * k.tau) - 0.5 * dimension_ / k.tau);
    }
    double s = 0.0, tp = 1.0;
    for (std::size_t j = 1; j < terms_.size(); ++j) {
        s += static_cast<double>(j) * tp * terms_[j](x);
        tp *= t;
    }
    return s;
}

double HeatOracle::laplacian(std::span<const double> x, double t) const {
    require_defined(t);
    if (kind_ == OracleKind::heat_kernel) {
        const auto k = kernel(x, t, kernel_pole_, dimension_);
        return k.u * (k.r2 / (4.0 * k.tau * k.tau) - 0.5 * dimension_ / k.tau);
    }
    double s = 0.0, tp = 1.0;
    for (const Polynomial& q : terms_) {
        s += tp * q.laplacian()(x);
        tp *= t;
    }
    return s;
}

std::vector<double> HeatOracle::gradient(std::span<const double> x, double t) const {
    require_defined(t);
    std::vector<double> g(static_cast<std::size_t>(dimension_), 0.0);
    if (kind_ == OracleKind::heat_kernel) {
        const auto k = kernel(x, t, kernel_pole_, dimension_);
        for (int a = 0; a < dimension_; ++a) g[static_cast<std::size_t>(a)] = -x[static_cast<std::size_t>(a)] / (2.0 * k.tau) * k.u;
        return g;
    }
    for (int a = 0; a < dimension_; ++a) {
        double s = 0.0, tp = 1.0;
        for (const Polynomial& q : terms_) {
            s += tp * q.derivative(a)(x);
            tp *= t;
        }
        g[static_cast<std::size_t>(a)] = s;
    }
    return g;
}

HeatOracle make_oracle(OracleKind kind, int n, const OracleParams& params) {
    if (n != 1 && n != 2) throw Error(ErrorKind::invalid_input, "oracles support n in {1, 2}, got " + std::to_string(n));
    switch (kind) {
        case OracleKind::constant:
            return HeatOracle(kind, n, {Polynomial::monomial(params.constant, 0, 0)}, 0.0, true);
        case OracleKind::linear: {
            std::vector<double> a = params.linear.empty() ? std::vector<double>{1.0} : params.linear;
            if (a.size() > static_cast<std::size_t>(n)) {
                throw Error(ErrorKind::invalid_input, "linear oracle has more coefficients than dimensions");
            }
            Polynomial p;
            for (std::size_t i = 0; i < a.size(); ++i) p.add(a[i], i == 0 ? 1 : 0, i == 1 ? 1 : 0);
            return HeatOracle(kind, n, {p}, 0.0, true);
        }
        case OracleKind::caloric_quadratic: {
            Polynomial r2 = Polynomial::monomial(1.0, 2, 0);
            if (n == 2) r2.add(1.0, 0, 2);
            return HeatOracle(kind, n, {r2, Polynomial::monomial(2.0 * n, 0, 0)}, 0.0, true);
        }
        case OracleKind::heat_kernel:
            return HeatOracle(kind, n, {}, params.kernel_pole, true);
        case OracleKind::custom_polynomial: {
            if (n == 1 && params.polynomial.uses_y()) {
                throw Error(ErrorKind::invalid_input, "1D custom polynomial cannot depend on y");
            }
            if (!params.caloric_completion) {
                return HeatOracle(kind, n, {params.polynomial}, 0.0, params.polynomial.laplacian().is_zero());
            }
            std::vector<Polynomial> terms;
            Polynomial current = params.polynomial;
            double factorial = 1.0;
            for (int k = 0; !current.is_zero(); ++k) {
                if (k > 0) factorial *= k;
                terms.push_back(current * (1.0 / factorial));
                current = current.laplacian();
            }
            if (terms.empty()) terms.push_back(Polynomial{});
            return HeatOracle(kind, n, std::move(terms), 0.0, true);
        }
    }
    throw Error(ErrorKind::invalid_input, "unsupported oracle kind");
}

std::vector<double> CovSolution::mapped_point(std::span<const double> x, double s) const {
    std::vector<double> y(x.begin(), x.end());
    const double scale = std::exp(-0.5 * s);
    for (double& v : y) v *= scale;
    return y;
}

double CovSolution::value(std::span<const double> x, double s) const {
    return oracle_.value(mapped_point(x, s), -std::exp(-s));
}

double CovSolution::s_derivative(std::span<const double> x, double s) const {
    const double t = -std::exp(-s);
    const std::vector<double> y = mapped_point(x, s);
    const std::vector<double> g = oracle_.gradient(y, t);
    double gx = 0.0;
    for (std::size_t a = 0; a < g.size(); ++a) gx += g[a] * x[a];
    return -0.5 * std::sqrt(-t) * gx - t * oracle_.time_derivative(y, t);
}

std::vector<double> CovSolution::gradient(std::span<const double> x, double s) const {
    const double t = -std::exp(-s);
    std::vector<double> g = oracle_.gradient(mapped_point(x, s), t);
    for (double& v : g) v *= std::sqrt(-t);
    return g;
}

double CovSolution::laplacian(std::span<const double> x, double s) const {
    const double t = -std::exp(-s);
    return -t * oracle_.laplacian(mapped_point(x, s), t);
}

double CovSolution::drift_laplacian(std::span<const double> x, double s) const {
    const std::vector<double> g = gradient(x, s);
    double gx = 0.0;
    for (std::size_t a = 0; a < g.size(); ++a) gx += g[a] * x[a];
    return laplacian(x, s) - 0.5 * gx;
}

double CovSolution::source(std::span<const double> x, double s) const {
    const double t = -std::exp(-s);
    const std::vector<double> y = mapped_point(x, s);
    return std::exp(-s) * (oracle_.time_derivative(y, t) - oracle_.laplacian(y, t));
}

CovSolution cov_transform(const HeatOracle& oracle) { return CovSolution(oracle); }

CheckReport check_cov_residual(const CovSolution& cov, std::span<const CovSample> samples, double tol) {
    MarginTracker m;
    double worst = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const CovSample& p = samples[k];
        if (p.x.size() != static_cast<std::size_t>(cov.oracle().dimension())) {
            throw Error(ErrorKind::invalid_input, "sample point dimension does not match the oracle");
        }
        const double lhs = cov.s_derivative(p.x, p.s) - cov.drift_laplacian(p.x, p.s);
        const double residual = std::abs(lhs - cov.source(p.x, p.s));
        worst = std::max(worst, residual);
        m.observe(-residual, k);
    }
    CheckReport r;
    r.name = "cov_residual";
    r.set_margin(m.any ? m.value : 0.0, m.where, tol);
    r.aux["max_residual"] = worst;
    r.aux["samples"] = static_cast<double>(samples.size());
    r.notes["location_unit"] = "sample";
    return r;
}

namespace {

int quadrature_order(const HeatOracle& oracle, int order) {
    if (order > 0) return std::max(order, 1);
    const int d = oracle.polynomial_degree();
    return d < 0 ? 96 : std::max(d + 1, 4);
}

// int f(z) e^{-|z|^2/4} dz over R^n with a tensor Gauss rule in z = sigma * zeta.
template <typename F>
double gauss_integral(int n, int order, F&& f, double sigma = 1.0) {
    const hermite::GaussRule rule = hermite::gauss_rule(order);
    const double tilt = 0.25 * (sigma * sigma - 1.0);
    auto g = [&](double a, double b) {
        const double z[2] = {sigma * a, sigma * b};
        return f(std::span<const double>(z, static_cast<std::size_t>(n))) * std::exp(-tilt * (a * a + b * b));
    };
    double s = 0.0;
    if (n == 1) {
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * g(rule.nodes[i], 0.0);
        return sigma * s;
    }
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            s += rule.weights[i] * rule.weights[j] * g(rule.nodes[i], rule.nodes[j]);
        }
    }
    return sigma * sigma * s;
}

// Rule scale matching a squared heat kernel e^{-c |z|^2} against the weight; 1 for polynomials.
double kernel_scale(const HeatOracle& oracle, double c) {
    return oracle.kind() == OracleKind::heat_kernel ? 1.0 / std::sqrt(1.0 + 4.0 * c) : 1.0;
}

}  // namespace

double poon_H(const HeatOracle& oracle, double R, int order) {
    if (!(R > 0.0) || !std::isfinite(R)) throw Error(ErrorKind::invalid_input, "poon_H needs R > 0");
    const double t = -R * R;
    if (!oracle.defined_at(t)) {
        throw Error(ErrorKind::invalid_input, "oracle is not integrable at t = -R^2 = " + std::to_string(t));
    }
    const int n = oracle.dimension();
    const double c = R * R / (2.0 * (t - oracle.kernel_pole()));
    const double integral = gauss_integral(
        n, quadrature_order(oracle, order),
        [&](std::span<const double> z) {
            double y[2] = {R * z[0], z.size() > 1 ? R * z[1] : 0.0};
            const double u = oracle.value(std::span<const double>(y, z.size()), t);
            return u * u;
        },
        kernel_scale(oracle, c));
    return std::pow(4.0 * std::numbers::pi, -0.5 * n) * integral;
}

double gaussian_I(const CovSolution& cov, double s, int order) {
    const int n = cov.oracle().dimension();
    const double t = -std::exp(-s);
    const double c = -t / (2.0 * (t - cov.oracle().kernel_pole()));
    return gauss_integral(
        n, quadrature_order(cov.oracle(), order),
        [&](std::span<const double> x) {
            const double w = cov.value(x, s);
            return w * w;
        },
        kernel_scale(cov.oracle(), c));
}

namespace {

void require_grid(const std::vector<double>& s_grid, std::size_t minimum) {
    if (s_grid.size() < minimum) {
        throw Error(ErrorKind::invalid_input, "s grid needs at least " + std::to_string(minimum) + " samples");
    }
}

}  // namespace

CheckReport check_poon_convexity(const HeatOracle& oracle, const std::vector<double>& s_grid, double tol) {
    require_grid(s_grid, 3);
    std::vector<double> plus(s_grid.size()), minus(s_grid.size());
    for (std::size_t k = 0; k < s_grid.size(); ++k) {
        plus[k] = std::log(poon_H(oracle, std::exp(0.5 * s_grid[k])));
        minus[k] = std::log(poon_H(oracle, std::exp(-0.5 * s_grid[k])));
    }
    MarginTracker mp, mm;
    for (std::size_t k = 1; k + 1 < s_grid.size(); ++k) {
        mp.observe(plus[k + 1] - 2.0 * plus[k] + plus[k - 1], k);
        mm.observe(minus[k + 1] - 2.0 * minus[k] + minus[k - 1], k);
    }
    CheckReport r;
    r.name = "poon_convexity";
    r.set_margin(mp.value, mp.where, tol);
    r.aux["plus_min_second_difference"] = mp.value;
    r.aux["minus_min_second_difference"] = mm.value;
    r.notes["normalization"] = "(4 pi R^2)^(-n/2)";
    return r;
}

CheckReport check_I_equals_H(const HeatOracle& oracle, const std::vector<double>& s_grid, double tol) {
    require_grid(s_grid, 2);
    const CovSolution cov(oracle);
    const double expected = std::pow(4.0 * std::numbers::pi, 0.5 * oracle.dimension());
    std::vector<double> ratio(s_grid.size()), ratio_plus;
    bool plus_defined = true;
    MarginTracker m;
    for (std::size_t k = 0; k < s_grid.size(); ++k) {
        const double s = s_grid[k];
        const double Iw = gaussian_I(cov, s);
        ratio[k] = Iw / poon_H(oracle, std::exp(-0.5 * s));
        m.observe(-std::abs(ratio[k] / expected - 1.0), k);
        if (plus_defined && oracle.defined_at(-std::exp(s))) {
            ratio_plus.push_back(Iw / poon_H(oracle, std::exp(0.5 * s)));
        } else {
            plus_defined = false;
        }
    }
    auto spread = [](const std::vector<double>& v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return (*hi - *lo) / std::abs(*hi);
    };
    const double constancy = spread(ratio);
    CheckReport r;
    r.name = "I_equals_H";
    r.set_margin(std::min(m.value, -constancy), m.where, tol);
    r.aux["expected_ratio"] = expected;
    r.aux["ratio_first"] = ratio.front();
    r.aux["ratio_spread"] = constancy;
    r.aux["max_rel_deviation"] = -m.value;
    if (plus_defined) {
        r.aux["plus_ratio_spread"] = spread(ratio_plus);
    } else {
        r.notes["plus_ratio"] = "H(e^{s/2}) undefined on part of the grid";
    }
    r.notes["gated_convention"] = "R = e^{-s/2}";
    return r;
}

Trajectory cov_trajectory(const CovSolution& cov, const GeometryPtr& gauss_line, const TimeGrid& s_grid) {
    if (gauss_line->kind() != GeometryKind::gauss_line || cov.oracle().dimension() != 1) {
        throw Error(ErrorKind::invalid_input, "cov trajectories need a 1D oracle on a gauss-line geometry");
    }
    std::vector<Field> fields;
    fields.reserve(s_grid.size());
    for (std::size_t k = 0; k < s_grid.size(); ++k) {
        const double s = s_grid.time(k);
        fields.push_back(Field::sample(gauss_line, [&](std::span<const double> x) { return cov.value(x, s); }));
    }
    return Trajectory(s_grid, std::move(fields), Provenance::analytic_oracle);
}

}  // namespace pfreq
