#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "pfreq/field.hpp"
#include "pfreq/polynomial.hpp"
#include "pfreq/report.hpp"

namespace pfreq {

enum class OracleKind { constant, linear, caloric_quadratic, heat_kernel, custom_polynomial };

std::string_view to_string(OracleKind kind);
OracleKind oracle_kind_from_string(std::string_view name);

struct OracleParams {
    double constant = 1.0;
    std::vector<double> linear;  // coefficients of x (and y); defaults to e_1
    Polynomial polynomial;       // custom-polynomial initial data p(x)
    bool caloric_completion = true;
    double kernel_pole = -2.0;   // heat kernel is centered at (0, kernel_pole); defined for t > pole
};

/// Closed-form function on R^n x (-inf, 0) with hand-coded derivatives. Polynomial kinds
/// are stored as u = sum_k t^k q_k(x); caloric completion of p uses q_k = Delta^k p / k!.
class HeatOracle {
public:
    HeatOracle(OracleKind kind, int dimension, std::vector<Polynomial> time_terms, double kernel_pole,
               bool caloric);

    OracleKind kind() const noexcept { return kind_; }
    int dimension() const noexcept { return dimension_; }
    bool caloric() const noexcept { return caloric_; }
    /// Spatial degree for polynomial kinds, -1 for the heat kernel.
    int polynomial_degree() const;
    bool defined_at(double t) const;
    double kernel_pole() const noexcept { return kernel_pole_; }
    const std::vector<Polynomial>& time_terms() const noexcept { return terms_; }

    double value(std::span<const double> x, double t) const;
    double time_derivative(std::span<const double> x, double t) const;
    double laplacian(std::span<const double> x, double t) const;
    std::vector<double> gradient(std::span<const double> x, double t) const;

private:
    void require_defined(double t) const;

    OracleKind kind_;
    int dimension_;
    std::vector<Polynomial> terms_;
    double kernel_pole_;
    bool caloric_;
};

/// Throws invalid-input for n outside {1, 2} or inconsistent parameters.
HeatOracle make_oracle(OracleKind kind, int dimension, const OracleParams& params = {});

/// w(x, s) = u(e^{-s/2} x, -e^{-s}) with derivatives from the chain rule:
///   d_s w = -(sqrt(-t)/2) <grad u, x> - t u_t,  grad w = sqrt(-t) grad u,  Delta w = -t Delta u.
class CovSolution {
public:
    explicit CovSolution(HeatOracle oracle) : oracle_(std::move(oracle)) {}

    const HeatOracle& oracle() const noexcept { return oracle_; }
    std::vector<double> mapped_point(std::span<const double> x, double s) const;

    double value(std::span<const double> x, double s) const;
    double s_derivative(std::span<const double> x, double s) const;
    std::vector<double> gradient(std::span<const double> x, double s) const;
    double laplacian(std::span<const double> x, double s) const;
    /// Ornstein-Uhlenbeck operator Delta w - <grad w, x> / 2.
    double drift_laplacian(std::span<const double> x, double s) const;
    /// e^{-s} (u_t - Delta u) at the mapped point.
    double source(std::span<const double> x, double s) const;

private:
    HeatOracle oracle_;
};

CovSolution cov_transform(const HeatOracle& oracle);

struct CovSample {
    std::vector<double> x;
    double s;
};

/// |(d_s - L) w - e^{-s}(u_t - Delta u)(mapped)| <= tol at every sample.
CheckReport check_cov_residual(const CovSolution& cov, std::span<const CovSample> samples, double tol);

/// Poon's H(R) = (4 pi R^2)^{-n/2} int u^2(y, -R^2) e^{-|y|^2/(4R^2)} dy by a tensor Gauss rule
/// scaled to variance 2R^2. order = 0 picks degree + 1 nodes for polynomial kinds (exact) and
/// 96 for the heat kernel.
double poon_H(const HeatOracle& oracle, double R, int order = 0);

/// I_w(s) = int w^2(x, s) e^{-|x|^2/4} dx with the same rule.
double gaussian_I(const CovSolution& cov, double s, int order = 0);

/// Second differences of s -> log H(e^{s/2}) are >= -tol (gated); aux carries the
/// same for s -> log H(e^{-s/2}).
CheckReport check_poon_convexity(const HeatOracle& oracle, const std::vector<double>& s_grid, double tol);

/// I_w(s) / H(e^{-s/2}) is constant in s and equals (4 pi)^{n/2}, both to relative tol.
/// aux["plus_ratio_spread"] reports the relative spread of I_w(s) / H(e^{+s/2}).
CheckReport check_I_equals_H(const HeatOracle& oracle, const std::vector<double>& s_grid, double tol);

/// Samples w(., s) on a gauss-line geometry along the s grid (n = 1).
Trajectory cov_trajectory(const CovSolution& cov, const GeometryPtr& gauss_line, const TimeGrid& s_grid);

}  // namespace pfreq
