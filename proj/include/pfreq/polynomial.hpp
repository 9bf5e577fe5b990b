#pragma once

#include <array>
#include <map>
#include <span>
#include <utility>

namespace pfreq {

/// Polynomial in at most two variables: sum c_{ij} x^i y^j.
class Polynomial {
public:
    using Exponents = std::pair<int, int>;

    Polynomial() = default;
    static Polynomial monomial(double coefficient, int px, int py = 0);

    Polynomial& add(double coefficient, int px, int py = 0);
    Polynomial operator+(const Polynomial& other) const;
    Polynomial operator*(double s) const;

    double operator()(std::span<const double> x) const;
    Polynomial derivative(int axis) const;
    Polynomial laplacian() const;
    int degree() const;  // -1 for the zero polynomial
    bool is_zero() const { return terms_.empty(); }
    bool uses_y() const;
    const std::map<Exponents, double>& terms() const noexcept { return terms_; }

private:
    std::map<Exponents, double> terms_;
};

}  // namespace pfreq
