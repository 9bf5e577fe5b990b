#include "pfreq/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace pfreq {

Polynomial Polynomial::monomial(double coefficient, int px, int py) {
    Polynomial p;
    p.add(coefficient, px, py);
    return p;
}

Polynomial& Polynomial::add(double coefficient, int px, int py) {
    if (coefficient == 0.0) return *this;
    auto& c = terms_[{px, py}];
    c += coefficient;
    if (c == 0.0) terms_.erase({px, py});
    return *this;
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
    Polynomial out = *this;
    for (const auto& [e, c] : other.terms_) out.add(c, e.first, e.second);
    return out;
}

Polynomial Polynomial::operator*(double s) const {
    Polynomial out;
    for (const auto& [e, c] : terms_) out.add(c * s, e.first, e.second);
    return out;
}

double Polynomial::operator()(std::span<const double> x) const {
    const double px = x.empty() ? 0.0 : x[0];
    const double py = x.size() > 1 ? x[1] : 0.0;
    double s = 0.0;
    for (const auto& [e, c] : terms_) {
        double term = c;
        for (int i = 0; i < e.first; ++i) term *= px;
        for (int j = 0; j < e.second; ++j) term *= py;
        s += term;
    }
    return s;
}

Polynomial Polynomial::derivative(int axis) const {
    Polynomial out;
    for (const auto& [e, c] : terms_) {
        if (axis == 0 && e.first > 0) out.add(c * e.first, e.first - 1, e.second);
        if (axis == 1 && e.second > 0) out.add(c * e.second, e.first, e.second - 1);
    }
    return out;
}

Polynomial Polynomial::laplacian() const { return derivative(0).derivative(0) + derivative(1).derivative(1); }

int Polynomial::degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_) d = std::max(d, e.first + e.second);
    return d;
}

bool Polynomial::uses_y() const {
    return std::any_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.first.second > 0; });
}

}  // namespace pfreq
