#pragma once

#include <span>
#include <vector>

namespace pfreq::hermite {

// Polynomials p_n orthonormal against e^{-x^2/4} dx on the real line.
//   p_0 = (2 sqrt(pi))^{-1/2},  p_{n+1} = (y p_n - sqrt(n) p_{n-1}) / sqrt(n+1),  y = x / sqrt(2)
// They satisfy p_n' = sqrt(n/2) p_{n-1} and are eigenfunctions of d^2/dx^2 - (x/2) d/dx
// with eigenvalue -n/2.
void orthonormal_values(double x, std::span<double> out);

struct GaussRule {
    std::vector<double> nodes;    // ascending, symmetric about 0
    std::vector<double> weights;  // positive; sum = 2 sqrt(pi)
};

/// Gauss rule with `order` nodes for the weight e^{-x^2/4}; exact for polynomials of
/// degree <= 2*order - 1. Nodes come from the Jacobi matrix and are polished by Newton
/// steps on p_order; weights use the Christoffel formula 1 / sum_n p_n(x_k)^2.
GaussRule gauss_rule(int order);

}  // namespace pfreq::hermite
