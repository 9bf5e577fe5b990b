#pragma once

#include <span>
#include <vector>

#include "pfreq/field.hpp"
#include "pfreq/random.hpp"

namespace pfreq {

/// Real trigonometric polynomial on a periodic box,
/// sum_k a_k cos(2 pi <k, x / L>) + b_k sin(2 pi <k, x / L>) over integer wave vectors k
/// with |k_i| <= modes.
class TrigSeries {
public:
    /// Coefficients ~ N(0, (amplitude / (1 + |k|^2))^2); the constant term is omitted.
    static TrigSeries random(int dimension, std::span<const double> lengths, int modes, double amplitude, Rng& rng);

    double operator()(std::span<const double> x) const;

private:
    struct Term {
        std::vector<double> wave;  // 2 pi k_i / L_i
        double a;
        double b;
    };
    std::vector<Term> terms_;
};

/// Smooth random field: a random trigonometric series of degree `modes` on periodic grids
/// (with a random constant offset), and sum_{n < modes} a_n p_n on gauss-line.
Field random_smooth_field(const GeometryPtr& geometry, int modes, Rng& rng, int components = 1);

}  // namespace pfreq
