#include "pfreq/sampling.hpp"

#include <cmath>
#include <numbers>

#include "pfreq/errors.hpp"

namespace pfreq {

TrigSeries TrigSeries::random(int dimension, std::span<const double> lengths, int modes, double amplitude,
                              Rng& rng) {
    if (dimension < 1 || dimension > 2 || static_cast<int>(lengths.size()) != dimension || modes < 0) {
        throw Error(ErrorKind::invalid_input, "trigonometric series needs 1 or 2 axes and modes >= 0");
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    TrigSeries out;
    const int ky_max = dimension == 2 ? modes : 0;
    for (int ky = 0; ky <= ky_max; ++ky) {
        for (int kx = ky == 0 ? 1 : -modes; kx <= modes; ++kx) {
            const double k2 = static_cast<double>(kx * kx + ky * ky);
            const double scale = amplitude / (1.0 + k2);
            Term term;
            term.wave.push_back(2.0 * std::numbers::pi * kx / lengths[0]);
            if (dimension == 2) term.wave.push_back(2.0 * std::numbers::pi * ky / lengths[1]);
            term.a = scale * normal(rng);
            term.b = scale * normal(rng);
            out.terms_.push_back(std::move(term));
        }
    }
    return out;
}

double TrigSeries::operator()(std::span<const double> x) const {
    double sum = 0.0;
    for (const Term& term : terms_) {
        double arg = 0.0;
        for (std::size_t i = 0; i < term.wave.size(); ++i) arg += term.wave[i] * x[i];
        sum += term.a * std::cos(arg) + term.b * std::sin(arg);
    }
    return sum;
}

Field random_smooth_field(const GeometryPtr& geometry, int modes, Rng& rng, int components) {
    if (modes < 1) throw Error(ErrorKind::invalid_input, "random field needs modes >= 1");
    if (components < 1) throw Error(ErrorKind::invalid_input, "random field needs at least one component");
    const WeightedGeometry& g = *geometry;
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd values(static_cast<Eigen::Index>(g.node_count()), components);
    for (int c = 0; c < components; ++c) {
        if (g.periodic()) {
            const double offset = normal(rng);
            const TrigSeries series = TrigSeries::random(g.dimension(), g.lengths(), modes, 1.0, rng);
            for (std::size_t i = 0; i < g.node_count(); ++i) {
                values(static_cast<Eigen::Index>(i), c) = offset + series(g.coordinate(i));
            }
        } else {
            const Eigen::MatrixXd& P = g.hermite().values;
            const int n = std::min<int>(modes, static_cast<int>(P.cols()));
            Eigen::VectorXd coeff = Eigen::VectorXd::Zero(P.cols());
            for (int k = 0; k < n; ++k) coeff(k) = normal(rng) / (1.0 + k);
            values.col(c) = P * coeff;
        }
    }
    return Field(geometry, std::move(values));
}

}  // namespace pfreq
