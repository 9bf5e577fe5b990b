#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "pfreq/errors.hpp"
#include "pfreq/field.hpp"
#include "pfreq/geometry.hpp"
#include "pfreq/hermite.hpp"
#include "pfreq/random.hpp"
#include "pfreq/sampling.hpp"

using namespace pfreq;

namespace {

constexpr double kPi = std::numbers::pi;

GeometryPtr flat_circle(std::size_t n) { return make_circle(n, 2.0 * kPi, std::vector<double>(n, 0.0)); }

Field sample1(const GeometryPtr& g, double (*f)(double)) {
    return Field::sample(g, [f](std::span<const double> x) { return f(x[0]); });
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::numerical_failure;
}

// (2m-1)!! (2 sigma^2)^m ... for the weight e^{-x^2/4}: variance 2, total mass 2 sqrt(pi).
double gaussian_moment(int p) {
    if (p % 2 == 1) return 0.0;
    double m = 2.0 * std::sqrt(kPi);
    for (int k = p - 1; k > 0; k -= 2) m *= 2.0 * k;
    return m;
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("flat circle measure sums to the length") {
    CHECK(flat_circle(128)->total_measure() == doctest::Approx(2.0 * kPi).epsilon(1e-14));
}

TEST_CASE("circle with phi = cos x matches the Bessel identity 2 pi I0(1)") {
    const auto g = make_circle(256, 2.0 * kPi, [](double x) { return std::cos(x); });
    CHECK(std::abs(g->total_measure() - 2.0 * kPi * std::cyl_bessel_i(0.0, 1.0)) < 1e-12);
    CHECK(g->total_measure() == doctest::Approx(7.954927).epsilon(1e-7));
}

TEST_CASE("circle preconditions") {
    CHECK(kind_of([] { flat_circle(3); }) == ErrorKind::invalid_input);
    CHECK(kind_of([] { make_circle(8, 0.0, std::vector<double>(8, 0.0)); }) == ErrorKind::invalid_input);
    std::vector<double> bad(8, 0.0);
    bad[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK(kind_of([&] { make_circle(8, 1.0, bad); }) == ErrorKind::invalid_input);
    CHECK(kind_of([] { make_circle(8, 1.0, std::vector<double>(7, 0.0)); }) == ErrorKind::invalid_input);
    CHECK(kind_of([] { make_circle(8, 1.0, [](double x) { return 1.0 / (x - 0.0625); }); }) ==
          ErrorKind::invalid_input);
}

TEST_CASE("circle measure and edges") {
    const auto g = make_circle(16, 2.0, [](double x) { return x * x; });
    const double h = 2.0 / 16.0;
    for (std::size_t i = 0; i < 16; ++i) {
        CHECK(g->coordinate(i)[0] == doctest::Approx(h * i));
        CHECK(g->measure()[i] == doctest::Approx(h * std::exp(-h * h * i * i)));
    }
    REQUIRE(g->edges().size() == 16);
    for (const Edge& e : g->edges()) {
        const double mid = h * (e.from + 0.5);
        CHECK(e.to == (e.from + 1) % 16);
        CHECK(e.conductance == doctest::Approx(std::exp(-mid * mid) / h));
    }
    const std::vector<double> phi = {0.0, 1.0, 2.0, 3.0};
    const auto node_form = make_circle(4, 4.0, phi);
    CHECK(node_form->edges()[0].conductance == doctest::Approx(std::exp(-0.5)));
    CHECK(node_form->edges()[3].conductance == doctest::Approx(std::exp(-1.5)));
}

TEST_CASE("torus measure: flat, conformal against a refined trapezoid, constant conformal factor") {
    const std::vector<double> z256(256, 0.0);
    CHECK(make_torus(16, 16, 2.0 * kPi, 2.0 * kPi, z256, z256)->total_measure() ==
          doctest::Approx(4.0 * kPi * kPi).epsilon(1e-12));

    auto psi = [](double x, double y) { return 0.3 * std::sin(x) * std::cos(y); };
    const auto g = make_torus(32, 32, 2.0 * kPi, 2.0 * kPi, [](double, double) { return 0.0; }, psi);
    double oracle = 0.0;
    const int m = 512;
    const double h = 2.0 * kPi / m;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) oracle += h * h * std::exp(2.0 * psi(h * i, h * j));
    }
    CHECK(std::abs(g->total_measure() / oracle - 1.0) < 1e-6);

    const double c = 0.4;
    const std::vector<double> psic(256, c);
    CHECK(make_torus(16, 16, 2.0 * kPi, 2.0 * kPi, z256, psic)->total_measure() ==
          doctest::Approx(std::exp(2.0 * c) * 4.0 * kPi * kPi).epsilon(1e-12));
}

TEST_CASE("torus layout and preconditions") {
    const auto g = make_torus(4, 5, 1.0, 2.0, [](double, double) { return 0.0; }, [](double, double) { return 0.0; });
    CHECK(g->node_count() == 20);
    CHECK(g->coordinate(6)[0] == doctest::Approx(0.5));
    CHECK(g->coordinate(6)[1] == doctest::Approx(0.4));
    CHECK(g->edges().size() == 40);
    CHECK(kind_of([] {
              make_torus(3, 8, 1.0, 1.0, [](double, double) { return 0.0; }, [](double, double) { return 0.0; });
          }) == ErrorKind::invalid_input);
    CHECK(kind_of([] {
              make_torus(8, 8, 1.0, -1.0, [](double, double) { return 0.0; }, [](double, double) { return 0.0; });
          }) == ErrorKind::invalid_input);
}

TEST_CASE("gauss-line quadrature reproduces Gaussian moments") {
    for (int order : {4, 8, 24}) {
        const auto g = make_gauss_line(order);
        for (int p = 0; p <= std::min(2 * order - 1, 12); ++p) {
            double sum = 0.0, scale = 1.0;
            for (std::size_t i = 0; i < g->node_count(); ++i) {
                const double term = g->measure()[i] * std::pow(g->coordinate(i)[0], p);
                sum += term;
                scale += std::abs(term);
            }
            CAPTURE(order);
            CAPTURE(p);
            CHECK(std::abs(sum - gaussian_moment(p)) <= 1e-12 * scale);
        }
    }
    const auto g = make_gauss_line(8);
    CHECK(g->total_measure() == doctest::Approx(3.5449077).epsilon(1e-7));
    CHECK(kind_of([] { make_gauss_line(3); }) == ErrorKind::invalid_input);
    for (std::size_t i = 0; i < g->node_count(); ++i) {
        const double x = g->coordinate(i)[0];
        CHECK(g->phi()[i] == doctest::Approx(x * x / 4.0));
    }
}

TEST_CASE("hermite polynomials match the explicit probabilists' forms") {
    std::vector<double> p(5);
    for (double x : {-3.1, -0.4, 0.0, 1.7, 5.0}) {
        hermite::orthonormal_values(x, p);
        const double y = x / std::sqrt(2.0);
        const double he[5] = {1.0, y, y * y - 1.0, y * y * y - 3.0 * y, y * y * y * y - 6.0 * y * y + 3.0};
        double fact = 1.0;
        for (int n = 0; n < 5; ++n) {
            if (n > 0) fact *= n;
            CHECK(p[n] == doctest::Approx(he[n] / std::sqrt(2.0 * std::sqrt(kPi) * fact)).epsilon(1e-13));
        }
    }
    const auto rule = hermite::gauss_rule(12);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        CHECK(rule.nodes[i] == doctest::Approx(-rule.nodes[rule.nodes.size() - 1 - i]).epsilon(1e-14));
        CHECK(rule.weights[i] > 0.0);
    }
}

TEST_CASE("weighted inner product examples") {
    const auto g = flat_circle(128);
    const Field one = Field::constant(g, 1.0);
    CHECK(weighted_inner(one, one) == doctest::Approx(2.0 * kPi).epsilon(1e-14));
    const Field s = sample1(g, [](double x) { return std::sin(x); });
    const Field c = sample1(g, [](double x) { return std::cos(x); });
    CHECK(std::abs(weighted_inner(s, c)) < 1e-12);
    const Field two = sample1(g, [](double x) { return std::sin(x) + std::sin(2.0 * x); });
    CHECK(weighted_inner(two, two) == doctest::Approx(2.0 * kPi).epsilon(1e-13));
}

TEST_CASE("incompatible fields are rejected") {
    const auto a = flat_circle(16);
    const auto b = flat_circle(16);
    CHECK(kind_of([&] { weighted_inner(Field::constant(a, 1.0), Field::constant(b, 1.0)); }) ==
          ErrorKind::incompatible_fields);
    CHECK(kind_of([&] { weighted_inner(Field::constant(a, 1.0), Field::constant(a, 1.0, 2)); }) ==
          ErrorKind::incompatible_fields);
    CHECK(kind_of([&] { energy_pairing(Field::constant(a, 1.0), Field::constant(b, 1.0)); }) ==
          ErrorKind::incompatible_fields);
}

TEST_CASE("fields reject malformed values") {
    const auto g = flat_circle(8);
    CHECK(kind_of([&] { Field(g, Eigen::MatrixXd::Zero(7, 1)); }) == ErrorKind::invalid_input);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(8, 1);
    v(2, 0) = std::numeric_limits<double>::infinity();
    CHECK(kind_of([&] { Field(g, v); }) == ErrorKind::invalid_input);
    CHECK(kind_of([&] { Field(nullptr, Eigen::MatrixXd::Zero(8, 1)); }) == ErrorKind::invalid_input);
}

TEST_CASE("dirichlet energy examples and second-order convergence") {
    const auto g = flat_circle(128);
    CHECK(dirichlet_energy(Field::constant(g, 3.0)) == doctest::Approx(0.0));
    const double e1 = dirichlet_energy(sample1(g, [](double x) { return std::sin(x); }));
    CHECK(std::abs(e1 - kPi) < 1e-3);
    const double e2 = dirichlet_energy(sample1(g, [](double x) { return std::sin(x) + std::sin(2.0 * x); }));
    CHECK(std::abs(e2 / (5.0 * kPi) - 1.0) < 1e-3);
    // Exact discrete value: pi (4/h^2) sin^2(k h / 2) per mode.
    const double h = 2.0 * kPi / 128.0;
    auto symbol = [h](int k) { return 4.0 / (h * h) * std::pow(std::sin(k * h / 2.0), 2); };
    CHECK(e2 == doctest::Approx(kPi * (symbol(1) + symbol(2))).epsilon(1e-12));

    const double err64 = std::abs(dirichlet_energy(sample1(flat_circle(64), [](double x) { return std::sin(x); })) - kPi);
    const double err128 = std::abs(e1 - kPi);
    CHECK(err64 / err128 == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("weighted inner product is symmetric, bilinear and positive on random fields") {
    const auto g = make_circle(64, 2.0 * kPi, [](double x) { return 0.5 * std::sin(x) + 0.2 * std::cos(3.0 * x); });
    Rng rng(derive_seed(11, 0));
    for (int trial = 0; trial < 25; ++trial) {
        const Field u = random_smooth_field(g, 6, rng, 2);
        const Field v = random_smooth_field(g, 6, rng, 2);
        const Field w = random_smooth_field(g, 6, rng, 2);
        const double a = 0.7, b = -1.3;
        const double scale = weighted_norm(u) * (weighted_norm(v) + weighted_norm(w)) + 1.0;
        CHECK(std::abs(weighted_inner(u, v) - weighted_inner(v, u)) <= 1e-13 * scale);
        const Field combo = v.with_values(a * v.values() + b * w.values());
        CHECK(std::abs(weighted_inner(u, combo) - a * weighted_inner(u, v) - b * weighted_inner(u, w)) <=
              1e-13 * scale);
        CHECK(weighted_inner(u, u) > 0.0);
        CHECK(std::abs(energy_pairing(u, v) - energy_pairing(v, u)) <= 1e-12 * scale);
    }
    CHECK(weighted_inner(Field::zeros(g), Field::zeros(g)) == 0.0);
}

TEST_CASE("grid refinement changes smooth integrals by O(h^2) or better") {
    auto integral = [](std::size_t n) {
        const auto g = make_circle(n, 2.0 * kPi, [](double x) { return std::cos(x); });
        return weighted_norm(Field::sample(g, [](std::span<const double> x) { return 1.0 + std::sin(x[0]); }));
    };
    const double h = 2.0 * kPi / 32.0;
    CHECK(std::abs(integral(32) - integral(64)) < h * h);
}

TEST_CASE("vector fields pair componentwise") {
    const auto g = flat_circle(32);
    Eigen::MatrixXd v(32, 2);
    for (int i = 0; i < 32; ++i) {
        v(i, 0) = std::sin(g->coordinate(i)[0]);
        v(i, 1) = 2.0;
    }
    const Field f(g, v);
    CHECK(weighted_inner(f, f) ==
          doctest::Approx(weighted_inner(f.component(0), f.component(0)) + weighted_inner(f.component(1), f.component(1))));
    CHECK(dirichlet_energy(f) == doctest::Approx(dirichlet_energy(f.component(0))));
}

TEST_CASE("nodal gradient is centered on grids and exact for polynomials on gauss-line") {
    const auto g = flat_circle(256);
    const auto grad = nodal_gradient(sample1(g, [](double x) { return std::sin(x); }));
    REQUIRE(grad.size() == 1);
    double err = 0.0;
    for (std::size_t i = 0; i < 256; ++i) err = std::max(err, std::abs(grad[0](i, 0) - std::cos(g->coordinate(i)[0])));
    CHECK(err < 1e-3);
    const auto gl = make_gauss_line(12);
    const auto gg = nodal_gradient(Field::sample(gl, [](std::span<const double> x) { return x[0] * x[0] * x[0]; }));
    for (std::size_t i = 0; i < gl->node_count(); ++i) {
        const double x = gl->coordinate(i)[0];
        CHECK(gg[0](i, 0) == doctest::Approx(3.0 * x * x).epsilon(1e-10));
    }
}

TEST_CASE("time grid") {
    const TimeGrid grid(0.5, 1.5, 4);
    CHECK(grid.size() == 5);
    CHECK(grid.dt() == doctest::Approx(0.25));
    CHECK(grid.time(4) == 1.5);
    CHECK(grid.times()[2] == doctest::Approx(1.0));
    CHECK(kind_of([] { TimeGrid(1.0, 1.0, 4); }) == ErrorKind::invalid_input);
    CHECK(kind_of([] { TimeGrid(0.0, 1.0, 0); }) == ErrorKind::invalid_input);
    CHECK(kind_of([&] { grid.time(5); }) == ErrorKind::invalid_input);
}

TEST_CASE("random smooth fields are reproducible per seed") {
    const auto g = flat_circle(32);
    Rng a(derive_seed(5, 2)), b(derive_seed(5, 2)), c(derive_seed(5, 3));
    const Field fa = random_smooth_field(g, 4, a);
    CHECK((fa.values() - random_smooth_field(g, 4, b).values()).norm() == 0.0);
    CHECK((fa.values() - random_smooth_field(g, 4, c).values()).norm() > 0.0);
    CHECK(derive_seed(5, 2) != derive_seed(5, 3));
}

}
