#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <vector>

#include "pfreq/errors.hpp"
#include "pfreq/operators.hpp"
#include "pfreq/random.hpp"
#include "pfreq/sampling.hpp"

using namespace pfreq;

namespace {

constexpr double kPi = std::numbers::pi;

GeometryPtr flat_circle(std::size_t n) { return make_circle(n, 2.0 * kPi, std::vector<double>(n, 0.0)); }

GeometryPtr weighted_torus(std::size_t n) {
    return make_torus(n, n, 2.0 * kPi, 2.0 * kPi, [](double x, double y) { return 0.4 * std::sin(x) * std::cos(y); },
                      [](double x, double y) { return 0.3 * std::cos(x + 2.0 * y); });
}

Field sample(const GeometryPtr& g, const std::function<double(double, double)>& f) {
    return Field::sample(g, [&f](std::span<const double> x) { return f(x[0], x.size() > 1 ? x[1] : 0.0); });
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::numerical_failure;
}

}  // namespace

TEST_SUITE("operators") {

TEST_CASE("constants are in the kernel on every geometry") {
    for (const GeometryPtr& g : {make_circle(64, 3.0, [](double x) { return std::sin(2.0 * kPi * x / 3.0); }),
                                 weighted_torus(16), make_gauss_line(20)}) {
        const Field Lu = apply(assemble(g), Field::constant(g, 2.5));
        CAPTURE(to_string(g->kind()));
        CHECK(max_abs(Lu.values()) < 1e-13);
    }
}

TEST_CASE("gauss-line operator on low-degree polynomials") {
    const auto g = make_gauss_line(16);
    const DriftOperator op = assemble(g);
    const Field Lx = op.apply(sample(g, [](double x, double) { return x; }));
    const Field Lq = op.apply(sample(g, [](double x, double) { return x * x - 2.0; }));
    for (std::size_t i = 0; i < g->node_count(); ++i) {
        const double x = g->coordinate(i)[0];
        CHECK(Lx(i) == doctest::Approx(-0.5 * x).epsilon(1e-11));
        CHECK(Lq(i) == doctest::Approx(-(x * x - 2.0)).epsilon(1e-11));
    }
}

TEST_CASE("flat circle Laplacian of sin x") {
    const auto g = flat_circle(128);
    const Field Lu = apply(assemble(g), sample(g, [](double x, double) { return std::sin(x); }));
    const double h = 2.0 * kPi / 128.0;
    const double symbol = 4.0 / (h * h) * std::pow(std::sin(h / 2.0), 2);
    double err = 0.0, err_symbol = 0.0;
    for (std::size_t i = 0; i < 128; ++i) {
        const double x = g->coordinate(i)[0];
        err = std::max(err, std::abs(Lu(i) + std::sin(x)));
        err_symbol = std::max(err_symbol, std::abs(Lu(i) + symbol * std::sin(x)));
    }
    CHECK(err < h * h);
    CHECK(err_symbol < 1e-12);
}

TEST_CASE("zero field, linearity and component selection") {
    const auto g = weighted_torus(12);
    const DriftOperator op = assemble(g);
    CHECK(max_abs(op.apply(Field::zeros(g, 2)).values()) == 0.0);
    Rng rng(derive_seed(3, 1));
    const Field u = random_smooth_field(g, 3, rng, 2);
    const Field v = random_smooth_field(g, 3, rng, 2);
    const double a = 1.7, b = -0.4;
    const Field lhs = op.apply(u.with_values(a * u.values() + b * v.values()));
    const Eigen::MatrixXd rhs = a * op.apply(u).values() + b * op.apply(v).values();
    CHECK(max_abs(lhs.values() - rhs) < 1e-11 * (1.0 + max_abs(rhs)));
    CHECK(max_abs(op.apply(u).component(1).values() - op.apply(u.component(1)).values()) < 1e-14);
    CHECK(kind_of([&] { op.apply(Field::constant(flat_circle(16), 1.0)); }) == ErrorKind::incompatible_fields);
}

TEST_CASE("weighted circle operator converges to e^phi (e^-phi u')' under refinement") {
    // phi = cos x, u = sin x:  L u = -sin x + sin x cos x.
    auto run = [](std::size_t n) {
        const auto g = make_circle(n, 2.0 * kPi, [](double x) { return std::cos(x); });
        const Field Lu = apply(assemble(g), sample(g, [](double x, double) { return std::sin(x); }));
        std::vector<double> coarse;
        for (std::size_t i = 0; i < n; i += n / 128) coarse.push_back(Lu(i));
        return coarse;
    };
    const std::vector<double> c = run(128), f = run(1280);
    double refined_vs_exact = 0.0, coarse_vs_refined = 0.0;
    for (std::size_t i = 0; i < 128; ++i) {
        const double x = 2.0 * kPi * i / 128.0;
        refined_vs_exact = std::max(refined_vs_exact, std::abs(f[i] - (-std::sin(x) + std::sin(x) * std::cos(x))));
        coarse_vs_refined = std::max(coarse_vs_refined, std::abs(c[i] - f[i]));
    }
    CHECK(refined_vs_exact < 1e-5);
    CHECK(coarse_vs_refined < 1e-3);
}

TEST_CASE("conformal torus operator approximates e^{phi-2psi} div(e^{-phi} grad u)") {
    auto phi = [](double x, double y) { return 0.4 * std::sin(x) * std::cos(y); };
    auto psi = [](double x, double y) { return 0.3 * std::cos(x + 2.0 * y); };
    auto exact = [&](double x, double y) {
        // u = cos x + sin y
        const double px = 0.4 * std::cos(x) * std::cos(y), py = -0.4 * std::sin(x) * std::sin(y);
        const double lap = -std::cos(x) - std::sin(y);
        const double drift = px * (-std::sin(x)) + py * std::cos(y);
        return std::exp(-2.0 * psi(x, y)) * (lap - drift);
    };
    auto err = [&](std::size_t n) {
        const auto g = make_torus(n, n, 2.0 * kPi, 2.0 * kPi, phi, psi);
        const Field Lu = apply(assemble(g), sample(g, [](double x, double y) { return std::cos(x) + std::sin(y); }));
        double e = 0.0;
        for (std::size_t i = 0; i < g->node_count(); ++i) {
            e = std::max(e, std::abs(Lu(i) - exact(g->coordinate(i)[0], g->coordinate(i)[1])));
        }
        return e;
    };
    const double e32 = err(32), e64 = err(64);
    CHECK(e32 < 2e-2);
    CHECK(e32 / e64 > 3.5);
}

TEST_CASE("constant phi reduces to the standard graph Laplacian") {
    const std::size_t n = 16;
    const double h = 1.0 / n;
    const DriftOperator op = assemble(make_circle(n, 1.0, std::vector<double>(n, 0.7)));
    const Eigen::MatrixXd L = op.dense();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t d = (i + n - j) % n;
            const double expected = i == j ? -2.0 / (h * h) : (d == 1 || d == n - 1) ? 1.0 / (h * h) : 0.0;
            CHECK(L(i, j) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("self-adjointness: flat circle, conformal torus, corrupted fixture") {
    const CheckReport flat = check_self_adjoint(assemble(flat_circle(64)), 50, 1);
    CHECK(flat.pass);
    CHECK(-flat.worst_margin <= 1e-12);
    CHECK(flat.aux.count("max_asymmetry") == 1);
    CHECK(flat.aux.count("max_energy_defect") == 1);

    Rng rng(derive_seed(9, 0));
    const std::vector<double> lens = {2.0 * kPi, 2.0 * kPi};
    const TrigSeries phi = TrigSeries::random(2, lens, 2, 0.5, rng), psi = TrigSeries::random(2, lens, 2, 0.3, rng);
    const auto torus = make_torus(
        24, 24, 2.0 * kPi, 2.0 * kPi, [&](double x, double y) { const double p[2] = {x, y}; return phi(p); },
        [&](double x, double y) { const double p[2] = {x, y}; return psi(p); });
    CHECK(check_self_adjoint(assemble(torus), 50, 2).pass);
    CHECK(check_self_adjoint(assemble(make_gauss_line(24)), 20, 3).pass);

    const CheckReport broken = check_self_adjoint(assemble(flat_circle(64)).with_defect(2, 5, 1e-4), 10, 1);
    CHECK_FALSE(broken.pass);
    CHECK(broken.worst_margin < -1e-10);
}

TEST_CASE("circle and gauss-line eigenvalues") {
    const auto pairs128 = eigenpairs(assemble(flat_circle(128)), 5);
    const double expected[5] = {0.0, -1.0, -1.0, -4.0, -4.0};
    for (int i = 0; i < 5; ++i) CHECK(std::abs(pairs128[i].eigenvalue - expected[i]) <= 1e-3 * std::max(1.0, -expected[i]));
    // Second-order convergence of the lambda = -4 pair.
    const double err64 = std::abs(eigenpairs(assemble(flat_circle(64)), 5)[4].eigenvalue + 4.0);
    const double err128 = std::abs(pairs128[4].eigenvalue + 4.0);
    CHECK(err64 / err128 == doctest::Approx(4.0).epsilon(0.01));

    const auto gauss = eigenpairs(assemble(make_gauss_line(24)), 6);
    for (int n = 0; n < 6; ++n) CHECK(std::abs(gauss[n].eigenvalue + 0.5 * n) < 1e-10);
}

TEST_CASE("k = 1 gives the harmonic constant; k out of range is rejected") {
    for (const GeometryPtr& g : {flat_circle(32), weighted_torus(8), make_gauss_line(8)}) {
        const auto p = eigenpairs(assemble(g), 1);
        CHECK(std::abs(p[0].eigenvalue) < 1e-10);
        const Eigen::MatrixXd& v = p[0].eigenfield.values();
        CHECK(v.maxCoeff() - v.minCoeff() < 1e-10 * v.cwiseAbs().maxCoeff());
        CHECK(weighted_norm(p[0].eigenfield) == doctest::Approx(1.0).epsilon(1e-12));
    }
    const DriftOperator op = assemble(flat_circle(16));
    CHECK(kind_of([&] { eigenpairs(op, 17); }) == ErrorKind::invalid_input);
    CHECK(kind_of([&] { eigenpairs(op, 0); }) == ErrorKind::invalid_input);
    CHECK(kind_of([&] { decompose(op.with_defect(0, 1, 1.0)); }) == ErrorKind::invalid_input);
}

TEST_CASE("eigenpairs are nonpositive, orthonormal and accurate") {
    for (const GeometryPtr& g : {make_circle(48, 2.0, [](double x) { return std::cos(kPi * x); }), weighted_torus(10),
                                 make_gauss_line(16)}) {
        const DriftOperator op = assemble(g);
        const auto pairs = eigenpairs(op, 12);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            CHECK(pairs[i].eigenvalue <= 1e-10);
            if (i > 0) CHECK(pairs[i].eigenvalue <= pairs[i - 1].eigenvalue + 1e-12);
            const Field r = op.apply(pairs[i].eigenfield);
            const double res = weighted_norm(r.with_values(r.values() - pairs[i].eigenvalue * pairs[i].eigenfield.values()));
            CHECK(res <= 1e-8);
            for (std::size_t j = 0; j <= i; ++j) {
                const double ip = weighted_inner(pairs[i].eigenfield, pairs[j].eigenfield);
                CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-10);
            }
        }
    }
}

TEST_CASE("structured spectrum matches a brute-force dense eigensolve on small grids") {
    Rng rng(derive_seed(21, 0));
    const double len = 2.0 * kPi;
    const TrigSeries phi = TrigSeries::random(1, std::span<const double>(&len, 1), 3, 0.5, rng);
    for (const GeometryPtr& g : {make_circle(64, len, [&](double x) { return phi(std::span<const double>(&x, 1)); }),
                                 weighted_torus(8), make_gauss_line(40)}) {
        const DriftOperator op = assemble(g);
        const std::size_t n = g->node_count();
        // Nodal matrix assembled column by column from apply on unit vectors.
        Eigen::MatrixXd L(n, n);
        for (std::size_t j = 0; j < n; ++j) {
            Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, 1);
            e(j, 0) = 1.0;
            L.col(j) = op.apply_values(e).col(0);
        }
        Eigen::VectorXd d(n);
        for (std::size_t i = 0; i < n; ++i) d(i) = std::sqrt(g->measure()[i]);
        const Eigen::MatrixXd S = d.asDiagonal() * L * d.cwiseInverse().asDiagonal();
        CHECK(max_abs(S - S.transpose()) < 1e-10 * (1.0 + max_abs(S)));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
        const Eigen::VectorXd brute = solver.eigenvalues().reverse();
        const Eigen::VectorXd structured = decompose(op).eigenvalues();
        for (Eigen::Index i = 0; i < brute.size(); ++i) {
            CHECK(std::abs(brute(i) - structured(i)) <= 1e-10 * std::max(1.0, std::abs(brute(i))));
        }
    }
}

TEST_CASE("spectral decomposition round trip") {
    const auto g = weighted_torus(8);
    const SpectralDecomposition spec = decompose(assemble(g));
    Rng rng(derive_seed(4, 4));
    const Field u = random_smooth_field(g, 2, rng, 2);
    CHECK(max_abs(spec.synthesize(spec.coefficients(u)).values() - u.values()) < 1e-12 * (1.0 + max_abs(u.values())));
}

TEST_CASE("implicit solver inverts I - alpha L on every representation") {
    for (const GeometryPtr& g : {flat_circle(40), weighted_torus(10), make_gauss_line(20)}) {
        const DriftOperator op = assemble(g);
        Rng rng(derive_seed(8, 0));
        const Field rhs = random_smooth_field(g, 3, rng, 2);
        for (const DriftOperator* o : {&op}) {
            const ImplicitSolver solver(*o, 0.05);
            const Eigen::MatrixXd x = solver.solve(rhs.values());
            const Eigen::MatrixXd back = x - 0.05 * o->apply_values(x);
            CHECK(max_abs(back - rhs.values()) < 1e-10 * (1.0 + max_abs(rhs.values())));
        }
        const DriftOperator broken = op.with_defect(1, 2, 0.3);
        const Eigen::MatrixXd y = ImplicitSolver(broken, 0.05).solve(rhs.values());
        CHECK(max_abs(y - 0.05 * broken.apply_values(y) - rhs.values()) < 1e-10 * (1.0 + max_abs(rhs.values())));
    }
}

}
