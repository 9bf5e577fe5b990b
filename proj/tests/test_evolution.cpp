#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pfreq/errors.hpp"
#include "pfreq/evolution.hpp"
#include "pfreq/random.hpp"
#include "pfreq/sampling.hpp"

using namespace pfreq;

namespace {

constexpr double kPi = std::numbers::pi;

GeometryPtr flat_circle(std::size_t n) { return make_circle(n, 2.0 * kPi, std::vector<double>(n, 0.0)); }

double symbol(std::size_t n, int k) {
    const double h = 2.0 * kPi / static_cast<double>(n);
    return -4.0 / (h * h) * std::pow(std::sin(k * h / 2.0), 2);
}

Field sample1(const GeometryPtr& g, const std::function<double(double)>& f) {
    return Field::sample(g, [&f](std::span<const double> x) { return f(x[0]); });
}

double distance(const Field& a, const Field& b) { return weighted_norm(a.with_values(a.values() - b.values())); }

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

TEST_SUITE("evolution") {

TEST_CASE("exact flow of an eigenfield decays at its eigenvalue") {
    const DriftOperator op = assemble(flat_circle(128));
    const EigenPair e = eigenpairs(op, 2)[1];
    CHECK(e.eigenvalue == doctest::Approx(-1.0).epsilon(1e-3));
    const TimeGrid grid(0.0, 2.0, 20);
    const Trajectory traj = evolve_exact(op, e.eigenfield, grid);
    CHECK(traj.provenance() == Provenance::spectral_exact);
    const double I0 = weighted_inner(traj.at(0), traj.at(0));
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = grid.time(k);
        CHECK(std::abs(weighted_inner(traj.at(k), traj.at(k)) / I0 - std::exp(2.0 * e.eigenvalue * t)) < 1e-10);
    }
}

TEST_CASE("two-mode exact flow follows pi e^{2 l1 t} + pi e^{2 l2 t}") {
    const std::size_t n = 128;
    const auto g = flat_circle(n);
    const Field u0 = sample1(g, [](double x) { return std::sin(x) + std::sin(2.0 * x); });
    const TimeGrid grid(0.0, 1.0, 10);
    const Trajectory traj = evolve_exact(assemble(g), u0, grid);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = grid.time(k);
        const double discrete = kPi * std::exp(2.0 * symbol(n, 1) * t) + kPi * std::exp(2.0 * symbol(n, 2) * t);
        const double continuum = kPi * std::exp(-2.0 * t) + kPi * std::exp(-8.0 * t);
        const double I = weighted_inner(traj.at(k), traj.at(k));
        CHECK(std::abs(I / discrete - 1.0) < 1e-8);
        CHECK(std::abs(I / continuum - 1.0) < 1e-2);
    }
}

TEST_CASE("the first sample of every integrator is the initial field") {
    const DriftOperator op = assemble(flat_circle(32));
    const Field u0 = sample1(op.geometry(), [](double x) { return std::cos(3.0 * x) + 0.1; });
    const TimeGrid one(0.0, 1e-300, 1);
    for (const Trajectory& t : {evolve_exact(op, u0, one), evolve_cn(op, u0, one)}) {
        CHECK(t.size() == 2);
        CHECK((t.at(0).values() - u0.values()).norm() == 0.0);
        CHECK((t.at(1).values() - u0.values()).cwiseAbs().maxCoeff() < 1e-14);
    }
    CHECK(kind_of([] { TimeGrid(0.0, 0.0, 1); }) == ErrorKind::invalid_input);
}

TEST_CASE("zero and foreign initial data are rejected") {
    const DriftOperator op = assemble(flat_circle(16));
    const TimeGrid grid(0.0, 1.0, 4);
    CHECK(kind_of([&] { evolve_exact(op, Field::zeros(op.geometry()), grid); }) == ErrorKind::degenerate_input);
    CHECK(kind_of([&] { evolve_cn(op, Field::zeros(op.geometry()), grid); }) == ErrorKind::degenerate_input);
    CHECK(kind_of([&] { evolve_cn(op, Field::constant(flat_circle(16), 1.0), grid); }) ==
          ErrorKind::incompatible_fields);
}

TEST_CASE("exact semigroup property") {
    const auto g = make_torus(12, 12, 2.0 * kPi, 2.0 * kPi, [](double x, double y) { return 0.3 * std::cos(x - y); },
                              [](double x, double) { return 0.2 * std::sin(x); });
    const SpectralDecomposition spec = decompose(assemble(g));
    Rng rng(derive_seed(1, 1));
    const Field u0 = random_smooth_field(g, 3, rng);
    const Field mid = evolve_exact(spec, u0, TimeGrid(0.0, 0.4, 1)).at(1);
    const Field two_step = evolve_exact(spec, mid, TimeGrid(0.4, 1.0, 1)).at(1);
    const Field direct = evolve_exact(spec, u0, TimeGrid(0.0, 1.0, 1)).at(1);
    CHECK(distance(two_step, direct) < 1e-10 * weighted_norm(u0));
}

TEST_CASE("pure drift flows dissipate I") {
    const auto g = make_circle(64, 2.0 * kPi, [](double x) { return 0.5 * std::sin(2.0 * x); });
    const DriftOperator op = assemble(g);
    Rng rng(derive_seed(2, 2));
    const Field u0 = random_smooth_field(g, 6, rng);
    const TimeGrid grid(0.0, 1.0, 40);
    for (const Trajectory& t : {evolve_exact(op, u0, grid), evolve_cn(op, u0, grid)}) {
        for (std::size_t k = 0; k + 1 < t.size(); ++k) {
            const double a = weighted_inner(t.at(k), t.at(k)), b = weighted_inner(t.at(k + 1), t.at(k + 1));
            CHECK(b <= a * (1.0 + 1e-14));
        }
    }
}

TEST_CASE("components evolve independently") {
    const auto g = flat_circle(48);
    const DriftOperator op = assemble(g);
    Rng rng(derive_seed(3, 3));
    const Field u = random_smooth_field(g, 5, rng, 2);
    const TimeGrid grid(0.0, 0.5, 10);
    for (int integrator = 0; integrator < 2; ++integrator) {
        auto run = [&](const Field& f) { return integrator == 0 ? evolve_exact(op, f, grid) : evolve_cn(op, f, grid); };
        const Trajectory both = run(u), first = run(u.component(0)), second = run(u.component(1));
        for (std::size_t k = 0; k < grid.size(); ++k) {
            CHECK((both.at(k).component(0).values() - first.at(k).values()).cwiseAbs().maxCoeff() < 1e-13);
            CHECK((both.at(k).component(1).values() - second.at(k).values()).cwiseAbs().maxCoeff() < 1e-13);
        }
    }
}

TEST_CASE("Crank-Nicolson is second order against the exact flow") {
    const auto g = make_circle(64, 2.0 * kPi, [](double x) { return 0.4 * std::cos(x); });
    const DriftOperator op = assemble(g);
    const SpectralDecomposition spec = decompose(op);
    const EigenPair e = eigenpairs(spec, 3)[2];
    auto eigen_error = [&](std::size_t steps) {
        const Trajectory t = evolve_cn(op, e.eigenfield, TimeGrid(0.0, 1.0, steps));
        return std::abs(weighted_inner(t.at(steps), t.at(steps)) - std::exp(2.0 * e.eigenvalue));
    };
    CHECK(eigen_error(20) / eigen_error(40) == doctest::Approx(4.0).epsilon(0.05));

    Rng rng(derive_seed(4, 0));
    const Field u0 = random_smooth_field(g, 6, rng);
    const Field exact = evolve_exact(spec, u0, TimeGrid(0.0, 1.0, 1)).at(1);
    auto field_error = [&](std::size_t steps) { return distance(evolve_cn(op, u0, TimeGrid(0.0, 1.0, steps)).at(steps), exact); };
    const double e20 = field_error(20), e40 = field_error(40);
    CHECK(e20 < 1e-2 * weighted_norm(u0));
    CHECK(e20 / e40 == doctest::Approx(4.0).epsilon(0.1));

    const Trajectory flat = evolve_cn(op, Field::constant(g, 2.0), TimeGrid(0.0, 1.0, 10));
    CHECK((flat.at(10).values().array() - 2.0).abs().maxCoeff() < 1e-13);
    CHECK(flat.provenance() == Provenance::implicit_step);
}

TEST_CASE("constant advection preserves the flat L2 decay") {
    const std::size_t n = 128;
    const auto g = flat_circle(n);
    const DriftOperator op = assemble(g);
    const double beta = 0.5;
    const PerturbationSpec pert({[beta](std::span<const double>, double) { return beta; }}, {},
                                [beta](double) { return beta; });
    for (int k : {1, 2}) {
        const Field u0 = sample1(g, [k](double x) { return std::sin(k * x); });
        auto err = [&](std::size_t steps) {
            const Trajectory t = evolve_perturbed(op, u0, TimeGrid(0.0, 1.0, steps), pert);
            double e = 0.0;
            for (std::size_t j = 0; j < t.size(); ++j) {
                const double time = t.grid().time(j);
                e = std::max(e, std::abs(weighted_inner(t.at(j), t.at(j)) - kPi * std::exp(2.0 * symbol(n, k) * time)));
            }
            return e;
        };
        const double e40 = err(40), e80 = err(80);
        CHECK(e40 < 10.0 * std::pow(1.0 / 40.0, 2));
        CHECK(e80 < e40 / 3.0);
    }
}

TEST_CASE("constant potential factors out of the flow") {
    const auto g = make_circle(64, 2.0 * kPi, [](double x) { return 0.3 * std::sin(x); });
    const DriftOperator op = assemble(g);
    const double c0 = 0.7;
    const PerturbationSpec pert({}, [c0](std::span<const double>, double) { return c0; }, [c0](double) { return c0; });
    const Field u0 = sample1(g, [](double x) { return 1.0 + std::cos(x) + 0.5 * std::sin(2.0 * x); });
    auto err = [&](std::size_t steps) {
        const TimeGrid grid(0.0, 1.0, steps);
        const Trajectory p = evolve_perturbed(op, u0, grid, pert), base = evolve_cn(op, u0, grid);
        double e = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            e = std::max(e, distance(p.at(k), base.at(k).scaled(std::exp(c0 * grid.time(k)))));
        }
        return e / weighted_norm(u0);
    };
    const double e20 = err(20), e40 = err(40);
    CHECK(e20 < 5.0 * std::pow(1.0 / 20.0, 2));
    CHECK(e20 / e40 > 3.0);
}

TEST_CASE("zero perturbation bit-matches Crank-Nicolson and records its bound") {
    const auto g = flat_circle(32);
    const DriftOperator op = assemble(g);
    const Field u0 = sample1(g, [](double x) { return std::exp(std::sin(x)); });
    const TimeGrid grid(0.0, 1.0, 16);
    const Trajectory base = evolve_cn(op, u0, grid);
    const PerturbationSpec none({}, {}, [](double) { return 0.0; });
    const PerturbationSpec zeros({[](std::span<const double>, double) { return 0.0; }},
                                 [](std::span<const double>, double) { return 0.0; }, [](double) { return 0.0; });
    for (const PerturbationSpec* p : {&none, &zeros}) {
        const Trajectory t = evolve_perturbed(op, u0, grid, *p);
        for (std::size_t k = 0; k < grid.size(); ++k) CHECK((t.at(k).values().array() == base.at(k).values().array()).all());
        REQUIRE(t.perturbation().has_value());
        CHECK(t.perturbation()->bound.size() == grid.size());
    }
    CHECK(evolve_perturbed(op, u0, grid, none).perturbation()->gradient_only);
    CHECK_FALSE(evolve_perturbed(op, u0, grid, zeros).perturbation()->gradient_only);
}

TEST_CASE("certification failures") {
    const auto g = flat_circle(32);
    const DriftOperator op = assemble(g);
    const Field u0 = sample1(g, [](double x) { return std::sin(x); });
    const TimeGrid grid(0.0, 1.0, 8);
    const PerturbationSpec too_big({[](std::span<const double> x, double) { return 0.5 * std::cos(x[0]); }}, {},
                                   [](double) { return 0.3; });
    CHECK(kind_of([&] { evolve_perturbed(op, u0, grid, too_big); }) == ErrorKind::certification_failure);
    // Exceeds the bound only late in the window.
    const PerturbationSpec late({}, [](std::span<const double>, double t) { return t; }, [](double) { return 0.5; });
    CHECK(kind_of([&] { evolve_perturbed(op, u0, grid, late); }) == ErrorKind::certification_failure);
    const PerturbationSpec negative({}, {}, [](double) { return -1.0; });
    CHECK(kind_of([&] { evolve_perturbed(op, u0, grid, negative); }) == ErrorKind::certification_failure);
    CHECK(kind_of([] { PerturbationSpec({}, {}, TimeFn{}); }) == ErrorKind::invalid_input);
    const PerturbationSpec wrong_axes({[](std::span<const double>, double) { return 0.0; },
                                       [](std::span<const double>, double) { return 0.0; }},
                                      {}, [](double) { return 1.0; });
    CHECK(kind_of([&] { evolve_perturbed(op, u0, grid, wrong_axes); }) == ErrorKind::invalid_input);
}

TEST_CASE("drift certification uses the conformal metric norm") {
    const double psi0 = 0.5;
    const auto g = make_torus(8, 8, 2.0 * kPi, 2.0 * kPi, [](double, double) { return 0.0; },
                              [psi0](double, double) { return psi0; });
    const PerturbationSpec pert({[](std::span<const double>, double) { return 0.3; },
                                 [](std::span<const double>, double) { return 0.4; }},
                                {}, [](double) { return 1.0; });
    CHECK(perturbation_norms(pert, *g, 0.0).drift == doctest::Approx(std::exp(psi0) * 0.5));
}

TEST_CASE("gauge transform") {
    const auto g = flat_circle(64);
    const DriftOperator op = assemble(g);
    const Field u0 = sample1(g, [](double x) { return 1.0 + std::sin(x) + std::cos(3.0 * x); });
    const TimeGrid grid(0.5, 1.5, 20);
    const Trajectory u = evolve_exact(op, u0, grid);
    const Trajectory same = gauge_transform(u, GaugeSpec{[](double) { return 0.0; }});
    for (std::size_t k = 0; k < grid.size(); ++k) CHECK((same.at(k).values() - u.at(k).values()).norm() == 0.0);

    const double c0 = 0.8;
    const Trajectory v = gauge_transform(u, GaugeSpec{[c0](double) { return c0; }});
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double Iu = weighted_inner(u.at(k), u.at(k)), Iv = weighted_inner(v.at(k), v.at(k));
        CHECK(Iv == doctest::Approx(std::exp(-2.0 * c0 * (grid.time(k) - 0.5)) * Iu).epsilon(1e-13));
    }
    // A gauged solution of (d_t - L - lambda) u = 0 reduces to the pure drift flow.
    auto lambda = [](double t) { return std::sin(3.0 * t); };
    const Trajectory gauged = gauge_transform(u, GaugeSpec{[&](double t) { return -lambda(t); }});
    const Trajectory reduced = gauge_transform(gauged, GaugeSpec{lambda});
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK((reduced.at(k).values() - u.at(k).values()).cwiseAbs().maxCoeff() < 1e-13);
        const double U_g = -dirichlet_energy(gauged.at(k)) / weighted_inner(gauged.at(k), gauged.at(k));
        const double U_u = -dirichlet_energy(u.at(k)) / weighted_inner(u.at(k), u.at(k));
        CHECK(std::abs(U_g - U_u) < 1e-12);
    }
    CHECK(kind_of([&] { gauge_transform(u, GaugeSpec{[](double) { return std::nan(""); }}); }) ==
          ErrorKind::invalid_input);
}

}
