#include "pfreq/suite.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>

#include <Eigen/Eigenvalues>

#include "pfreq/covpoon.hpp"
#include "pfreq/errors.hpp"
#include "pfreq/evolution.hpp"
#include "pfreq/frequency.hpp"
#include "pfreq/operators.hpp"
#include "pfreq/random.hpp"
#include "pfreq/sampling.hpp"

namespace pfreq {

bool SuiteSection::pass() const {
    for (const CheckReport& r : checks) {
        if (!r.pass) return false;
    }
    return true;
}

void Aggregate::add(const CheckReport& report) {
    const double slack = report.worst_margin + report.tolerance;
    if (members_ == 0 || slack < worst_slack_) {
        worst_ = report;
        worst_slack_ = slack;
        worst_member_ = members_;
    }
    if (!report.pass) ++failures_;
    ++members_;
}

CheckReport Aggregate::result() const {
    CheckReport out = worst_;
    out.name = name_;
    out.pass = members_ > 0 && failures_ == 0;
    out.aux["members"] = static_cast<double>(members_);
    out.aux["failures"] = static_cast<double>(failures_);
    out.aux["worst_member"] = static_cast<double>(worst_member_);
    if (members_ == 0) out.notes["error"] = "no members";
    return out;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Streams for derive_seed; one per randomized task.
enum Stream : std::uint64_t {
    circle_weight = 1,
    torus_weight,
    self_adjoint_circle,
    self_adjoint_torus,
    self_adjoint_gauss,
    circle_fields,
    torus_fields,
    perturbations,
    perturbed_fields,
};

struct Scene {
    std::string name;
    DriftOperator op;
    SpectralDecomposition spectrum;
    int field_modes;
};

Scene make_scene(std::string name, GeometryPtr g, int field_modes) {
    DriftOperator op = assemble(g);
    SpectralDecomposition spec = decompose(op);
    return Scene{std::move(name), std::move(op), std::move(spec), field_modes};
}

GeometryPtr random_circle(std::uint64_t seed) {
    Rng rng(seed);
    const double len = kTwoPi;
    const TrigSeries phi = TrigSeries::random(1, std::span<const double>(&len, 1), 3, 0.5, rng);
    return make_circle(128, kTwoPi, [phi](double x) { return phi(std::span<const double>(&x, 1)); });
}

GeometryPtr random_torus(std::uint64_t seed) {
    Rng rng(seed);
    const std::vector<double> lens = {kTwoPi, kTwoPi};
    const TrigSeries phi = TrigSeries::random(2, lens, 2, 0.5, rng);
    const TrigSeries psi = TrigSeries::random(2, lens, 2, 0.3, rng);
    auto wrap = [](const TrigSeries& s) {
        return [s](double x, double y) {
            const double p[2] = {x, y};
            return s(p);
        };
    };
    return make_torus(32, 32, kTwoPi, kTwoPi, wrap(phi), wrap(psi));
}

double budget(const FrequencyTrace& trace, double scale) {
    return 10.0 * trace.dt * trace.dt * (1.0 + std::abs(trace.U.front())) * scale;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

CheckReport spectrum_match(const std::string& name, const Eigen::VectorXd& computed, const std::vector<double>& expected,
                           double tol) {
    CheckReport r;
    r.name = name;
    MarginTracker m;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        m.observe(-std::abs(computed(static_cast<Eigen::Index>(i)) - expected[i]), i);
    }
    r.set_margin(m.value, m.where, tol);
    r.aux["compared"] = static_cast<double>(expected.size());
    return r;
}

// sqrt(mu) L sqrt(mu)^{-1} from the nodal matrix, symmetrized, eigenvalues descending.
Eigen::VectorXd dense_symmetric_spectrum(const DriftOperator& op) {
    const Eigen::MatrixXd L = op.dense();
    Eigen::VectorXd d(static_cast<Eigen::Index>(op.size()));
    for (std::size_t i = 0; i < op.size(); ++i) d(static_cast<Eigen::Index>(i)) = std::sqrt(op.geom().measure()[i]);
    const Eigen::MatrixXd S = d.asDiagonal() * L * d.cwiseInverse().asDiagonal();
    const Eigen::MatrixXd Ss = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(Ss, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().reverse();
}

std::vector<double> sorted_dispersion(const std::vector<std::size_t>& shape, const std::vector<double>& lengths,
                                      std::size_t count) {
    std::vector<double> out;
    auto axis = [&](std::size_t a, long k) {
        const double h = lengths[a] / static_cast<double>(shape[a]);
        const double s = std::sin(std::numbers::pi * static_cast<double>(k) / static_cast<double>(shape[a]));
        return -(4.0 / (h * h)) * s * s;
    };
    const long ny = shape.size() > 1 ? static_cast<long>(shape[1]) : 1;
    for (long kx = 0; kx < static_cast<long>(shape[0]); ++kx) {
        for (long ky = 0; ky < ny; ++ky) out.push_back(axis(0, kx) + (shape.size() > 1 ? axis(1, ky) : 0.0));
    }
    std::sort(out.begin(), out.end(), std::greater<>());
    out.resize(count);
    return out;
}

// Two cosine waves in x and t with total amplitude `amp`.
SpaceTimeFn random_wave(Rng& rng, double amp) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    struct Wave {
        double a, k, w, theta;
    };
    const double split = unit(rng);
    std::vector<Wave> waves = {
        {amp * split, std::floor(1.0 + 3.0 * unit(rng)), 4.0 * unit(rng) - 2.0, kTwoPi * unit(rng)},
        {amp * (1.0 - split), std::floor(1.0 + 3.0 * unit(rng)), 4.0 * unit(rng) - 2.0, kTwoPi * unit(rng)},
    };
    return [waves](std::span<const double> x, double t) {
        double v = 0.0;
        for (const Wave& w : waves) v += w.a * std::cos(w.k * x[0] + w.w * t + w.theta);
        return v;
    };
}

}  // namespace

std::vector<SuiteSection> run_property_suite(const SuiteOptions& opt) {
    using clock = std::chrono::steady_clock;
    const double scale = opt.tol_scale;
    std::vector<SuiteSection> sections;

    Scene circle = make_scene("circle", random_circle(derive_seed(opt.seed, circle_weight)), 6);
    Scene torus = make_scene("torus", random_torus(derive_seed(opt.seed, torus_weight)), 3);
    Scene gauss = make_scene("gauss_line", make_gauss_line(32), 6);
    const std::vector<Scene*> scenes = {&circle, &torus, &gauss};

    Aggregate bu_spectral("backward_uniqueness.spectral");
    Aggregate bu_cn("backward_uniqueness.cn");
    Aggregate bu_analytic("backward_uniqueness.analytic");
    Aggregate bu_perturbed("backward_uniqueness.perturbed");

    {
        const auto start = clock::now();
        SuiteSection s{"self_adjointness", {}, 0.0};
        const DriftOperator circle_op = opt.corrupt ? circle.op.with_defect(3, 7, 1e-3) : circle.op;
        const std::uint64_t streams[] = {self_adjoint_circle, self_adjoint_torus, self_adjoint_gauss};
        const DriftOperator* ops[] = {&circle_op, &torus.op, &gauss.op};
        for (int i = 0; i < 3; ++i) {
            CheckReport r = check_self_adjoint(*ops[i], 50, derive_seed(opt.seed, streams[i]), 1e-10 * scale);
            r.name = "self_adjoint." + scenes[i]->name;
            s.checks.push_back(std::move(r));
        }
        s.seconds = seconds_since(start);
        sections.push_back(std::move(s));
    }

    {
        const auto start = clock::now();
        SuiteSection s{"spectrum", {}, 0.0};
        const DriftOperator g64 = assemble(make_gauss_line(64));
        s.checks.push_back(spectrum_match("spectrum.gauss_line", dense_symmetric_spectrum(g64),
                                          {0.0, -0.5, -1.0, -1.5, -2.0, -2.5}, 1e-10 * scale));
        const std::vector<double> zero128(128, 0.0);
        const DriftOperator flat_circle = assemble(make_circle(128, kTwoPi, zero128));
        s.checks.push_back(spectrum_match("spectrum.circle_dispersion", decompose(flat_circle).eigenvalues(),
                                          sorted_dispersion({128}, {kTwoPi}, 9), 1e-9 * scale));
        CheckReport fourier = spectrum_match("spectrum.circle_fourier", decompose(flat_circle).eigenvalues(),
                                             {0.0, -1.0, -1.0, -4.0, -4.0}, 1e-3 * 16.0 * scale);
        fourier.notes["tolerance"] = "relative 1e-3 of the largest compared eigenvalue";
        s.checks.push_back(std::move(fourier));
        const std::vector<double> zero256(256, 0.0);
        const DriftOperator flat_torus = assemble(make_torus(16, 16, kTwoPi, kTwoPi, zero256, zero256));
        s.checks.push_back(spectrum_match("spectrum.torus_dispersion", decompose(flat_torus).eigenvalues(),
                                          sorted_dispersion({16, 16}, {kTwoPi, kTwoPi}, 9), 1e-9 * scale));
        s.seconds = seconds_since(start);
        sections.push_back(std::move(s));
    }

    {
        const auto start = clock::now();
        SuiteSection s{"frequency_monotonicity", {}, 0.0};
        const TimeGrid grid(0.0, 1.0, 40);
        const TimeGrid fine(0.0, 1.0, 80);
        const std::uint64_t streams[] = {circle_fields, torus_fields};
        for (int gi = 0; gi < 2; ++gi) {
            Scene& sc = *scenes[gi];
            Rng rng(derive_seed(opt.seed, streams[gi]));
            Aggregate mono("U_monotone.spectral." + sc.name), conv("logI_convexity.spectral." + sc.name),
                had("hadamard_bound.spectral." + sc.name), cn_mono("U_monotone.cn." + sc.name),
                cn_conv("logI_convexity.cn." + sc.name), cn_had("hadamard_bound.cn." + sc.name),
                ident("spectral_identities." + sc.name);
            double err_coarse = 0.0, err_fine = 0.0;
            for (int i = 0; i < opt.random_fields; ++i) {
                const Field u0 = random_smooth_field(sc.op.geometry(), sc.field_modes, rng);
                const Trajectory exact = evolve_exact(sc.spectrum, u0, fine);
                const FrequencyTrace ft = frequency_trace(sc.op, exact);
                // Coarse spectral trace sampled from the fine one at even indices.
                std::vector<Field> even;
                for (std::size_t k = 0; k < exact.size(); k += 2) even.push_back(exact.at(k));
                const Trajectory coarse_exact(grid, std::move(even), Provenance::spectral_exact);
                const FrequencyTrace et = frequency_trace(sc.op, coarse_exact);
                mono.add(check_U_monotone(et, 1e-10 * scale));
                conv.add(check_logI_convexity(et, 1e-8 * scale));
                had.add(check_hadamard_bound(et, 1e-9 * scale));
                bu_spectral.add(vanishing_order_surrogate(et, 0.0, 1e-9 * scale));
                if (i < 10) ident.add(check_spectral_identities(sc.op, sc.spectrum, u0, grid, 1e-8 * scale));

                const FrequencyTrace ct = frequency_trace(sc.op, evolve_cn(sc.op, u0, grid));
                const FrequencyTrace cf = frequency_trace(sc.op, evolve_cn(sc.op, u0, fine));
                const double tol = budget(ct, scale);
                cn_mono.add(check_U_monotone(ct, tol));
                cn_conv.add(check_logI_convexity(ct, tol));
                cn_had.add(check_hadamard_bound(ct, tol));
                bu_cn.add(vanishing_order_surrogate(ct, 0.0, tol));
                for (std::size_t k = 0; k < ct.size(); ++k) {
                    err_coarse = std::max(err_coarse, std::abs(ct.U[k] - ft.U[2 * k]));
                    err_fine = std::max(err_fine, std::abs(cf.U[2 * k] - ft.U[2 * k]));
                }
            }
            for (Aggregate* a : {&mono, &conv, &had, &ident, &cn_mono, &cn_conv, &cn_had}) s.checks.push_back(a->result());
            CheckReport order;
            order.name = "cn_convergence_order." + sc.name;
            const double observed = std::log2(err_coarse / err_fine);
            order.set_margin(observed - 1.8, std::nullopt, 0.0);
            order.aux["observed_order"] = observed;
            order.aux["max_U_error_dt"] = err_coarse;
            order.aux["max_U_error_half_dt"] = err_fine;
            s.checks.push_back(std::move(order));
        }
        s.seconds = seconds_since(start);
        sections.push_back(std::move(s));
    }

    {
        const auto start = clock::now();
        SuiteSection s{"rigidity", {}, 0.0};
        const TimeGrid grid(0.0, 1.0, 40);
        for (Scene* sc : scenes) {
            Aggregate rig("rigidity.eigenmodes." + sc->name), had("hadamard_equality.eigenmodes." + sc->name);
            for (const EigenPair& e : eigenpairs(sc->spectrum, 5)) {
                const Trajectory traj = evolve_exact(sc->spectrum, e.eigenfield, grid);
                CheckReport r = check_rigidity(sc->op, traj, 1e-9 * scale);
                CheckReport rr;
                rr.name = r.name;
                rr.aux = r.aux;
                const double u_error = std::max(r.aux.at("U_spread"), std::abs(r.aux.at("lambda_estimate") - e.eigenvalue));
                const double sol = r.aux.count("solution_error") ? r.aux.at("solution_error") : 1.0;
                rr.aux["U_error"] = u_error;
                const double slack = std::min(1e-9 * scale - u_error, 1e-8 * scale - sol);
                rr.set_margin(r.aux.at("is_eigenmode") == 1.0 ? slack : -1.0, r.location, 0.0);
                rig.add(rr);
                const FrequencyTrace t = frequency_trace(sc->op, traj);
                CheckReport eq = check_hadamard_bound(t, 1e-9 * scale);
                eq.set_margin(-std::abs(eq.worst_margin), eq.location, 1e-9 * scale);
                had.add(eq);
                bu_spectral.add(vanishing_order_surrogate(t, 0.0, 1e-9 * scale));
            }
            s.checks.push_back(rig.result());
            s.checks.push_back(had.result());
        }
        // Two-mode control: must not be classified as an eigenmode.
        const auto pairs = eigenpairs(circle.spectrum, 4);
        const Field mix = pairs[1].eigenfield.with_values(pairs[1].eigenfield.values() + pairs[3].eigenfield.values());
        const CheckReport r = check_rigidity(circle.op, evolve_exact(circle.spectrum, mix, grid), 1e-9 * scale);
        CheckReport control;
        control.name = "rigidity.two_mode_control";
        control.aux = r.aux;
        control.set_margin(r.aux.at("is_eigenmode") == 0.0 ? r.aux.at("U_spread") : -1.0, r.location, 0.0);
        s.checks.push_back(std::move(control));
        s.seconds = seconds_since(start);
        sections.push_back(std::move(s));
    }

    {
        const auto start = clock::now();
        SuiteSection s{"change_of_variables", {}, 0.0};
        OracleParams x2;
        x2.polynomial = Polynomial::monomial(1.0, 2);
        x2.caloric_completion = false;
        OracleParams x3;
        x3.polynomial = Polynomial::monomial(1.0, 3);
        const std::vector<std::pair<std::string, HeatOracle>> oracles = {
            {"x", make_oracle(OracleKind::linear, 1)},
            {"x2_plus_2t", make_oracle(OracleKind::caloric_quadratic, 1)},
            {"x2", make_oracle(OracleKind::custom_polynomial, 1, x2)},
            {"x3_plus_6xt", make_oracle(OracleKind::custom_polynomial, 1, x3)},
            {"heat_kernel", make_oracle(OracleKind::heat_kernel, 1)},
        };
        std::vector<CovSample> samples;
        for (double x : linspace(-3.0, 3.0, 20)) {
            for (double sv : linspace(0.0, 2.0, 20)) samples.push_back({{x}, sv});
        }
        for (const auto& [name, oracle] : oracles) {
            CheckReport r = check_cov_residual(cov_transform(oracle), samples, 1e-10 * scale);
            r.name = "cov_residual." + name;
            s.checks.push_back(std::move(r));
        }
        s.seconds = seconds_since(start);
        sections.push_back(std::move(s));
    }

    {
        const auto start = clock::now();
        SuiteSection s{"poon", {}, 0.0};
        const std::vector<std::pair<std::string, HeatOracle>> oracles = {
            {"one", make_oracle(OracleKind::constant, 1)},
            {"x", make_oracle(OracleKind::linear, 1)},
            {"x2_plus_2t", make_oracle(OracleKind::caloric_quadratic, 1)},
        };
        const std::vector<double> s_grid = linspace(0.0, 2.0, 21);
        const TimeGrid drift_grid(0.0, 2.0, 40);
        const GeometryPtr gl = make_gauss_line(32);
        const DriftOperator gl_op = assemble(gl);
        for (const auto& [name, oracle] : oracles) {
            CheckReport corr = check_I_equals_H(oracle, s_grid, 1e-8 * scale);
            corr.name = "I_equals_H." + name;
            s.checks.push_back(std::move(corr));
            CheckReport conv = check_poon_convexity(oracle, s_grid, 1e-8 * scale);
            conv.name = "poon_convexity." + name;
            s.checks.push_back(std::move(conv));
            const FrequencyTrace t = frequency_trace(gl_op, cov_trajectory(cov_transform(oracle), gl, drift_grid));
            CheckReport mono = check_U_monotone(t, 1e-9 * scale);
            mono.name = "drift_flow_U_monotone." + name;
            s.checks.push_back(std::move(mono));
            bu_analytic.add(vanishing_order_surrogate(t, 0.0, 1e-9 * scale));
        }
        const HeatOracle kernel = make_oracle(OracleKind::heat_kernel, 1);
        CheckReport kc = check_poon_convexity(kernel, linspace(-0.6, 0.6, 13), 1e-8 * scale);
        kc.name = "poon_convexity.heat_kernel";
        s.checks.push_back(std::move(kc));
        s.seconds = seconds_since(start);
        sections.push_back(std::move(s));
    }

    {
        const auto start = clock::now();
        SuiteSection s{"perturbed_flow", {}, 0.0};
        const std::vector<double> zero(128, 0.0);
        const DriftOperator flat = assemble(make_circle(128, kTwoPi, zero));
        const TimeGrid grid(0.0, 1.0, 80);

        // Advection u_t = L u + beta u_x.
        Aggregate adv_freq("general_frequency.advection"), adv_lower("general_lower_bound.advection"),
            adv_grad("gradient_only.advection");
        CheckReport headline;
        for (double beta : {0.1, 0.25, 0.5}) {
            const PerturbationSpec pert({[beta](std::span<const double>, double) { return beta; }}, {},
                                        [beta](double) { return beta; });
            const TimeFn C = pert.bound();
            const std::vector<std::function<double(double)>> initial = {
                [](double x) { return std::sin(x); },
                [](double x) { return std::sin(x) + 0.5 * std::sin(2.0 * x); },
                [](double x) { return std::cos(x) + 0.2 * std::sin(3.0 * x); },
            };
            for (std::size_t i = 0; i < initial.size(); ++i) {
                const Field u0 =
                    Field::sample(flat.geometry(), [&](std::span<const double> x) { return initial[i](x[0]); });
                const FrequencyTrace t = frequency_trace(flat, evolve_perturbed(flat, u0, grid, pert));
                const double tol = budget(t, scale);
                CheckReport gf = check_general_frequency(t, C, tol);
                if (beta == 0.5 && i == 0) {
                    headline = gf;
                    headline.name = "general_frequency.advection_headline";
                    const double fm = gf.aux.at("frequency_margin");
                    const double lm = gf.aux.at("log_margin");
                    headline.set_margin(std::min(fm - 0.4, lm - 0.2), gf.location, 0.0);
                }
                adv_freq.add(gf);
                adv_lower.add(check_general_lower_bound(t, C, tol));
                adv_grad.add(check_gradient_only(t, C, tol));
            }
        }
        s.checks.push_back(headline);
        s.checks.push_back(adv_freq.result());
        s.checks.push_back(adv_lower.result());
        s.checks.push_back(adv_grad.result());

        // Random bounded perturbations on the weighted circle.
        Rng prng(derive_seed(opt.seed, perturbations));
        Rng frng(derive_seed(opt.seed, perturbed_fields));
        Aggregate rnd_freq("general_frequency.random"), rnd_lower("general_lower_bound.random"),
            rnd_grad("gradient_only.random");
        double worst_statement = std::numeric_limits<double>::infinity();
        double worst_proof = worst_statement;
        for (int i = 0; i < opt.perturbed_trajectories; ++i) {
            const double C0 = 0.3;
            const bool gradient_only = i % 2 == 0;
            SpaceTimeFn b = random_wave(prng, C0);
            SpaceTimeFn c = random_wave(prng, C0);
            const PerturbationSpec pert({b}, gradient_only ? SpaceTimeFn{} : c, [C0](double) { return C0; });
            const Field u0 = random_smooth_field(circle.op.geometry(), circle.field_modes, frng);
            const FrequencyTrace t = frequency_trace(circle.op, evolve_perturbed(circle.op, u0, grid, pert));
            const double tol = budget(t, scale);
            rnd_freq.add(check_general_frequency(t, pert.bound(), tol));
            const CheckReport lower = check_general_lower_bound(t, pert.bound(), tol);
            worst_statement = std::min(worst_statement, lower.aux.at("statement_margin"));
            worst_proof = std::min(worst_proof, lower.aux.at("proof_margin"));
            rnd_lower.add(lower);
            CheckReport bu;
            bu.name = "backward_uniqueness.perturbed";
            bu.aux = lower.aux;
            bu.set_margin(lower.aux.at("integrated_margin"), t.size() - 1, tol);
            bu_perturbed.add(bu);
            if (gradient_only && t.U.front() < 0.0) rnd_grad.add(check_gradient_only(t, pert.bound(), tol));
        }
        s.checks.push_back(rnd_freq.result());
        CheckReport lower = rnd_lower.result();
        lower.aux["suite_min_statement_margin"] = worst_statement;
        lower.aux["suite_min_proof_margin"] = worst_proof;
        s.checks.push_back(std::move(lower));
        s.checks.push_back(rnd_grad.result());
        s.seconds = seconds_since(start);
        sections.push_back(std::move(s));
    }

    {
        SuiteSection s{"backward_uniqueness", {}, 0.0};
        for (Aggregate* a : {&bu_spectral, &bu_cn, &bu_analytic, &bu_perturbed}) s.checks.push_back(a->result());
        sections.push_back(std::move(s));
    }
    return sections;
}

}  // namespace pfreq
