#include "pfreq/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pfreq/errors.hpp"

namespace pfreq {

std::vector<double> finite_difference(const std::vector<double>& f, double dt) {
    const std::size_t n = f.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    if (n == 2) {
        d[0] = d[1] = (f[1] - f[0]) / dt;
        return d;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (f[k + 1] - f[k - 1]) / (2.0 * dt);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt);
    return d;
}

FrequencyTrace frequency_trace(const DriftOperator& op, const Trajectory& traj) {
    if (traj.geometry() != op.geometry()) {
        throw Error(ErrorKind::incompatible_fields, "trajectory and operator live on different geometries");
    }
    FrequencyTrace tr;
    tr.times = traj.grid().times();
    tr.provenance = traj.provenance();
    tr.dt = traj.grid().dt();
    tr.perturbation = traj.perturbation();
    for (double h : op.geom().spacing()) tr.spacing_sq = std::max(tr.spacing_sq, h * h);
    const std::size_t n = traj.size();
    tr.I.resize(n);
    tr.D.resize(n);
    tr.D_pairing.resize(n);
    tr.U.resize(n);
    std::vector<double> logI(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Field& u = traj.at(k);
        const double I = weighted_inner(u, u);
        if (!(I > 0.0)) {
            throw Error(ErrorKind::degenerate_trace,
                        "I(t) vanishes at t = " + std::to_string(tr.times[k]) +
                            "; a drift heat flow with u(., b) = 0 must vanish identically");
        }
        tr.I[k] = I;
        tr.D[k] = -dirichlet_energy(u);
        tr.D_pairing[k] = weighted_inner(u, op.apply(u));
        tr.U[k] = tr.D[k] / I;
        logI[k] = std::log(I);
        const double gap = std::abs(tr.D[k] - tr.D_pairing[k]) / I / std::max(1.0, std::abs(tr.U[k]));
        tr.max_D_form_gap = std::max(tr.max_D_form_gap, gap);
    }
    tr.dlogI = finite_difference(logI, tr.dt);
    tr.dU = finite_difference(tr.U, tr.dt);
    return tr;
}

FrequencyTrace frequency_trace(const Trajectory& traj) { return frequency_trace(assemble(traj.geometry()), traj); }

double tolerance_model(const FrequencyTrace& trace, double kappa) {
    if (trace.provenance != Provenance::implicit_step) return 1e-9;
    return kappa * (trace.dt * trace.dt + trace.spacing_sq) * (1.0 + std::abs(trace.U.front()));
}

namespace {

std::vector<double> log_of(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [](double x) { return std::log(x); });
    return out;
}

std::vector<double> sample(const TimeFn& C, const std::vector<double>& times) {
    std::vector<double> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        out[k] = C ? C(times[k]) : 0.0;
        if (!std::isfinite(out[k]) || out[k] < 0.0) {
            throw Error(ErrorKind::invalid_input, "C(t) must be finite and nonnegative");
        }
    }
    return out;
}

// Cumulative trapezoid integral; out[k] = int_{t_0}^{t_k} f.
std::vector<double> cumulative(const std::vector<double>& f, const std::vector<double>& times) {
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t k = 1; k < f.size(); ++k) {
        out[k] = out[k - 1] + 0.5 * (f[k] + f[k - 1]) * (times[k] - times[k - 1]);
    }
    return out;
}

void require_samples(const FrequencyTrace& trace, std::size_t n, const char* check) {
    if (trace.size() < n) {
        throw Error(ErrorKind::invalid_input, std::string(check) + " needs at least " + std::to_string(n) + " samples");
    }
}

}  // namespace

CheckReport check_U_monotone(const FrequencyTrace& trace, double tol) {
    require_samples(trace, 2, "U monotonicity");
    MarginTracker m;
    for (std::size_t k = 0; k + 1 < trace.size(); ++k) m.observe(trace.U[k + 1] - trace.U[k], k + 1);
    CheckReport r;
    r.name = "U_monotone";
    r.set_margin(m.value, m.where, tol);
    r.aux["U_first"] = trace.U.front();
    r.aux["U_last"] = trace.U.back();
    return r;
}

CheckReport check_logI_convexity(const FrequencyTrace& trace, double tol) {
    require_samples(trace, 3, "log I convexity");
    const std::vector<double> logI = log_of(trace.I);
    const double dt2 = trace.dt * trace.dt;
    MarginTracker m;
    double gap = 0.0;
    for (std::size_t k = 1; k + 1 < trace.size(); ++k) {
        m.observe((logI[k + 1] - 2.0 * logI[k] + logI[k - 1]) / dt2, k);
        gap = std::max(gap, std::abs(trace.dlogI[k] - 2.0 * trace.U[k]));
    }
    CheckReport r;
    r.name = "logI_convexity";
    r.set_margin(m.value, m.where, tol);
    r.aux["max_dlogI_gap"] = gap;
    r.aux["min_second_difference"] = m.value * dt2;
    return r;
}

CheckReport check_hadamard_bound(const FrequencyTrace& trace, double tol) {
    require_samples(trace, 2, "Hadamard bound");
    const double span = trace.times.back() - trace.times.front();
    const double predicted = std::log(trace.I.front()) + 2.0 * trace.U.front() * span;
    const double margin = std::log(trace.I.back()) - predicted;
    CheckReport r;
    r.name = "hadamard_bound";
    r.set_margin(margin, trace.size() - 1, tol);
    r.aux["logI_a"] = std::log(trace.I.front());
    r.aux["logI_b"] = std::log(trace.I.back());
    r.aux["predicted_logI_b"] = predicted;
    r.aux["predicted_I_b"] = std::exp(predicted);
    r.aux["decay_rate_bound"] = -2.0 * trace.U.front();
    return r;
}

CheckReport check_rigidity(const DriftOperator& op, const Trajectory& traj, double tol) {
    const FrequencyTrace trace = frequency_trace(op, traj);
    const double U0 = trace.U.front();
    double spread = 0.0;
    std::size_t where = 0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const double d = std::abs(trace.U[k] - U0);
        if (d > spread) {
            spread = d;
            where = k;
        }
    }
    CheckReport r;
    r.name = "rigidity";
    const bool eigenmode = spread <= tol;
    r.aux["is_eigenmode"] = eigenmode ? 1.0 : 0.0;
    r.aux["lambda_estimate"] = U0;
    r.aux["U_spread"] = spread;
    if (!eigenmode) {
        r.set_margin(0.0, where, tol);
        return r;
    }
    const Field& u0 = traj.at(0);
    const double norm0 = weighted_norm(u0);
    double solution_error = 0.0;
    std::size_t worst = 0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double factor = std::exp(U0 * (trace.times[k] - trace.times.front()));
        const Field diff = u0.with_values(traj.at(k).values() - factor * u0.values());
        const double e = weighted_norm(diff) / norm0;
        if (e > solution_error) {
            solution_error = e;
            worst = k;
        }
    }
    const Field residual = u0.with_values(op.apply_values(u0.values()) - U0 * u0.values());
    const double eigen_residual = weighted_norm(residual) / norm0;
    r.aux["solution_error"] = solution_error;
    r.aux["eigen_residual"] = eigen_residual;
    r.set_margin(-std::max(solution_error, eigen_residual), eigen_residual >= solution_error ? 0 : worst, tol);
    return r;
}

CheckReport check_general_frequency(const FrequencyTrace& trace, const TimeFn& C, double tol) {
    require_samples(trace, 3, "generalized frequency");
    const std::vector<double> Cs = sample(C, trace.times);
    std::vector<double> log1mU(trace.size());
    for (std::size_t k = 0; k < trace.size(); ++k) log1mU[k] = std::log(1.0 - trace.U[k]);
    const std::vector<double> dlog = finite_difference(log1mU, trace.dt);
    MarginTracker freq, logm, all;
    for (std::size_t k = 1; k + 1 < trace.size(); ++k) {
        const double c2 = Cs[k] * Cs[k];
        const double m1 = trace.dU[k] - c2 * (trace.U[k] - 1.0);
        const double m2 = c2 - dlog[k];
        freq.observe(m1, k);
        logm.observe(m2, k);
        all.observe(std::min(m1, m2), k);
    }
    CheckReport r;
    r.name = "general_frequency";
    r.set_margin(all.value, all.where, tol);
    r.aux["frequency_margin"] = freq.value;
    r.aux["log_margin"] = logm.value;
    return r;
}

CheckReport check_general_lower_bound(const FrequencyTrace& trace, const TimeFn& C, double tol) {
    require_samples(trace, 3, "generalized lower bound");
    const std::vector<double> Cs = sample(C, trace.times);
    MarginTracker step, full;
    for (std::size_t k = 1; k + 1 < trace.size(); ++k) {
        const double rhs = (2.0 + 0.5 * Cs[k]) * trace.U[k] - 1.5 * Cs[k];
        step.observe(trace.dlogI[k] - rhs, k);
        full.observe(trace.dlogI[k] - ((2.0 + Cs[k]) * trace.U[k] - 3.0 * Cs[k]), k);
    }
    const double span = trace.times.back() - trace.times.front();
    const double supC = *std::max_element(Cs.begin(), Cs.end());
    std::vector<double> C2(Cs.size());
    for (std::size_t k = 0; k < Cs.size(); ++k) C2[k] = Cs[k] * Cs[k];
    const double intC2 = cumulative(C2, trace.times).back();
    const double intU = cumulative(trace.U, trace.times).back();
    const double Ua = trace.U.front();
    const double delta = std::log(trace.I.back()) - std::log(trace.I.front());
    const double statement = span * (2.0 + supC) * (std::exp(intC2) * (Ua - 1.0) + 1.0 - 1.5 * supC);
    const double proof = span * (std::exp((2.0 + supC) * intC2) * (Ua - 1.0) + 1.0 - 1.5 * supC);
    const double integrated = 0.5 * (4.0 + supC) * intU - 1.5 * supC * span;

    CheckReport r;
    r.name = "general_lower_bound";
    r.set_margin(step.value, step.where, tol);
    r.aux["stepwise_margin"] = step.value;
    r.aux["full_factor_stepwise_margin"] = full.value;
    r.aux["statement_margin"] = delta - statement;
    r.aux["proof_margin"] = delta - proof;
    r.aux["integrated_margin"] = delta - integrated;
    r.aux["sup_C"] = supC;
    r.aux["int_C2"] = intC2;
    r.notes["gated"] = "stepwise";
    return r;
}

CheckReport check_gradient_only(const FrequencyTrace& trace, const TimeFn& C, double tol) {
    require_samples(trace, 3, "gradient-only bounds");
    if (trace.perturbation && !trace.perturbation->gradient_only) {
        throw Error(ErrorKind::invalid_input, "gradient-only bounds need a perturbation without a potential term");
    }
    if (!(trace.U.front() < 0.0)) {
        throw Error(ErrorKind::invalid_input, "gradient-only bounds need U(t_0) < 0");
    }
    const std::vector<double> Cs = sample(C, trace.times);
    std::vector<double> C2(Cs.size());
    for (std::size_t k = 0; k < Cs.size(); ++k) C2[k] = Cs[k] * Cs[k];
    const std::vector<double> intC2 = cumulative(C2, trace.times);
    const double supC = *std::max_element(Cs.begin(), Cs.end());

    // log(-U) is defined until U first reaches 0.
    std::size_t applicable = trace.size();
    for (std::size_t k = 0; k < trace.size(); ++k) {
        if (!(trace.U[k] < 0.0)) {
            applicable = k;
            break;
        }
    }
    std::vector<double> logmU(applicable);
    for (std::size_t k = 0; k < applicable; ++k) logmU[k] = std::log(-trace.U[k]);

    MarginTracker logm, lower, all;
    for (std::size_t k = 1; k + 1 < applicable; ++k) {
        const double d = (logmU[k + 1] - logmU[k - 1]) / (2.0 * trace.dt);
        const double m = 0.5 * C2[k] - d;
        logm.observe(m, k);
        all.observe(m, k);
    }
    const double U0 = trace.U.front();
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const double m = trace.U[k] - U0 * std::exp(0.5 * intC2[k]);
        lower.observe(m, k);
        all.observe(m, k);
    }
    const double span = trace.times.back() - trace.times.front();
    const double total = intC2.back();
    const double rhs = span * (2.0 * U0 * std::exp(0.5 * total) - supC * std::sqrt(-U0) * std::exp(0.25 * total));
    const double final_margin = std::log(trace.I.back()) - std::log(trace.I.front()) - rhs;
    all.observe(final_margin, trace.size() - 1);

    CheckReport r;
    r.name = "gradient_only";
    r.set_margin(all.value, all.where, tol);
    r.aux["log_margin"] = logm.any ? logm.value : 0.0;
    r.aux["U_lower_margin"] = lower.value;
    r.aux["I_lower_margin"] = final_margin;
    r.aux["applicable_samples"] = static_cast<double>(applicable);
    return r;
}

CheckReport vanishing_order_surrogate(const FrequencyTrace& trace, double c, double tol) {
    require_samples(trace, 1, "vanishing-order surrogate");
    const double t0 = trace.times.front();
    const double logI0 = std::log(trace.I.front());
    const double U0 = trace.U.front();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    MarginTracker m;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const double t = trace.times[k];
        const double scaled = std::exp(c * t) * trace.I[k];
        lo = std::min(lo, scaled);
        hi = std::max(hi, scaled);
        m.observe(std::log(trace.I[k]) - logI0 - 2.0 * U0 * (t - t0), k);
    }
    CheckReport r;
    r.name = "vanishing_order";
    r.set_margin(m.value, m.where, tol);
    r.aux["c"] = c;
    r.aux["min_scaled_I"] = lo;
    r.aux["max_scaled_I"] = hi;
    r.aux["bounded_below"] = r.pass ? 1.0 : 0.0;
    return r;
}

CheckReport check_spectral_identities(const DriftOperator& op, const SpectralDecomposition& spectrum,
                                      const Field& u0, const TimeGrid& grid, double tol) {
    const Eigen::MatrixXd c0 = spectrum.coefficients(u0);
    const Eigen::VectorXd& lambda = spectrum.eigenvalues();
    double worst_I = 0.0, worst_D = 0.0, worst_cs = std::numeric_limits<double>::infinity();
    MarginTracker m;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid.time(k) - grid.a();
        const Eigen::VectorXd decay = (t * lambda.array()).exp().matrix();
        const Eigen::MatrixXd c = decay.asDiagonal() * c0;
        const Eigen::VectorXd energy = c.rowwise().squaredNorm();
        const double I_prime = 2.0 * lambda.dot(energy);
        const double D_prime = 2.0 * lambda.array().square().matrix().dot(energy);

        const Field u = spectrum.synthesize(c);
        const double I = weighted_inner(u, u);
        const double D = -dirichlet_energy(u);
        const Field Lu = op.apply(u);
        const double Lu2 = weighted_inner(Lu, Lu);
        const double e1 = std::abs(I_prime - 2.0 * D) / std::max({std::abs(I_prime), std::abs(2.0 * D), I});
        const double e2 = std::abs(D_prime - 2.0 * Lu2) / std::max({std::abs(D_prime), 2.0 * Lu2, I});
        const double cs = (D_prime * I - I_prime * D) / (I * I);
        worst_I = std::max(worst_I, e1);
        worst_D = std::max(worst_D, e2);
        worst_cs = std::min(worst_cs, cs);
        m.observe(std::min({-e1, -e2, cs}), k);
    }
    CheckReport r;
    r.name = "spectral_identities";
    r.set_margin(m.value, m.where, tol);
    r.aux["max_rel_I_prime_gap"] = worst_I;
    r.aux["max_rel_D_prime_gap"] = worst_D;
    r.aux["min_cauchy_schwarz"] = worst_cs;
    return r;
}

}  // namespace pfreq
