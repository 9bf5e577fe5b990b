#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pfreq/evolution.hpp"
#include "pfreq/field.hpp"
#include "pfreq/operators.hpp"
#include "pfreq/report.hpp"

namespace pfreq {

/// Sampled I(t) = |u|^2_mu, D(t) = -E(u), U = D / I along a trajectory, with centered
/// finite-difference derivatives (second-order one-sided stencils at the endpoints).
struct FrequencyTrace {
    std::vector<double> times;
    std::vector<double> I;
    std::vector<double> D;          // energy form, -E(u)
    std::vector<double> D_pairing;  // <u, L u>_mu
    std::vector<double> U;
    std::vector<double> dlogI;
    std::vector<double> dU;
    Provenance provenance = Provenance::spectral_exact;
    double dt = 0.0;
    double spacing_sq = 0.0;  // largest squared grid spacing; 0 for gauss-line
    std::optional<PerturbationRecord> perturbation;
    /// max_k |U_energy - U_pairing| / max(1, |U|)
    double max_D_form_gap = 0.0;

    std::size_t size() const noexcept { return times.size(); }
};

/// Throws degenerate-trace if I vanishes at any sample (the backward-uniqueness regime).
FrequencyTrace frequency_trace(const DriftOperator& op, const Trajectory& traj);
FrequencyTrace frequency_trace(const Trajectory& traj);

/// Second-order finite-difference derivative on a uniform grid.
std::vector<double> finite_difference(const std::vector<double>& f, double dt);

/// Default tolerance: 1e-9 for spectral-exact and analytic traces, otherwise
/// kappa (dt^2 + h^2)(1 + |U(t_0)|).
double tolerance_model(const FrequencyTrace& trace, double kappa = 10.0);

/// U(t_{k+1}) - U(t_k) >= -tol for all k.
CheckReport check_U_monotone(const FrequencyTrace& trace, double tol);

/// Second differences of log I, divided by dt^2, are >= -tol at interior samples.
/// aux["max_dlogI_gap"] records max |dlogI - 2U| (an O(dt^2) quantity for pure drift flow).
CheckReport check_logI_convexity(const FrequencyTrace& trace, double tol);

/// log I(b) - log I(a) - 2 U(a) (b - a) >= -tol.
CheckReport check_hadamard_bound(const FrequencyTrace& trace, double tol);

/// If U stays within tol of U(t_0), the flow must be the separated eigenmode
/// e^{U (t - t_0)} u(t_0) with L u(t_0) = U u(t_0); otherwise the check passes vacuously.
CheckReport check_rigidity(const DriftOperator& op, const Trajectory& traj, double tol);

/// dU >= C^2 (U - 1) and [log(1 - U)]' <= C^2 at interior samples.
CheckReport check_general_frequency(const FrequencyTrace& trace, const TimeFn& C, double tol);

/// Gated on the stepwise bound (log I)' >= (2 + C/2) U - 3C/2 at interior samples.
/// Margins of the closed-form lower bounds for log I(b) - log I(a) are reported in aux:
///   "statement_margin": RHS (b-a)(2 + sup C)[e^{int C^2}(U(a) - 1) + 1 - 3 sup C / 2]
///   "proof_margin":     RHS (b-a)[e^{(2 + sup C) int C^2}(U(a) - 1) + 1 - 3 sup C / 2]
///   "integrated_margin": RHS (4 + sup C)/2 int U - 3 sup C (b-a)/2
/// aux["full_factor_stepwise_margin"] uses (log I)' >= (2 + C) U - 3C, which keeps the factor 2
/// of the perturbation term in I'.
CheckReport check_general_lower_bound(const FrequencyTrace& trace, const TimeFn& C, double tol);

/// Gradient-only perturbations: [log(-U)]' <= C^2/2, U(t_k) >= U(t_0) e^{(1/2) int C^2},
/// and log I(b) - log I(a) >= (b-a)[2 U(a) e^{(1/2) int C^2} - sup C sqrt(-U(a)) e^{(1/4) int C^2}].
/// Throws invalid-input if the trace came from a perturbation with a potential term or U(t_0) >= 0.
CheckReport check_gradient_only(const FrequencyTrace& trace, const TimeFn& C, double tol);

/// Finite-horizon surrogate for vanishing to infinite order: reports min/max of
/// e^{c t} I(t) and checks it never drops below e^{c t} I(a) e^{2 U(a)(t - a)}.
CheckReport vanishing_order_surrogate(const FrequencyTrace& trace, double c, double tol = 1e-9);

/// Eigenbasis identities along exp(tL) u0: I' = 2D, D' = 2 |L u|^2_mu and
/// D' I - I' D >= 0. I' and D' are evaluated analytically from the eigen-coefficients;
/// D and |L u|^2 come from the field through the energy pairing and the operator.
CheckReport check_spectral_identities(const DriftOperator& op, const SpectralDecomposition& spectrum,
                                      const Field& u0, const TimeGrid& grid, double tol);

}  // namespace pfreq
