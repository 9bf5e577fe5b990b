#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pfreq/field.hpp"
#include "pfreq/operators.hpp"

namespace pfreq {

using SpaceTimeFn = std::function<double(std::span<const double> x, double t)>;
using TimeFn = std::function<double(double)>;

/// Lower-order terms of u_t = L u + <b, grad u> + c u with a certified bound C(t):
/// sup |b|_g <= C(t) and sup |c| <= C(t) at every sampled node and time imply
/// |(d_t - L) u| <= C(t) (|u| + |grad u|).
class PerturbationSpec {
public:
    /// `drift` holds one coordinate component of b per geometry axis (empty for none);
    /// an empty `potential` means c = 0.
    PerturbationSpec(std::vector<SpaceTimeFn> drift, SpaceTimeFn potential, TimeFn bound);

    const std::vector<SpaceTimeFn>& drift() const noexcept { return drift_; }
    const SpaceTimeFn& potential() const noexcept { return potential_; }
    const TimeFn& bound() const noexcept { return bound_; }
    bool gradient_only() const noexcept { return !potential_; }
    bool has_terms() const noexcept { return !drift_.empty() || potential_; }

private:
    std::vector<SpaceTimeFn> drift_;
    SpaceTimeFn potential_;
    TimeFn bound_;
};

struct GaugeSpec {
    TimeFn lambda;
};

/// u(t_k) = exp((t_k - a) L) u0 in the eigenbasis; the first sample is u0 itself.
Trajectory evolve_exact(const SpectralDecomposition& spectrum, const Field& u0, const TimeGrid& grid);
Trajectory evolve_exact(const DriftOperator& op, const Field& u0, const TimeGrid& grid);

/// Crank-Nicolson: (I - dt/2 L) u_{k+1} = (I + dt/2 L) u_k.
Trajectory evolve_cn(const DriftOperator& op, const Field& u0, const TimeGrid& grid);

/// Crank-Nicolson for L with the perturbation treated explicitly at the step midpoint,
/// extrapolated as (3 u_k - u_{k-1}) / 2 (a half Euler step predicts it on the first step).
/// Throws certification-failure if b or c exceeds C(t) at a sampled point.
Trajectory evolve_perturbed(const DriftOperator& op, const Field& u0, const TimeGrid& grid,
                            const PerturbationSpec& pert);

/// v(t_k) = exp(-int_a^{t_k} lambda) u(t_k), integral by the trapezoid rule on the grid.
Trajectory gauge_transform(const Trajectory& traj, const GaugeSpec& gauge);

/// Forcing <b, grad u> + c u at time t (no certification).
Eigen::MatrixXd perturbation_forcing(const PerturbationSpec& pert, const Field& u, double t);

/// Largest values of |b|_g and |c| over the nodes at time t.
struct PerturbationNorms {
    double drift = 0.0;
    double potential = 0.0;
};
PerturbationNorms perturbation_norms(const PerturbationSpec& pert, const WeightedGeometry& geometry, double t);

}  // namespace pfreq
