#pragma once

#include <limits>
#include <span>
#include <vector>

#include "ptdw/model.hpp"

namespace ptdw {

/// -kinetic psi'' + (i(z^3 + linear z) - E) psi = 0, written as psi'' = q(z) psi.
struct Equation {
  cplx kinetic{1.0, 0.0};
  cplx linear{0.0, 0.0};
  cplx energy{0.0, 0.0};

  cplx potential(cplx z) const { return kI * (z * z * z + linear * z); }
  cplx q(cplx z) const { return (potential(z) - energy) / kinetic; }
  cplx dq(cplx z) const { return kI * (3.0 * z * z + linear) / kinetic; }
  cplx d2q(cplx z) const { return kI * 6.0 * z / kinetic; }
};

Equation make_equation(const ProblemSpec& spec, cplx E);

/// psi and psi' at z with an overall factor exp(log_scale) pulled out.
/// The cumulative path integrals are in units of exp(2 log_scale) at this sample.
struct ScaledState {
  cplx z;
  cplx psi;
  cplx dpsi;
  cplx log_scale{0.0, 0.0};
  cplx cum_psi_sq{0.0, 0.0};  // int psi^2 ds from the path start
  double cum_abs_sq = 0.0;    // int |psi|^2 ds from the path start

  /// log(psi) including the factored scale; principal branch of the mantissa.
  cplx log_psi() const { return log_scale + std::log(psi); }
  cplx log_derivative() const { return dpsi / psi; }
  /// Unscaled values; may overflow for large log_scale.
  cplx true_psi() const { return psi * std::exp(log_scale); }
  cplx true_dpsi() const { return dpsi * std::exp(log_scale); }
  ScaledState times(cplx factor) const;
};

struct PropagatorOptions {
  double tolerance = 1e-13;
  int order = 30;
  /// Upper bound for |step| * sqrt|q|; limits cancellation in oscillatory stretches.
  double max_phase_step = 3.0;
  double max_step = std::numeric_limits<double>::infinity();
  /// > 0 switches to fixed steps of this length (convergence studies).
  double fixed_step = 0.0;
  bool record_samples = true;
  bool integrals = false;
};

struct PathSolution {
  std::vector<cplx> path;
  std::vector<ScaledState> samples;
  int steps = 0;

  const ScaledState& front() const { return samples.front(); }
  const ScaledState& back() const { return samples.back(); }
  cplx log_scale() const { return samples.back().log_scale; }
};

/// WKB initial data psi ~ p^(-1/2) exp(-int p dz) in a decaying direction.
struct WkbSeed {
  cplx anchor;
  cplx direction;
  cplx psi{1.0, 0.0};
  cplx dpsi;
  /// Decaying branch of p = sqrt(q), Re(p * direction) > 0.
  cplx momentum;
  /// Estimated relative size of the first neglected WKB correction.
  double wkb_error = 0.0;
  /// Re(p * direction) / |p|: 1 on the wedge centre, 0 on an anti-Stokes ray.
  double decay_rate = 0.0;

  ScaledState state() const { return {anchor, psi, dpsi}; }
};

struct DecayDirections {
  cplx right;
  cplx left;
};

/// Centres of the two decay wedges continuing the real-axis L^2 problem.
DecayDirections decay_directions(const ProblemSpec& spec);

/// Re int_{r0}^{r1} p(r u) u dr along the ray with unit direction u.
double decay_exponent(cplx E, const ProblemSpec& spec, cplx direction, double r0, double r1);

/// Smallest radius past the turning points whose outermost unit carries a WKB decay
/// exponent >= 30.
double truncation_radius(cplx E, const ProblemSpec& spec, cplx direction);

WkbSeed wkb_seed(cplx E, const ProblemSpec& spec, cplx z0, cplx direction);

/// Propagate (psi, psi') from `start` along the polyline `path` (path[0] == start.z).
PathSolution propagate(const ScaledState& start, std::span<const cplx> path, const Equation& eq,
                       const PropagatorOptions& options = {});

PathSolution propagate(const WkbSeed& seed, std::span<const cplx> path, cplx E, const ProblemSpec& spec,
                       const PropagatorOptions& options = {});

/// Single-point convenience: state at `to` reached along a straight segment.
ScaledState advance(const ScaledState& start, cplx to, const Equation& eq, const PropagatorOptions& options = {});

/// psi_a psi_b' - psi_a' psi_b with both log scales folded in as a complex log.
struct ScaledWronskian {
  cplx mantissa;
  cplx log_scale;
  cplx log_value() const { return log_scale + std::log(mantissa); }
};
ScaledWronskian wronskian(const ScaledState& a, const ScaledState& b);

}  // namespace ptdw
