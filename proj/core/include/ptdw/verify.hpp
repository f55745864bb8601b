#pragma once

#include <string>
#include <vector>

#include "ptdw/zerolab.hpp"

namespace ptdw {

/// Flux identity on the imaginary axis, phi(y) = psi(iy):
///   c Im(conj(phi) phi')(y) - c Im(conj(phi) phi')(y_b) = Im E int_{y_b}^{y} |phi|^2 ds
/// with c the kinetic coefficient and y_b the lower end of the grid.
struct FluxReport {
  std::vector<double> y;
  std::vector<double> lhs;  // c Im(conj(phi) phi')(y)
  std::vector<double> rhs;  // lhs(y_b) + Im E * cumulative int |phi|^2
  std::vector<double> abs_phi;
  double base = 0.0;
  double max_residual = 0.0;
  /// max |lhs - rhs| / max |lhs|
  double relative_residual = 0.0;
  /// True when Im E = 0 and both sides vanish to rounding (relative to c |phi| |phi'|).
  bool trivial = false;
  double min_abs_phi = 0.0;
  double median_abs_phi = 0.0;
};

/// y grid [y_min, y_max] with spacing dy; defaults to [-Y, Y] with Y just inside the anchors.
FluxReport axis_flux_identity(const Eigenpair& pair, double y_min = 0.0, double y_max = 0.0, double dy = 0.01);

/// Flux through a vertical cut of the horizontal line Im z = y, for the K-form with alpha >= 0:
///   -Im(conj(psi) d_x psi)(x + iy) = int_x^inf s (s^2 - 3 y^2 + alpha) |psi(s + iy)|^2 ds.
struct WedgeFluxLine {
  double y = 0.0;
  double flux = 0.0;      // Im(conj(psi) d_x psi) at x + iy
  double integral = 0.0;  // one-sided integral (right side for x > 0, left side for x < 0)
  double residual = 0.0;  // |flux - predicted| / |flux|
  bool in_hypothesis = false;  // |x| >= sqrt(3) |y|
  int predicted_sign = 0;      // sign of the flux when in_hypothesis (0 otherwise)
  bool sign_ok = true;
};

struct WedgeFluxReport {
  double x = 0.0;
  std::vector<WedgeFluxLine> lines;
  bool ok = true;
  double max_residual = 0.0;
};

WedgeFluxReport wedge_flux_sign(const Eigenpair& pair, double x, const std::vector<double>& ys);

struct OverlapResult {
  cplx value;              // int psi^2 dx / int |psi|^2 dx
  double norm = 0.0;       // int |psi|^2 dx in the pair's gauge
  double cut = 0.0;        // numeric integration on [-L, L], WKB tails beyond
  double tail_mismatch = 0.0;
};

/// P-overlap on the real line at unit L2 normalisation.  Throws NumericalError when the WKB
/// tail model and the numeric tail disagree by more than 1e-6 of the total.
OverlapResult p_overlap(const Eigenpair& pair);

struct GaugeReport {
  double anchor_y = 0.0;
  bool anchor_shifted = false;
  double max_imag_ratio = 0.0;     // max |Im psi(iy)| / |psi(iy)| on the axis grid
  double max_symmetry_error = 0.0;  // max |psi(-conj z) - conj psi(z)| / |psi(z)| at test points
};

/// Unit-modulus regauge so that psi(i y_anchor) > 0 (real levels, real hbar).  Throws
/// UsageError for non-real levels.
Eigenpair pt_gauge(const Eigenpair& pair, GaugeReport* report = nullptr, double anchor_y = 0.0);

/// For a conjugate pair: psi^+(z) / conj(psi^-(-conj z)) at several points; returns the
/// spread of that ratio relative to its mean (0 when the states are PxT images).
double pxt_pair_mismatch(const Eigenpair& plus, const Eigenpair& minus);

void write_flux_csv(const std::string& path, const FluxReport& r);

}  // namespace ptdw
