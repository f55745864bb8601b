#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "ptdw/model.hpp"
#include "ptdw/propagator.hpp"

namespace ptdw {

/// Zero census of an eigenstate, filled by the zero-location code.
struct NodeSummary {
  int n_plus = 0;
  int n_minus = 0;
  bool has_imaginary_node = false;
  int far_zeros = 0;
  std::vector<std::pair<std::string, int>> windings;

  int nodes() const { return n_plus + n_minus + (has_imaginary_node ? 1 : 0); }
};

struct MismatchValue {
  /// W / (|psi_L psi_R'| + |psi_L' psi_R|); lies in the closed unit disc.
  cplx normalized;
  /// log W including both propagation scales (defined modulo 2 pi i); W itself is analytic in E.
  cplx log_w;
  ScaledState left;
  ScaledState right;
};

/// Shooting mismatch W(E) = psi_L psi_R' - psi_L' psi_R at a fixed matching point.
///
/// Seeds sit at fixed anchors on the decay-wedge centres with psi(anchor) = 1, so W is an
/// entire function of E whose zeros are the eigenvalues.  The anchors, radius and matching
/// point are frozen at construction from a reference energy.
class MismatchFunction {
 public:
  MismatchFunction(const ProblemSpec& spec, cplx reference_energy, PropagatorOptions options = {});

  MismatchValue evaluate(cplx E) const;
  cplx operator()(cplx E) const { return evaluate(E).normalized; }

  const ProblemSpec& spec() const { return spec_; }
  const PropagatorOptions& options() const { return options_; }
  cplx matching_point() const { return matching_point_; }
  double radius() const { return radius_; }
  cplx right_anchor() const { return right_anchor_; }
  cplx left_anchor() const { return left_anchor_; }

  WkbSeed right_seed(cplx E) const;
  WkbSeed left_seed(cplx E) const;
  PathSolution propagate_right(cplx E, bool record = true) const;
  PathSolution propagate_left(cplx E, bool record = true) const;

  size_t evaluations() const;

 private:
  ProblemSpec spec_;
  PropagatorOptions options_;
  double radius_ = 0.0;
  cplx right_anchor_, left_anchor_;
  cplx right_dir_, left_dir_;
  cplx matching_point_;

  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<double, double>, MismatchValue> cache_;
};

/// A converged level and its wavefunction data.
///
/// The state is psi = exp(log_gauge) * psi_R, which makes psi(anchor) = 1.
struct Eigenpair {
  ComplexEnergy energy;
  ProblemSpec spec;
  cplx matching_point;
  cplx anchor;
  cplx log_gauge;
  PathSolution right;  // right seed -> matching point, ungauged
  PathSolution left;   // left seed -> matching point, ungauged
  double mismatch = 0.0;
  double derivative = 0.0;  // |dW_normalized / dE| at the level
  int iterations = 0;
  std::optional<NodeSummary> node_summary;

  Equation equation() const { return make_equation(spec, energy.value); }
  /// Gauged state at the matching point.
  ScaledState matching_state() const;
  /// Multiply the state by a constant (kept in the log gauge).
  void regauge(cplx factor);
};

struct FindLevelOptions {
  double tolerance = 1e-11;
  int max_iterations = 50;
  double basin_radius = 0.5;
  double min_derivative = 1e-10;
  double initial_step = 1e-3;
  bool check_simplicity = true;
  PropagatorOptions propagation;
};

/// Muller iteration on W(E) from `guess`.
cplx refine_level(const MismatchFunction& w, cplx guess, const FindLevelOptions& options = {},
                  int* iterations = nullptr);

Eigenpair assemble_eigenpair(const MismatchFunction& w, cplx E, BranchLabel label = {});

Eigenpair find_level(cplx guess, const ProblemSpec& spec, const FindLevelOptions& options = {});

/// Same level with the seeds moved out to at least `radius` (same matching point and gauge).
Eigenpair reanchor(const Eigenpair& pair, double radius, const FindLevelOptions& options = {});

/// Distance of the seed anchors from the origin.
double anchor_radius(const Eigenpair& pair);
Eigenpair find_level(cplx guess, const MismatchFunction& w, const FindLevelOptions& options = {});

/// Axis-aligned rectangle in the complex plane.
struct Rect {
  double re_min = 0, re_max = 0, im_min = 0, im_max = 0;

  bool contains(cplx z, double margin = 0.0) const {
    return z.real() >= re_min - margin && z.real() <= re_max + margin && z.imag() >= im_min - margin &&
           z.imag() <= im_max + margin;
  }
  cplx center() const { return {0.5 * (re_min + re_max), 0.5 * (im_min + im_max)}; }
  double diagonal() const { return std::hypot(re_max - re_min, im_max - im_min); }
  Rect inflated(double fraction) const;
  /// Counter-clockwise corner loop (closed: last == first).
  std::vector<cplx> boundary() const;
};

struct WindingResult {
  int winding = 0;
  double raw = 0.0;  // unrounded total / 2 pi
  int evaluations = 0;
  double min_normalized = 0.0;  // smallest |W_normalized| met on the contour
};

/// Argument-principle count of zeros of W inside a closed polyline in the E plane.
/// Each edge starts from `pieces_per_edge` samples and is refined until the phase steps are small.
WindingResult mismatch_winding(const MismatchFunction& w, const std::vector<cplx>& contour,
                               double min_segment = 1e-9, int pieces_per_edge = 8);

struct ScanOptions {
  int max_depth = 24;
  FindLevelOptions find;
  /// Cells are split until they hold at most this many zeros before polishing.
  int max_per_cell = 1;
};

struct ScanResult {
  std::vector<ComplexEnergy> levels;
  int total_winding = 0;
  bool inflated = false;
  Rect region;
};

ScanResult scan_spectrum(const Rect& region, const ProblemSpec& spec, const ScanOptions& options = {});

struct OracleOptions {
  double stability_tolerance = 1e-8;
  /// Scale ratio for the second stability certificate.
  double scale_ratio = 1.3;
};

struct OracleResult {
  std::vector<ComplexEnergy> levels;  // certified, sorted by real part
  int excluded = 0;
  double basis_scale = 0.0;
  int basis_size = 0;
};

/// Dense harmonic-oscillator-basis eigenvalues of K(alpha) (H-form via the scaling map).
OracleResult oracle_spectrum(const ProblemSpec& spec, int basis_size, const OracleOptions& options = {});

/// Raw eigenvalues of the truncated matrix at a given basis size and length scale.
std::vector<cplx> oracle_raw_eigenvalues(cplx alpha, int basis_size, double scale);

/// Length scale balancing the largest truncated couplings of p^2 and x^3 + alpha x.
double oracle_basis_scale(cplx alpha, int basis_size);

/// Nearest-distance assignment; pairs further apart than `reject` are dropped.
std::vector<std::pair<int, int>> match_levels(const std::vector<cplx>& a, const std::vector<cplx>& b,
                                              double reject = 0.1);

}  // namespace ptdw
