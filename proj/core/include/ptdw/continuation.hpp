#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ptdw/eigensolver.hpp"
#include "ptdw/zerolab.hpp"

namespace ptdw {

struct TraceSample {
  double s = 0.0;  // arc-length fraction along the path
  cplx param;      // hbar or alpha
  ComplexEnergy energy;
  std::optional<NodeSummary> nodes;
};

struct TraceAnnotation {
  enum class Kind { None, Crossing, NodeBirth };
  Kind kind = Kind::None;
  double hbar = 0.0;
  double energy = 0.0;
};

struct BranchTrace {
  ParameterPath::Kind kind = ParameterPath::Kind::Hbar;
  std::vector<TraceSample> samples;
  std::vector<TraceAnnotation> annotations;
  int steps_accepted = 0;
  int steps_halved = 0;
  int steps_quartered = 0;
  bool truncated = false;
  std::string diagnostic;

  const TraceSample& back() const { return samples.back(); }
};

struct TraceOptions {
  double initial_step = 0.02;  // fraction of the path length
  double min_step = 1e-7;
  double max_step = 0.1;
  /// Corrector moves beyond this fraction of |E| count as a jump.
  double trust_fraction = 0.1;
  /// Absolute cap on the trust radius (useful next to a nearby level); 0 disables.
  double trust_cap = 0.0;
  /// Recompute node summaries every k-th accepted step (0: never).
  int node_every = 0;
  FindLevelOptions find;
};

/// Problem at a path parameter: H-form for hbar paths, K-form for alpha paths.
ProblemSpec spec_at(const ProblemSpec& base, ParameterPath::Kind kind, cplx param);

/// Predictor-corrector continuation of a level along `path`, which must start at the
/// parameter of `start`.
BranchTrace trace_level(const Eigenpair& start, const ParameterPath& path, const TraceOptions& options = {});

/// Zero census of a state over its default region.
NodeSummary node_summary(const Eigenpair& pair);

/// Real levels of the H-form at real hbar in [e_min, e_max], from sign changes of the
/// (real) mismatch on a grid of spacing `de` plus Brent refinement.
std::vector<double> real_levels(double hbar, double e_min, double e_max, double de = 2e-4);

struct CrossingOptions {
  /// Width of the bisection target in hbar.
  double tolerance = 1e-9;
  /// Offsets above/below h_n used for the exponent fit.
  std::vector<double> fit_offsets{4e-4, 2e-4, 1e-4, 5e-5};
  bool node_bookkeeping = true;
  /// Relative offset from h_n at which node bookkeeping is done.
  double bookkeeping_offset = 0.02;
};

struct CrossingRecord {
  int n = 0;
  double h_n = 0.0;
  double E_c = 0.0;
  double h_from_below = 0.0;  // end of the bisection on Im E -> 0
  double h_from_above = 0.0;  // end of the bisection on the real gap -> 0
  double sqrt_exponent_fit = 0.0;
  double sqrt_exponent_fit_below = 0.0;
  /// Joint Newton on (E, hbar) for W = dW/dE = 0.
  double h_newton = 0.0;
  double E_newton = 0.0;
  bool newton_converged = false;
  std::vector<cplx> critical_node_set;
  bool critical_set_symmetric = false;
  /// Node bookkeeping: per-half-plane nodes of psi_n^+ below, total nodes of the two real
  /// states above (excluding imaginary nodes).
  int nodes_below_plus = -1;
  int nodes_below_minus = -1;
  int nodes_above_even = -1;
  int nodes_above_odd = -1;
  bool bookkeeping_ok = false;
  std::vector<std::string> notes;
};

/// Locate h_n from a trace of E_n^+ approaching from below and a trace of one of the two real
/// levels E_2n, E_2n+1 approaching from above.
CrossingRecord detect_crossing(const BranchTrace& below, const BranchTrace& above, int n,
                               const CrossingOptions& options = {});

/// Convenience driver: builds both traces from the perturbative end and the real side.
CrossingRecord find_crossing(int n, const CrossingOptions& options = {});

struct MonodromyPath {
  std::string name;
  cplx start_energy;
  cplx end_energy;
  cplx expected;
  double mismatch = 0.0;
  bool ok = false;
};

struct MonodromyReport {
  int n = 0;
  double h_n = 0.0;
  double radius = 0.0;
  std::vector<MonodromyPath> paths;
  bool ok = false;
};

/// Half-circle and full-circle continuations in the hbar plane around h_n.
MonodromyReport monodromy_check(const CrossingRecord& crossing, double radius, const TraceOptions& options = {});

struct NodeBirthOptions {
  double tolerance = 1e-7;  // width of the hbar bracket
  /// Initial relative step when walking away from the first hbar to bracket the birth.
  double walk = 0.002;
  int max_walk = 400;
  double axis_margin = 1.0;  // scan psi(iy) on [-1.5, ytilde + margin]
};

struct NodeBirthRecord {
  int n = 0;
  int level = 0;  // 2n + 1
  double h_p = 0.0;
  double E_p = 0.0;
  double bracket_lo = 0.0, bracket_hi = 0.0;
  double y_star = 0.0;   // lowest axis zero at the result
  double y_tilde = 0.0;  // turning ordinate at the result
  int complex_pairs = 0; // non-real pairs below, which identifies the level
  int evaluations = 0;
  std::vector<std::string> notes;
};

/// hbar at which the lowest zero of psi_{2n+1}(iy) crosses the turning ordinate ytilde(E).
NodeBirthRecord find_node_birth(int n, const NodeBirthOptions& options = {});

/// Number of non-real conjugate pairs of the H-form at real hbar (winding of W below the axis).
int complex_pair_count(double hbar);

void write_trace_csv(const std::string& path, const BranchTrace& trace);

}  // namespace ptdw
