#pragma once

#include <string>
#include <vector>

#include "ptdw/eigensolver.hpp"

namespace ptdw {

/// Evaluates a converged eigenstate anywhere in the plane.
///
/// Points with Re z >= Re(matching point) start from the right solution, the others from
/// the left one; both carry the pair's gauge, so psi(matching point) = 1.
class StateEvaluator {
 public:
  /// The pair is re-anchored when its seeds sit inside `min_radius`.
  explicit StateEvaluator(const Eigenpair& pair, PropagatorOptions options = {}, double min_radius = 0.0);

  ScaledState at(cplx z) const;
  /// Gauged state propagated along a polyline starting at path[0].
  PathSolution along(std::span<const cplx> path, bool record = true) const;

  const Eigenpair& pair() const { return pair_; }
  /// Points beyond this radius are not trustworthy.
  double radius() const { return anchor_radius(pair_); }
  const Equation& equation() const { return eq_; }
  const PropagatorOptions& options() const { return options_; }
  /// Multiply the state by a constant.
  void regauge(cplx factor);

 private:
  const ScaledState& nearest(const PathSolution& sol, cplx z) const;

  Eigenpair pair_;
  Equation eq_;
  PropagatorOptions options_;
  cplx right_gauge_;
  cplx left_gauge_;
};

/// Anchor radius needed to evaluate psi over a rectangle.
double region_radius(const Rect& r);

enum class ZeroClass { NodePlus, NodeMinus, ImaginaryNode, FarZero };

const char* to_string(ZeroClass c);

struct ZeroRecord {
  cplx position;
  double newton_residual = 0.0;
  ZeroClass cls = ZeroClass::NodePlus;
  int multiplicity = 1;
};

struct FieldGrid {
  std::vector<double> re;  // columns
  std::vector<double> im;  // rows
  std::vector<cplx> values;  // row-major: values[row * re.size() + col]
  std::vector<std::string> column_errors;

  cplx at(size_t row, size_t col) const { return values[row * re.size() + col]; }
};

/// psi on a rectangular grid, propagated up and down from the real axis column by column.
FieldGrid extend_state(const Eigenpair& pair, const Rect& region, double spacing = 0.05);

/// Winding of psi around a closed polyline: the number of zeros enclosed.
int count_zeros(const StateEvaluator& state, const std::vector<cplx>& contour);
int count_zeros(const Eigenpair& pair, const std::vector<cplx>& contour);

struct ZeroSearchOptions {
  int max_depth = 14;
  double newton_tolerance = 1e-10;
  /// Cells smaller than this with a nonzero winding are reported as a multiple zero.
  double min_cell = 1e-7;
};

/// Quadtree argument-principle search plus Newton polish; sorted by (Im z, Re z).
std::vector<ZeroRecord> locate_zeros(const StateEvaluator& state, const Rect& region,
                                     const ZeroSearchOptions& options = {});
std::vector<ZeroRecord> locate_zeros(const Eigenpair& pair, const Rect& region,
                                     const ZeroSearchOptions& options = {});

/// Default search box [-2.5, 2.5] x [-3, ytilde + 1] (K-form: symmetric box below the axis).
Rect default_zero_region(const Eigenpair& pair);

/// Height above which a zero counts as a far zero: Im I0 for the turning point nearest
/// the imaginary axis.
double far_zero_threshold(cplx E, const ProblemSpec& spec);

struct ClassifyOptions {
  double axis_tolerance = 1e-6;
};

/// Assign classes; throws TwoImaginaryNodes when two zeros qualify as imaginary nodes.
NodeSummary classify_zeros(std::vector<ZeroRecord>& zeros, cplx E, const ProblemSpec& spec,
                           const ClassifyOptions& options = {});

struct ZeroCheckReport {
  bool ok = true;
  std::vector<std::string> violations;
  double min_margin = 0.0;
  double value = 0.0;  // check specific summary number
  int side = 0;        // sign of Re z of the high zeros (asymptotics check)
  std::string detail;
};

/// Nodes of a K-form state with alpha >= 0 lie in Im z < 0, |Re z| < -sqrt(3) Im z + tol.
ZeroCheckReport check_confinement(const std::vector<ZeroRecord>& zeros, const ProblemSpec& spec,
                                  double tolerance = 0.02);

struct AxisScan {
  std::vector<double> y;
  std::vector<cplx> psi;
  double min_abs = 0.0;
  double median_abs = 0.0;
  double y_at_min = 0.0;
  double log_ratio = 0.0;  // log(min / median)
};

/// psi(iy) on [y_min, y_max], propagated from the matching point; dy is the sample spacing.
AxisScan scan_imaginary_axis(const StateEvaluator& state, double y_min, double y_max, double dy = 0.01);

/// Zero-free axis check for non-real levels: min |psi(iy)| > 1e-6 median on [-Y, Y].
ZeroCheckReport check_zero_free_axis(const Eigenpair& pair, double Y = 0.0);

/// High zeros (Im z > M) share one sign of Re z, and |Re z| falls like y^-2.  The side found
/// is written to `detail`; for real levels the high zeros must sit on the axis.
ZeroCheckReport check_zero_asymptotics(const std::vector<ZeroRecord>& zeros, cplx E, double M);

/// Zeros of psi(iy) on an interval, refined by Newton along the axis (real levels, real hbar).
std::vector<double> imaginary_axis_zeros(const StateEvaluator& state, double y_min, double y_max);

void write_zero_csv(const std::string& path, const std::vector<ZeroRecord>& zeros, const std::string& branch,
                    double param_value);

}  // namespace ptdw
