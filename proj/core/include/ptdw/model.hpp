#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ptdw/common.hpp"

namespace ptdw {

/// Which Hamiltonian is being solved.
///  - H: hbar^2 p^2 + i(z^3 - z)
///  - K: p^2 + i(z^3 + alpha z)
enum class Form { H, K };

const char* to_string(Form form);

/// Problem definition plus numerical budgets.
///
/// Both forms reduce to -kinetic() psi'' + i(z^3 + linear() z) psi = E psi, which is
/// what the propagator consumes.
struct ProblemSpec {
  Form form = Form::H;
  cplx hbar{1.0, 0.0};
  cplx alpha{0.0, 0.0};
  /// 0 selects the decay-budget rule.
  double truncation_radius = 0.0;
  double ode_tolerance = 1e-13;
  double zero_tolerance = 1e-10;
  /// Matching point for shooting; unset selects it automatically.
  std::optional<cplx> matching_point;
  /// Set on problems produced along an alpha continuation path; lifts the alpha sector
  /// restriction (the arcs to exp(+-i pi) hbar^(-4/5) cross |arg alpha| >= 4pi/5).
  bool continued = false;

  static ProblemSpec h_form(cplx hbar);
  static ProblemSpec k_form(cplx alpha);

  cplx kinetic() const;
  cplx linear() const;

  /// Throws UsageError when the parameters leave the allowed sectors.
  void validate() const;

  /// True when the operator is PT symmetric (real hbar or real alpha).
  bool pt_symmetric() const;

  std::string describe() const;
};

/// Branch bookkeeping for a level.  Labels follow continuation history; they are
/// never re-derived from values.
struct BranchLabel {
  enum class Kind { Unlabeled, Perturbative, LargeHbar };
  Kind kind = Kind::Unlabeled;
  int index = -1;
  int sign = 0;  // +1 / -1 for perturbative(n, +/-)

  static BranchLabel perturbative(int n, int sign) { return {Kind::Perturbative, n, sign}; }
  static BranchLabel large_hbar(int m) { return {Kind::LargeHbar, m, 0}; }

  std::string str() const;
  bool operator==(const BranchLabel&) const = default;
};

struct ComplexEnergy {
  cplx value;
  BranchLabel branch;
};

struct TurningPoints {
  std::array<cplx, 3> roots;  // ordered (I-, I0, I+)
  cplx imaginary_point;       // I0
  cplx minus;                 // I-
  cplx plus;                  // I+
  bool degenerate = false;
  double max_residual = 0.0;
};

cplx potential(cplx z, const ProblemSpec& spec);
cplx potential_derivative(cplx z, const ProblemSpec& spec);

struct AlphaScaling {
  cplx alpha;
  cplx energy_factor;
};

/// hbar -> (alpha = -hbar^(-4/5), hbar^(6/5)); principal branch.
AlphaScaling scale_h_to_alpha(cplx hbar);
/// Inverse of scale_h_to_alpha for alpha in the image of the physical sector.
cplx alpha_to_hbar(cplx alpha);

/// Piecewise parameter path made of straight segments and circular arcs.
class ParameterPath {
 public:
  enum class Kind { Hbar, Alpha };

  struct Segment {
    bool arc = false;
    cplx start, end;       // line
    cplx center;           // arc
    double radius = 0.0;   // arc
    double arg_start = 0;  // arc
    double arg_end = 0;    // arc

    cplx at(double t) const;
    double length() const;
  };

  ParameterPath() = default;
  explicit ParameterPath(Kind kind) : kind_(kind) {}

  ParameterPath& line_to(cplx from, cplx to);
  ParameterPath& arc(cplx center, double radius, double arg_start, double arg_end);

  Kind kind() const { return kind_; }
  const std::vector<Segment>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }
  double length() const;
  /// Point at arc-length fraction s in [0, 1].
  cplx at(double s) const;
  cplx start() const { return at(0.0); }
  cplx end() const { return at(1.0); }
  ParameterPath reversed() const;

 private:
  Kind kind_ = Kind::Alpha;
  std::vector<Segment> segments_;
};

/// Arc |alpha| = hbar^(-4/5) from arg 0 to sign*pi.
ParameterPath continuation_path_alpha(double hbar, int sign);

/// Circle (or part of it) around `center` in the hbar plane, starting at arg_start.
ParameterPath hbar_circle(double center, double radius, double arg_start, double arg_end);

/// Roots of V(z) = E, classified into (I-, I0, I+).
TurningPoints turning_points(cplx E, const ProblemSpec& spec);

/// Unique real root of y^3 - linear*y = E on the imaginary axis (I0 = i*y) for real E.
/// For the H-form this solves y^3 + y = E.
double imaginary_turning_ordinate(double E, const ProblemSpec& spec);

/// Critical points of V (the well centres), roots of 3z^2 + linear = 0.
std::array<cplx, 2> critical_points(const ProblemSpec& spec);

}  // namespace ptdw
