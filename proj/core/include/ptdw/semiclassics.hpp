#pragma once

#include <string>
#include <vector>

#include "ptdw/model.hpp"

namespace ptdw {

/// Which two turning points a closed cycle encircles (labels from turning_points()).
enum class TurningPair { PlusMinus, ZeroPlus, ZeroMinus };

const char* to_string(TurningPair p);

struct ActionOptions {
  /// Distance kept between the contour and the enclosed turning points.
  double clearance = 0.2;
  int panels = 48;
  int nodes_per_panel = 16;
};

/// (1/2 pi i) times the loop integral of p0 = sqrt(E - V) around two turning points.
///
/// The contour is a stadium around the segment joining the pair.  The square root is
/// continued along the contour; the overall sign is fixed so that Re(value) >= 0.
struct ActionCycle {
  cplx E;
  cplx a, b;  // enclosed turning points
  std::vector<cplx> contour;
  cplx value;
};

ActionCycle action_cycle(cplx E, cplx a, cplx b, const ProblemSpec& spec, const ActionOptions& options = {});
ActionCycle action(cplx E, TurningPair which, const ProblemSpec& spec, const ActionOptions& options = {});

/// Leading-order levels near the well bottoms of the H-form, sign = +1 or -1:
/// -+ i 2/(3 sqrt 3) + sqrt(+-i) 3^(1/4) (2n + 1) hbar.
ComplexEnergy wkb_level(int n, double hbar, int sign);

/// Solves action around the two turning points of the well = hbar (n + 1/2), starting
/// from wkb_level.  Throws NumericalError when the secant iteration stalls.
ComplexEnergy wkb_quantized_level(int n, double hbar, int sign, const ActionOptions& options = {});

/// True when hbar is beyond the range where the leading formula is meaningful.
inline bool wkb_validity_warning(double hbar) { return hbar > 0.1; }

struct StokesCurve {
  cplx source;
  int direction = 0;  // 0, 1, 2: local exit direction at the source
  std::vector<cplx> points;
  enum class End { TurningPoint, LeftBox, StepLimit } end = End::LeftBox;
  cplx end_point;
  int end_turning_point = -1;  // index into roots when end == TurningPoint
  double max_residual = 0.0;   // max |Im int_source^z p0 dz| along the curve
};

struct StokesOptions {
  double box = 3.0;
  double step = 5e-3;
  double seed_distance = 1e-3;
  double capture_distance = 2e-3;
  int max_points = 20000;
};

/// Curves where int_{t}^{z} p0 dz is real, traced out of each simple turning point t.
struct StokesDiagram {
  double E = 0.0;
  TurningPoints turning;
  std::vector<StokesCurve> curves;
  enum class ShortLine { Present, Absent, Critical } short_line = ShortLine::Absent;
  /// Signed distance of I0 from the nearest curve out of I+; 0 at criticality.
  double i0_offset = 0.0;
  std::string convention = "stokes = integral real";
};

const char* to_string(StokesDiagram::ShortLine s);

StokesDiagram trace_stokes(double E, const ProblemSpec& spec, const StokesOptions& options = {});

/// Signed distance of I0 from the nearest curve out of I+ (positive when I0 lies to the left
/// of the direction of travel).  Changes sign where the short line passes through I0.
double short_line_offset(double E, const ProblemSpec& spec, const StokesOptions& options = {});

struct EpResult {
  double E = 0.0;
  double offset = 0.0;
  int iterations = 0;
  /// Im int_{I+}^{I0} p0 dz at the result (independent check of criticality).
  double integral_residual = 0.0;
};

/// Energy at which I0 lies on the short line; bisection on short_line_offset in [lo, hi].
EpResult find_Ep(double lo = 0.2, double hi = 0.5, const StokesOptions& options = {});

/// Polyline CSV: curve, source_re, source_im, re, im.
void write_stokes_csv(const std::string& path, const StokesDiagram& d);

}  // namespace ptdw
