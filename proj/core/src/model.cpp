#include "ptdw/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ptdw {

const char* to_string(NumericalError::Kind kind) {
  using K = NumericalError::Kind;
  switch (kind) {
    case K::StepUnderflow: return "step-underflow";
    case K::WkbTooClose: return "wkb-anchor-too-close";
    case K::NotDecaying: return "direction-not-decaying";
    case K::NoConvergence: return "no-convergence";
    case K::BasinEscape: return "basin-escape";
    case K::DegenerateLevel: return "degenerate-level";
    case K::NonIntegerWinding: return "non-integer-winding";
    case K::ZeroOnContour: return "zero-on-contour";
    case K::TwoImaginaryNodes: return "two-imaginary-nodes";
    case K::NoBracket: return "no-bracket";
    case K::TraceTruncated: return "trace-truncated";
    case K::Other: return "other";
  }
  return "unknown";
}

const char* to_string(Form form) { return form == Form::H ? "H" : "K"; }

ProblemSpec ProblemSpec::h_form(cplx hbar) {
  ProblemSpec s;
  s.form = Form::H;
  s.hbar = hbar;
  return s;
}

ProblemSpec ProblemSpec::k_form(cplx alpha) {
  ProblemSpec s;
  s.form = Form::K;
  s.alpha = alpha;
  return s;
}

cplx ProblemSpec::kinetic() const { return form == Form::H ? hbar * hbar : cplx{1.0, 0.0}; }

cplx ProblemSpec::linear() const { return form == Form::H ? cplx{-1.0, 0.0} : alpha; }

void ProblemSpec::validate() const {
  if (!(ode_tolerance > 0.0) || !(zero_tolerance > 0.0)) {
    throw UsageError("tolerances must be positive");
  }
  if (truncation_radius < 0.0) throw UsageError("truncation radius must be non-negative");
  if (form == Form::H) {
    if (std::abs(hbar) == 0.0 || !std::isfinite(std::abs(hbar))) {
      throw UsageError("hbar must be nonzero and finite");
    }
    if (std::abs(std::arg(hbar)) >= kPi / 4) {
      throw UsageError("hbar outside the sector |arg hbar| < pi/4");
    }
  } else {
    if (!std::isfinite(std::abs(alpha))) throw UsageError("alpha must be finite");
    // The open sector |arg alpha| < 4pi/5 plus the negative real axis reached by
    // continuation; alpha = 0 is the imaginary cubic oscillator.
    const double a = std::abs(std::arg(alpha));
    const bool on_negative_axis = std::abs(alpha.imag()) <= 1e-14 * std::abs(alpha) && alpha.real() < 0;
    if (std::abs(alpha) != 0.0 && a >= 4 * kPi / 5 && !on_negative_axis && !continued) {
      throw UsageError("alpha outside the sector |arg alpha| < 4pi/5");
    }
  }
}

bool ProblemSpec::pt_symmetric() const {
  if (form == Form::H) return hbar.imag() == 0.0;
  return alpha.imag() == 0.0;
}

std::string ProblemSpec::describe() const {
  std::ostringstream os;
  os.precision(12);
  if (form == Form::H) {
    os << "H(hbar=" << hbar.real();
    if (hbar.imag() != 0.0) os << (hbar.imag() > 0 ? "+" : "") << hbar.imag() << "i";
  } else {
    os << "K(alpha=" << alpha.real();
    if (alpha.imag() != 0.0) os << (alpha.imag() > 0 ? "+" : "") << alpha.imag() << "i";
  }
  os << ")";
  return os.str();
}

std::string BranchLabel::str() const {
  switch (kind) {
    case Kind::Perturbative: return "E" + std::to_string(index) + (sign > 0 ? "+" : "-");
    case Kind::LargeHbar: return "E" + std::to_string(index);
    case Kind::Unlabeled: break;
  }
  return "unlabeled";
}

cplx potential(cplx z, const ProblemSpec& spec) { return kI * (z * z * z + spec.linear() * z); }

cplx potential_derivative(cplx z, const ProblemSpec& spec) {
  return kI * (3.0 * z * z + spec.linear());
}

AlphaScaling scale_h_to_alpha(cplx hbar) {
  if (hbar.imag() == 0.0 && !(hbar.real() > 0.0)) {
    throw UsageError("hbar must be positive");
  }
  if (std::abs(std::arg(hbar)) >= kPi / 4) throw UsageError("hbar outside |arg hbar| < pi/4");
  return {-std::pow(hbar, -0.8), std::pow(hbar, 1.2)};
}

cplx alpha_to_hbar(cplx alpha) {
  // alpha = -hbar^(-4/5)  =>  hbar = (-alpha)^(-5/4) on the principal branch.
  if (alpha == cplx{}) throw UsageError("alpha = 0 corresponds to hbar = infinity");
  return std::pow(-alpha, -1.25);
}

cplx ParameterPath::Segment::at(double t) const {
  if (!arc) return start + t * (end - start);
  const double a = arg_start + t * (arg_end - arg_start);
  return center + radius * cplx{std::cos(a), std::sin(a)};
}

double ParameterPath::Segment::length() const {
  return arc ? radius * std::abs(arg_end - arg_start) : std::abs(end - start);
}

ParameterPath& ParameterPath::line_to(cplx from, cplx to) {
  Segment s;
  s.start = from;
  s.end = to;
  segments_.push_back(s);
  return *this;
}

ParameterPath& ParameterPath::arc(cplx center, double radius, double arg_start, double arg_end) {
  Segment s;
  s.arc = true;
  s.center = center;
  s.radius = radius;
  s.arg_start = arg_start;
  s.arg_end = arg_end;
  s.start = s.at(0.0);
  s.end = s.at(1.0);
  segments_.push_back(s);
  return *this;
}

double ParameterPath::length() const {
  double total = 0.0;
  for (const auto& s : segments_) total += s.length();
  return total;
}

cplx ParameterPath::at(double s) const {
  if (segments_.empty()) throw UsageError("empty parameter path");
  s = std::clamp(s, 0.0, 1.0);
  const double total = length();
  if (total == 0.0) return segments_.front().start;
  double target = s * total;
  for (const auto& seg : segments_) {
    const double l = seg.length();
    if (target <= l || &seg == &segments_.back()) {
      return seg.at(l > 0 ? std::min(target / l, 1.0) : 0.0);
    }
    target -= l;
  }
  return segments_.back().end;
}

ParameterPath ParameterPath::reversed() const {
  ParameterPath out(kind_);
  for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) {
    if (it->arc) {
      out.arc(it->center, it->radius, it->arg_end, it->arg_start);
    } else {
      out.line_to(it->end, it->start);
    }
  }
  return out;
}

ParameterPath continuation_path_alpha(double hbar, int sign) {
  if (!(hbar > 0.0)) throw UsageError("hbar must be positive");
  if (sign != 1 && sign != -1) throw UsageError("path sign must be +1 or -1");
  ParameterPath p(ParameterPath::Kind::Alpha);
  p.arc(0.0, std::pow(hbar, -0.8), 0.0, sign * kPi);
  return p;
}

ParameterPath hbar_circle(double center, double radius, double arg_start, double arg_end) {
  if (!(radius > 0.0)) throw UsageError("circle radius must be positive");
  ParameterPath p(ParameterPath::Kind::Hbar);
  p.arc(center, radius, arg_start, arg_end);
  return p;
}

namespace {

// Roots of z^3 + p z + q = 0.
std::array<cplx, 3> depressed_cubic_roots(cplx p, cplx q) {
  std::array<cplx, 3> r;
  const cplx disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
  cplx u3 = -q / 2.0 + disc;
  const cplx alt = -q / 2.0 - disc;
  if (std::abs(alt) > std::abs(u3)) u3 = alt;
  if (std::abs(u3) == 0.0) {
    r.fill(cplx{});
    return r;
  }
  const cplx u = std::pow(u3, 1.0 / 3.0);
  const cplx w = std::polar(1.0, 2 * kPi / 3);
  cplx uk = u;
  for (int k = 0; k < 3; ++k) {
    r[k] = uk - p / (3.0 * uk);
    uk *= w;
  }
  for (auto& z : r) {
    for (int it = 0; it < 4; ++it) {
      const cplx f = z * z * z + p * z + q;
      const cplx df = 3.0 * z * z + p;
      if (std::abs(df) < 1e-300) break;
      const cplx dz = f / df;
      z -= dz;
      if (std::abs(dz) <= 1e-16 * (1.0 + std::abs(z))) break;
    }
  }
  return r;
}

}  // namespace

TurningPoints turning_points(cplx E, const ProblemSpec& spec) {
  // i(z^3 + a z) = E  <=>  z^3 + a z + iE = 0
  auto roots = depressed_cubic_roots(spec.linear(), kI * E);
  TurningPoints tp;
  const auto i0 = std::min_element(roots.begin(), roots.end(), [](cplx a, cplx b) {
    return std::abs(a.real()) < std::abs(b.real());
  });
  std::swap(*i0, roots[1]);
  if (roots[0].real() > roots[2].real()) std::swap(roots[0], roots[2]);
  tp.roots = roots;
  tp.minus = roots[0];
  tp.imaginary_point = roots[1];
  tp.plus = roots[2];
  const double thresh = 1e-8 * (1.0 + std::abs(E));
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      if (std::abs(roots[a] - roots[b]) < thresh) tp.degenerate = true;
    }
    const double scale = std::max(std::abs(E), 1e-300);
    tp.max_residual = std::max(tp.max_residual, std::abs(potential(roots[a], spec) - E) / std::max(scale, 1.0));
  }
  return tp;
}

double imaginary_turning_ordinate(double E, const ProblemSpec& spec) {
  // V(iy) = y^3 - a y for real a; the branch continuous from the E > 0 root.
  const double a = spec.linear().real();
  // Newton from a safe start: the largest real root of y^3 - a y - E.
  double y = std::max(1.0, std::cbrt(std::abs(E)) + std::sqrt(std::max(a, 0.0)));
  for (int it = 0; it < 200; ++it) {
    const double f = y * y * y - a * y - E;
    const double df = 3 * y * y - a;
    const double dy = f / df;
    y -= dy;
    if (std::abs(dy) < 1e-16 * (1 + std::abs(y))) break;
  }
  return y;
}

std::array<cplx, 2> critical_points(const ProblemSpec& spec) {
  const cplx r = std::sqrt(-spec.linear() / 3.0);
  if (r.real() >= 0) return {-r, r};
  return {r, -r};
}

}  // namespace ptdw
