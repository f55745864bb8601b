#include "ptdw/zerolab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace ptdw {

namespace {

ScaledState with_gauge(ScaledState s, cplx gauge) {
  s.log_scale += gauge;
  s.cum_psi_sq = 0.0;
  s.cum_abs_sq = 0.0;
  return s;
}

double wrap(double a) {
  while (a > kPi) a -= 2 * kPi;
  while (a <= -kPi) a += 2 * kPi;
  return a;
}

cplx imaginary_turning_point(cplx E, const ProblemSpec& spec) {
  // V(iy) = y^3 - a y = E; root continued from the large real root.
  const cplx a = spec.linear();
  cplx y = std::max(1.0, std::cbrt(std::abs(E)) + std::sqrt(std::abs(a)));
  for (int it = 0; it < 200; ++it) {
    const cplx f = y * y * y - a * y - E;
    const cplx df = 3.0 * y * y - a;
    const cplx dy = f / df;
    y -= dy;
    if (std::abs(dy) < 1e-15 * (1 + std::abs(y))) break;
  }
  return kI * y;
}

}  // namespace

double region_radius(const Rect& r) {
  return std::max({std::abs(cplx{r.re_min, r.im_min}), std::abs(cplx{r.re_max, r.im_min}),
                   std::abs(cplx{r.re_min, r.im_max}), std::abs(cplx{r.re_max, r.im_max})}) +
         0.5;
}

StateEvaluator::StateEvaluator(const Eigenpair& pair, PropagatorOptions options, double min_radius)
    : pair_(anchor_radius(pair) >= min_radius ? pair : reanchor(pair, min_radius)),
      eq_(pair_.equation()),
      options_(options) {
  options_.tolerance = std::min(options_.tolerance, pair_.spec.ode_tolerance);
  options_.integrals = false;
  right_gauge_ = pair_.log_gauge;
  const ScaledState& r = pair_.right.back();
  const ScaledState& l = pair_.left.back();
  const cplx ratio = std::abs(r.psi) >= std::abs(r.dpsi) * 1e-6 ? r.psi / l.psi : r.dpsi / l.dpsi;
  left_gauge_ = pair_.log_gauge + (r.log_scale - l.log_scale) + std::log(ratio);
}

void StateEvaluator::regauge(cplx factor) {
  right_gauge_ += std::log(factor);
  left_gauge_ += std::log(factor);
}

const ScaledState& StateEvaluator::nearest(const PathSolution& sol, cplx z) const {
  const ScaledState* best = &sol.samples.back();
  double d = std::abs(best->z - z);
  for (const auto& s : sol.samples) {
    const double e = std::abs(s.z - z);
    if (e < d) {
      d = e;
      best = &s;
    }
  }
  return *best;
}

ScaledState StateEvaluator::at(cplx z) const {
  const bool right = z.real() >= pair_.matching_point.real();
  const PathSolution& sol = right ? pair_.right : pair_.left;
  const ScaledState start = with_gauge(nearest(sol, z), right ? right_gauge_ : left_gauge_);
  return advance(start, z, eq_, options_);
}

PathSolution StateEvaluator::along(std::span<const cplx> path, bool record) const {
  PropagatorOptions o = options_;
  o.record_samples = record;
  return propagate(at(path.front()), path, eq_, o);
}

const char* to_string(ZeroClass c) {
  switch (c) {
    case ZeroClass::NodePlus: return "node_plus";
    case ZeroClass::NodeMinus: return "node_minus";
    case ZeroClass::ImaginaryNode: return "imaginary_node";
    case ZeroClass::FarZero: return "far_zero";
  }
  return "unknown";
}

FieldGrid extend_state(const Eigenpair& pair, const Rect& region, double spacing) {
  if (!(spacing > 0.0) || spacing > 0.05) throw UsageError("grid spacing must lie in (0, 0.05]");
  const StateEvaluator state(pair, {}, region_radius(region));
  FieldGrid g;
  const int nx = std::max(1, int(std::ceil((region.re_max - region.re_min) / spacing)));
  const int ny = std::max(1, int(std::ceil((region.im_max - region.im_min) / spacing)));
  for (int i = 0; i <= nx; ++i) g.re.push_back(region.re_min + (region.re_max - region.re_min) * i / nx);
  for (int j = 0; j <= ny; ++j) g.im.push_back(region.im_min + (region.im_max - region.im_min) * j / ny);
  g.values.assign(g.re.size() * g.im.size(), cplx{std::nan(""), std::nan("")});
  // Start each column at the row nearest the real axis, then walk up and down.
  size_t row0 = 0;
  for (size_t j = 0; j < g.im.size(); ++j) {
    if (std::abs(g.im[j]) < std::abs(g.im[row0])) row0 = j;
  }
  for (size_t c = 0; c < g.re.size(); ++c) {
    try {
      const ScaledState base = state.at({g.re[c], g.im[row0]});
      g.values[row0 * g.re.size() + c] = base.true_psi();
      ScaledState s = base;
      for (size_t j = row0 + 1; j < g.im.size(); ++j) {
        s = advance(s, {g.re[c], g.im[j]}, state.equation(), state.options());
        g.values[j * g.re.size() + c] = s.true_psi();
      }
      s = base;
      for (size_t j = row0; j-- > 0;) {
        s = advance(s, {g.re[c], g.im[j]}, state.equation(), state.options());
        g.values[j * g.re.size() + c] = s.true_psi();
      }
    } catch (const NumericalError& e) {
      std::ostringstream os;
      os << "column x=" << g.re[c] << ": " << e.what();
      g.column_errors.push_back(os.str());
    }
  }
  return g;
}

int count_zeros(const StateEvaluator& state, const std::vector<cplx>& contour) {
  if (contour.size() < 3) throw UsageError("contour needs at least three points");
  std::vector<cplx> path = contour;
  if (path.front() != path.back()) path.push_back(path.front());
  // Every contour point is reached from the nearest stored sample rather than by walking the
  // contour; walking into a decay sector would swamp the recessive state with rounding error.
  constexpr double kPiece = 0.1;
  double total = 0.0;
  std::function<double(const ScaledState&, const ScaledState&, int)> arc = [&](const ScaledState& a,
                                                                               const ScaledState& b,
                                                                               int depth) -> double {
    if (std::abs(a.psi) == 0.0 || std::abs(b.psi) == 0.0) {
      throw NumericalError(NumericalError::Kind::ZeroOnContour, "psi vanishes on the contour");
    }
    const double d = wrap(std::arg(b.psi) - std::arg(a.psi) + (b.log_scale - a.log_scale).imag());
    const cplx dz = b.z - a.z;
    // trapezoid estimate of the phase change from the log-derivative
    const double est = 0.5 * ((a.dpsi / a.psi) * dz + (b.dpsi / b.psi) * dz).imag();
    if (std::abs(d) < 0.5 && std::abs(d - est) < 0.1) return d;
    if (depth > 40 || std::abs(dz) < 1e-12) {
      std::ostringstream os;
      os << "zero of psi on the contour near " << a.z;
      throw NumericalError(NumericalError::Kind::ZeroOnContour, os.str());
    }
    const ScaledState m = state.at(0.5 * (a.z + b.z));
    return arc(a, m, depth + 1) + arc(m, b, depth + 1);
  };
  ScaledState prev = state.at(path.front());
  const ScaledState first = prev;
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    const int pieces = std::max(1, int(std::ceil(std::abs(path[i + 1] - path[i]) / kPiece)));
    for (int k = 1; k <= pieces; ++k) {
      const bool closing = i + 2 == path.size() && k == pieces;
      const ScaledState next = closing ? first : state.at(path[i] + (path[i + 1] - path[i]) * (double(k) / pieces));
      total += arc(prev, next, 0);
      prev = next;
    }
  }
  const double raw = total / (2 * kPi);
  const int w = int(std::lround(raw));
  if (std::abs(raw - w) > 0.05) {
    throw NumericalError(NumericalError::Kind::NonIntegerWinding, "non-integer zero count " + std::to_string(raw));
  }
  return w;
}

int count_zeros(const Eigenpair& pair, const std::vector<cplx>& contour) {
  double r = 0.0;
  for (cplx z : contour) r = std::max(r, std::abs(z) + 0.5);
  return count_zeros(StateEvaluator(pair, {}, r), contour);
}

namespace {

struct Search {
  const StateEvaluator& state;
  const ZeroSearchOptions& opt;
  std::vector<ZeroRecord> found;

  int winding(const Rect& r) { return count_zeros(state, r.boundary()); }

  bool newton(const Rect& cell, ZeroRecord& out) {
    const double size = cell.diagonal();
    cplx z = cell.center();
    ScaledState s = state.at(z);
    for (int it = 0; it < 60; ++it) {
      const cplx dz = -s.psi / s.dpsi;
      if (!std::isfinite(std::abs(dz))) return false;
      const cplx step = std::abs(dz) > 0.5 * size ? dz * (0.5 * size / std::abs(dz)) : dz;
      z += step;
      if (!cell.contains(z, 0.25 * size)) return false;
      s = state.at(z);
      if (std::abs(step) < opt.newton_tolerance * std::max(1.0, std::abs(z)) * 0.1) {
        const cplx last = -s.psi / s.dpsi;
        out.position = z + last;
        out.newton_residual = std::abs(last);
        return cell.contains(out.position, 1e-9) && out.newton_residual < opt.newton_tolerance;
      }
    }
    return false;
  }

  void split(const Rect& cell, int w, int depth, int jitter) {
    const double fx = 0.5 + 0.0137 * (jitter % 3 - 1) + 0.003;
    const double fy = 0.5 - 0.0119 * (jitter % 3 - 1) - 0.002;
    const double mx = cell.re_min + fx * (cell.re_max - cell.re_min);
    const double my = cell.im_min + fy * (cell.im_max - cell.im_min);
    const Rect kids[4] = {{cell.re_min, mx, cell.im_min, my},
                          {mx, cell.re_max, cell.im_min, my},
                          {cell.re_min, mx, my, cell.im_max},
                          {mx, cell.re_max, my, cell.im_max}};
    int ws[4];
    int sum = 0;
    try {
      for (int k = 0; k < 4; ++k) {
        ws[k] = winding(kids[k]);
        sum += ws[k];
      }
    } catch (const NumericalError& e) {
      if (jitter >= 3) throw;
      split(cell, w, depth, jitter + 1);
      return;
    }
    if (sum != w) {
      if (jitter >= 3) {
        throw NumericalError(NumericalError::Kind::NonIntegerWinding, "sub-cell windings do not add up");
      }
      split(cell, w, depth, jitter + 1);
      return;
    }
    for (int k = 0; k < 4; ++k) cell_search(kids[k], ws[k], depth + 1);
  }

  void cell_search(const Rect& cell, int w, int depth) {
    if (w <= 0) return;
    if (w == 1) {
      ZeroRecord z;
      if (newton(cell, z)) {
        found.push_back(z);
        return;
      }
    }
    if (depth >= opt.max_depth || cell.diagonal() < opt.min_cell) {
      ZeroRecord z;
      z.position = cell.center();
      z.newton_residual = cell.diagonal();
      z.multiplicity = w;
      found.push_back(z);
      return;
    }
    split(cell, w, depth, 0);
  }
};

}  // namespace

std::vector<ZeroRecord> locate_zeros(const StateEvaluator& state, const Rect& region,
                                     const ZeroSearchOptions& options) {
  if (region_radius(region) > state.radius() + 1e-9) {
    throw UsageError("zero search region reaches beyond the seed anchors");
  }
  Search s{state, options, {}};
  Rect r = region;
  int w = 0;
  for (int attempt = 0;; ++attempt) {
    try {
      w = s.winding(r);
      break;
    } catch (const NumericalError&) {
      if (attempt >= 3) throw;
      r = r.inflated(0.01);
    }
  }
  s.cell_search(r, w, 0);
  int total = 0;
  for (const auto& z : s.found) total += z.multiplicity;
  if (total != w) {
    throw NumericalError(NumericalError::Kind::Other, "zero census does not match the region winding");
  }
  std::sort(s.found.begin(), s.found.end(), [](const ZeroRecord& a, const ZeroRecord& b) {
    if (a.position.imag() != b.position.imag()) return a.position.imag() < b.position.imag();
    return a.position.real() < b.position.real();
  });
  return s.found;
}

std::vector<ZeroRecord> locate_zeros(const Eigenpair& pair, const Rect& region, const ZeroSearchOptions& options) {
  return locate_zeros(StateEvaluator(pair, {}, region_radius(region)), region, options);
}

double far_zero_threshold(cplx E, const ProblemSpec& spec) { return imaginary_turning_point(E, spec).imag(); }

Rect default_zero_region(const Eigenpair& pair) {
  const double top = far_zero_threshold(pair.energy.value, pair.spec) + 1.0;
  if (pair.spec.form == Form::H) return {-2.5, 2.5, -3.0, top};
  const TurningPoints tp = turning_points(pair.energy.value, pair.spec);
  double r = 0.0;
  for (cplx z : tp.roots) r = std::max(r, std::abs(z));
  r = 1.2 * r + 1.0;
  return {-r, r, -r, top};
}

NodeSummary classify_zeros(std::vector<ZeroRecord>& zeros, cplx E, const ProblemSpec& spec,
                           const ClassifyOptions& options) {
  NodeSummary sum;
  const double far = far_zero_threshold(E, spec);
  // For a non-real level the nodes sit on one side of the imaginary axis and the zeros on
  // the other side belong to the chain that runs off to +i infinity.
  const bool real_level = std::abs(E.imag()) <= 1e-10 * std::max(1.0, std::abs(E));
  const double node_side = real_level ? 0.0 : (E.imag() < 0 ? 1.0 : -1.0);
  const bool k_form = spec.form == Form::K;
  int imaginary = 0;
  for (auto& z : zeros) {
    const cplx p = z.position;
    if (std::abs(p.real()) < options.axis_tolerance) {
      z.cls = p.imag() < far ? ZeroClass::ImaginaryNode : ZeroClass::FarZero;
    } else if (p.imag() > far || (!k_form && node_side * p.real() < 0.0)) {
      z.cls = ZeroClass::FarZero;
    } else {
      z.cls = p.real() > 0 ? ZeroClass::NodePlus : ZeroClass::NodeMinus;
    }
    switch (z.cls) {
      case ZeroClass::NodePlus: sum.n_plus += z.multiplicity; break;
      case ZeroClass::NodeMinus: sum.n_minus += z.multiplicity; break;
      case ZeroClass::ImaginaryNode: imaginary += z.multiplicity; break;
      case ZeroClass::FarZero: sum.far_zeros += z.multiplicity; break;
    }
  }
  if (imaginary > 1) {
    throw NumericalError(NumericalError::Kind::TwoImaginaryNodes,
                         std::to_string(imaginary) + " zeros on the imaginary half-line below the turning point");
  }
  sum.has_imaginary_node = imaginary == 1;
  return sum;
}

ZeroCheckReport check_confinement(const std::vector<ZeroRecord>& zeros, const ProblemSpec& spec, double tolerance) {
  if (spec.form != Form::K || spec.alpha.imag() != 0.0 || spec.alpha.real() < 0.0) {
    throw UsageError("confinement check needs the K-form with real alpha >= 0");
  }
  ZeroCheckReport r;
  r.min_margin = 1e300;
  for (const auto& z : zeros) {
    if (z.cls == ZeroClass::FarZero) continue;
    const double x = z.position.real(), y = z.position.imag();
    const double margin = -std::sqrt(3.0) * y + tolerance - std::abs(x);
    r.min_margin = std::min(r.min_margin, std::min(margin, -y));
    if (!(y < 0.0) || !(margin > 0.0)) {
      std::ostringstream os;
      os << "zero at " << z.position << " outside the wedge |x| < -sqrt(3) y";
      r.violations.push_back(os.str());
      r.ok = false;
    }
  }
  return r;
}

AxisScan scan_imaginary_axis(const StateEvaluator& state, double y_min, double y_max, double dy) {
  if (!(y_max > y_min) || !(dy > 0.0)) throw UsageError("bad axis interval");
  AxisScan scan;
  const int n = std::max(2, int(std::ceil((y_max - y_min) / dy)));
  std::vector<cplx> pts;
  for (int k = 0; k <= n; ++k) pts.push_back(kI * (y_min + (y_max - y_min) * k / n));
  // walk outward from the sample closest to the real axis
  size_t k0 = 0;
  for (size_t k = 0; k < pts.size(); ++k) {
    if (std::abs(pts[k].imag()) < std::abs(pts[k0].imag())) k0 = k;
  }
  std::vector<ScaledState> states(pts.size());
  states[k0] = state.at(pts[k0]);
  for (size_t k = k0 + 1; k < pts.size(); ++k) {
    states[k] = advance(states[k - 1], pts[k], state.equation(), state.options());
  }
  for (size_t k = k0; k-- > 0;) states[k] = advance(states[k + 1], pts[k], state.equation(), state.options());
  std::vector<double> logs;
  for (const auto& s : states) {
    scan.y.push_back(s.z.imag());
    scan.psi.push_back(s.true_psi());
    logs.push_back(s.log_scale.real() + std::log(std::abs(s.psi)));
  }
  std::vector<double> sorted = logs;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double med = sorted[sorted.size() / 2];
  const auto mn = std::min_element(logs.begin(), logs.end());
  scan.min_abs = std::exp(*mn);
  scan.median_abs = std::exp(med);
  scan.y_at_min = scan.y[mn - logs.begin()];
  scan.log_ratio = *mn - med;
  return scan;
}

ZeroCheckReport check_zero_free_axis(const Eigenpair& pair, double Y) {
  const cplx E = pair.energy.value;
  if (std::abs(E.imag()) <= 1e-10 * std::max(1.0, std::abs(E))) {
    throw UsageError("zero-free axis check applies to non-real levels only");
  }
  if (Y <= 0.0) Y = std::abs(pair.right.front().z);
  const StateEvaluator state(pair, {}, Y + 0.5);
  const AxisScan scan = scan_imaginary_axis(state, -Y, Y, 0.005);
  ZeroCheckReport r;
  r.value = scan.log_ratio;
  r.min_margin = scan.log_ratio - std::log(1e-6);
  r.ok = r.min_margin > 0.0;
  std::ostringstream os;
  os << "min |psi(iy)| / median = exp(" << scan.log_ratio << ") at y = " << scan.y_at_min;
  r.detail = os.str();
  if (!r.ok) r.violations.push_back("near-zero on the imaginary axis: " + os.str());
  return r;
}

ZeroCheckReport check_zero_asymptotics(const std::vector<ZeroRecord>& zeros, cplx E, double M) {
  ZeroCheckReport r;
  std::vector<cplx> high;
  for (const auto& z : zeros) {
    if (z.position.imag() > M) high.push_back(z.position);
  }
  std::ostringstream os;
  os << high.size() << " zeros above M = " << M;
  const bool real_level = std::abs(E.imag()) <= 1e-10 * std::max(1.0, std::abs(E));
  if (real_level) {
    for (cplx z : high) {
      if (std::abs(z.real()) >= 0.02) {
        r.ok = false;
        std::ostringstream v;
        v << "high zero " << z << " off the imaginary axis";
        r.violations.push_back(v.str());
      }
    }
    r.detail = os.str();
    return r;
  }
  // All high zeros must share one side.  The side itself is reported, not asserted: the
  // integrated states put it at sign(Re z) = sign(Im E), opposite to the rule
  // sign(Re z) = -sign(Im E) that one would read off a decaying lower end.
  int side = 0;
  for (cplx z : high) {
    const int s = z.real() > 0.0 ? 1 : (z.real() < 0.0 ? -1 : 0);
    if (side == 0) side = s;
    if (s == 0 || s != side) {
      r.ok = false;
      std::ostringstream v;
      v << "high zero " << z << " breaks the common side";
      r.violations.push_back(v.str());
    }
  }
  r.side = side;
  os << ", side " << side << " (sign of Im E " << (E.imag() > 0 ? 1 : -1) << ")";
  if (high.size() >= 3) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (cplx z : high) {
      const double lx = std::log(z.imag()), ly = std::log(std::abs(z.real()));
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double n = double(high.size());
    r.value = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    os << ", log-log slope " << r.value;
    if (std::abs(r.value + 2.0) > 0.5) {
      r.ok = false;
      r.violations.push_back("envelope slope " + std::to_string(r.value) + " not within 0.5 of -2");
    }
  }
  r.detail = os.str();
  return r;
}

std::vector<double> imaginary_axis_zeros(const StateEvaluator& state, double y_min, double y_max) {
  PropagatorOptions o = state.options();
  o.max_phase_step = 0.5;
  o.max_step = 0.02;
  const double y0 = std::clamp(0.0, y_min, y_max);
  const ScaledState base = state.at(kI * y0);
  std::vector<ScaledState> samples;
  if (y_max > y0) {
    const std::array<cplx, 2> up = {kI * y0, kI * y_max};
    const auto s = propagate(base, up, state.equation(), o);
    samples.insert(samples.end(), s.samples.begin(), s.samples.end());
  }
  if (y_min < y0) {
    const std::array<cplx, 2> down = {kI * y0, kI * y_min};
    const auto s = propagate(base, down, state.equation(), o);
    samples.insert(samples.end(), s.samples.begin() + 1, s.samples.end());
  }
  std::sort(samples.begin(), samples.end(),
            [](const ScaledState& a, const ScaledState& b) { return a.z.imag() < b.z.imag(); });
  // psi(iy) has a constant phase for real levels; project onto it.
  double phase = 0.0;
  double best = -1e300;
  for (const auto& s : samples) {
    const double l = s.log_scale.real() + std::log(std::abs(s.psi));
    if (l > best) {
      best = l;
      phase = s.log_scale.imag() + std::arg(s.psi);
    }
  }
  auto sign = [&](const ScaledState& s) {
    return std::cos(s.log_scale.imag() + std::arg(s.psi) - phase) >= 0 ? 1 : -1;
  };
  std::vector<double> out;
  for (size_t k = 0; k + 1 < samples.size(); ++k) {
    if (sign(samples[k]) == sign(samples[k + 1])) continue;
    ScaledState s = samples[k];
    double y = s.z.imag();
    for (int it = 0; it < 50; ++it) {
      const cplx dz = -s.psi / s.dpsi;
      const double dy = std::clamp(dz.imag(), samples[k].z.imag() - y - 1e-3, samples[k + 1].z.imag() - y + 1e-3);
      y += dy;
      s = advance(s, kI * y, state.equation(), state.options());
      if (std::abs(dy) < 1e-13 * std::max(1.0, std::abs(y))) break;
    }
    out.push_back(y);
  }
  return out;
}

void write_zero_csv(const std::string& path, const std::vector<ZeroRecord>& zeros, const std::string& branch,
                    double param_value) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write " + path);
  f.precision(15);
  f << "re,im,class,residual,branch,param_value\n";
  for (const auto& z : zeros) {
    f << z.position.real() << ',' << z.position.imag() << ',' << to_string(z.cls) << ',' << z.newton_residual << ','
      << branch << ',' << param_value << '\n';
  }
}

}  // namespace ptdw
