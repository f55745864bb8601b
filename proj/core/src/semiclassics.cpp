#include "ptdw/semiclassics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ptdw {

namespace {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> x, w;
};

GaussRule gauss_legendre(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.x[i] = x;
    r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  // ascending order so the square root can be continued node to node
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return r.x[a] < r.x[b]; });
  GaussRule s;
  for (int i : idx) {
    s.x.push_back(r.x[i]);
    s.w.push_back(r.w[i]);
  }
  return s;
}

const GaussRule& rule(int n) {
  static thread_local std::vector<std::pair<int, GaussRule>> cache;
  for (const auto& [k, g] : cache) {
    if (k == n) return g;
  }
  cache.emplace_back(n, gauss_legendre(n));
  return cache.back().second;
}

// sqrt(E - V(z)) on the branch closest to `prev`.
cplx p0_near(cplx E, cplx z, const ProblemSpec& spec, cplx prev) {
  const cplx p = std::sqrt(E - potential(z, spec));
  return std::abs(p - prev) <= std::abs(p + prev) ? p : -p;
}

double segment_distance(cplx p, cplx a, cplx b) {
  const cplx d = b - a;
  const double t = std::clamp(std::real((p - a) * std::conj(d)) / std::norm(d), 0.0, 1.0);
  return std::abs(p - (a + t * d));
}

// int p0 dz along the straight segment a -> b with smoothstep grading at both ends, so that
// square-root endpoint behaviour is integrated to full accuracy.  `branch` is continued.
cplx graded_segment_integral(cplx E, cplx a, cplx b, const ProblemSpec& spec, cplx& branch, int panels = 32) {
  const GaussRule& g = rule(16);
  cplx sum = 0.0;
  const cplx d = b - a;
  for (int p = 0; p < panels; ++p) {
    const double t0 = double(p) / panels, t1 = double(p + 1) / panels;
    for (size_t k = 0; k < g.x.size(); ++k) {
      const double t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * g.x[k];
      const double s = t * t * (3.0 - 2.0 * t);
      const double ds = 6.0 * t * (1.0 - t);
      const cplx z = a + d * s;
      branch = p0_near(E, z, spec, branch);
      sum += 0.5 * (t1 - t0) * g.w[k] * branch * d * ds;
    }
  }
  return sum;
}

}  // namespace

const char* to_string(TurningPair p) {
  switch (p) {
    case TurningPair::PlusMinus: return "I+I-";
    case TurningPair::ZeroPlus: return "I0I+";
    case TurningPair::ZeroMinus: return "I0I-";
  }
  return "?";
}

const char* to_string(StokesDiagram::ShortLine s) {
  switch (s) {
    case StokesDiagram::ShortLine::Present: return "present";
    case StokesDiagram::ShortLine::Absent: return "absent";
    case StokesDiagram::ShortLine::Critical: return "critical";
  }
  return "?";
}

ActionCycle action_cycle(cplx E, cplx a, cplx b, const ProblemSpec& spec, const ActionOptions& options) {
  const TurningPoints tp = turning_points(E, spec);
  if (tp.degenerate) throw NumericalError(NumericalError::Kind::Other, "degenerate turning points");
  cplx third = tp.roots[0];
  double far = -1.0;
  for (cplx r : tp.roots) {
    const double d = std::min(std::abs(r - a), std::abs(r - b));
    if (d > far) {
      far = d;
      third = r;
    }
  }
  const double half = 0.5 * std::abs(b - a);
  double clearance = std::min({options.clearance, 0.5 * segment_distance(third, a, b), half});
  if (clearance < 0.05) {
    std::ostringstream os;
    os << "cycle around " << a << ", " << b << " cannot keep 0.05 away from " << third;
    throw NumericalError(NumericalError::Kind::Other, os.str());
  }
  const cplx c = 0.5 * (a + b);
  const cplx u = (b - a) / std::abs(b - a);
  // stadium in local coordinates w, z = c + u w; pieces: bottom, right cap, top, left cap
  struct Piece {
    bool arc;
    cplx from, to;      // lines
    cplx center;        // arcs
    double th0, th1;    // arcs
    double length;
  };
  const double d = clearance;
  std::array<Piece, 4> pieces{{
      {false, {-half, -d}, {half, -d}, 0.0, 0, 0, 2 * half},
      {true, 0.0, 0.0, {half, 0.0}, -kPi / 2, kPi / 2, kPi * d},
      {false, {half, d}, {-half, d}, 0.0, 0, 0, 2 * half},
      {true, 0.0, 0.0, {-half, 0.0}, kPi / 2, 3 * kPi / 2, kPi * d},
  }};
  const double total = 4 * half + 2 * kPi * d;
  const GaussRule& g = rule(options.nodes_per_panel);
  ActionCycle out;
  out.E = E;
  out.a = a;
  out.b = b;
  cplx branch = std::sqrt(E - potential(c + u * cplx{-half, -d}, spec));
  cplx sum = 0.0;
  for (const Piece& pc : pieces) {
    const int np = std::max(2, int(std::ceil(options.panels * pc.length / total)));
    for (int p = 0; p < np; ++p) {
      const double t0 = double(p) / np, t1 = double(p + 1) / np;
      for (size_t k = 0; k < g.x.size(); ++k) {
        const double t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * g.x[k];
        cplx w, dw;
        if (pc.arc) {
          const double th = pc.th0 + (pc.th1 - pc.th0) * t;
          w = pc.center + d * std::polar(1.0, th);
          dw = kI * d * std::polar(1.0, th) * (pc.th1 - pc.th0);
        } else {
          w = pc.from + (pc.to - pc.from) * t;
          dw = pc.to - pc.from;
        }
        const cplx z = c + u * w;
        branch = p0_near(E, z, spec, branch);
        sum += 0.5 * (t1 - t0) * g.w[k] * branch * u * dw;
      }
      const double tp0 = t0;
      cplx w0 = pc.arc ? pc.center + d * std::polar(1.0, pc.th0 + (pc.th1 - pc.th0) * tp0)
                       : pc.from + (pc.to - pc.from) * tp0;
      out.contour.push_back(c + u * w0);
    }
  }
  out.contour.push_back(out.contour.front());
  out.value = sum / (2.0 * kPi * kI);
  return out;
}

ActionCycle action(cplx E, TurningPair which, const ProblemSpec& spec, const ActionOptions& options) {
  const TurningPoints tp = turning_points(E, spec);
  switch (which) {
    case TurningPair::PlusMinus: return action_cycle(E, tp.plus, tp.minus, spec, options);
    case TurningPair::ZeroPlus: return action_cycle(E, tp.imaginary_point, tp.plus, spec, options);
    case TurningPair::ZeroMinus: return action_cycle(E, tp.imaginary_point, tp.minus, spec, options);
  }
  throw UsageError("unknown turning pair");
}

ComplexEnergy wkb_level(int n, double hbar, int sign) {
  if (n < 0) throw UsageError("wkb_level: n must be >= 0");
  if (sign != 1 && sign != -1) throw UsageError("wkb_level: sign must be +1 or -1");
  const double depth = 2.0 / (3.0 * std::sqrt(3.0));
  const cplx root = std::polar(1.0, sign * kPi / 4);
  const cplx E = -double(sign) * kI * depth + root * std::pow(3.0, 0.25) * double(2 * n + 1) * hbar;
  return {E, BranchLabel::perturbative(n, sign)};
}

ComplexEnergy wkb_quantized_level(int n, double hbar, int sign, const ActionOptions& options) {
  const ProblemSpec spec = ProblemSpec::h_form(hbar);
  const cplx well = sign / std::sqrt(3.0);
  auto cycle = [&](cplx E) {
    TurningPoints tp = turning_points(E, spec);
    std::array<cplx, 3> r = tp.roots;
    std::sort(r.begin(), r.end(), [&](cplx x, cplx y) { return std::abs(x - well) < std::abs(y - well); });
    ActionOptions o = options;
    o.clearance = std::min(o.clearance, 0.45 * std::abs(r[0] - r[1]));
    return action_cycle(E, r[0], r[1], spec, o).value;
  };
  const double target = hbar * (n + 0.5);
  cplx e0 = wkb_level(n, hbar, sign).value;
  // The loop integral is defined up to a unit factor (branch and orientation); take the
  // one that matches the leading-order level.
  const cplx v0 = cycle(e0);
  const std::array<cplx, 4> units{cplx{1, 0}, cplx{-1, 0}, cplx{0, 1}, cplx{0, -1}};
  cplx unit = units[0];
  for (cplx u : units) {
    if (std::abs(v0 - u * target) < std::abs(v0 - unit * target)) unit = u;
  }
  auto f = [&](cplx E) { return cycle(E) - unit * target; };
  cplx e1 = e0 + 1e-3 * hbar;
  cplx f0 = f(e0), f1 = f(e1);
  for (int it = 0; it < 60; ++it) {
    if (f1 == f0) break;
    const cplx e2 = e1 - f1 * (e1 - e0) / (f1 - f0);
    e0 = e1;
    f0 = f1;
    e1 = e2;
    f1 = f(e1);
    if (std::abs(e1 - e0) < 1e-13 * (1.0 + std::abs(e1))) return {e1, BranchLabel::perturbative(n, sign)};
  }
  throw NumericalError(NumericalError::Kind::NoConvergence, "quantization condition did not converge");
}

namespace {

struct Tracer {
  double E;
  const ProblemSpec& spec;
  const StokesOptions& opt;
  std::array<cplx, 3> roots;

  double nearest_other(cplx z, int skip, int* which) const {
    double best = 1e300;
    for (int k = 0; k < 3; ++k) {
      if (k == skip) continue;
      const double d = std::abs(z - roots[k]);
      if (d < best) {
        best = d;
        if (which) *which = k;
      }
    }
    return best;
  }

  StokesCurve trace(int src, int dir) const {
    StokesCurve c;
    const cplx t = roots[src];
    c.source = t;
    c.direction = dir;
    const cplx slope = -potential_derivative(t, spec);  // E - V ~ slope (z - t)
    const double phi = std::arg(std::sqrt(slope));
    const double theta = (dir * kPi - phi) / 1.5;
    cplx z = t + opt.seed_distance * std::polar(1.0, theta);
    cplx heading = std::polar(1.0, theta);
    cplx branch = std::sqrt(E - potential(z, spec));
    // integral from the source to the seed point
    cplx seed_branch = branch;
    cplx integral = graded_segment_integral(E, t, z, spec, seed_branch, 4);
    if (std::abs(seed_branch - branch) > std::abs(seed_branch + branch)) integral = -integral;
    c.points.push_back(t);
    c.points.push_back(z);
    const int src_idx = src;
    for (int k = 0; k < opt.max_points; ++k) {
      int other = -1;
      const double dist = nearest_other(z, src_idx, &other);
      if (dist < opt.capture_distance) {
        c.end = StokesCurve::End::TurningPoint;
        c.end_turning_point = other;
        c.points.push_back(roots[other]);
        c.end_point = roots[other];
        return c;
      }
      if (std::abs(z.real()) > opt.box || std::abs(z.imag()) > opt.box) {
        c.end = StokesCurve::End::LeftBox;
        c.end_point = z;
        return c;
      }
      const double h = std::clamp(0.25 * dist, 1e-5, opt.step);
      auto field = [&](cplx at, cplx prev_dir) {
        const cplx p = std::sqrt(E - potential(at, spec));
        cplx d = std::conj(p) / std::abs(p);
        if (std::real(d * std::conj(prev_dir)) < 0) d = -d;
        return d;
      };
      const cplx k1 = field(z, heading);
      const cplx k2 = field(z + 0.5 * h * k1, k1);
      const cplx k3 = field(z + 0.5 * h * k2, k2);
      const cplx k4 = field(z + h * k3, k3);
      cplx zn = z + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
      // project back onto Im(integral) = 0
      cplx br = branch;
      cplx piece = graded_segment_integral(E, z, zn, spec, br, 1);
      for (int it = 0; it < 3; ++it) {
        const double im = (integral + piece).imag();
        const cplx normal = kI * k4;
        const double rate = std::imag(br * normal);
        if (std::abs(rate) < 1e-14) break;
        zn -= normal * (im / rate);
        br = branch;
        piece = graded_segment_integral(E, z, zn, spec, br, 1);
      }
      integral += piece;
      branch = br;
      c.max_residual = std::max(c.max_residual, std::abs(integral.imag()));
      heading = (zn - z) / std::abs(zn - z);
      z = zn;
      c.points.push_back(z);
    }
    c.end = StokesCurve::End::StepLimit;
    c.end_point = z;
    return c;
  }
};

}  // namespace

StokesDiagram trace_stokes(double E, const ProblemSpec& spec, const StokesOptions& options) {
  if (!(E > 0)) throw UsageError("trace_stokes: E must be positive");
  StokesDiagram d;
  d.E = E;
  d.turning = turning_points(E, spec);
  if (d.turning.degenerate) throw NumericalError(NumericalError::Kind::Other, "degenerate turning points");
  const Tracer tr{E, spec, options, d.turning.roots};
  for (int s = 0; s < 3; ++s) {
    for (int k = 0; k < 3; ++k) d.curves.push_back(tr.trace(s, k));
  }
  d.i0_offset = short_line_offset(E, spec, options);
  bool joined = false;
  for (const auto& c : d.curves) {
    if (c.source == d.turning.plus && c.end == StokesCurve::End::TurningPoint) joined = true;
  }
  if (std::abs(d.i0_offset) < 1e-5) {
    d.short_line = StokesDiagram::ShortLine::Critical;
  } else if (joined) {
    d.short_line = StokesDiagram::ShortLine::Present;
  }
  return d;
}

double short_line_offset(double E, const ProblemSpec& spec, const StokesOptions& options) {
  const TurningPoints tp = turning_points(E, spec);
  const Tracer tr{E, spec, options, tp.roots};
  const cplx i0 = tp.imaginary_point;
  // Of the three curves out of I+, the one passing closest to I0 decides.  Sign: I0 to the
  // left of the direction of travel is positive.
  double best = std::numeric_limits<double>::infinity();
  double signed_best = best;
  for (int k = 0; k < 3; ++k) {
    const StokesCurve c = tr.trace(2, k);
    if (c.end == StokesCurve::End::TurningPoint && c.end_turning_point == 1) return 0.0;
    for (size_t i = 1; i < c.points.size(); ++i) {
      const cplx a = c.points[i - 1], b = c.points[i];
      const double d = segment_distance(i0, a, b);
      if (d < best) {
        best = d;
        const double cross = std::imag(std::conj(b - a) * (i0 - a));
        signed_best = cross >= 0 ? d : -d;
      }
    }
  }
  return signed_best;
}

EpResult find_Ep(double lo, double hi, const StokesOptions& options) {
  const ProblemSpec spec = ProblemSpec::h_form(1.0);
  // Criticality functional: Im int_{I+}^{I0} p0 dz vanishes when I0 is on the line from I+.
  auto integral = [&](double E) {
    const TurningPoints tp = turning_points(E, spec);
    cplx br = std::sqrt(E - potential(0.5 * (tp.plus + tp.imaginary_point), spec));
    return graded_segment_integral(E, tp.plus, tp.imaginary_point, spec, br, 64).imag();
  };
  auto offset = [&](double E) { return short_line_offset(E, spec, options); };
  double flo = offset(lo), fhi = offset(hi);
  if ((flo > 0) == (fhi > 0)) {
    std::ostringstream os;
    os << "no sign change of the short-line offset: d(" << lo << ") = " << flo << ", d(" << hi << ") = " << fhi;
    throw NumericalError(NumericalError::Kind::NoBracket, os.str());
  }
  EpResult r;
  // Bisection on the traced offset to its resolution, then the integral functional
  // (smooth in E) polishes the root.
  for (; r.iterations < 60 && hi - lo > 1e-6; ++r.iterations) {
    const double mid = 0.5 * (lo + hi);
    const double fm = offset(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double a = lo - 1e-4, b = hi + 1e-4;
  double fa = integral(a), fb = integral(b);
  if ((fa > 0) == (fb > 0)) {
    throw NumericalError(NumericalError::Kind::NoBracket, "criticality integral has no sign change near the traced root");
  }
  for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = integral(m);
    if ((fm > 0) == (fa > 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
    ++r.iterations;
  }
  r.E = 0.5 * (a + b);
  r.integral_residual = integral(r.E);
  r.offset = offset(r.E);
  return r;
}

void write_stokes_csv(const std::string& path, const StokesDiagram& d) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write " + path);
  f.precision(12);
  f << "curve,source_re,source_im,re,im\n";
  for (size_t i = 0; i < d.curves.size(); ++i) {
    for (cplx z : d.curves[i].points) {
      f << i << ',' << d.curves[i].source.real() << ',' << d.curves[i].source.imag() << ',' << z.real() << ','
        << z.imag() << '\n';
    }
  }
}

}  // namespace ptdw
