#include "ptdw/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ptdw {
namespace {

ScaledState zero_integrals(ScaledState s) {
  s.cum_psi_sq = 0.0;
  s.cum_abs_sq = 0.0;
  return s;
}

double log_abs(const ScaledState& s) { return s.log_scale.real() + std::log(std::abs(s.psi)); }

bool is_real_level(const Eigenpair& pair) {
  const cplx E = pair.energy.value;
  return std::abs(E.imag()) <= 1e-10 * std::max(1.0, std::abs(E));
}

void require_real_parameter(const ProblemSpec& spec) {
  const cplx p = spec.form == Form::H ? spec.hbar : spec.alpha;
  if (std::abs(p.imag()) > 0.0) throw UsageError("requires a real parameter");
}

// Gauss-Legendre nodes and weights on [-1, 1], 8 points.
constexpr std::array<double, 8> kGlX = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                        -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                        0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlW = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                        0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                        0.2223810344533745, 0.1012285362903763};

// States at pts, chained by advance() in the listed order from state.at(pts[0]).
std::vector<ScaledState> chain(const StateEvaluator& state, const std::vector<cplx>& pts) {
  std::vector<ScaledState> out;
  out.reserve(pts.size());
  out.push_back(state.at(pts.front()));
  for (size_t k = 1; k < pts.size(); ++k) out.push_back(advance(out.back(), pts[k], state.equation(), state.options()));
  return out;
}

}  // namespace

FluxReport axis_flux_identity(const Eigenpair& pair, double y_min, double y_max, double dy) {
  const cplx c = pair.spec.kinetic();
  if (std::abs(c.imag()) > 1e-14 * std::abs(c)) throw UsageError("flux identity needs a real kinetic coefficient");
  if (y_min == 0.0 && y_max == 0.0) {
    y_min = -2.0;
    y_max = 2.0;
  }
  if (!(y_max > y_min) || !(dy > 0.0)) throw UsageError("bad axis interval");
  const double Y = std::max(std::abs(y_min), std::abs(y_max));
  PropagatorOptions opts;
  opts.integrals = true;
  const StateEvaluator state(pair, opts, Y + 0.5);

  const int n = std::max(2, int(std::ceil((y_max - y_min) / dy)));
  std::vector<cplx> pts;
  for (int k = 0; k <= n; ++k) pts.push_back(kI * (y_min + (y_max - y_min) * k / n));
  size_t k0 = 0;
  for (size_t k = 0; k < pts.size(); ++k) {
    if (std::abs(pts[k].imag()) < std::abs(pts[k0].imag())) k0 = k;
  }
  // walk outward from the real axis; seg[k] is the integral over [y_k, y_k+1] in units of
  // exp(2 Re log_scale) of the end state
  std::vector<ScaledState> st(pts.size());
  std::vector<double> seg_log(pts.size(), 0.0), seg_mant(pts.size(), 0.0);
  st[k0] = state.at(pts[k0]);
  for (size_t k = k0 + 1; k < pts.size(); ++k) {
    st[k] = advance(zero_integrals(st[k - 1]), pts[k], state.equation(), opts);
    seg_mant[k - 1] = st[k].cum_abs_sq;
    seg_log[k - 1] = 2.0 * st[k].log_scale.real();
  }
  for (size_t k = k0; k-- > 0;) {
    st[k] = advance(zero_integrals(st[k + 1]), pts[k], state.equation(), opts);
    seg_mant[k] = st[k].cum_abs_sq;
    seg_log[k] = 2.0 * st[k].log_scale.real();
  }

  // common reference scale: everything below is divided by exp(2 ref)
  double ref = -1e300;
  for (const auto& s : st) ref = std::max(ref, log_abs(s));

  FluxReport r;
  r.base = y_min;
  const double imE = pair.energy.value.imag();
  double cum = 0.0;
  double max_lhs = 0.0, max_scale = 0.0;
  std::vector<double> logs;
  for (size_t k = 0; k < st.size(); ++k) {
    const double w = std::exp(2.0 * (st[k].log_scale.real() - ref));
    const cplx phi = st[k].psi;
    const cplx dphi = kI * st[k].dpsi;
    const double lhs = c.real() * std::imag(std::conj(phi) * dphi) * w;
    if (k > 0) cum += seg_mant[k - 1] * std::exp(seg_log[k - 1] - 2.0 * ref);
    r.y.push_back(pts[k].imag());
    r.lhs.push_back(lhs);
    r.abs_phi.push_back(std::exp(log_abs(st[k])));
    r.rhs.push_back((k == 0 ? lhs : r.lhs.front()) + imE * cum);
    max_lhs = std::max(max_lhs, std::abs(lhs));
    max_scale = std::max(max_scale, std::abs(c) * std::abs(phi) * std::abs(dphi) * w);
    logs.push_back(log_abs(st[k]));
  }
  for (size_t k = 0; k < st.size(); ++k) {
    r.max_residual = std::max(r.max_residual, std::abs(r.lhs[k] - r.rhs[k]));
  }
  r.trivial = max_lhs <= 1e-9 * max_scale;
  r.relative_residual = max_lhs > 0.0 ? r.max_residual / max_lhs : 0.0;
  // undo the reference scale for reporting
  const double unscale = std::exp(2.0 * ref);
  for (auto& v : r.lhs) v *= unscale;
  for (auto& v : r.rhs) v *= unscale;
  r.max_residual *= unscale;
  std::vector<double> sorted = logs;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  r.median_abs_phi = std::exp(sorted[sorted.size() / 2]);
  r.min_abs_phi = std::exp(*std::min_element(logs.begin(), logs.end()));
  return r;
}

WedgeFluxReport wedge_flux_sign(const Eigenpair& pair, double x, const std::vector<double>& ys) {
  if (pair.spec.form != Form::K) throw UsageError("wedge flux check is stated for the K-form");
  require_real_parameter(pair.spec);
  const double alpha = pair.spec.alpha.real();
  if (alpha < 0.0) throw UsageError("wedge flux check needs alpha >= 0");
  if (!is_real_level(pair)) throw UsageError("wedge flux check needs a real level");
  if (x == 0.0) throw UsageError("cut must be off the imaginary axis");

  const double ymax = ys.empty() ? 0.0 : std::abs(*std::max_element(ys.begin(), ys.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b);
  }));
  const StateEvaluator state(pair, {}, std::max(6.0, std::abs(x) + ymax + 1.0));
  const double X = state.radius() - 0.5;  // outer end of the one-sided integral
  const double side = x > 0 ? 1.0 : -1.0;
  if (std::abs(x) >= X) throw UsageError("cut lies outside the trusted region");

  WedgeFluxReport rep;
  rep.x = x;
  for (double y : ys) {
    WedgeFluxLine line;
    line.y = y;
    // panels of width <= 0.1 from the outer end inward (the stable direction)
    const int panels = std::max(1, int(std::ceil((X - std::abs(x)) / 0.1)));
    std::vector<cplx> pts;
    std::vector<double> wts;
    for (int p = panels - 1; p >= 0; --p) {
      const double a = std::abs(x) + (X - std::abs(x)) * p / panels;
      const double b = std::abs(x) + (X - std::abs(x)) * (p + 1) / panels;
      for (int j = 7; j >= 0; --j) {
        pts.push_back(cplx(side * (0.5 * (a + b) + 0.5 * (b - a) * kGlX[j]), y));
        wts.push_back(0.5 * (b - a) * kGlW[j]);
      }
    }
    pts.push_back(cplx(x, y));
    const auto st = chain(state, pts);
    const double ref = log_abs(st.back());
    double integral = 0.0;
    for (size_t k = 0; k + 1 < st.size(); ++k) {
      const double s = pts[k].real();
      const double w = std::exp(2.0 * (log_abs(st[k]) - ref));
      integral += wts[k] * s * (s * s - 3.0 * y * y + alpha) * w;
    }
    const ScaledState& at = st.back();
    const double flux = std::imag(std::conj(at.psi) * at.dpsi) / std::norm(at.psi);  // relative to |psi|^2
    // right cut: flux = -int_x^X;  left cut: flux = +int_{-X}^{x}
    const double predicted = x > 0 ? -integral : integral;
    const double scale = std::exp(2.0 * ref);
    line.flux = flux * scale;
    line.integral = integral * scale;
    line.residual = std::abs(flux - predicted) / std::max(std::abs(flux), 1e-300);
    line.in_hypothesis = std::abs(x) >= std::sqrt(3.0) * std::abs(y);
    if (line.in_hypothesis) {
      line.predicted_sign = -1;  // s and the bracket keep the integrand sign on either side
      line.sign_ok = (flux > 0 ? 1 : -1) == line.predicted_sign && flux != 0.0;
      rep.ok = rep.ok && line.sign_ok;
    }
    rep.max_residual = std::max(rep.max_residual, line.residual);
    rep.lines.push_back(line);
  }
  return rep;
}

namespace {

struct HalfLine {
  double log_ref = 0.0;   // results are in units of exp(2 log_ref)
  cplx psi_sq;            // int psi^2 over the numeric part
  double abs_sq = 0.0;
  cplx tail_psi_sq;       // WKB tail beyond the cut
  double tail_abs_sq = 0.0;
  double tail_mismatch = 0.0;  // |tail(L) - (numeric on [L, L+1] + tail(L+1))|, same units
};

// Leading WKB tail beyond an end state: psi ~ psi_e exp(-kappa (s - s_e)).
void wkb_tail(const ScaledState& e, double outward, double ref, cplx& psi_sq, double& abs_sq) {
  const cplx kappa = -outward * e.dpsi / e.psi;
  const cplx f = e.psi * std::exp(e.log_scale - ref);
  psi_sq = f * f / (2.0 * kappa);
  abs_sq = std::norm(f) / (2.0 * kappa.real());
}

HalfLine half_line(const StateEvaluator& state, double L, double outward) {
  PropagatorOptions opts = state.options();
  opts.integrals = true;
  opts.record_samples = false;
  const ScaledState outer = zero_integrals(state.at(cplx(outward * (L + 1.0), 0.0)));
  const ScaledState cut = advance(outer, cplx(outward * L, 0.0), state.equation(), opts);
  const ScaledState inner = advance(zero_integrals(cut), cplx(0.0, 0.0), state.equation(), opts);
  HalfLine h;
  h.log_ref = log_abs(inner);
  const cplx r = h.log_ref;
  h.psi_sq = inner.cum_psi_sq * std::exp(2.0 * (inner.log_scale - r));
  h.abs_sq = inner.cum_abs_sq * std::exp(2.0 * (inner.log_scale.real() - h.log_ref));
  wkb_tail(cut, outward, h.log_ref, h.tail_psi_sq, h.tail_abs_sq);
  cplx far_sq;
  double far_abs;
  wkb_tail(outer, outward, h.log_ref, far_sq, far_abs);
  const double between = cut.cum_abs_sq * std::exp(2.0 * (cut.log_scale.real() - h.log_ref));
  h.tail_mismatch = std::abs(h.tail_abs_sq - (between + far_abs));
  return h;
}

}  // namespace

OverlapResult p_overlap(const Eigenpair& pair) {
  require_real_parameter(pair.spec);
  // cut where the WKB decay from the outer turning point has reached ~e^-40
  const TurningPoints tp = turning_points(pair.energy.value, pair.spec);
  double L = 0.0;
  for (const cplx& t : tp.roots) L = std::max(L, std::abs(t));
  L += 1.0;
  for (; L < 12.0; L += 0.25) {
    if (decay_exponent(pair.energy.value, pair.spec, cplx(1.0, 0.0), 0.0, L) > 20.0) break;
  }
  const StateEvaluator state(pair, {}, L + 2.0);
  const HalfLine right = half_line(state, L, 1.0);
  const HalfLine left = half_line(state, L, -1.0);
  // both halves share psi(0); put them on a common scale
  const double ref = right.log_ref;
  const double sl = std::exp(2.0 * (left.log_ref - ref));
  const cplx psi_sq = right.psi_sq + right.tail_psi_sq + sl * (left.psi_sq + left.tail_psi_sq);
  const double abs_sq = right.abs_sq + right.tail_abs_sq + sl * (left.abs_sq + left.tail_abs_sq);
  OverlapResult r;
  r.value = psi_sq / abs_sq;
  r.norm = abs_sq * std::exp(2.0 * ref);
  r.cut = L;
  r.tail_mismatch = (right.tail_mismatch + sl * left.tail_mismatch) / abs_sq;
  if (r.tail_mismatch > 1e-6) {
    std::ostringstream os;
    os << "WKB tail model disagrees with the numeric tail (" << r.tail_mismatch << " of the total)";
    throw NumericalError(NumericalError::Kind::Other, os.str());
  }
  return r;
}

Eigenpair pt_gauge(const Eigenpair& pair, GaugeReport* report, double anchor_y) {
  require_real_parameter(pair.spec);
  if (!is_real_level(pair)) throw UsageError("PT gauge is defined for real levels only");
  const StateEvaluator probe(pair, {}, 2.5);
  const AxisScan scan = scan_imaginary_axis(probe, -1.5, 1.5, 0.02);
  GaugeReport g;
  g.anchor_y = anchor_y;
  ScaledState a = probe.at(kI * g.anchor_y);
  while (log_abs(a) < std::log(1e-6 * scan.median_abs)) {
    g.anchor_y += 0.1;
    g.anchor_shifted = true;
    a = probe.at(kI * g.anchor_y);
  }
  const cplx phase = a.psi * std::exp(kI * a.log_scale.imag());
  Eigenpair out = pair;
  out.regauge(std::abs(phase) / phase);

  const StateEvaluator st(out, {}, 2.5);
  const AxisScan s2 = scan_imaginary_axis(st, -1.5, 1.5, 0.02);
  for (const cplx& v : s2.psi) {
    if (std::abs(v) > 1e-6 * s2.median_abs) g.max_imag_ratio = std::max(g.max_imag_ratio, std::abs(v.imag()) / std::abs(v));
  }
  const std::array<cplx, 5> zs = {cplx(0.3, 0.2), cplx(0.7, -0.4), cplx(1.1, 0.1), cplx(0.5, -1.0), cplx(1.4, -0.6)};
  for (const cplx& z : zs) {
    const ScaledState p = st.at(z);
    const ScaledState m = st.at(-std::conj(z));
    const cplx ratio = std::conj(m.psi * std::exp(kI * m.log_scale.imag())) / (p.psi * std::exp(kI * p.log_scale.imag()));
    const double mag = std::exp(m.log_scale.real() - p.log_scale.real());
    g.max_symmetry_error = std::max(g.max_symmetry_error, std::abs(ratio * mag - 1.0));
  }
  if (report) *report = g;
  return out;
}

double pxt_pair_mismatch(const Eigenpair& plus, const Eigenpair& minus) {
  const StateEvaluator p(plus, {}, 2.5);
  const StateEvaluator m(minus, {}, 2.5);
  const std::array<cplx, 6> zs = {cplx(0.2, 0.1), cplx(0.6, -0.3), cplx(-0.4, 0.2),
                                  cplx(1.0, -0.5), cplx(-0.9, -0.2), cplx(0.1, 0.8)};
  std::vector<cplx> logs;
  for (const cplx& z : zs) logs.push_back(p.at(z).log_psi() - std::conj(m.at(-std::conj(z)).log_psi()));
  // ratio = exp(log difference); compare against the first point modulo 2 pi i
  double spread = 0.0;
  for (const cplx& l : logs) {
    const cplx d = l - logs.front();
    spread = std::max(spread, std::abs(std::exp(d) - 1.0));
  }
  return spread;
}

void write_flux_csv(const std::string& path, const FluxReport& r) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << std::setprecision(17) << "y,lhs,rhs,abs_phi\n";
  for (size_t k = 0; k < r.y.size(); ++k) out << r.y[k] << ',' << r.lhs[k] << ',' << r.rhs[k] << ',' << r.abs_phi[k] << '\n';
}

}  // namespace ptdw
