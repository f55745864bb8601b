#include "ptdw/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ptdw/semiclassics.hpp"

namespace ptdw {

ProblemSpec spec_at(const ProblemSpec& base, ParameterPath::Kind kind, cplx param) {
  ProblemSpec s = base;
  s.truncation_radius = 0.0;
  s.matching_point.reset();
  if (kind == ParameterPath::Kind::Hbar) {
    s.form = Form::H;
    s.hbar = param;
  } else {
    s.form = Form::K;
    s.alpha = param;
    s.continued = true;
  }
  s.validate();
  return s;
}

namespace {

cplx param_of(const ProblemSpec& s) { return s.form == Form::H ? s.hbar : s.alpha; }

cplx extrapolate(const std::vector<TraceSample>& v, double s) {
  const size_t n = v.size();
  if (n == 1) return v[0].energy.value;
  if (n == 2) {
    const auto& a = v[0];
    const auto& b = v[1];
    return b.energy.value + (b.energy.value - a.energy.value) * ((s - b.s) / (b.s - a.s));
  }
  // quadratic through the last three samples
  const auto& a = v[n - 3];
  const auto& b = v[n - 2];
  const auto& c = v[n - 1];
  const double la = (s - b.s) * (s - c.s) / ((a.s - b.s) * (a.s - c.s));
  const double lb = (s - a.s) * (s - c.s) / ((b.s - a.s) * (b.s - c.s));
  const double lc = (s - a.s) * (s - b.s) / ((c.s - a.s) * (c.s - b.s));
  return la * a.energy.value + lb * b.energy.value + lc * c.energy.value;
}

}  // namespace

NodeSummary node_summary(const Eigenpair& pair) {
  const Rect region = default_zero_region(pair);
  const StateEvaluator state(pair, {}, region_radius(region));
  std::vector<ZeroRecord> zeros = locate_zeros(state, region);
  return classify_zeros(zeros, pair.energy.value, pair.spec);
}

BranchTrace trace_level(const Eigenpair& start, const ParameterPath& path, const TraceOptions& options) {
  if (path.empty()) throw UsageError("trace_level: empty path");
  const ParameterPath::Kind kind = path.kind();
  const bool form_ok = (kind == ParameterPath::Kind::Hbar) == (start.spec.form == Form::H);
  if (!form_ok) throw UsageError("trace_level: path kind does not match the problem form");
  const cplx p0 = param_of(start.spec);
  if (std::abs(path.start() - p0) > 1e-9 * (1.0 + std::abs(p0))) {
    throw UsageError("trace_level: path does not start at the level's parameter");
  }
  // Reject paths that leave the sector before doing any work.
  for (int k = 0; k <= 64; ++k) spec_at(start.spec, kind, path.at(k / 64.0));

  BranchTrace tr;
  tr.kind = kind;
  TraceSample first{0.0, p0, start.energy, start.node_summary};
  if (options.node_every > 0 && !first.nodes) first.nodes = node_summary(start);
  tr.samples.push_back(first);

  double s = 0.0;
  double ds = std::clamp(options.initial_step, options.min_step, options.max_step);
  while (s < 1.0) {
    ds = std::min(ds, 1.0 - s);
    const double s_new = (1.0 - s - ds < 1e-12) ? 1.0 : s + ds;
    const cplx param = path.at(s_new);
    const cplx prev = tr.back().energy.value;
    const cplx pred = extrapolate(tr.samples, s_new);
    double trust = options.trust_fraction * std::max(std::abs(prev), 0.05);
    if (options.trust_cap > 0.0) trust = std::min(trust, options.trust_cap);
    FindLevelOptions fo = options.find;
    fo.basin_radius = trust;
    fo.check_simplicity = false;
    fo.initial_step = std::min(fo.initial_step, 0.05 * trust / (1.0 + std::abs(pred)));
    bool accepted = false;
    cplx E;
    try {
      const ProblemSpec sp = spec_at(start.spec, kind, param);
      const MismatchFunction w(sp, pred, fo.propagation);
      E = refine_level(w, pred, fo);
      // no branch jumping: adjacent samples stay within a fraction of the trust radius
      accepted = std::abs(E - prev) < 0.2 * trust && std::abs(E - pred) <= trust;
      if (!accepted) {
        ds *= 0.5;
        ++tr.steps_halved;
      }
    } catch (const NumericalError& e) {
      if (e.kind() == NumericalError::Kind::BasinEscape) {
        ds *= 0.25;
        ++tr.steps_quartered;
      } else {
        ds *= 0.5;
        ++tr.steps_halved;
      }
      tr.diagnostic = e.what();
    }
    if (!accepted) {
      if (ds < options.min_step) {
        tr.truncated = true;
        std::ostringstream os;
        os << "trace truncated at s = " << s << " (param " << tr.back().param << "): step below "
           << options.min_step;
        if (!tr.diagnostic.empty()) os << "; last corrector error: " << tr.diagnostic;
        tr.diagnostic = os.str();
        return tr;
      }
      continue;
    }
    TraceSample smp{s_new, param, {E, start.energy.branch}, std::nullopt};
    ++tr.steps_accepted;
    if (options.node_every > 0 && tr.steps_accepted % options.node_every == 0) {
      const ProblemSpec sp = spec_at(start.spec, kind, param);
      const MismatchFunction w(sp, E, fo.propagation);
      smp.nodes = node_summary(assemble_eigenpair(w, E, start.energy.branch));
    }
    tr.samples.push_back(smp);
    const double move = std::abs(E - pred);
    s = s_new;
    if (move < 0.02 * trust) ds = std::min(ds * 1.5, options.max_step);
  }
  tr.diagnostic.clear();
  return tr;
}

namespace {

struct RealMismatch {
  MismatchFunction w;
  double operator()(double E) const { return w.evaluate({E, 0.0}).normalized.real(); }
};

ProblemSpec fixed_h(double hbar, double radius) {
  ProblemSpec s = ProblemSpec::h_form(hbar);
  s.truncation_radius = radius;
  s.matching_point = cplx{0.0, 0.0};
  return s;
}

// Illinois regula falsi on a bracketed sign change.
double refine_real_root(const RealMismatch& f, double a, double b, double fa, double fb) {
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    const double c = (a * fb - b * fa) / (fb - fa);
    const double fc = f(c);
    if (fc == 0.0 || std::abs(b - a) < 1e-14 * (1.0 + std::abs(c))) return c;
    if ((fc > 0) == (fb > 0)) {
      b = c;
      fb = fc;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = c;
      fa = fc;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
    if (std::abs(b - a) < 1e-13 * (1.0 + std::abs(a))) break;
  }
  return 0.5 * (a + b);
}

double h_radius(double hbar, double e_max) {
  const ProblemSpec s = ProblemSpec::h_form(hbar);
  const DecayDirections d = decay_directions(s);
  return std::max(truncation_radius(cplx{e_max, 0.0}, s, d.right), truncation_radius(cplx{e_max, 0.0}, s, d.left));
}

}  // namespace

std::vector<double> real_levels(double hbar, double e_min, double e_max, double de) {
  if (!(hbar > 0)) throw UsageError("real_levels: hbar must be positive");
  if (!(e_max > e_min) || !(de > 0)) throw UsageError("real_levels: bad energy window");
  const RealMismatch f{MismatchFunction(fixed_h(hbar, h_radius(hbar, std::max(std::abs(e_max), std::abs(e_min)) + 0.1)),
                                        cplx{e_max, 0.0})};
  std::vector<double> out;
  const int n = int(std::ceil((e_max - e_min) / de));
  double a = e_min, fa = f(a);
  for (int k = 1; k <= n; ++k) {
    const double b = std::min(e_max, e_min + k * de);
    const double fb = f(b);
    if (fa == 0.0) {
      out.push_back(a);
    } else if ((fa > 0) != (fb > 0)) {
      out.push_back(refine_real_root(f, a, b, fa, fb));
    }
    a = b;
    fa = fb;
  }
  return out;
}

int complex_pair_count(double hbar) {
  const ProblemSpec spec = ProblemSpec::h_form(hbar);
  const MismatchFunction w(spec, cplx{1.0, 0.0});
  // Real levels sit exactly on the axis; the lower box stops just short of it.
  const Rect box{-0.05, 1.0, -0.6, -1e-5};
  return mismatch_winding(w, box.boundary(), 1e-12, 64).winding;
}

// ---------------------------------------------------------------------------------------------
// Crossings

namespace {

// Complex level near `guess` at real hbar, or nullopt when only real levels are near.
std::optional<cplx> complex_level_near(double hbar, cplx guess, double basin) {
  try {
    const MismatchFunction w(ProblemSpec::h_form(hbar), guess);
    FindLevelOptions fo;
    fo.basin_radius = basin;
    fo.check_simplicity = false;
    fo.initial_step = std::min(1e-3, 0.1 * basin / (1.0 + std::abs(guess)));
    const cplx E = refine_level(w, guess, fo);
    if (std::abs(E.imag()) > 1e-9 * (1.0 + std::abs(E))) return E;
  } catch (const NumericalError&) {
  }
  return std::nullopt;
}

// Both real levels of a close pair at real hbar, tracked from (lo, hi) guesses.
std::optional<std::pair<double, double>> real_pair_near(double hbar, double lo, double hi) {
  const double gap = hi - lo;
  const double c = 0.5 * (lo + hi);
  const RealMismatch f{MismatchFunction(fixed_h(hbar, h_radius(hbar, c + 0.2)), cplx{c, 0.0})};
  // sample a window around the pair densely enough to resolve a gap shrinking to zero
  const double half = std::max(2.0 * gap, 1e-6);
  const int n = 200;
  std::vector<double> roots;
  double a = c - half, fa = f(a);
  for (int k = 1; k <= n; ++k) {
    const double b = c - half + 2.0 * half * k / n;
    const double fb = f(b);
    if ((fa > 0) != (fb > 0)) roots.push_back(refine_real_root(f, a, b, fa, fb));
    a = b;
    fa = fb;
  }
  if (roots.size() < 2) return std::nullopt;
  // the two nearest the centre
  std::sort(roots.begin(), roots.end(), [&](double x, double y) { return std::abs(x - c) < std::abs(y - c); });
  double x = roots[0], y = roots[1];
  if (x > y) std::swap(x, y);
  if (y - x < 1e-12) return std::nullopt;
  return std::pair{x, y};
}

double fit_exponent(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

CrossingRecord detect_crossing(const BranchTrace& below, const BranchTrace& above, int n,
                               const CrossingOptions& options) {
  if (below.samples.empty() || above.samples.empty()) throw UsageError("detect_crossing: empty trace");
  if (below.kind != ParameterPath::Kind::Hbar || above.kind != ParameterPath::Kind::Hbar) {
    throw UsageError("detect_crossing: traces must run over real hbar");
  }
  CrossingRecord rec;
  rec.n = n;
  double h_lo = below.back().param.real();
  cplx e_lo = below.back().energy.value;
  double h_hi = above.back().param.real();
  const double e_hi = above.back().energy.value.real();
  if (!(h_lo < h_hi)) throw UsageError("detect_crossing: the trace from below must end below the one from above");
  if (std::abs(e_lo.imag()) < 1e-12) throw UsageError("detect_crossing: the lower trace must end on a non-real level");

  // partner of the upper level
  std::optional<std::pair<double, double>> pair_hi;
  {
    const double gap_guess = std::max(0.02, 2.0 * std::abs(e_lo.imag()));
    std::vector<double> lv = real_levels(h_hi, e_hi - 3 * gap_guess, e_hi + 3 * gap_guess, gap_guess / 200);
    double best = 1e300, partner = e_hi;
    for (double x : lv) {
      if (std::abs(x - e_hi) > 1e-9 && std::abs(x - e_hi) < best) {
        best = std::abs(x - e_hi);
        partner = x;
      }
    }
    if (best == 1e300) throw NumericalError(NumericalError::Kind::NoBracket, "no partner level next to the upper trace");
    pair_hi = std::pair{std::min(partner, e_hi), std::max(partner, e_hi)};
  }

  // bisection from below on Im E -> 0
  double a = h_lo, b = h_hi;
  cplx ea = e_lo;
  while (b - a > options.tolerance) {
    const double m = 0.5 * (a + b);
    const auto e = complex_level_near(m, cplx{ea.real(), ea.imag()}, 3.0 * std::abs(ea.imag()) + 1e-9);
    if (e) {
      a = m;
      ea = *e;
    } else {
      b = m;
    }
  }
  rec.h_from_below = 0.5 * (a + b);
  const double below_lo = a;
  const cplx below_e = ea;

  // bisection from above on the real gap -> 0
  a = h_lo;
  b = h_hi;
  auto pb = *pair_hi;
  while (b - a > options.tolerance) {
    const double m = 0.5 * (a + b);
    const auto p = real_pair_near(m, pb.first, pb.second);
    if (p) {
      b = m;
      pb = *p;
    } else {
      a = m;
    }
  }
  rec.h_from_above = 0.5 * (a + b);
  const double above_hi = b;
  const auto above_pair = pb;
  rec.h_n = 0.5 * (rec.h_from_below + rec.h_from_above);
  rec.E_c = 0.25 * (above_pair.first + above_pair.second) + 0.5 * below_e.real();
  if (std::abs(rec.h_from_below - rec.h_from_above) > 1e-4) {
    rec.notes.push_back("brackets disagree by more than 1e-4: a further singularity may lie in between");
  }

  // Non-real level at hbar = h_n - delta, walked out from small delta along the square-root law.
  double sqrt_scale = 0.0;
  auto level_below = [&](double delta) -> std::optional<cplx> {
    double d = std::min(delta, 1e-6);
    cplx e{rec.E_c, -sqrt_scale * std::sqrt(d)};
    for (;;) {
      const auto next = complex_level_near(rec.h_n - d, e, 0.5 * std::abs(e.imag()) + 1e-9);
      if (!next) return std::nullopt;
      e = next->imag() > 0 ? std::conj(*next) : *next;
      if (d >= delta) return e;
      const double d2 = std::min(delta, 2.0 * d);
      e = cplx{e.real(), e.imag() * std::sqrt(d2 / d)};
      d = d2;
    }
  };

  // exponent fits: gap above, |Im E| below
  {
    std::vector<double> dx, gap, dxb, im;
    auto pp = above_pair;
    std::vector<double> offs = options.fit_offsets;
    std::sort(offs.begin(), offs.end(), std::greater<>());
    // walk from the largest offset down: seed at the largest one by a window scan
    {
      const double h = rec.h_n + offs.front();
      const double c = 0.5 * (pp.first + pp.second);
      const double w = 0.05;
      std::vector<double> lv = real_levels(h, c - w, c + w, w / 2000);
      std::sort(lv.begin(), lv.end(), [&](double x, double y) { return std::abs(x - c) < std::abs(y - c); });
      if (lv.size() >= 2) pp = {std::min(lv[0], lv[1]), std::max(lv[0], lv[1])};
    }
    for (double off : offs) {
      const auto p = real_pair_near(rec.h_n + off, pp.first, pp.second);
      if (!p) continue;
      pp = *p;
      dx.push_back(off);
      gap.push_back(pp.second - pp.first);
    }
    // E ~ E_c -+ i C sqrt(h_n - hbar) below; C from the gap above (gap ~ 2 C sqrt(delta))
    double C = 0.0;
    for (size_t i = 0; i < dx.size(); ++i) C += gap[i] / (2.0 * std::sqrt(dx[i])) / double(dx.size());
    if (C == 0.0) C = std::abs(below_e.imag()) / std::sqrt(std::max(rec.h_n - below_lo, 1e-12));
    sqrt_scale = C;
    for (auto it = offs.rbegin(); it != offs.rend(); ++it) {
      const auto e = level_below(*it);
      if (!e) continue;
      dxb.push_back(*it);
      im.push_back(std::abs(e->imag()));
    }
    if (dx.size() >= 2) rec.sqrt_exponent_fit = fit_exponent(dx, gap);
    if (dxb.size() >= 2) rec.sqrt_exponent_fit_below = fit_exponent(dxb, im);
  }

  // joint Newton on (E, hbar): f = 0, df/dE = 0 for the real mismatch at fixed anchors
  {
    const double radius = h_radius(rec.h_n, rec.E_c + 0.2);
    auto F = [&](double E, double h, double& f, double& fe) {
      const RealMismatch g{MismatchFunction(fixed_h(h, radius), cplx{E, 0.0})};
      const double d = 1e-5;
      const double fp = g(E + d), fm = g(E - d);
      f = g(E);
      fe = (fp - fm) / (2 * d);
    };
    double E = rec.E_c, h = rec.h_n;
    rec.newton_converged = false;
    for (int it = 0; it < 30; ++it) {
      double f, fe, f1, fe1, f2, fe2;
      F(E, h, f, fe);
      const double dE = 1e-6, dh = 1e-7;
      F(E + dE, h, f1, fe1);
      F(E, h + dh, f2, fe2);
      const double j11 = (f1 - f) / dE, j12 = (f2 - f) / dh;
      const double j21 = (fe1 - fe) / dE, j22 = (fe2 - fe) / dh;
      const double det = j11 * j22 - j12 * j21;
      if (det == 0.0 || !std::isfinite(det)) break;
      const double sE = -(f * j22 - j12 * fe) / det;
      const double sh = -(j11 * fe - j21 * f) / det;
      E += std::clamp(sE, -1e-3, 1e-3);
      h += std::clamp(sh, -1e-4, 1e-4);
      if (std::abs(sE) < 1e-11 && std::abs(sh) < 1e-11) {
        rec.newton_converged = true;
        break;
      }
    }
    rec.E_newton = E;
    rec.h_newton = h;
  }

  // critical node set and node bookkeeping
  if (options.node_bookkeeping) {
    try {
      FindLevelOptions fo;
      fo.check_simplicity = false;
      fo.basin_radius = 0.25 * (above_pair.second - above_pair.first) + 1e-9;
      const Eigenpair crit = find_level(above_pair.first, ProblemSpec::h_form(above_hi), fo);
      std::vector<ZeroRecord> zeros;
      {
        const Rect region = default_zero_region(crit);
        const StateEvaluator st(crit, {}, region_radius(region));
        zeros = locate_zeros(st, region);
        classify_zeros(zeros, crit.energy.value, crit.spec);
      }
      for (const auto& z : zeros) {
        if (z.cls == ZeroClass::NodePlus || z.cls == ZeroClass::NodeMinus) rec.critical_node_set.push_back(z.position);
      }
      bool sym = true;
      for (cplx z : rec.critical_node_set) {
        double best = 1e300;
        for (cplx w : rec.critical_node_set) best = std::min(best, std::abs(w + std::conj(z)));
        if (best > 1e-4) sym = false;
      }
      rec.critical_set_symmetric = sym;

      const double hb = rec.h_n * (1.0 - options.bookkeeping_offset);
      const double ha = rec.h_n * (1.0 + options.bookkeeping_offset);
      // psi_n^+ below
      const auto eb = level_below(rec.h_n - hb);
      if (!eb) throw NumericalError(NumericalError::Kind::TraceTruncated, "lost the non-real level below h_n");
      cplx e = *eb;
      if (e.imag() > 0) e = std::conj(e);
      FindLevelOptions fb;
      fb.check_simplicity = false;
      fb.basin_radius = 0.5 * std::abs(e.imag());
      const NodeSummary sb = node_summary(find_level(e, ProblemSpec::h_form(hb), fb));
      rec.nodes_below_plus = sb.n_plus;
      rec.nodes_below_minus = sb.n_minus;
      std::vector<double> lv;
      {
        const double c = 0.5 * (above_pair.first + above_pair.second);
        lv = real_levels(ha, c - 0.2, c + 0.2, 2e-4);
        std::sort(lv.begin(), lv.end(), [&](double x, double y) { return std::abs(x - c) < std::abs(y - c); });
      }
      if (lv.size() < 2) throw NumericalError(NumericalError::Kind::NoBracket, "real pair not found above h_n");
      const double e_even = std::min(lv[0], lv[1]), e_odd = std::max(lv[0], lv[1]);
      FindLevelOptions fa;
      fa.check_simplicity = false;
      fa.basin_radius = 0.25 * (e_odd - e_even);
      const NodeSummary se = node_summary(find_level(e_even, ProblemSpec::h_form(ha), fa));
      const NodeSummary so = node_summary(find_level(e_odd, ProblemSpec::h_form(ha), fa));
      rec.nodes_above_even = se.n_plus + se.n_minus;
      rec.nodes_above_odd = so.n_plus + so.n_minus;
      rec.bookkeeping_ok = rec.nodes_below_plus == n && rec.nodes_below_minus == 0 && rec.nodes_above_even == 2 * n &&
                           rec.nodes_above_odd == 2 * n && int(rec.critical_node_set.size()) == 2 * n && sym;
    } catch (const NumericalError& err) {
      rec.notes.push_back(std::string("node bookkeeping failed: ") + err.what());
    }
  }
  return rec;
}

namespace {

// Lowest real levels at hbar = 1 (all real there), sorted.
std::vector<double> levels_at_one(int count) {
  const OracleResult o = oracle_spectrum(ProblemSpec::h_form(1.0), 160);
  std::vector<double> v;
  for (const auto& l : o.levels) v.push_back(l.value.real());
  if (int(v.size()) < count) throw NumericalError(NumericalError::Kind::Other, "oracle certified too few levels");
  v.resize(count);
  return v;
}

}  // namespace

CrossingRecord find_crossing(int n, const CrossingOptions& options) {
  if (n < 0) throw UsageError("find_crossing: n must be >= 0");
  // below: E_n^+ from the perturbative end
  const double h_start = 0.02 / (1.0 + 0.5 * n);
  const ComplexEnergy q = wkb_quantized_level(n, h_start, +1);
  FindLevelOptions fo;
  fo.basin_radius = 0.3 * h_start;
  Eigenpair plus = find_level(q.value, ProblemSpec::h_form(h_start), fo);
  plus.energy.branch = BranchLabel::perturbative(n, +1);
  ParameterPath up(ParameterPath::Kind::Hbar);
  up.line_to(h_start, 1.0);
  TraceOptions to;
  to.initial_step = 0.002;
  to.min_step = 1e-6;
  to.max_step = 0.01;
  BranchTrace below = trace_level(plus, up, to);
  // keep only the non-real part
  while (below.samples.size() > 1 && std::abs(below.back().energy.value.imag()) < 1e-9) below.samples.pop_back();

  // above: E_{2n+1} from hbar = 1 down to where the lower trace stopped
  const std::vector<double> lv = levels_at_one(2 * n + 2);
  FindLevelOptions fa;
  fa.basin_radius = 0.25 * (lv[2 * n + 1] - lv[2 * n]);
  Eigenpair odd = find_level(lv[2 * n + 1], ProblemSpec::h_form(1.0), fa);
  odd.energy.branch = BranchLabel::large_hbar(2 * n + 1);
  ParameterPath down(ParameterPath::Kind::Hbar);
  down.line_to(1.0, below.back().param.real());
  TraceOptions td = to;
  BranchTrace above = trace_level(odd, down, td);
  while (above.samples.size() > 1 && std::abs(above.back().energy.value.imag()) > 1e-9) above.samples.pop_back();
  CrossingRecord rec = detect_crossing(below, above, n, options);
  return rec;
}

MonodromyReport monodromy_check(const CrossingRecord& crossing, double radius, const TraceOptions& options) {
  MonodromyReport rep;
  rep.n = crossing.n;
  rep.h_n = crossing.h_n;
  rep.radius = radius;
  const double h = crossing.h_n;
  if (!(radius > 0) || radius >= h) throw UsageError("monodromy_check: radius must lie in (0, h_n)");
  // real pair at h + r
  const double c = crossing.E_c;
  std::vector<double> lv = real_levels(h + radius, c - 0.2, c + 0.2, 1e-4);
  std::sort(lv.begin(), lv.end(), [&](double x, double y) { return std::abs(x - c) < std::abs(y - c); });
  if (lv.size() < 2) throw NumericalError(NumericalError::Kind::NoBracket, "real pair not found at h_n + r");
  const double e_even = std::min(lv[0], lv[1]), e_odd = std::max(lv[0], lv[1]);
  const double gap = e_odd - e_even;
  // conjugate pair at h - r
  ScanOptions so;
  const Rect box{c - 2 * gap - 0.01, c + 2 * gap + 0.01, -2 * gap - 0.01, 2 * gap + 0.01};
  const ScanResult sr = scan_spectrum(box, ProblemSpec::h_form(h - radius), so);
  cplx e_plus{0, 0}, e_minus{0, 0};
  bool have_plus = false, have_minus = false;
  for (const auto& l : sr.levels) {
    if (l.value.imag() < -1e-9 && (!have_plus || std::abs(l.value - c) < std::abs(e_plus - c))) {
      e_plus = l.value;
      have_plus = true;
    }
    if (l.value.imag() > 1e-9 && (!have_minus || std::abs(l.value - c) < std::abs(e_minus - c))) {
      e_minus = l.value;
      have_minus = true;
    }
  }
  if (!have_plus || !have_minus) throw NumericalError(NumericalError::Kind::NoBracket, "conjugate pair not found at h_n - r");

  TraceOptions to = options;
  to.trust_cap = std::min(to.trust_cap > 0 ? to.trust_cap : 1e300, 0.25 * gap);
  to.initial_step = std::min(to.initial_step, 0.01);
  to.max_step = std::min(to.max_step, 0.02);
  auto run = [&](const std::string& name, double e0, double arg_end, cplx expected) {
    FindLevelOptions fo;
    fo.check_simplicity = false;
    fo.basin_radius = 0.25 * gap;
    const Eigenpair start = find_level(e0, ProblemSpec::h_form(h + radius), fo);
    const BranchTrace tr = trace_level(start, hbar_circle(h, radius, 0.0, arg_end), to);
    MonodromyPath p;
    p.name = name;
    p.start_energy = e0;
    p.expected = expected;
    if (tr.truncated) {
      p.end_energy = tr.back().energy.value;
      p.mismatch = std::numeric_limits<double>::infinity();
      p.ok = false;
      p.name += " (truncated: " + tr.diagnostic + ")";
    } else {
      p.end_energy = tr.back().energy.value;
      p.mismatch = std::abs(p.end_energy - expected);
      p.ok = p.mismatch < (std::abs(arg_end) > 3 * kPi ? 1e-7 : 1e-6);
    }
    rep.paths.push_back(p);
  };
  // upper half-plane continuation from E_2n lands on E_n^+, lower on E_n^-, odd level swapped
  run("even upper half-circle", e_even, kPi, e_plus);
  run("even lower half-circle", e_even, -kPi, e_minus);
  run("odd upper half-circle", e_odd, kPi, e_minus);
  run("odd lower half-circle", e_odd, -kPi, e_plus);
  run("even full circle", e_even, 2 * kPi, e_odd);
  run("even double circle", e_even, 4 * kPi, e_even);
  rep.ok = std::all_of(rep.paths.begin(), rep.paths.end(), [](const MonodromyPath& p) { return p.ok; });
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Node birth

namespace {

struct BirthProbe {
  bool ok = false;
  double e_even = 0, e_odd = 0;
  double y_star = 0, y_tilde = 0;
  bool has_axis_zero = false;
  double g() const { return y_tilde - y_star; }  // > 0: imaginary node present
};

void probe_axis(BirthProbe& p, double hbar, const NodeBirthOptions& options) {
  const ProblemSpec spec = ProblemSpec::h_form(hbar);
  FindLevelOptions fo;
  fo.check_simplicity = false;
  fo.basin_radius = 0.25 * (p.e_odd - p.e_even);
  const Eigenpair pair = find_level(p.e_odd, spec, fo);
  p.e_odd = pair.energy.value.real();
  p.y_tilde = imaginary_turning_ordinate(p.e_odd, spec);
  for (double margin : {options.axis_margin, 2.0 * options.axis_margin + 1.0}) {
    const double top = p.y_tilde + margin;
    const StateEvaluator st(pair, {}, std::max(top, 1.5) + 0.5);
    const std::vector<double> ys = imaginary_axis_zeros(st, -1.5, top);
    if (!ys.empty()) {
      p.y_star = *std::min_element(ys.begin(), ys.end());
      p.has_axis_zero = true;
      return;
    }
  }
}

BirthProbe probe_scan(double hbar, const NodeBirthOptions& options) {
  BirthProbe p;
  const std::vector<double> lv = real_levels(hbar, 0.0, 1.2, 2e-4);
  if (lv.size() < 2) return p;
  p.e_even = lv[0];
  p.e_odd = lv[1];
  probe_axis(p, hbar, options);
  p.ok = p.has_axis_zero;
  return p;
}

BirthProbe probe_track(double hbar, const BirthProbe& from, const NodeBirthOptions& options) {
  BirthProbe p;
  const auto pr = real_pair_near(hbar, from.e_even, from.e_odd);
  if (!pr) return p;
  p.e_even = pr->first;
  p.e_odd = pr->second;
  probe_axis(p, hbar, options);
  p.ok = p.has_axis_zero;
  return p;
}

double ep_action_value() {
  static const double v = [] {
    const EpResult ep = find_Ep();
    return std::abs(action(ep.E, TurningPair::PlusMinus, ProblemSpec::h_form(1.0)).value);
  }();
  return v;
}

}  // namespace

NodeBirthRecord find_node_birth(int n, const NodeBirthOptions& options) {
  if (n < 0) throw UsageError("find_node_birth: n must be >= 0");
  NodeBirthRecord rec;
  rec.n = n;
  rec.level = 2 * n + 1;
  // Semiclassical start: real levels near E^p satisfy |action| ~ hbar (m + 1/2).
  double h = ep_action_value() / (2.0 * n + 1.5);
  // move to the window where exactly n pairs are non-real, so that the real levels are
  // E_2n < E_2n+1 < ...
  int count = complex_pair_count(h);
  for (int it = 0; count != n; ++it) {
    if (it > 200) throw NumericalError(NumericalError::Kind::NoBracket, "could not reach the window with n non-real pairs");
    h *= count > n ? 1.005 : 1.0 / 1.005;
    count = complex_pair_count(h);
    ++rec.evaluations;
  }
  rec.complex_pairs = count;
  BirthProbe p = probe_scan(h, options);
  if (!p.ok) throw NumericalError(NumericalError::Kind::NoBracket, "no zero of psi(iy) in the scan window");
  // walk until g changes sign, staying inside the window
  double h_prev = h;
  BirthProbe p_prev = p;
  const bool present = p.g() > 0;
  double walk = options.walk;
  for (int it = 0;; ++it) {
    if (it >= options.max_walk) throw NumericalError(NumericalError::Kind::NoBracket, "node birth not bracketed");
    const double hn = present ? h_prev * (1.0 - walk) : h_prev * (1.0 + walk);
    if (complex_pair_count(hn) != n) {
      // stepped over a crossing: shorten the step and retry
      walk *= 0.5;
      if (walk < 1e-8) {
        throw NumericalError(NumericalError::Kind::NoBracket,
                             present ? "the odd level keeps its imaginary node down to the crossing"
                                     : "no node birth before the next crossing");
      }
      continue;
    }
    BirthProbe q = probe_track(hn, p_prev, options);
    if (!q.ok) q = probe_scan(hn, options);
    ++rec.evaluations;
    if (!q.ok) throw NumericalError(NumericalError::Kind::NoBracket, "lost the odd level while bracketing");
    if ((q.g() > 0) != present) {
      double lo = present ? hn : h_prev, hi = present ? h_prev : hn;
      BirthProbe plo = present ? q : p_prev, phi = present ? p_prev : q;
      while (hi - lo > options.tolerance) {
        const double m = 0.5 * (lo + hi);
        BirthProbe pm = probe_track(m, plo, options);
        ++rec.evaluations;
        if (!pm.ok) throw NumericalError(NumericalError::Kind::NoConvergence, "lost the odd level in bisection");
        if (pm.g() > 0) {
          hi = m;
          phi = pm;
        } else {
          lo = m;
          plo = pm;
        }
      }
      rec.bracket_lo = lo;
      rec.bracket_hi = hi;
      rec.h_p = 0.5 * (lo + hi);
      const double t = plo.g() / (plo.g() - phi.g());
      rec.E_p = plo.e_odd + t * (phi.e_odd - plo.e_odd);
      rec.y_star = plo.y_star + t * (phi.y_star - plo.y_star);
      rec.y_tilde = plo.y_tilde + t * (phi.y_tilde - plo.y_tilde);
      return rec;
    }
    h_prev = hn;
    p_prev = q;
  }
}

void write_trace_csv(const std::string& path, const BranchTrace& trace) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write " + path);
  f.precision(15);
  f << "param_re,param_im,E_re,E_im,n_plus,n_minus,imag_node\n";
  for (const auto& s : trace.samples) {
    f << s.param.real() << ',' << s.param.imag() << ',' << s.energy.value.real() << ',' << s.energy.value.imag() << ',';
    if (s.nodes) {
      f << s.nodes->n_plus << ',' << s.nodes->n_minus << ',' << (s.nodes->has_imaginary_node ? 1 : 0);
    } else {
      f << ",,";
    }
    f << '\n';
  }
}

}  // namespace ptdw
