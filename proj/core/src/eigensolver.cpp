#include "ptdw/eigensolver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <sstream>

namespace ptdw {

namespace {

double log_abs(const ScaledState& s) { return s.log_scale.real() + std::log(std::abs(s.psi)); }

// Error amplification of a propagated solution: how far it fell below its running peak.
double amplification(const PathSolution& sol) {
  double peak = -1e300;
  for (const auto& s : sol.samples) peak = std::max(peak, log_abs(s));
  return peak - log_abs(sol.back());
}

double wrap_angle(double a) {
  while (a > kPi) a -= 2 * kPi;
  while (a <= -kPi) a += 2 * kPi;
  return a;
}

}  // namespace

MismatchFunction::MismatchFunction(const ProblemSpec& spec, cplx reference_energy, PropagatorOptions options)
    : spec_(spec), options_(options) {
  spec_.validate();
  options_.tolerance = std::min(options_.tolerance, spec_.ode_tolerance);
  const DecayDirections dirs = decay_directions(spec_);
  right_dir_ = dirs.right;
  left_dir_ = dirs.left;
  if (spec_.truncation_radius > 0.0) {
    radius_ = spec_.truncation_radius;
  } else {
    const cplx probe = 1.5 * reference_energy + 0.5;
    radius_ = std::max({truncation_radius(reference_energy, spec_, right_dir_),
                        truncation_radius(reference_energy, spec_, left_dir_), truncation_radius(probe, spec_, right_dir_),
                        truncation_radius(probe, spec_, left_dir_)});
  }
  right_anchor_ = radius_ * right_dir_;
  left_anchor_ = radius_ * left_dir_;

  if (spec_.matching_point) {
    matching_point_ = *spec_.matching_point;
    return;
  }
  if (spec_.form == Form::K) {
    // High K-form levels: at z = 0 both solutions are dominated by the same large component
    // and W loses most of its digits; the midpoint of the I+ I- segment keeps them apart.
    // Pick the candidate with the larger |dW/dE| at the reference energy.
    const TurningPoints tp = turning_points(reference_energy, spec_);
    const cplx mid = 0.5 * (tp.plus + tp.minus);
    const double h = 1e-4 * std::max(1.0, std::abs(reference_energy));
    double best = -1.0;
    cplx chosen = 0.0;
    for (cplx c : {cplx{0.0, 0.0}, mid}) {
      if (std::abs(c) >= 0.8 * radius_) continue;
      matching_point_ = c;
      double slope;
      try {
        slope = std::abs(evaluate(reference_energy + h).normalized - evaluate(reference_energy - h).normalized) / (2 * h);
      } catch (const NumericalError&) {
        slope = -1.0;
      }
      {
        std::lock_guard lock(cache_mutex_);
        cache_.clear();
      }
      if (slope > 1.5 * best) {  // ties keep the symmetric point
        best = slope;
        chosen = c;
      }
    }
    matching_point_ = chosen;
    return;
  }
  std::vector<cplx> candidates = {0.0};
  for (cplx c : critical_points(spec_)) {
    if (std::abs(c) > 1e-6 && std::abs(c) < 0.8 * radius_) candidates.push_back(c);
  }
  double best = 1e300;
  double score_zero = 1e300;
  matching_point_ = 0.0;
  for (cplx c : candidates) {
    matching_point_ = c;
    double score;
    try {
      const PathSolution r = propagate_right(reference_energy);
      const PathSolution l = propagate_left(reference_energy);
      score = std::max(amplification(r), amplification(l));
    } catch (const NumericalError&) {
      score = 1e300;
    }
    if (c == cplx{}) score_zero = score;
    if (score < best) best = score;
  }
  // Prefer the symmetric point unless a well centre is clearly better conditioned.
  matching_point_ = 0.0;
  if (score_zero > best + 2.0) {
    for (cplx c : candidates) {
      matching_point_ = c;
      double score;
      try {
        score = std::max(amplification(propagate_right(reference_energy)), amplification(propagate_left(reference_energy)));
      } catch (const NumericalError&) {
        score = 1e300;
      }
      if (score <= best) break;
    }
  }
}

WkbSeed MismatchFunction::right_seed(cplx E) const { return wkb_seed(E, spec_, right_anchor_, right_dir_); }
WkbSeed MismatchFunction::left_seed(cplx E) const { return wkb_seed(E, spec_, left_anchor_, left_dir_); }

PathSolution MismatchFunction::propagate_right(cplx E, bool record) const {
  PropagatorOptions o = options_;
  o.record_samples = record;
  const std::array<cplx, 2> path = {right_anchor_, matching_point_};
  return propagate(right_seed(E), path, E, spec_, o);
}

PathSolution MismatchFunction::propagate_left(cplx E, bool record) const {
  PropagatorOptions o = options_;
  o.record_samples = record;
  const std::array<cplx, 2> path = {left_anchor_, matching_point_};
  return propagate(left_seed(E), path, E, spec_, o);
}

MismatchValue MismatchFunction::evaluate(cplx E) const {
  const auto key = std::make_pair(E.real(), E.imag());
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  MismatchValue v;
  v.right = propagate_right(E, false).back();
  v.left = propagate_left(E, false).back();
  const cplx a = v.left.psi * v.right.dpsi;
  const cplx b = v.left.dpsi * v.right.psi;
  const cplx w = a - b;
  const double norm = std::abs(a) + std::abs(b);
  v.normalized = norm > 0 ? w / norm : cplx{};
  v.log_w = v.left.log_scale + v.right.log_scale + std::log(w);
  std::lock_guard lock(cache_mutex_);
  cache_.emplace(key, v);
  return v;
}

size_t MismatchFunction::evaluations() const {
  std::lock_guard lock(cache_mutex_);
  return cache_.size();
}

ScaledState Eigenpair::matching_state() const {
  ScaledState s = right.back();
  s.log_scale += log_gauge;
  return s;
}

void Eigenpair::regauge(cplx factor) { log_gauge += std::log(factor); }

cplx refine_level(const MismatchFunction& w, cplx guess, const FindLevelOptions& options, int* iterations) {
  const cplx ref = w.evaluate(guess).log_w;
  auto f = [&](cplx E) {
    cplx d = w.evaluate(E).log_w - ref;
    d.real(std::clamp(d.real(), -600.0, 600.0));
    return std::exp(d);
  };
  const double step = options.initial_step * (1.0 + std::abs(guess));
  cplx x0 = guess - step, x1 = guess + step * cplx{0.3, 0.7}, x2 = guess;
  cplx f0 = f(x0), f1 = f(x1), f2 = f(x2);
  for (int it = 1; it <= options.max_iterations; ++it) {
    const cplx h1 = x1 - x0, h2 = x2 - x1;
    const cplx d1 = (f1 - f0) / h1, d2 = (f2 - f1) / h2;
    const cplx a = (d2 - d1) / (h2 + h1);
    const cplx b = a * h2 + d2;
    const cplx disc = std::sqrt(b * b - 4.0 * f2 * a);
    cplx den = std::abs(b + disc) >= std::abs(b - disc) ? b + disc : b - disc;
    cplx dx;
    if (std::abs(den) == 0.0) {
      dx = step * cplx{0.5, 0.5};
    } else {
      dx = -2.0 * f2 / den;
    }
    // damp wild steps
    const double cap = std::max(options.basin_radius, 1e-8);
    if (std::abs(dx) > cap) dx *= cap / std::abs(dx);
    const cplx x3 = x2 + dx;
    if (iterations) *iterations = it;
    if (!std::isfinite(std::abs(x3))) break;
    if (std::abs(x3 - guess) > 2.0 * options.basin_radius) {
      std::ostringstream os;
      os << "iteration from " << guess << " left its basin (reached " << x3 << ")";
      throw NumericalError(NumericalError::Kind::BasinEscape, os.str());
    }
    if (std::abs(dx) < options.tolerance * (1.0 + std::abs(x3))) {
      if (std::abs(x3 - guess) > options.basin_radius) {
        std::ostringstream os;
        os << "converged to " << x3 << ", outside the basin of " << guess;
        throw NumericalError(NumericalError::Kind::BasinEscape, os.str());
      }
      return x3;
    }
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = f2;
    x2 = x3;
    f2 = f(x3);
    if (f2 == cplx{}) return x3;
  }
  std::ostringstream os;
  os << "no convergence from " << guess << " after " << options.max_iterations << " iterations";
  throw NumericalError(NumericalError::Kind::NoConvergence, os.str());
}

Eigenpair assemble_eigenpair(const MismatchFunction& w, cplx E, BranchLabel label) {
  Eigenpair pair;
  pair.energy = {E, label};
  pair.spec = w.spec();
  pair.matching_point = w.matching_point();
  pair.anchor = pair.matching_point;
  pair.right = w.propagate_right(E, true);
  pair.left = w.propagate_left(E, true);
  const ScaledState& r = pair.right.back();
  if (std::abs(r.psi) >= 1e-6 * std::abs(r.dpsi)) {
    pair.log_gauge = -(r.log_scale + std::log(r.psi));
  } else {
    pair.log_gauge = -(r.log_scale + std::log(r.dpsi));
  }
  pair.mismatch = std::abs(w.evaluate(E).normalized);
  const double d = 1e-6 * (1.0 + std::abs(E));
  pair.derivative = std::abs(w(E + d) - w(E - d)) / (2 * d);
  return pair;
}

Eigenpair find_level(cplx guess, const MismatchFunction& w, const FindLevelOptions& options) {
  int iters = 0;
  const cplx E = refine_level(w, guess, options, &iters);
  Eigenpair pair = assemble_eigenpair(w, E);
  pair.iterations = iters;
  if (options.check_simplicity && pair.derivative < options.min_derivative) {
    std::ostringstream os;
    os << "level " << E << " is (nearly) degenerate: |dW/dE| = " << pair.derivative;
    throw NumericalError(NumericalError::Kind::DegenerateLevel, os.str());
  }
  return pair;
}

Eigenpair find_level(cplx guess, const ProblemSpec& spec, const FindLevelOptions& options) {
  const MismatchFunction w(spec, guess, options.propagation);
  return find_level(guess, w, options);
}

Eigenpair reanchor(const Eigenpair& pair, double radius, const FindLevelOptions& options) {
  if (anchor_radius(pair) >= radius) return pair;
  ProblemSpec spec = pair.spec;
  spec.truncation_radius = radius;
  spec.matching_point = pair.matching_point;
  const MismatchFunction w(spec, pair.energy.value, options.propagation);
  FindLevelOptions o = options;
  o.basin_radius = std::min(o.basin_radius, 1e-3 * (1.0 + std::abs(pair.energy.value)));
  int iters = 0;
  const cplx E = refine_level(w, pair.energy.value, o, &iters);
  Eigenpair out = assemble_eigenpair(w, E, pair.energy.branch);
  out.iterations = iters;
  out.node_summary = pair.node_summary;
  return out;
}

double anchor_radius(const Eigenpair& pair) { return std::abs(pair.right.front().z); }

Rect Rect::inflated(double fraction) const {
  const double dx = 0.5 * fraction * (re_max - re_min);
  const double dy = 0.5 * fraction * (im_max - im_min);
  return {re_min - dx, re_max + dx, im_min - dy, im_max + dy};
}

std::vector<cplx> Rect::boundary() const {
  return {{re_min, im_min}, {re_max, im_min}, {re_max, im_max}, {re_min, im_max}, {re_min, im_min}};
}

WindingResult mismatch_winding(const MismatchFunction& w, const std::vector<cplx>& contour, double min_segment,
                               int pieces_per_edge) {
  WindingResult res;
  res.min_normalized = 1e300;
  double total = 0.0;
  struct Pt {
    cplx E;
    MismatchValue v;
  };
  auto eval = [&](cplx E) {
    ++res.evaluations;
    Pt p{E, w.evaluate(E)};
    res.min_normalized = std::min(res.min_normalized, std::abs(p.v.normalized));
    return p;
  };
  // Accept a piece only when its phase step is small and agrees with the two half steps;
  // otherwise a full turn between samples could go unnoticed.
  std::function<void(const Pt&, const Pt&, int)> edge = [&](const Pt& a, const Pt& b, int depth) {
    const double darg = wrap_angle(b.v.log_w.imag() - a.v.log_w.imag());
    const double dmag = std::abs(b.v.log_w.real() - a.v.log_w.real());
    if (std::abs(b.E - a.E) < min_segment || depth > 40) {
      std::ostringstream os;
      os << "contour passes too close to a zero near " << 0.5 * (a.E + b.E);
      throw NumericalError(NumericalError::Kind::ZeroOnContour, os.str());
    }
    const Pt m = eval(0.5 * (a.E + b.E));
    if (std::abs(darg) <= kPi / 4 && dmag <= 2.0) {
      const double d1 = wrap_angle(m.v.log_w.imag() - a.v.log_w.imag());
      const double d2 = wrap_angle(b.v.log_w.imag() - m.v.log_w.imag());
      if (std::abs(d1 + d2 - darg) < 1e-2 && std::abs(d1) <= kPi / 4 && std::abs(d2) <= kPi / 4) {
        total += d1 + d2;
        return;
      }
    }
    edge(a, m, depth + 1);
    edge(m, b, depth + 1);
  };
  for (size_t i = 0; i + 1 < contour.size(); ++i) {
    const cplx a = contour[i], b = contour[i + 1];
    // Seed each edge with a few interior points so that fast phase rotation is not aliased.
    const int pieces = std::max(pieces_per_edge, 1);
    Pt prev = eval(a);
    for (int k = 1; k <= pieces; ++k) {
      const Pt next = eval(a + (b - a) * (double(k) / pieces));
      edge(prev, next, 0);
      prev = next;
    }
  }
  res.raw = total / (2 * kPi);
  res.winding = int(std::lround(res.raw));
  if (std::abs(res.raw - res.winding) > 0.05) {
    throw NumericalError(NumericalError::Kind::NonIntegerWinding, "non-integer winding " + std::to_string(res.raw));
  }
  return res;
}

namespace {

int cell_winding(const MismatchFunction& w, const Rect& cell, int pieces) {
  return mismatch_winding(w, cell.boundary(), 1e-9, pieces).winding;
}

void scan_cell(const MismatchFunction& w, const Rect& cell, int winding, int depth, const ScanOptions& opt,
               std::vector<cplx>& out) {
  if (winding <= 0) return;
  if (winding <= opt.max_per_cell || depth >= opt.max_depth) {
    FindLevelOptions fo = opt.find;
    fo.basin_radius = std::max(cell.diagonal(), 1e-6);
    fo.check_simplicity = false;
    // Centre first, then interior points towards the corners.
    const cplx c = cell.center();
    const cplx hx{0.3 * (cell.re_max - cell.re_min), 0.0}, hy{0.0, 0.3 * (cell.im_max - cell.im_min)};
    const int starts = depth >= opt.max_depth ? 5 : 1;
    const std::array<cplx, 5> guesses{c, c + hx + hy, c - hx - hy, c + hx - hy, c - hx + hy};
    for (int i = 0; i < starts; ++i) {
      try {
        const cplx E = refine_level(w, guesses[i], fo);
        if (cell.contains(E, 1e-9 * (1.0 + std::abs(E)))) {
          out.push_back(E);
          return;
        }
      } catch (const NumericalError&) {
      }
    }
    if (depth >= opt.max_depth) {
      throw NumericalError(NumericalError::Kind::NoConvergence, "could not isolate a level in a scan cell");
    }
  }
  // Split along the longer side; the shared edge is nudged off a possible symmetric zero.
  const double wx = cell.re_max - cell.re_min, wy = cell.im_max - cell.im_min;
  auto split = [&](double f) {
    Rect a = cell, b = cell;
    if (wx >= wy) {
      a.re_max = b.re_min = cell.re_min + wx * f;
    } else {
      a.im_max = b.im_min = cell.im_min + wy * f;
    }
    return std::pair{a, b};
  };
  auto [a, b] = split(wx >= wy ? 0.5007 : 0.4993);
  int wa = 0, wb = 0;
  // Two close zeros near an edge can alias a full turn away, so the halves must add up to
  // the parent; otherwise all three are recounted on a finer sampling.
  for (int pieces = 8;; pieces *= 4) {
    try {
      wa = cell_winding(w, a, pieces);
      wb = cell_winding(w, b, pieces);
    } catch (const NumericalError& e) {
      if (e.kind() != NumericalError::Kind::ZeroOnContour) throw;
      std::tie(a, b) = split(wx >= wy ? 0.4711 : 0.5289);
      wa = cell_winding(w, a, pieces);
      wb = cell_winding(w, b, pieces);
    }
    if (wa + wb == winding) break;
    if (pieces >= 512) {
      std::ostringstream os;
      os << "inconsistent winding in scan cell: " << winding << " != " << wa << " + " << wb;
      throw NumericalError(NumericalError::Kind::NonIntegerWinding, os.str());
    }
    winding = cell_winding(w, cell, 4 * pieces);
  }
  scan_cell(w, a, wa, depth + 1, opt, out);
  scan_cell(w, b, wb, depth + 1, opt, out);
}

}  // namespace

ScanResult scan_spectrum(const Rect& region, const ProblemSpec& spec, const ScanOptions& options) {
  ScanResult res;
  res.region = region;
  const cplx center = region.center();
  // Reference energy near the top-right corner so the radius covers the whole region.
  const cplx ref{std::max(std::abs(region.re_min), std::abs(region.re_max)), center.imag()};
  const MismatchFunction w(spec, ref, options.find.propagation);
  WindingResult total;
  for (int attempt = 0;; ++attempt) {
    try {
      total = mismatch_winding(w, res.region.boundary());
      break;
    } catch (const NumericalError& e) {
      if (e.kind() != NumericalError::Kind::ZeroOnContour || attempt >= 3) throw;
      res.region = res.region.inflated(0.01);
      res.inflated = true;
    }
  }
  res.total_winding = total.winding;
  std::vector<cplx> found;
  scan_cell(w, res.region, total.winding, 0, options, found);
  std::sort(found.begin(), found.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
  for (cplx E : found) res.levels.push_back({E, {}});
  return res;
}

std::vector<std::pair<int, int>> match_levels(const std::vector<cplx>& a, const std::vector<cplx>& b, double reject) {
  struct Cand {
    double d;
    int i, j;
  };
  std::vector<Cand> cands;
  for (int i = 0; i < int(a.size()); ++i) {
    for (int j = 0; j < int(b.size()); ++j) {
      const double d = std::abs(a[i] - b[j]);
      if (d <= reject) cands.push_back({d, i, j});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
    return x.d < y.d || (x.d == y.d && (x.i < y.i || (x.i == y.i && x.j < y.j)));
  });
  std::vector<bool> ua(a.size()), ub(b.size());
  std::vector<std::pair<int, int>> out;
  for (const auto& c : cands) {
    if (ua[c.i] || ub[c.j]) continue;
    ua[c.i] = ub[c.j] = true;
    out.emplace_back(c.i, c.j);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace ptdw
