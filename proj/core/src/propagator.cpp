#include "ptdw/propagator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace ptdw {

namespace {

constexpr double kUpper = 1e100;
constexpr double kLower = 1e-100;
constexpr int kMaxOrder = 64;

// Gauss-Legendre nodes/weights on [-1, 1], 8 points.
constexpr std::array<double, 8> kGlX = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                        -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                        0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlW = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                        0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                        0.2223810344533745, 0.1012285362903763};

void renormalize(ScaledState& s) {
  const double n = std::max(std::abs(s.psi), std::abs(s.dpsi));
  if (n == 0.0 || (n >= kLower && n <= kUpper)) return;
  s.psi /= n;
  s.dpsi /= n;
  s.cum_psi_sq /= n * n;
  s.cum_abs_sq /= n * n;
  s.log_scale += std::log(n);
}

struct TaylorStep {
  std::array<cplx, kMaxOrder + 1> b{};  // b_k = a_k h^k
  int order = 0;

  // Fills b for psi(z0 + h tau) = sum b_k tau^k.
  void build(const ScaledState& s, const Equation& eq, cplx h, int n) {
    order = n;
    const cplx z0 = s.z;
    const cplx h2 = h * h;
    const std::array<cplx, 4> Q = {eq.q(z0) * h2, eq.dq(z0) * h2 * h, 0.5 * eq.d2q(z0) * h2 * h * h,
                                   kI / eq.kinetic * h2 * h * h * h};
    b[0] = s.psi;
    b[1] = s.dpsi * h;
    for (int k = 0; k + 2 <= n; ++k) {
      cplx acc = Q[0] * b[k];
      if (k >= 1) acc += Q[1] * b[k - 1];
      if (k >= 2) acc += Q[2] * b[k - 2];
      if (k >= 3) acc += Q[3] * b[k - 3];
      b[k + 2] = acc / double((k + 2) * (k + 1));
    }
  }

  double tail() const { return std::abs(b[order]) + std::abs(b[order - 1]); }

  void evaluate(cplx h, cplx& psi, cplx& dpsi) const {
    cplx p = b[order];
    cplx d = double(order) * b[order];
    for (int k = order - 1; k >= 0; --k) {
      p = p + b[k];
      if (k >= 1) d = d + double(k) * b[k];
    }
    // Horner is unnecessary at tau = 1; plain sums keep it exact to rounding.
    psi = p;
    dpsi = d / h;
  }

  // int_0^1 psi^2 dtau and int_0^1 |psi|^2 dtau in units of the step.
  void integrals(cplx& sq, double& abs_sq) const {
    sq = 0.0;
    abs_sq = 0.0;
    for (int j = 0; j <= order; ++j) {
      if (b[j] == cplx{}) continue;
      for (int k = 0; k <= order; ++k) {
        const double inv = 1.0 / double(j + k + 1);
        sq += b[j] * b[k] * inv;
        abs_sq += (b[j] * std::conj(b[k])).real() * inv;
      }
    }
  }
};

}  // namespace

ScaledState ScaledState::times(cplx factor) const {
  ScaledState s = *this;
  s.psi *= factor;
  s.dpsi *= factor;
  s.cum_psi_sq *= factor * factor;
  s.cum_abs_sq *= std::norm(factor);
  return s;
}

Equation make_equation(const ProblemSpec& spec, cplx E) { return {spec.kinetic(), spec.linear(), E}; }

DecayDirections decay_directions(const ProblemSpec& spec) {
  // psi'' ~ (i z^3 / c) psi; the decaying exponent is real along arg z = (arg c - pi/2 + 2 pi k) / 5.
  const double phi_r = (std::arg(spec.kinetic()) - kPi / 2) / 5.0;
  const double phi_l = phi_r - 4 * kPi / 5;
  return {std::polar(1.0, phi_r), std::polar(1.0, phi_l)};
}

namespace {

cplx decaying_momentum(const Equation& eq, cplx z, cplx u) {
  cplx p = std::sqrt(eq.q(z));
  if ((p * u).real() < 0) p = -p;
  return p;
}

}  // namespace

double decay_exponent(cplx E, const ProblemSpec& spec, cplx direction, double r0, double r1) {
  const Equation eq = make_equation(spec, E);
  const cplx u = direction / std::abs(direction);
  // Track the branch continuously from the outer end inward.
  double total = 0.0;
  const int pieces = std::max(1, int(std::ceil((r1 - r0) / 0.25)));
  for (int piece = 0; piece < pieces; ++piece) {
    const double a = r0 + (r1 - r0) * piece / pieces;
    const double b = r0 + (r1 - r0) * (piece + 1) / pieces;
    for (size_t i = 0; i < kGlX.size(); ++i) {
      const double r = 0.5 * (a + b) + 0.5 * (b - a) * kGlX[i];
      total += 0.5 * (b - a) * kGlW[i] * (decaying_momentum(eq, r * u, u) * u).real();
    }
  }
  return total;
}

double truncation_radius(cplx E, const ProblemSpec& spec, cplx direction) {
  const TurningPoints tp = turning_points(E, spec);
  double rmax = 0.0;
  for (cplx r : tp.roots) rmax = std::max(rmax, std::abs(r));
  double r = std::max(2.0, 1.5 * rmax + 0.5);
  while (r < 60.0 && decay_exponent(E, spec, direction, r - 1.0, r) < 30.0) r += 0.25;
  return r;
}

WkbSeed wkb_seed(cplx E, const ProblemSpec& spec, cplx z0, cplx direction) {
  const Equation eq = make_equation(spec, E);
  WkbSeed s;
  s.anchor = z0;
  s.direction = direction / std::abs(direction);
  const cplx q = eq.q(z0);
  if (std::abs(q) == 0.0) throw NumericalError(NumericalError::Kind::WkbTooClose, "WKB anchor on a turning point");
  s.momentum = decaying_momentum(eq, z0, s.direction);
  s.decay_rate = (s.momentum * s.direction).real() / std::abs(s.momentum);
  const bool outward = (s.direction * std::conj(z0)).real() > 0.0;
  if (!outward || s.decay_rate < 0.05) {
    std::ostringstream os;
    os << "direction " << s.direction << " at " << z0 << " is not a decaying direction (rate " << s.decay_rate
       << ")";
    throw NumericalError(NumericalError::Kind::NotDecaying, os.str());
  }
  const cplx dq = eq.dq(z0);
  const cplx d2q = eq.d2q(z0);
  // First WKB correction integrand; its tail beyond z0 scales like |z0| times the integrand.
  const cplx corr = 5.0 * dq * dq / (32.0 * q * q * s.momentum) - d2q / (8.0 * q * s.momentum);
  s.wkb_error = std::abs(corr) * std::abs(z0) / 1.5;
  const double shield = decay_exponent(E, spec, s.direction, std::max(std::abs(z0) - 1.0, 0.0), std::abs(z0));
  const double effective = s.wkb_error * std::exp(-2.0 * shield);
  if (s.wkb_error > 0.5 || effective > 1e-8) {
    std::ostringstream os;
    os << "WKB anchor " << z0 << " too close: first-order error " << s.wkb_error << ", shielded " << effective;
    throw NumericalError(NumericalError::Kind::WkbTooClose, os.str());
  }
  s.psi = 1.0;
  s.dpsi = (-s.momentum - dq / (4.0 * q)) * s.psi;
  return s;
}

PathSolution propagate(const ScaledState& start, std::span<const cplx> path, const Equation& eq,
                       const PropagatorOptions& options) {
  if (path.empty()) throw UsageError("empty propagation path");
  if (std::abs(path.front() - start.z) > 1e-12 * (1.0 + std::abs(start.z))) {
    throw UsageError("path must start at the initial state");
  }
  const int order = std::clamp(options.order, 4, kMaxOrder);
  PathSolution sol;
  sol.path.assign(path.begin(), path.end());
  ScaledState cur = start;
  cur.z = path.front();
  renormalize(cur);
  sol.samples.push_back(cur);

  double total_length = 0.0;
  for (size_t i = 1; i < path.size(); ++i) total_length += std::abs(path[i] - path[i - 1]);
  const double min_step = 1e-14 * std::max(total_length, 1e-300);

  TaylorStep ts;
  double h_len = options.fixed_step > 0 ? options.fixed_step : 0.0;
  for (size_t seg = 1; seg < path.size(); ++seg) {
    const cplx target = path[seg];
    const double seg_len = std::abs(target - cur.z);
    if (seg_len == 0.0) continue;
    const cplx u = (target - cur.z) / seg_len;
    double remaining = seg_len;
    while (remaining > 0.0) {
      double s;
      const double qmag = std::sqrt(std::abs(eq.q(cur.z)));
      if (options.fixed_step > 0) {
        s = std::min(options.fixed_step, remaining);
        ts.build(cur, eq, s * u, order);
      } else {
        if (h_len <= 0.0) h_len = std::min(0.1, options.max_phase_step / std::max(qmag, 1e-300));
        s = std::min({h_len, remaining, options.max_step});
        if (qmag > 0) s = std::min(s, options.max_phase_step / qmag);
        for (int attempt = 0;; ++attempt) {
          ts.build(cur, eq, s * u, order);
          const double ref = std::abs(ts.b[0]) + std::abs(ts.b[1]);
          const double tail = ts.tail();
          const double allowed = options.tolerance * std::max(ref, 1e-300);
          // the end-point q may be much larger than the start-point q
          const double qend = std::sqrt(std::abs(eq.q(cur.z + s * u)));
          const bool phase_ok = s * qend <= 1.5 * options.max_phase_step;
          if (tail <= allowed && phase_ok) {
            const double grow = tail > 0 ? 0.9 * std::pow(allowed / tail, 1.0 / order) : 2.0;
            h_len = s * std::clamp(grow, 0.2, 2.0);
            break;
          }
          double shrink = tail > allowed ? 0.9 * std::pow(allowed / tail, 1.0 / order) : 0.5;
          if (!phase_ok) shrink = std::min(shrink, options.max_phase_step / (s * qend));
          s *= std::clamp(shrink, 0.05, 0.9);
          if (s < min_step || attempt > 200) {
            std::ostringstream os;
            os << "step underflow at z=" << cur.z << " (step " << s << ")";
            throw NumericalError(NumericalError::Kind::StepUnderflow, os.str());
          }
        }
      }
      const cplx h = s * u;
      cplx psi, dpsi;
      ts.evaluate(h, psi, dpsi);
      ScaledState next = cur;
      if (options.integrals) {
        cplx sq;
        double ab;
        ts.integrals(sq, ab);
        next.cum_psi_sq += sq * s;
        next.cum_abs_sq += ab * s;
      }
      next.psi = psi;
      next.dpsi = dpsi;
      remaining -= s;
      next.z = remaining > 0.0 ? cur.z + h : target;
      if (!std::isfinite(std::abs(psi)) || !std::isfinite(std::abs(dpsi))) {
        throw NumericalError(NumericalError::Kind::Other, "non-finite propagation state");
      }
      renormalize(next);
      cur = next;
      ++sol.steps;
      if (options.record_samples || (remaining <= 0.0 && seg + 1 == path.size())) sol.samples.push_back(cur);
    }
  }
  if (sol.samples.size() == 1 || sol.samples.back().z != cur.z) sol.samples.push_back(cur);
  return sol;
}

PathSolution propagate(const WkbSeed& seed, std::span<const cplx> path, cplx E, const ProblemSpec& spec,
                       const PropagatorOptions& options) {
  return propagate(seed.state(), path, make_equation(spec, E), options);
}

ScaledState advance(const ScaledState& start, cplx to, const Equation& eq, const PropagatorOptions& options) {
  if (to == start.z) return start;
  PropagatorOptions o = options;
  o.record_samples = false;
  const std::array<cplx, 2> path = {start.z, to};
  return propagate(start, path, eq, o).back();
}

ScaledWronskian wronskian(const ScaledState& a, const ScaledState& b) {
  return {a.psi * b.dpsi - a.dpsi * b.psi, a.log_scale + b.log_scale};
}

}  // namespace ptdw
