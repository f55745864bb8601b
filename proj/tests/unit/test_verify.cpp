#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ptdw/continuation.hpp"
#include "ptdw/semiclassics.hpp"
#include "ptdw/verify.hpp"

using namespace ptdw;

namespace {

Eigenpair perturbative(int n, double hbar, int sign) {
  return find_level(wkb_level(n, hbar, sign).value, ProblemSpec::h_form(hbar));
}

Eigenpair real_level(double hbar, int m) {
  const auto spec = ProblemSpec::h_form(hbar);
  return find_level(oracle_spectrum(spec, 120).levels.at(m).value, spec);
}

}  // namespace

TEST_CASE("axis flux identity") {
  SUBCASE("complex levels at hbar = 0.1") {
    for (int n : {0, 1}) {
      for (int sign : {+1, -1}) {
        const auto pair = perturbative(n, 0.1, sign);
        const auto f = axis_flux_identity(pair);
        CHECK_FALSE(f.trivial);
        CHECK(f.relative_residual < 1e-7);
        CHECK(f.min_abs_phi > 0.0);
        CHECK(f.min_abs_phi > 1e-6 * f.median_abs_phi);
      }
    }
  }
  SUBCASE("conjugate state flips the sign of the flux") {
    const auto p = perturbative(0, 0.1, +1);
    const auto m = perturbative(0, 0.1, -1);
    const auto fp = axis_flux_identity(p, -1.0, 1.0, 0.05);
    const auto fm = axis_flux_identity(m, -1.0, 1.0, 0.05);
    REQUIRE(fp.y.size() == fm.y.size());
    const double ratio0 = fm.rhs[0] / fp.rhs[0];
    CHECK(ratio0 < 0.0);
    double scale = 0.0;
    for (double r : fm.rhs) scale = std::max(scale, std::abs(r));
    for (size_t k = 0; k < fp.y.size(); ++k) {
      CHECK(fm.y[k] == doctest::Approx(fp.y[k]));
      CHECK(std::abs(fm.rhs[k] - ratio0 * fp.rhs[k]) <= 1e-7 * scale);
    }
  }
  SUBCASE("real level: both sides vanish") {
    const auto f = axis_flux_identity(real_level(1.0, 0));
    CHECK(f.trivial);
  }
}

TEST_CASE("wedge flux for the K(0) ground state") {
  const auto spec = ProblemSpec::k_form(0.0);
  const auto pair = find_level(oracle_spectrum(spec, 120).levels.at(0).value, spec);
  const auto right = wedge_flux_sign(pair, 1.0, {-0.5});
  const auto left = wedge_flux_sign(pair, -1.0, {-0.5});
  REQUIRE(right.lines.size() == 1);
  REQUIRE(left.lines.size() == 1);
  const auto& r = right.lines[0];
  const auto& l = left.lines[0];
  CHECK(r.in_hypothesis);
  CHECK(l.in_hypothesis);
  CHECK(r.residual < 1e-7);
  CHECK(l.residual < 1e-7);
  CHECK(r.sign_ok);
  CHECK(l.sign_ok);
  CHECK(r.flux != 0.0);
  // PT symmetry makes the flux itself equal at the mirrored cut; the one-sided integrals
  // taken outward from the two cuts have opposite signs.
  CHECK(r.flux == doctest::Approx(l.flux).epsilon(1e-7));
  CHECK(r.integral * l.integral < 0.0);
  CHECK(right.ok);
  CHECK(left.ok);

  const auto inside = wedge_flux_sign(pair, 0.3, {-0.5});
  CHECK_FALSE(inside.lines[0].in_hypothesis);
  CHECK(inside.lines[0].predicted_sign == 0);
  CHECK(inside.lines[0].residual < 1e-7);

  CHECK_THROWS_AS(wedge_flux_sign(perturbative(0, 0.1, +1), 1.0, {-0.5}), UsageError);
}

TEST_CASE("PT gauge") {
  const auto pair = real_level(1.0, 0);
  GaugeReport rep;
  const auto g = pt_gauge(pair, &rep);
  CHECK(rep.max_imag_ratio < 1e-8);
  CHECK(rep.max_symmetry_error < 1e-8);
  CHECK_FALSE(rep.anchor_shifted);

  GaugeReport again;
  const auto gg = pt_gauge(g, &again);
  CHECK(std::abs(gg.log_gauge - g.log_gauge) < 1e-12);

  CHECK_THROWS_AS(pt_gauge(perturbative(0, 0.1, +1)), UsageError);

  // An anchor placed on the imaginary node gets moved.
  const auto odd = real_level(1.0, 1);
  const StateEvaluator st(odd, {}, 6.0);
  const auto ys = imaginary_axis_zeros(st, -1.5, 1.0);
  REQUIRE(ys.size() == 1);
  GaugeReport shifted;
  pt_gauge(odd, &shifted, ys[0]);
  CHECK(shifted.anchor_shifted);
  CHECK(shifted.max_imag_ratio < 1e-8);
}

TEST_CASE("conjugate pair states are PxT images") {
  for (int n : {0, 1}) {
    const auto p = perturbative(n, 0.1, +1);
    const auto m = perturbative(n, 0.1, -1);
    CHECK(pxt_pair_mismatch(p, m) < 1e-8);
  }
  const auto p = perturbative(0, 0.1, +1);
  const auto other = perturbative(1, 0.1, -1);
  CHECK(pxt_pair_mismatch(p, other) > 1e-3);
}

TEST_CASE("P-overlap") {
  SUBCASE("generic state at large hbar") {
    const auto ov = p_overlap(pt_gauge(real_level(1.0, 0)));
    CHECK(std::abs(ov.value) > 0.01);
    CHECK(std::abs(ov.value) <= 1.0 + 1e-12);
    CHECK(ov.tail_mismatch < 1e-6);
  }
  SUBCASE("decreases toward the crossing") {
    const auto rec = find_crossing(0);
    double prev = 1e9;
    for (double d : {0.1, 0.05, 0.025}) {
      const double h = rec.h_n + d;
      const auto lv = real_levels(h, rec.E_c - 0.3, rec.E_c + 0.3, 1e-4);
      REQUIRE(lv.size() >= 1);
      double e = lv[0];
      for (double x : lv)
        if (std::abs(x - rec.E_c) < std::abs(e - rec.E_c) && x < rec.E_c + 1e-12) e = x;
      const auto ov = p_overlap(pt_gauge(find_level(e, ProblemSpec::h_form(h))));
      CHECK(std::abs(ov.value) < prev);
      prev = std::abs(ov.value);
    }
  }
}

TEST_CASE("invariants do not depend on a unit-modulus gauge") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  const cplx phase = std::polar(1.0, u(rng));

  auto cplx_pair = perturbative(0, 0.1, +1);
  auto rotated = cplx_pair;
  rotated.regauge(phase);
  const auto f1 = axis_flux_identity(cplx_pair, -1.0, 1.0, 0.05);
  const auto f2 = axis_flux_identity(rotated, -1.0, 1.0, 0.05);
  for (size_t k = 0; k < f1.lhs.size(); ++k) CHECK(f2.lhs[k] == doctest::Approx(f1.lhs[k]).epsilon(1e-9));
  CHECK(check_zero_free_axis(rotated).ok);

  const auto real = real_level(1.0, 0);
  auto real_rot = real;
  real_rot.regauge(phase);
  CHECK(std::abs(p_overlap(real_rot).value) == doctest::Approx(std::abs(p_overlap(real).value)).epsilon(1e-9));
  const StateEvaluator a(pt_gauge(real)), b(pt_gauge(real_rot));
  for (cplx z : {cplx(0.3, 0.2), cplx(-0.5, -0.4)}) {
    CHECK(std::abs(b.at(z).true_psi() - a.at(z).true_psi()) < 1e-9 * std::abs(a.at(z).true_psi()));
  }
}
