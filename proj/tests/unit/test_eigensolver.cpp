#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ptdw/eigensolver.hpp"
#include "ptdw/semiclassics.hpp"

using namespace ptdw;

namespace {

std::vector<cplx> values(const std::vector<ComplexEnergy>& levels) {
  std::vector<cplx> v;
  for (const auto& l : levels) v.push_back(l.value);
  return v;
}

int count_inside(const std::vector<ComplexEnergy>& levels, const Rect& r) {
  return int(std::count_if(levels.begin(), levels.end(), [&](const auto& l) { return r.contains(l.value); }));
}

}  // namespace

TEST_CASE("K(0) ground level matches the oracle") {
  const auto spec = ProblemSpec::k_form(0.0);
  const auto oracle = oracle_spectrum(spec, 160);
  REQUIRE(oracle.levels.size() >= 12);
  const auto pair = find_level(oracle.levels[0].value, spec);
  CHECK(std::abs(pair.energy.value - oracle.levels[0].value) < 1e-8);
  CHECK(std::abs(pair.energy.value.imag()) < 1e-10);
  CHECK(pair.mismatch < 1e-10);
  CHECK(pair.derivative > 1e-6);
}

TEST_CASE("oracle at N = 400 certifies the lowest 12 levels of K(0)") {
  const auto oracle = oracle_spectrum(ProblemSpec::k_form(0.0), 400);
  REQUIRE(oracle.levels.size() >= 12);
  // Certified levels are stable to 1e-8 against 2N and a second basis scale.  Shooting is the
  // independent cross-check at the 1e-7 agreement tolerance.
  for (int k = 0; k < 12; ++k) {
    CHECK(oracle.levels[k].value.real() > 0.0);
    const auto pair = find_level(oracle.levels[k].value, ProblemSpec::k_form(0.0));
    CHECK(std::abs(pair.energy.value - oracle.levels[k].value) < 1e-7);
  }
}

TEST_CASE("perturbative guess at hbar = 0.05 converges below the axis") {
  const double h = 0.05;
  const auto guess = wkb_level(0, h, +1);
  const auto pair = find_level(guess.value, ProblemSpec::h_form(h));
  CHECK(pair.energy.value.imag() < 0.0);
  CHECK(std::abs(pair.energy.value - guess.value) < 0.5 * h * h);
}

TEST_CASE("real level at large hbar") {
  const auto spec = ProblemSpec::h_form(2.0);
  const auto oracle = oracle_spectrum(spec, 160);
  REQUIRE(!oracle.levels.empty());
  const auto pair = find_level(oracle.levels[0].value, spec);
  CHECK(std::abs(pair.energy.value.imag()) < 1e-10);
  CHECK(pair.energy.value.real() > 0.0);
  CHECK(std::abs(pair.energy.value - oracle.levels[0].value) < 1e-7);
}

TEST_CASE("mismatch symmetry and analyticity") {
  const auto spec = ProblemSpec::h_form(0.5);
  const MismatchFunction w(spec, 0.5);
  for (cplx E : {cplx(0.3, 0.2), cplx(0.8, -0.4), cplx(1.5, 0.05), cplx(0.1, 1.0)}) {
    const cplx a = w(E), b = w(std::conj(E));
    CHECK(std::abs(b - std::conj(a)) < 1e-10);
  }
  // Cauchy-Riemann on log W: the derivative does not depend on the direction.
  for (cplx E : {cplx(0.4, 0.3), cplx(1.2, -0.2)}) {
    const double d = 1e-4;
    const cplx dx = (w.evaluate(E + d).log_w - w.evaluate(E - d).log_w) / (2.0 * d);
    const cplx dy = (w.evaluate(E + kI * d).log_w - w.evaluate(E - kI * d).log_w) / (2.0 * kI * d);
    CHECK(std::abs(dx - dy) < 1e-5 * std::abs(dx));
  }
}

TEST_CASE("winding equals the oracle count") {
  for (double alpha : {0.0, 1.0, 2.0}) {
    const auto spec = ProblemSpec::k_form(alpha);
    const auto oracle = oracle_spectrum(spec, 160);
    for (const Rect& r : {Rect{0.3, 9.0, -0.7, 0.6}, Rect{-1.0, 5.0, -0.5, 0.5}, Rect{5.0, 13.0, -1.0, 0.8}}) {
      const MismatchFunction w(spec, r.center());
      const auto wr = mismatch_winding(w, r.boundary());
      CHECK(std::abs(wr.raw - wr.winding) < 0.05);
      CHECK(wr.winding == count_inside(oracle.levels, r));
    }
  }
}

TEST_CASE("scan_spectrum") {
  SUBCASE("K(0) agrees with the oracle") {
    const auto spec = ProblemSpec::k_form(0.0);
    const Rect region{0.0, 12.0, -0.5, 0.5};
    const auto scan = scan_spectrum(region, spec);
    const auto oracle = oracle_spectrum(spec, 160);
    REQUIRE(int(scan.levels.size()) == count_inside(oracle.levels, region));
    CHECK(scan.levels.size() == 4);
    const auto pairs = match_levels(values(scan.levels), values(oracle.levels));
    CHECK(pairs.size() == scan.levels.size());
    for (auto [i, j] : pairs) CHECK(std::abs(scan.levels[i].value - oracle.levels[j].value) < 1e-7);
  }
  SUBCASE("K(1) levels are real") {
    const auto scan = scan_spectrum({0.0, 12.0, -0.5, 0.5}, ProblemSpec::k_form(1.0));
    CHECK(!scan.levels.empty());
    for (const auto& l : scan.levels) {
      CHECK(std::abs(l.value.imag()) < 1e-8);
      CHECK(l.value.real() > 0.0);
    }
  }
  SUBCASE("empty region") {
    const auto scan = scan_spectrum({-5.0, -1.0, -0.5, 0.5}, ProblemSpec::k_form(0.0));
    CHECK(scan.levels.empty());
    CHECK(scan.total_winding == 0);
  }
  SUBCASE("conjugate pairs close under conjugation") {
    const auto scan = scan_spectrum({0.0, 0.9, -0.45, 0.4}, ProblemSpec::h_form(0.25));
    int complex_levels = 0;
    for (const auto& l : scan.levels) {
      if (std::abs(l.value.imag()) < 1e-8) continue;
      ++complex_levels;
      double best = 1e9;
      for (const auto& m : scan.levels) best = std::min(best, std::abs(m.value - std::conj(l.value)));
      CHECK(best < 1e-9);
    }
    CHECK(complex_levels == 2);
  }
}

TEST_CASE("oracle reality for alpha = 5") {
  const auto oracle = oracle_spectrum(ProblemSpec::k_form(5.0), 160);
  REQUIRE(oracle.levels.size() >= 6);
  for (int k = 0; k < 6; ++k) {
    CHECK(std::abs(oracle.levels[k].value.imag()) < 1e-8);
    CHECK(oracle.levels[k].value.real() > 0.0);
  }
}

TEST_CASE("oracle levels move continuously along the alpha arc |alpha| = 2") {
  const int steps = 36, n = 4, N = 120;
  std::vector<cplx> prev;
  double max_move = 0.0, min_gap = 1e9;
  for (int k = 0; k <= steps; ++k) {
    const cplx alpha = std::polar(2.0, kPi * k / steps);
    auto raw = oracle_raw_eigenvalues(alpha, N, oracle_basis_scale(alpha, N));
    std::sort(raw.begin(), raw.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
    raw.resize(n + 2);
    if (!prev.empty()) {
      std::vector<cplx> cur;
      for (cplx p : prev) {
        auto it = std::min_element(raw.begin(), raw.end(), [&](cplx a, cplx b) { return std::abs(a - p) < std::abs(b - p); });
        max_move = std::max(max_move, std::abs(*it - p));
        cur.push_back(*it);
      }
      prev = cur;
    } else {
      prev.assign(raw.begin(), raw.begin() + n);
    }
    if (k < steps) {
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) min_gap = std::min(min_gap, std::abs(prev[i] - prev[j]));
    }
  }
  CHECK(max_move < 0.5);
  CHECK(min_gap > 0.1);
}

TEST_CASE("find_level failure modes") {
  const auto spec = ProblemSpec::k_form(0.0);
  // Midway between the two lowest levels: the iteration leaves the 0.5 basin.
  CHECK_THROWS_AS(find_level(2.6, spec), NumericalError);
  CHECK_THROWS_AS(find_level(1.0, ProblemSpec::h_form(-1.0)), UsageError);
}

TEST_CASE("level matching rejects distant pairs") {
  const std::vector<cplx> a{1.0, 2.0, 3.0};
  const std::vector<cplx> b{1.01, 3.5, 2.05};
  const auto m = match_levels(a, b);
  CHECK(m.size() == 2);
  for (auto [i, j] : m) CHECK(std::abs(a[i] - b[j]) < 0.1);
}

TEST_CASE("H-form levels are hbar^(6/5) times K-form levels") {
  for (double h : {0.8, 1.5}) {
    const auto sc = scale_h_to_alpha(h);
    const auto k = oracle_spectrum(ProblemSpec::k_form(sc.alpha), 160);
    REQUIRE(!k.levels.empty());
    const auto kp = find_level(k.levels[0].value, ProblemSpec::k_form(sc.alpha));
    const auto hp = find_level(kp.energy.value * sc.energy_factor, ProblemSpec::h_form(h));
    CHECK(std::abs(hp.energy.value - sc.energy_factor * kp.energy.value) < 1e-7);
  }
}
