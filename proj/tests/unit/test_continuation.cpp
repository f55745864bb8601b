#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ptdw/continuation.hpp"
#include "ptdw/semiclassics.hpp"

using namespace ptdw;

namespace {

Eigenpair k_level(cplx alpha, int m) {
  const auto spec = ProblemSpec::k_form(alpha);
  return find_level(oracle_spectrum(spec, 120).levels.at(m).value, spec);
}

double max_abs_imag(const BranchTrace& tr) {
  double m = 0.0;
  for (const auto& s : tr.samples) m = std::max(m, std::abs(s.energy.value.imag()));
  return m;
}

}  // namespace

TEST_CASE("alpha arcs land on the H-form levels") {
  SUBCASE("hbar = 1, real endpoint") {
    const auto start = k_level(1.0, 0);
    const auto tr = trace_level(start, continuation_path_alpha(1.0, +1));
    REQUIRE_FALSE(tr.truncated);
    CHECK(std::abs(tr.back().param - cplx(-1.0, 0.0)) < 1e-12);
    const cplx end = tr.back().energy.value;
    const auto h = find_level(end, ProblemSpec::h_form(1.0));
    CHECK(std::abs(h.energy.value - end) < 1e-8);
    CHECK(std::abs(end.imag()) < 1e-8);
  }
  SUBCASE("hbar = 0.25, conjugate endpoints") {
    const double hbar = 0.25;
    const double a = std::pow(hbar, -0.8);
    const auto start = k_level(a, 0);
    const auto up = trace_level(start, continuation_path_alpha(hbar, +1));
    const auto down = trace_level(start, continuation_path_alpha(hbar, -1));
    REQUIRE_FALSE(up.truncated);
    REQUIRE_FALSE(down.truncated);
    const cplx eu = up.back().energy.value, ed = down.back().energy.value;
    CHECK(std::abs(eu - std::conj(ed)) < 1e-8);
    CHECK(std::abs(eu.imag()) > 1e-3);
    const double f = std::pow(hbar, 1.2);
    const auto h = find_level(f * eu, ProblemSpec::h_form(hbar));
    CHECK(std::abs(h.energy.value - f * eu) < 1e-8);
    // The sign+ arc lands on the member reached from the sign + semiclassical guess (Im E < 0).
    const auto pert = find_level(wkb_level(0, hbar, +1).value, ProblemSpec::h_form(hbar));
    CHECK(std::abs(pert.energy.value - f * eu) < 1e-8);
    CHECK(eu.imag() < 0.0);
  }
}

TEST_CASE("E_0 stays real and positive from hbar = 3 down to the crossing") {
  const auto spec = ProblemSpec::h_form(3.0);
  const auto start = find_level(oracle_spectrum(spec, 120).levels.at(0).value, spec);
  const auto tr = trace_level(start, ParameterPath(ParameterPath::Kind::Hbar).line_to(3.0, 0.32));
  REQUIRE_FALSE(tr.truncated);
  CHECK(max_abs_imag(tr) < 1e-8);
  double max_abs = 0.0;
  for (const auto& s : tr.samples) {
    CHECK(s.energy.value.real() > 0.0);
    max_abs = std::max(max_abs, std::abs(s.energy.value));
  }
  CHECK(max_abs < 10.0 * std::abs(start.energy.value));
}

TEST_CASE("closed loops and reversal") {
  const auto start = k_level(2.0, 1);
  SUBCASE("loop in the alpha plane") {
    const auto loop = ParameterPath(ParameterPath::Kind::Alpha).arc(1.5, 0.5, 0.0, 2.0 * kPi);
    const auto tr = trace_level(start, loop);
    REQUIRE_FALSE(tr.truncated);
    CHECK(std::abs(tr.back().energy.value - start.energy.value) < 1e-8);
  }
  SUBCASE("path and its reverse") {
    const auto path = ParameterPath(ParameterPath::Kind::Alpha).line_to(2.0, cplx(1.0, 1.5));
    const auto fwd = trace_level(start, path);
    REQUIRE_FALSE(fwd.truncated);
    const auto mid = find_level(fwd.back().energy.value, spec_at(start.spec, ParameterPath::Kind::Alpha, cplx(1.0, 1.5)));
    const auto back = trace_level(mid, path.reversed());
    REQUIRE_FALSE(back.truncated);
    CHECK(std::abs(back.back().energy.value - start.energy.value) < 1e-8);
  }
  SUBCASE("bad paths") {
    CHECK_THROWS_AS(trace_level(start, ParameterPath(ParameterPath::Kind::Alpha).line_to(3.0, 4.0)), UsageError);
    CHECK_THROWS_AS(trace_level(start, ParameterPath(ParameterPath::Kind::Hbar).line_to(2.0, 1.0)), UsageError);
    const auto h = find_level(0.7, ProblemSpec::h_form(1.0));
    CHECK_THROWS_AS(trace_level(h, ParameterPath(ParameterPath::Kind::Hbar).line_to(1.0, cplx(1.0, 1.5))), UsageError);
  }
}

TEST_CASE("crossing n = 0") {
  const auto rec = find_crossing(0);
  CHECK(std::abs(rec.h_from_below - rec.h_from_above) < 1e-6);
  CHECK(rec.h_n > rec.h_from_below - 1e-6);
  CHECK(rec.h_n < rec.h_from_above + 1e-6);
  CHECK(complex_pair_count(rec.h_n - 0.01) == 1);
  CHECK(complex_pair_count(rec.h_n + 0.01) == 0);
  CHECK(rec.E_c > 0.0);
  CHECK(rec.sqrt_exponent_fit >= 0.45);
  CHECK(rec.sqrt_exponent_fit <= 0.55);
  CHECK(rec.nodes_below_plus == 0);
  CHECK(rec.nodes_below_minus == 0);
  CHECK(rec.nodes_above_even == 0);
  CHECK(rec.nodes_above_odd == 0);
  CHECK(rec.bookkeeping_ok);
  CHECK(rec.critical_node_set.empty());

  const auto mono = monodromy_check(rec, 0.01);
  for (const auto& p : mono.paths) CHECK_MESSAGE(p.ok, p.name, " mismatch ", p.mismatch);
  CHECK(mono.ok);
  CHECK_THROWS_AS(monodromy_check(rec, 0.5), UsageError);
}

TEST_CASE("conjugate pairs below h_0") {
  for (double h : {0.1, 0.2, 0.28}) {
    const auto p = find_level(wkb_level(0, h, +1).value, ProblemSpec::h_form(h));
    const auto m = find_level(wkb_level(0, h, -1).value, ProblemSpec::h_form(h));
    CHECK(std::abs(p.energy.value - std::conj(m.energy.value)) < 1e-9);
    CHECK(p.energy.value.imag() < 0.0);
  }
  CHECK(complex_pair_count(0.2) == 1);
  CHECK(complex_pair_count(0.1) == 2);
  CHECK(complex_pair_count(0.5) == 0);
}

TEST_CASE("real levels at hbar = 1") {
  const auto lv = real_levels(1.0, 0.0, 3.0);
  REQUIRE(!lv.empty());
  const auto oracle = oracle_spectrum(ProblemSpec::h_form(1.0), 120);
  CHECK(std::abs(lv.front() - oracle.levels.at(0).value) < 1e-7);
  for (double e : lv) {
    double best = 1e9;
    for (const auto& l : oracle.levels) best = std::min(best, std::abs(l.value - e));
    CHECK(best < 1e-7);
  }
  CHECK_THROWS_AS(real_levels(-1.0, 0.0, 1.0), UsageError);
}

TEST_CASE("node counts are locally constant below the crossing") {
  for (int n : {0, 1}) {
    int prev = -1;
    for (double h : {0.1, 0.101, 0.102}) {
      const auto p = find_level(wkb_level(n, h, +1).value, ProblemSpec::h_form(h));
      const auto s = node_summary(p);
      CHECK(s.n_plus == n);
      CHECK(s.n_minus == 0);
      if (prev >= 0) CHECK(s.n_plus == prev);
      prev = s.n_plus;
    }
  }
}

TEST_CASE("node birth n = 0") {
  const auto rec = find_node_birth(0);
  CHECK(rec.level == 1);
  CHECK(complex_pair_count(rec.h_p) == 0);
  CHECK(rec.bracket_hi - rec.bracket_lo < 1e-6);
  CHECK(std::abs(rec.y_star - rec.y_tilde) < 1e-4);
  CHECK(rec.complex_pairs == 0);
  CHECK(rec.E_p > 0.0);
  CHECK_THROWS_AS(find_node_birth(-1), UsageError);
}
