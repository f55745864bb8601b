#include <doctest.h>

#include <cmath>
#include <random>

#include "ptdw/model.hpp"

using namespace ptdw;

namespace {
cplx rand_z(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  return {u(rng), u(rng)};
}
}  // namespace

TEST_CASE("potential at simple points") {
  const auto h = ProblemSpec::h_form(1.0);
  CHECK(std::abs(potential(0.0, h)) == 0.0);
  CHECK(std::abs(potential(kI, h) - cplx(2.0, 0.0)) < 1e-15);
  for (double y : {-2.0, -0.3, 0.7, 1.9}) {
    const cplx v = potential(kI * y, h);
    CHECK(std::abs(v.imag()) < 1e-14);
    CHECK(v.real() == doctest::Approx(y * y * y + y).epsilon(1e-14));
  }
}

TEST_CASE("PT covariance of the potential") {
  std::mt19937_64 rng(7);
  for (const auto& spec : {ProblemSpec::h_form(1.0), ProblemSpec::h_form(0.3), ProblemSpec::k_form(0.0),
                           ProblemSpec::k_form(2.5), ProblemSpec::k_form(-1.0)}) {
    for (int i = 0; i < 50; ++i) {
      const cplx z = rand_z(rng);
      const cplx lhs = std::conj(potential(-std::conj(z), spec));
      CHECK(std::abs(lhs - potential(z, spec)) <= 1e-13 * (1.0 + std::abs(potential(z, spec))));
    }
  }
}

TEST_CASE("hbar to alpha scaling") {
  auto s1 = scale_h_to_alpha(1.0);
  CHECK(std::abs(s1.alpha - cplx(-1.0, 0.0)) < 1e-15);
  CHECK(std::abs(s1.energy_factor - cplx(1.0, 0.0)) < 1e-15);

  auto s2 = scale_h_to_alpha(std::pow(2.0, 1.25));
  CHECK(std::abs(s2.alpha - cplx(-0.5, 0.0)) < 1e-14);
  CHECK(std::abs(s2.energy_factor - cplx(std::pow(2.0, 1.5), 0.0)) < 1e-14);

  for (double h : {0.01, 0.1, 0.7, 1.0, 3.0, 20.0}) {
    CHECK(std::abs(alpha_to_hbar(scale_h_to_alpha(h).alpha) - cplx(h, 0.0)) < 4e-16 * h * 8);
  }
  const cplx hc = std::polar(0.8, 0.3);
  CHECK(std::abs(alpha_to_hbar(scale_h_to_alpha(hc).alpha) - hc) < 1e-14);
}

TEST_CASE("alpha continuation arcs") {
  auto plus = continuation_path_alpha(1.0, +1);
  auto minus = continuation_path_alpha(1.0, -1);
  CHECK(plus.kind() == ParameterPath::Kind::Alpha);
  CHECK(std::abs(plus.start() - cplx(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(plus.at(0.5) - kI) < 1e-14);
  CHECK(std::abs(plus.end() - cplx(-1.0, 0.0)) < 1e-14);
  CHECK(std::abs(minus.at(0.5) + kI) < 1e-14);
  CHECK(std::abs(minus.end() - cplx(-1.0, 0.0)) < 1e-14);
  for (double s : {0.1, 0.37, 0.8}) {
    CHECK(std::abs(std::abs(plus.at(s)) - 1.0) < 1e-14);
    CHECK(std::abs(minus.at(s) - std::conj(plus.at(s))) < 1e-14);
  }
  CHECK(plus.length() == doctest::Approx(kPi));

  auto arc2 = continuation_path_alpha(std::pow(2.0, 1.25), +1);
  CHECK(std::abs(arc2.start()) == doctest::Approx(0.5));

  auto rev = plus.reversed();
  CHECK(std::abs(rev.start() - plus.end()) < 1e-14);
  CHECK(std::abs(rev.end() - plus.start()) < 1e-14);
}

TEST_CASE("turning points") {
  const auto h = ProblemSpec::h_form(1.0);
  SUBCASE("E = 0") {
    auto tp = turning_points(0.0, h);
    CHECK(std::abs(tp.imaginary_point) < 1e-14);
    CHECK(std::abs(tp.minus - cplx(-1.0, 0.0)) < 1e-14);
    CHECK(std::abs(tp.plus - cplx(1.0, 0.0)) < 1e-14);
  }
  SUBCASE("E = 2") {
    auto tp = turning_points(2.0, h);
    CHECK(std::abs(tp.imaginary_point - kI) < 1e-14);
    CHECK(imaginary_turning_ordinate(2.0, h) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("E = 0.352268") {
    const double E = 0.352268;
    auto tp = turning_points(E, h);
    const double y = imaginary_turning_ordinate(E, h);
    CHECK(std::abs(y * y * y + y - E) < 1e-14);
    CHECK(std::abs(tp.imaginary_point - kI * y) < 1e-13);
    CHECK(std::abs(tp.plus + std::conj(tp.minus)) < 1e-13);
    CHECK(tp.plus.real() > 0.0);
    CHECK(!tp.degenerate);
  }
  SUBCASE("roots reproduce E") {
    std::mt19937_64 rng(11);
    for (const auto& spec : {h, ProblemSpec::k_form(1.5), ProblemSpec::k_form(cplx(0.3, -0.8))}) {
      for (int i = 0; i < 40; ++i) {
        const cplx E = rand_z(rng) * 3.0;
        auto tp = turning_points(E, spec);
        for (cplx r : tp.roots) CHECK(std::abs(potential(r, spec) - E) <= 1e-12 * (1.0 + std::abs(E)));
      }
    }
  }
  SUBCASE("I0 on the imaginary axis for real E > 0") {
    for (double E : {0.05, 0.3, 1.0, 7.0, 40.0}) {
      for (const auto& spec : {h, ProblemSpec::k_form(0.0)}) {
        auto tp = turning_points(E, spec);
        CHECK(std::abs(tp.imaginary_point.real()) < 1e-12 * std::abs(tp.imaginary_point));
        CHECK(tp.imaginary_point.imag() > 0.0);
      }
    }
  }
  SUBCASE("caustic flagged") {
    // At E = -i 2/(3 sqrt 3) the two roots near the right well coincide.
    auto tp = turning_points(cplx(0.0, -2.0 / (3.0 * std::sqrt(3.0))), h);
    CHECK(tp.degenerate);
  }
}

TEST_CASE("critical points") {
  auto c = critical_points(ProblemSpec::h_form(1.0));
  const double x = 1.0 / std::sqrt(3.0);
  CHECK(std::min(std::abs(c[0] - x), std::abs(c[1] - x)) < 1e-14);
  CHECK(std::min(std::abs(c[0] + x), std::abs(c[1] + x)) < 1e-14);
}

TEST_CASE("sector validation") {
  CHECK_NOTHROW(ProblemSpec::h_form(1.0).validate());
  CHECK_NOTHROW(ProblemSpec::h_form(std::polar(1.0, 0.7)).validate());
  CHECK_THROWS_AS(ProblemSpec::h_form(std::polar(1.0, 0.8)).validate(), UsageError);
  CHECK_THROWS_AS(ProblemSpec::h_form(0.0).validate(), UsageError);
  CHECK_THROWS_AS(ProblemSpec::h_form(-1.0).validate(), UsageError);

  CHECK_NOTHROW(ProblemSpec::k_form(std::polar(1.0, 2.0)).validate());
  auto outside = ProblemSpec::k_form(std::polar(1.0, 170.0 * kPi / 180.0));
  CHECK_THROWS_AS(outside.validate(), UsageError);
  outside.continued = true;
  CHECK_NOTHROW(outside.validate());

  auto bad_tol = ProblemSpec::k_form(0.0);
  bad_tol.ode_tolerance = -1.0;
  CHECK_THROWS_AS(bad_tol.validate(), UsageError);
}

TEST_CASE("PT symmetry flag and description") {
  CHECK(ProblemSpec::h_form(0.5).pt_symmetric());
  CHECK(ProblemSpec::k_form(3.0).pt_symmetric());
  CHECK_FALSE(ProblemSpec::k_form(cplx(1.0, 1.0)).pt_symmetric());
  CHECK(!ProblemSpec::h_form(0.5).describe().empty());
  CHECK(BranchLabel::perturbative(2, -1).str() != BranchLabel::large_hbar(2).str());
}
