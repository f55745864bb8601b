#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "ptdw/eigensolver.hpp"

namespace ptdw {

namespace {

// Extended precision: the eigenvalue condition numbers of this non-normal matrix grow fast with
// the level index, and in double precision the 12th level is only good to ~1e-5.
using Real = long double;
using Cx = std::complex<Real>;
using CMat = Eigen::Matrix<Cx, Eigen::Dynamic, Eigen::Dynamic>;
using RMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

CMat oracle_matrix(cplx alpha, int n, double scale) {
  const Real b = scale;
  const int m = n + 3;
  RMat x = RMat::Zero(m, m);
  for (int k = 0; k + 1 < m; ++k) {
    x(k, k + 1) = x(k + 1, k) = b * std::sqrt((k + 1) / Real(2));
  }
  const RMat x3 = x * x * x;
  CMat h = CMat::Zero(n, n);
  const Real inv = 1 / (2 * b * b);
  for (int k = 0; k < n; ++k) {
    h(k, k) = (2 * Real(k) + 1) * inv;
    if (k + 2 < n) h(k, k + 2) = h(k + 2, k) = -std::sqrt((k + Real(1)) * (k + Real(2))) * inv;
  }
  const Cx i{0, 1};
  const Cx a{Real(alpha.real()), Real(alpha.imag())};
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) h(r, c) += i * (x3(r, c) + a * x(r, c));
  }
  return h;
}

}  // namespace

double oracle_basis_scale(cplx alpha, int basis_size) {
  const double n = basis_size;
  const double a = std::abs(alpha);
  auto kinetic = [&](double b) { return n / (2 * b * b); };
  auto potential = [&](double b) { return std::pow(b * std::sqrt(n / 2), 3) + a * b * std::sqrt(n / 2); };
  double lo = 1e-4, hi = 1e2;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (kinetic(mid) > potential(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::sqrt(lo * hi);
}

std::vector<cplx> oracle_raw_eigenvalues(cplx alpha, int basis_size, double scale) {
  if (basis_size < 4) throw UsageError("oracle basis too small");
  Eigen::ComplexEigenSolver<CMat> solver(oracle_matrix(alpha, basis_size, scale), false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError(NumericalError::Kind::NoConvergence, "dense eigensolver failed");
  }
  std::vector<cplx> out;
  out.reserve(size_t(basis_size));
  for (const Cx& e : solver.eigenvalues()) out.emplace_back(double(e.real()), double(e.imag()));
  std::sort(out.begin(), out.end(), [](cplx x, cplx y) { return x.real() < y.real(); });
  return out;
}

OracleResult oracle_spectrum(const ProblemSpec& spec, int basis_size, const OracleOptions& options) {
  spec.validate();
  cplx alpha = spec.alpha;
  cplx factor{1.0, 0.0};
  if (spec.form == Form::H) {
    const AlphaScaling s = scale_h_to_alpha(spec.hbar);
    alpha = s.alpha;
    factor = s.energy_factor;
  }
  OracleResult res;
  res.basis_size = basis_size;
  res.basis_scale = oracle_basis_scale(alpha, basis_size);
  const auto base = oracle_raw_eigenvalues(alpha, basis_size, res.basis_scale);
  const auto rescaled = oracle_raw_eigenvalues(alpha, basis_size, res.basis_scale * options.scale_ratio);
  const auto doubled = oracle_raw_eigenvalues(alpha, 2 * basis_size, res.basis_scale);
  for (cplx e : base) {
    const double tol = options.stability_tolerance * std::max(1.0, std::abs(e));
    auto near = [&](const std::vector<cplx>& v) {
      return std::any_of(v.begin(), v.end(), [&](cplx f) { return std::abs(f - e) <= tol; });
    };
    if (near(rescaled) && near(doubled)) {
      res.levels.push_back({e * factor, {}});
    } else {
      ++res.excluded;
    }
  }
  return res;
}

}  // namespace ptdw
