#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ptdw {

using cplx = std::complex<double>;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = std::numbers::pi;

/// Raised for rejected inputs (bad parameters, sector violations, malformed paths).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure cannot deliver its contract.
class NumericalError : public std::runtime_error {
 public:
  enum class Kind {
    StepUnderflow,
    WkbTooClose,
    NotDecaying,
    NoConvergence,
    BasinEscape,
    DegenerateLevel,
    NonIntegerWinding,
    ZeroOnContour,
    TwoImaginaryNodes,
    NoBracket,
    TraceTruncated,
    Other,
  };

  NumericalError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

const char* to_string(NumericalError::Kind kind);

}  // namespace ptdw
