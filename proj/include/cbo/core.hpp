#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cbo {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class ErrorKind {
  InvalidArgument,
  ZeroParameter,
  DegreeUnsupported,
  ConjugacyNotFound,
  NotBicriticalOdd,
  NonFiniteInput,
  OutsideBottcherDomain,
  NewtonFailed,
  LandingAmbiguous,
  SeparatrixIncomplete,
  NotEscaping,
  PeriodNotMinimal,
  DegenerateOrbit,
  NoMatch,
  TimeBudgetExceeded,
  Io,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ZeroParameter: return "ZeroParameter";
    case ErrorKind::DegreeUnsupported: return "DegreeUnsupported";
    case ErrorKind::ConjugacyNotFound: return "ConjugacyNotFound";
    case ErrorKind::NotBicriticalOdd: return "NotBicriticalOdd";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::OutsideBottcherDomain: return "OutsideBottcherDomain";
    case ErrorKind::NewtonFailed: return "NewtonFailed";
    case ErrorKind::LandingAmbiguous: return "LandingAmbiguous";
    case ErrorKind::SeparatrixIncomplete: return "SeparatrixIncomplete";
    case ErrorKind::NotEscaping: return "NotEscaping";
    case ErrorKind::PeriodNotMinimal: return "PeriodNotMinimal";
    case ErrorKind::DegenerateOrbit: return "DegenerateOrbit";
    case ErrorKind::NoMatch: return "NoMatch";
    case ErrorKind::TimeBudgetExceeded: return "TimeBudgetExceeded";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

inline double norm2(cplx z) { return z.real() * z.real() + z.imag() * z.imag(); }

/// z^n by repeated squaring; n >= 0.
inline cplx ipow(cplx z, int n) {
  cplx result{1.0, 0.0};
  cplx base = z;
  while (n > 0) {
    if (n & 1) result *= base;
    n >>= 1;
    if (n) base *= base;
  }
  return result;
}

/// Relative distance |x - y| / max(|y|, floor).
inline double rel_err(cplx x, cplx y, double floor = 1e-300) {
  return std::abs(x - y) / std::max(std::abs(y), floor);
}

}  // namespace cbo
