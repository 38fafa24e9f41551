#pragma once

#include <algorithm>
#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbo/core.hpp"
#include "cbo/rational.hpp"

namespace cbo {

/// Exact angle num/den in [0,1) turns, always reduced.
class Angle {
 public:
  Angle() = default;
  Angle(BigInt num, BigInt den) {
    if (den == 0) throw Error(ErrorKind::InvalidArgument, "angle denominator is zero");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    num %= den;
    if (num < 0) num += den;
    const BigInt g = boost::multiprecision::gcd(num, den);
    num_ = num / g;
    den_ = den / g;
  }
  Angle(long long num, long long den) : Angle(BigInt(num), BigInt(den)) {}

  /// Parses "p/q" (or a bare integer, meaning p/1).
  static Angle parse(std::string_view text) {
    const auto slash = text.find('/');
    try {
      if (slash == std::string_view::npos) return Angle(BigInt(std::string(text)), BigInt(1));
      const std::string p(text.substr(0, slash)), q(text.substr(slash + 1));
      if (p.empty() || q.empty()) throw std::invalid_argument("empty");
      return Angle(BigInt(p), BigInt(q));
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "malformed angle '" + std::string(text) + "'");
    }
  }

  const BigInt& num() const { return num_; }
  const BigInt& den() const { return den_; }
  double turns() const { return Rational(num_, den_).convert_to<double>(); }
  std::string str() const { return num_.str() + "/" + den_.str(); }

  friend bool operator==(const Angle&, const Angle&) = default;
  friend std::strong_ordering operator<=>(const Angle& x, const Angle& y) {
    const BigInt l = x.num_ * y.den_, r = y.num_ * x.den_;
    return l < r ? std::strong_ordering::less : (l > r ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  BigInt num_ = 0;
  BigInt den_ = 1;
};

/// D * theta mod 1.
inline Angle angle_map(const Angle& theta, int D) {
  if (D < 2) throw Error(ErrorKind::InvalidArgument, "degree must be >= 2");
  return Angle(theta.num() * D, theta.den());
}

/// D^n * theta mod 1, as a double in [0,1).
inline double angle_map_turns(const Angle& theta, int D, int n) {
  const BigInt m = boost::multiprecision::powm(BigInt(D), BigInt(n), theta.den());
  return Rational(BigInt(theta.num() * m % theta.den()), theta.den()).convert_to<double>();
}

/// theta + j/(2d) mod 1: relabeling of rays between monic representatives.
inline Angle rotate_label(const Angle& theta, long long j, int d) {
  return Angle(theta.num() * (2 * d) + BigInt(j) * theta.den(), theta.den() * (2 * d));
}

/// Preperiod and period of theta under multiplication by D, or nullopt if the
/// orbit has not closed within max_steps.
inline std::optional<std::pair<int, int>> preperiod_period(const Angle& theta, int D, int max_steps = 4096) {
  std::vector<Angle> orbit{theta};
  for (int n = 1; n <= max_steps; ++n) {
    Angle next = angle_map(orbit.back(), D);
    for (int m = 0; m < n; ++m)
      if (orbit[m] == next) return std::pair{m, n - m};
    orbit.push_back(std::move(next));
  }
  return std::nullopt;
}

/// Angles i/m and (2i+1)/(2m), m = (2d+1)^{k-1}: candidates for the ray pair
/// landing at the critical value when the critical orbit reaches 0 at step k.
inline std::pair<std::vector<Angle>, std::vector<Angle>> cut_point_angles(int d, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  const BigInt m = big_pow(BigInt(2 * d + 1), k - 1);
  std::vector<Angle> zero, half;
  for (BigInt i = 0; i < m; ++i) {
    zero.emplace_back(i, m);
    half.emplace_back(2 * i + 1, 2 * m);
  }
  std::sort(zero.begin(), zero.end());
  std::sort(half.begin(), half.end());
  return {zero, half};
}

/// i/d^n with 0 < i < d^n, skipping those already of the form i'/d^{n'}, n' < n.
inline std::vector<Angle> tip_angles(int d, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
  const BigInt m = big_pow(BigInt(d), n);
  std::vector<Angle> out;
  for (BigInt i = 1; i < m; ++i)
    if (i % d != 0) out.emplace_back(i, m);
  return out;
}

}  // namespace cbo
