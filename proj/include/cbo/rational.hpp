#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <vector>

namespace cbo {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  BigInt r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline BigInt big_pow(const BigInt& base, int e) {
  BigInt r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

}  // namespace cbo
