#pragma once

#include <concepts>
#include <optional>
#include <vector>

#include "cbo/core.hpp"
#include "cbo/family.hpp"
#include "cbo/poly.hpp"

namespace cbo {

template <class M>
concept PolynomialMap = requires(const M& m, cplx z) {
  { m(z) } -> std::convertible_to<cplx>;
  { m.eval_with_derivative(z) } -> std::convertible_to<std::pair<cplx, cplx>>;
  { m.degree() } -> std::convertible_to<int>;
  { m.polynomial() } -> std::convertible_to<Polynomial>;
  { m.critical_points() } -> std::convertible_to<std::vector<cplx>>;
  { M::monic_map } -> std::convertible_to<bool>;
};

template <class M>
concept MonicMap = PolynomialMap<M> && M::monic_map;

inline constexpr int kDefaultMembershipIter = 500;
inline constexpr int kDefaultRenderIter = 2000;

/// Smallest R such that |P(z)| >= 2|z| for all |z| >= R, from |coefficients|
/// (index = power). Combined with twice the Cauchy root bound, floored at 4.
inline double escape_radius_from_moduli(std::span<const double> m) {
  const int n = static_cast<int>(m.size()) - 1;
  const double lead = m[n];
  double cauchy = 0.0;
  for (int k = 0; k < n; ++k) cauchy = std::max(cauchy, m[k] / lead);
  cauchy = 2.0 * (1.0 + cauchy);
  // h(R) = lead R^{n-1} - sum_{k<n} m_k R^{k-1}; {h >= 2} is an up-set.
  auto ok = [&](double r) {
    double h = lead * std::pow(r, n - 1);
    for (int k = 0; k < n; ++k) h -= m[k] * std::pow(r, k - 1);
    return h >= 2.0;
  };
  double hi = std::max(4.0, cauchy);
  if (!ok(hi)) {
    double lo = hi;
    while (!ok(hi)) {
      lo = hi;
      hi *= 2.0;
    }
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (ok(mid) ? hi : lo) = mid;
    }
  }
  return hi;
}

inline double escape_radius(const Polynomial& p) {
  std::vector<double> m;
  for (cplx c : p.coeffs()) m.push_back(std::abs(c));
  return escape_radius_from_moduli(m);
}

template <PolynomialMap M>
double escape_radius(const M& map) {
  return escape_radius(map.polynomial());
}

/// Escape radius of p_{a,d}; depends on |a| only.
inline double escape_radius_bicritical(int d, double abs_a) {
  const auto& r = odd_series(d).rounded;
  std::vector<double> m(2 * d + 2, 0.0);
  for (int k = 0; k <= d; ++k) m[2 * k + 1] = abs_a * std::abs(r[k]);
  return escape_radius_from_moduli(m);
}

struct OrbitRecord {
  std::vector<cplx> points;
  std::optional<int> escaped_at;
  double final_modulus = 0.0;

  bool bounded() const { return !escaped_at; }
};

template <PolynomialMap M>
OrbitRecord iterate(const M& map, cplx z0, int max_iter, double escape_radius) {
  if (!is_finite(z0)) throw Error(ErrorKind::NonFiniteInput, "orbit seed is not finite");
  if (max_iter < 1) throw Error(ErrorKind::InvalidArgument, "max_iter must be >= 1");
  OrbitRecord rec;
  rec.points.reserve(std::min(max_iter, 4096) + 1);
  const double r2 = escape_radius * escape_radius;
  cplx z = z0;
  rec.points.push_back(z);
  for (int n = 0;; ++n) {
    if (norm2(z) >= r2) {
      rec.escaped_at = n;
      break;
    }
    if (n == max_iter) break;
    z = map(z);
    rec.points.push_back(z);
  }
  rec.final_modulus = std::abs(z);
  return rec;
}

struct PotentialValue {
  double g = 0.0;
  int iterations_used = 0;
};

/// Green's function G(z) = lim log|z_n| / D^n. After escaping, the orbit is
/// pushed to a large bailout so the tail error is far below double precision;
/// the constant log|lead|/(D-1) is added for non-monic maps.
template <PolynomialMap M>
PotentialValue green(const M& map, cplx z, int max_iter, double escape_radius) {
  if (!is_finite(z)) throw Error(ErrorKind::NonFiniteInput, "point is not finite");
  const int D = map.degree();
  const double bailout = std::max(escape_radius, std::pow(10.0, 280.0 / D));
  const double r2 = escape_radius * escape_radius;
  int n = 0;
  bool escaped = false;
  for (; n <= max_iter; ++n) {
    if (norm2(z) >= r2) {
      escaped = true;
      break;
    }
    if (n == max_iter) break;
    z = map(z);
  }
  if (!escaped) return {0.0, n};
  while (std::abs(z) < bailout) {
    z = map(z);
    ++n;
  }
  const double lead = std::abs(map.polynomial().leading());
  const double corr = lead == 1.0 ? 0.0 : std::log(lead) / (D - 1);
  return {(std::log(std::abs(z)) + corr) / std::pow(static_cast<double>(D), n), n};
}

/// |P(z)/z^D - 1| via Horner in 1/z; never forms z^D.
inline cplx monic_ratio(const Polynomial& p, cplx z) {
  const int D = p.degree();
  const cplx w = 1.0 / z;
  cplx acc{};
  for (int j = D; j >= 0; --j) acc = acc * w + p[D - j];
  return acc;
}

/// Twice the smallest radius at which |P(z)/z^D - 1| <= 1/2 on 256 boundary samples,
/// and at least 2. Beyond it every telescoping factor of the Böttcher product
/// stays in the principal-branch disk.
inline double bottcher_safe_radius(const Polynomial& p) {
  auto ok = [&](double r) {
    for (int k = 0; k < 256; ++k)
      if (std::abs(monic_ratio(p, std::polar(r, kTwoPi * k / 256)) - 1.0) > 0.5) return false;
    return true;
  };
  double hi = 1.0;
  while (!ok(hi)) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return std::max(2.0, 2.0 * hi);
}

template <MonicMap M>
double bottcher_safe_radius(const M& map) {
  return bottcher_safe_radius(map.polynomial());
}

/// log(phi(z)/z) = sum_n D^{-(n+1)} Log(P(z_n)/z_n^D), principal branches.
inline cplx bottcher_log_correction(const Polynomial& p, cplx z) {
  const int D = p.degree();
  cplx sum{};
  double weight = 1.0 / D;
  for (int n = 0; n < 4096; ++n) {
    const cplx f = monic_ratio(p, z);
    if (std::abs(f - 1.0) < 1e-15) break;
    sum += weight * std::log(f);
    weight /= D;
    if (weight < 1e-300) break;
    z = f * ipow(z, D);
    if (!is_finite(z)) break;
  }
  return sum;
}

/// Böttcher coordinate, normalized by phi(z)/z -> 1. Valid for |z| >= r_safe.
template <MonicMap M>
cplx bottcher(const M& map, cplx z, double r_safe) {
  if (!is_finite(z)) throw Error(ErrorKind::NonFiniteInput, "point is not finite");
  if (std::abs(z) < r_safe) throw Error(ErrorKind::OutsideBottcherDomain, "|z| below the certified radius");
  return z * std::exp(bottcher_log_correction(map.polynomial(), z));
}

template <MonicMap M>
cplx bottcher(const M& map, cplx z) {
  return bottcher(map, z, bottcher_safe_radius(map));
}

/// True iff every finite critical orbit stays below the escape radius for max_iter steps.
/// For p_a only +sqrt(d) is iterated: the orbit of -sqrt(d) is its negative.
inline bool in_connectedness_locus(const Unicritical& f, int max_iter = kDefaultMembershipIter,
                                   double escape = 0.0) {
  if (escape <= 0.0) escape = escape_radius(f);
  return iterate(f, f.c, max_iter, escape).bounded();
}

inline bool in_connectedness_locus(const BicriticalOdd& f, int max_iter = kDefaultMembershipIter,
                                   double escape = 0.0) {
  if (escape <= 0.0) escape = escape_radius_bicritical(f.d(), std::abs(f.a()));
  return iterate(f, f.critical_points()[0], max_iter, escape).bounded();
}

inline bool in_connectedness_locus(const MonicOdd& f, int max_iter = kDefaultMembershipIter,
                                   double escape = 0.0) {
  if (escape <= 0.0) escape = escape_radius(f);
  return iterate(f, f.critical_points()[0], max_iter, escape).bounded();
}

}  // namespace cbo
