#pragma once

// The three polynomial families and the algebraic maps between them:
//
//   f_c(z)   = z^{d+1} + c                          (Unicritical)
//   p_a(z)   = a * sum_k r_k z^{2k+1}               (BicriticalOdd)
//              r_k = C(d,k) (-1)^k / (d^k (2k+1)),  i.e. p_a' = a (1 - z^2/d)^d
//   P_s(z)   = s * p_a(z / s),  s^{2d} = T(a)       (MonicOdd)
//
// plus the quotient by z -> z^2 and the d = 1 cubic correspondence.

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "cbo/core.hpp"
#include "cbo/poly.hpp"
#include "cbo/rational.hpp"

namespace cbo {

/// Coefficients r_0..r_d of the odd series, exact and rounded.
struct OddSeries {
  int d = 0;
  std::vector<Rational> exact;
  std::vector<double> rounded;
};

inline OddSeries make_odd_series(int d) {
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "d must be >= 1");
  OddSeries s;
  s.d = d;
  BigInt dk = 1;
  for (int k = 0; k <= d; ++k) {
    Rational r(binomial(d, k), dk * (2 * k + 1));
    if (k % 2) r = -r;
    s.exact.push_back(r);
    s.rounded.push_back(to_double(r));
    dk *= d;
  }
  return s;
}

/// Shared, lazily built table; safe for concurrent callers.
inline const OddSeries& odd_series(int d) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<OddSeries>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[d];
  if (!slot) slot = std::make_unique<OddSeries>(make_odd_series(d));
  return *slot;
}

/// Evaluates z * sum_k c_k (z^2)^k. Negating z negates the result bit for bit.
inline cplx eval_odd(std::span<const cplx> c, cplx z) {
  const cplx w = z * z;
  cplx acc{};
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * w + *it;
  return acc * z;
}

inline std::pair<cplx, cplx> eval_odd_with_derivative(std::span<const cplx> c, cplx z) {
  const cplx w = z * z;
  cplx acc{}, dacc{};
  for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) {
    acc = acc * w + c[k];
    dacc = dacc * w + static_cast<double>(2 * k + 1) * c[k];
  }
  return {acc * z, dacc};
}

inline Polynomial odd_polynomial(std::span<const cplx> c) {
  std::vector<cplx> dense(2 * c.size(), cplx{});
  for (std::size_t k = 0; k < c.size(); ++k) dense[2 * k + 1] = c[k];
  return Polynomial(std::move(dense));
}

// ---------------------------------------------------------------------------

struct Unicritical {
  int d = 1;
  cplx c{};

  static constexpr bool monic_map = true;

  int degree() const { return d + 1; }
  cplx operator()(cplx z) const { return ipow(z, d + 1) + c; }
  std::pair<cplx, cplx> eval_with_derivative(cplx z) const {
    const cplx zd = ipow(z, d);
    return {zd * z + c, static_cast<double>(d + 1) * zd};
  }
  Polynomial polynomial() const {
    std::vector<cplx> k(d + 2, cplx{});
    k[0] = c;
    k[d + 1] = 1.0;
    return Polynomial(std::move(k));
  }
  std::vector<cplx> critical_points() const { return {cplx{}}; }
};

/// T(a) = (-1)^d a / (d^d (2d+1)), the coefficient of z^{2d+1} in p_a.
inline cplx leading_coeff(int d, cplx a) {
  if (a == cplx{}) throw Error(ErrorKind::ZeroParameter, "a must be nonzero");
  double denom = std::pow(static_cast<double>(d), d) * (2 * d + 1);
  return (d % 2 ? -a : a) / denom;
}

inline Rational leading_coeff_exact(int d, const Rational& a) {
  if (a == 0) throw Error(ErrorKind::ZeroParameter, "a must be nonzero");
  Rational t = a / Rational(big_pow(BigInt(d), d) * (2 * d + 1));
  return d % 2 ? Rational(-t) : t;
}

class BicriticalOdd {
 public:
  static constexpr bool monic_map = false;

  BicriticalOdd(int d, cplx a) : d_(d), a_(a) {
    if (d < 1) throw Error(ErrorKind::InvalidArgument, "d must be >= 1");
    if (a == cplx{}) throw Error(ErrorKind::ZeroParameter, "a must be nonzero");
    const auto& r = odd_series(d).rounded;
    c_.reserve(r.size());
    for (double rk : r) c_.push_back(a * rk);
  }

  int d() const { return d_; }
  cplx a() const { return a_; }
  int degree() const { return 2 * d_ + 1; }

  const std::vector<Rational>& exact_coefficients() const { return odd_series(d_).exact; }
  /// a * r_k, k = 0..d.
  std::span<const cplx> odd_coefficients() const { return c_; }

  cplx operator()(cplx z) const { return eval_odd(c_, z); }
  std::pair<cplx, cplx> eval_with_derivative(cplx z) const { return eval_odd_with_derivative(c_, z); }
  Polynomial polynomial() const { return odd_polynomial(c_); }
  std::vector<cplx> critical_points() const {
    const double r = std::sqrt(static_cast<double>(d_));
    return {cplx{r, 0.0}, cplx{-r, 0.0}};
  }

 private:
  int d_;
  cplx a_;
  std::vector<cplx> c_;
};

/// P_s(z) = s * p_a(z / s) with s^{2d} = T(a). The leading coefficient is set to 1.
class MonicOdd {
 public:
  static constexpr bool monic_map = true;

  /// Takes a and one of its monic roots s.
  MonicOdd(int d, cplx a, cplx s) : d_(d), a_(a), s_(s) {
    if (d < 1) throw Error(ErrorKind::InvalidArgument, "d must be >= 1");
    if (a == cplx{} || s == cplx{}) throw Error(ErrorKind::ZeroParameter, "a and s must be nonzero");
    const auto& r = odd_series(d).rounded;
    const cplx inv_s2 = 1.0 / (s * s);
    cplx scale{1.0, 0.0};
    for (int k = 0; k <= d; ++k) {
      c_.push_back(a * r[k] * scale);
      scale *= inv_s2;
    }
    c_.back() = 1.0;
  }

  /// The parameter a determined by s through s^{2d} = T(a).
  static MonicOdd from_s(int d, cplx s) {
    if (s == cplx{}) throw Error(ErrorKind::ZeroParameter, "s must be nonzero");
    const double scale = std::pow(static_cast<double>(d), d) * (2 * d + 1);
    const cplx s2d = ipow(s, 2 * d);
    return MonicOdd(d, (d % 2 ? -s2d : s2d) * scale, s);
  }

  int d() const { return d_; }
  cplx a() const { return a_; }
  cplx s() const { return s_; }
  int degree() const { return 2 * d_ + 1; }
  std::span<const cplx> odd_coefficients() const { return c_; }

  cplx operator()(cplx z) const { return eval_odd(c_, z); }
  std::pair<cplx, cplx> eval_with_derivative(cplx z) const { return eval_odd_with_derivative(c_, z); }
  Polynomial polynomial() const { return odd_polynomial(c_); }
  /// +s*sqrt(d) first ("right"), then -s*sqrt(d).
  std::vector<cplx> critical_points() const {
    const cplx r = s_ * std::sqrt(static_cast<double>(d_));
    return {r, -r};
  }

 private:
  int d_;
  cplx a_;
  cplx s_;
  std::vector<cplx> c_;
};

/// The 2d solutions of s^{2d} = T(a), ascending by principal argument.
inline std::vector<cplx> monic_roots(int d, cplx a) {
  const cplx t = leading_coeff(d, a);
  const int n = 2 * d;
  const double mod = std::pow(std::abs(t), 1.0 / n);
  const double base = std::arg(t) / n;
  std::vector<cplx> roots;
  for (int k = 0; k < n; ++k) {
    double ang = base + kTwoPi * k / n;
    if (ang > std::numbers::pi) ang -= kTwoPi;
    roots.push_back(std::polar(mod, ang));
  }
  std::sort(roots.begin(), roots.end(), [](cplx x, cplx y) { return std::arg(x) < std::arg(y); });
  return roots;
}

inline cplx eval_bicritical(const BicriticalOdd& f, cplx z) { return f(z); }
inline cplx eval_monic(const MonicOdd& m, cplx z) { return m(z); }

// ---------------------------------------------------------------------------

/// The polynomial Q with Q(z^2) = p_a(z)^2; coeffs[j] multiplies u^{j+1} (no constant term).
struct QuotientPoly {
  int d = 1;
  cplx a{};
  std::vector<cplx> coeffs;

  Polynomial polynomial() const {
    std::vector<cplx> dense(coeffs.size() + 1, cplx{});
    std::copy(coeffs.begin(), coeffs.end(), dense.begin() + 1);
    return Polynomial(std::move(dense));
  }
  cplx operator()(cplx u) const { return polynomial()(u); }
  std::vector<cplx> critical_points() const { return polynomial().derivative().roots(); }
};

inline QuotientPoly quotient_poly(int d, cplx a) {
  const BicriticalOdd f(d, a);
  const auto b = f.odd_coefficients();
  QuotientPoly q{d, a, std::vector<cplx>(2 * d + 1, cplx{})};
  // (sum b_k z^{2k+1})^2 = sum_j (sum_{k+l=j} b_k b_l) z^{2j+2}
  for (int k = 0; k <= d; ++k)
    for (int l = 0; l <= d; ++l) q.coeffs[k + l] += b[k] * b[l];
  return q;
}

/// z -> scale*z + offset.
struct AffineMap {
  cplx scale{1.0, 0.0};
  cplx offset{};

  cplx operator()(cplx z) const { return scale * z + offset; }
  AffineMap inverse() const { return {1.0 / scale, -offset / scale}; }
  /// (this ∘ other)(z) = this(other(z)).
  AffineMap after(const AffineMap& other) const { return {scale * other.scale, scale * other.offset + offset}; }
};

/// Q_{a,b}(z) = z^3 - 3 a^2 z + b, critical points ±a.
struct CubicBD {
  cplx at{};
  cplx b{};
  cplx operator()(cplx z) const { return z * z * z - 3.0 * at * at * z + b; }
  std::array<cplx, 2> critical_points() const { return {at, -at}; }
};

/// Members of the family Q_{t, 2t^3 - 2t} (the critical point t maps to the fixed point -2t).
inline CubicBD bd_family_member(cplx t) { return {t, 2.0 * t * t * t - 2.0 * t}; }

/// 50 fixed sample points filling the disk of radius 2 (sunflower pattern).
inline std::vector<cplx> disk_samples(int n = 50, double radius = 2.0) {
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<cplx> pts;
  for (int k = 0; k < n; ++k) pts.push_back(std::polar(radius * std::sqrt((k + 0.5) / n), golden * k));
  return pts;
}

struct Conjugacy {
  AffineMap psi;
  double residual = 0.0;
};

/// Best affine psi with psi∘P ≈ Q∘psi over disk_samples(); P must be the d = 1 quotient.
/// Matching cubic terms forces scale^2 = lead(P); both signs and both critical
/// pairings are tried.
inline Conjugacy conjugacy_residual(const QuotientPoly& qp, const CubicBD& q) {
  if (qp.d != 1) throw Error(ErrorKind::DegreeUnsupported, "only the d = 1 quotient is cubic");
  const Polynomial p = qp.polynomial();
  const auto crit_p = p.derivative().roots();
  const auto crit_q = q.critical_points();
  const auto samples = disk_samples();
  const cplx alpha0 = std::sqrt(p.leading());
  Conjugacy best{{}, std::numeric_limits<double>::infinity()};
  for (cplx alpha : {alpha0, -alpha0}) {
    for (int pairing = 0; pairing < 2; ++pairing) {
      const cplx beta = crit_q[pairing] - alpha * crit_p[0];
      const AffineMap psi{alpha, beta};
      double res = 0.0;
      for (cplx z : samples) res = std::max(res, std::abs(psi(p(z)) - q(psi(z))));
      if (res < best.residual) best = {psi, res};
    }
  }
  return best;
}

struct BrannerDouady {
  CubicBD cubic;
  AffineMap psi;
  double residual = 0.0;
};

/// d = 1: the quotient of p_a is affinely conjugate to Q_{t, 2t^3-2t} with t = a/3.
/// (The fixed point 0 of the quotient has multiplier a^2, matching 9t^2 at -2t.)
inline BrannerDouady branner_douady(cplx a, int d = 1, double tol = 1e-8) {
  if (d != 1) throw Error(ErrorKind::DegreeUnsupported, "Branner-Douady correspondence needs d = 1");
  if (a == cplx{}) throw Error(ErrorKind::ZeroParameter, "a must be nonzero");
  const CubicBD q = bd_family_member(a / 3.0);
  const auto conj = conjugacy_residual(quotient_poly(1, a), q);
  if (!(conj.residual <= tol)) throw Error(ErrorKind::ConjugacyNotFound, "residual " + std::to_string(conj.residual));
  return {q, conj.psi, conj.residual};
}

// ---------------------------------------------------------------------------

struct NormalForm {
  int d = 0;
  cplx a{};
  AffineMap phi;  ///< phi ∘ f ∘ phi^{-1} = p_{a,d}
};

/// k f(z / k) for an odd polynomial given by its odd coefficients.
inline std::vector<cplx> conjugate_by_scaling(std::span<const cplx> odd, cplx k) {
  std::vector<cplx> out(odd.begin(), odd.end());
  const cplx k2inv = 1.0 / (k * k);
  cplx f{1.0, 0.0};
  for (auto& c : out) {
    c *= f;
    f *= k2inv;
  }
  return out;
}

/// Recovers (d, a) from the coefficients of z, z^3, ..., z^{2d+1} of an odd polynomial.
/// The derivative, as a polynomial in u = z^2, must equal A (1 - u/u0)^d.
inline NormalForm normalize_bicritical(std::span<const cplx> odd, double tol = 1e-8) {
  const int d = static_cast<int>(odd.size()) - 1;
  if (d < 1) throw Error(ErrorKind::NotBicriticalOdd, "degree must be at least 3");
  for (cplx c : odd)
    if (!is_finite(c)) throw Error(ErrorKind::NonFiniteInput, "coefficient not finite");
  std::vector<cplx> deriv(d + 1);
  for (int k = 0; k <= d; ++k) deriv[k] = static_cast<double>(2 * k + 1) * odd[k];
  if (deriv[d] == cplx{}) throw Error(ErrorKind::NotBicriticalOdd, "leading coefficient vanishes");
  // Centroid of the roots in u; a single d-fold cluster sits exactly there.
  const cplx u0 = -deriv[d - 1] / (static_cast<double>(d) * deriv[d]);
  if (std::abs(u0) <= tol * (1.0 + std::abs(deriv[d - 1] / deriv[d])) || deriv[0] == cplx{})
    throw Error(ErrorKind::NotBicriticalOdd, "critical points collide at 0");
  const cplx A = deriv[0];
  double scale = 0.0, err = 0.0;
  cplx term = A;
  for (int k = 0; k <= d; ++k) {
    if (k > 0) term *= -static_cast<double>(d - k + 1) / static_cast<double>(k) / u0;
    scale = std::max(scale, std::abs(deriv[k]));
    err = std::max(err, std::abs(deriv[k] - term));
  }
  if (!(err <= tol * scale)) throw Error(ErrorKind::NotBicriticalOdd, "derivative has more than two critical clusters");
  const cplx x = std::sqrt(u0);
  const cplx k = std::sqrt(static_cast<double>(d)) / x;
  return {d, A, AffineMap{k, cplx{}}};
}

}  // namespace cbo
