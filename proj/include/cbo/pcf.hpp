#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "cbo/dynamics.hpp"
#include "cbo/loci.hpp"

namespace cbo {

enum class FamilyKind { Unicritical, BicriticalOdd };

inline std::string_view to_string(FamilyKind f) {
  return f == FamilyKind::Unicritical ? "unicritical" : "bicritical";
}

struct CenterSpec {
  FamilyKind family = FamilyKind::Unicritical;
  int d = 1;  ///< family index: degree d+1 for unicritical, 2d+1 for bicritical
  int period = 1;
  cplx seed{};
  std::optional<cplx> found;
  double residual = 0.0;
  int newton_iters = 0;
};

inline constexpr int kCenterNewtonMax = 50;

/// Value and parameter derivative of an equation F(param) = 0.
struct EquationValue {
  cplx f{};
  cplx df{};
};

/// F(c) = f_c^{period}(0) for z^D + c.
inline EquationValue center_equation_unicritical(int D, int period, cplx c) {
  cplx z{}, dz{};
  for (int k = 0; k < period; ++k) {
    dz = static_cast<double>(D) * ipow(z, D - 1) * dz + 1.0;
    z = ipow(z, D) + c;
  }
  return {z, dz};
}

/// Orbit z_k = p_a^k(sqrt d) with dz_k/da, using dp_a/da = p_a / a.
inline std::vector<EquationValue> bicritical_orbit(int d, int n, cplx a) {
  const BicriticalOdd p(d, a);
  const BicriticalOdd p1(d, 1.0);
  std::vector<EquationValue> out{{std::sqrt(static_cast<double>(d)), 0.0}};
  for (int k = 0; k < n; ++k) {
    const auto [z, dz] = out.back();
    const auto [w, dw] = p.eval_with_derivative(z);
    out.push_back({w, p1(z) + dw * dz});
  }
  return out;
}

/// F(a) = p_a^{period}(sqrt d) - sqrt d.
inline EquationValue center_equation_bicritical(int d, int period, cplx a) {
  auto v = bicritical_orbit(d, period, a).back();
  v.f -= std::sqrt(static_cast<double>(d));
  return v;
}

/// F(a) = p_a^k(sqrt d).
inline EquationValue cut_point_equation(int d, int k, cplx a) { return bicritical_orbit(d, k, a).back(); }

namespace detail {

template <class Eq>
CenterSpec newton_solve(CenterSpec spec, const Eq& eq, double tol) {
  cplx x = spec.seed;
  for (int it = 1; it <= kCenterNewtonMax; ++it) {
    const auto [f, df] = eq(x);
    if (!is_finite(f) || !is_finite(df) || df == cplx{}) break;
    const cplx step = f / df;
    x -= step;
    spec.newton_iters = it;
    if (!is_finite(x)) break;
    if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(x))) {
      spec.residual = std::abs(eq(x).f);
      if (spec.residual <= tol) {
        spec.found = x;
        return spec;
      }
    }
  }
  spec.residual = std::abs(eq(x).f);
  if (spec.residual <= tol && is_finite(x)) {
    spec.found = x;
    return spec;
  }
  throw Error(ErrorKind::NewtonFailed, "no convergence from seed (residual " + std::to_string(spec.residual) + ")");
}

inline std::vector<int> proper_divisors(int n) {
  std::vector<int> out;
  for (int q = 1; q < n; ++q)
    if (n % q == 0) out.push_back(q);
  return out;
}

}  // namespace detail

inline CenterSpec solve_center_unicritical(int D, int period, cplx seed) {
  if (D < 2 || period < 1) throw Error(ErrorKind::InvalidArgument, "need D >= 2 and period >= 1");
  CenterSpec spec{FamilyKind::Unicritical, D - 1, period, seed, std::nullopt, 0.0, 0};
  spec = detail::newton_solve(spec, [&](cplx c) { return center_equation_unicritical(D, period, c); }, 1e-12);
  for (int q : detail::proper_divisors(period))
    if (std::abs(center_equation_unicritical(D, q, *spec.found).f) < 1e-6)
      throw Error(ErrorKind::PeriodNotMinimal, "critical orbit has period " + std::to_string(q));
  return spec;
}

inline CenterSpec solve_center_bicritical(int d, int period, cplx seed) {
  if (d < 1 || period < 1) throw Error(ErrorKind::InvalidArgument, "need d >= 1 and period >= 1");
  CenterSpec spec{FamilyKind::BicriticalOdd, d, period, seed, std::nullopt, 0.0, 0};
  spec = detail::newton_solve(spec, [&](cplx a) { return center_equation_bicritical(d, period, a); }, 1e-10);
  if (std::abs(*spec.found) < 1e-8) throw Error(ErrorKind::NewtonFailed, "converged to a = 0");
  for (int q : detail::proper_divisors(period))
    if (std::abs(center_equation_bicritical(d, q, *spec.found).f) < 1e-6)
      throw Error(ErrorKind::PeriodNotMinimal, "critical orbit has period " + std::to_string(q));
  return spec;
}

/// Parameter with p_a^k(sqrt d) = 0 while p_a^j(sqrt d) stays away from 0 for 0 < j < k.
inline CenterSpec solve_cut_point(int d, int k, cplx seed) {
  if (d < 1 || k < 2) throw Error(ErrorKind::InvalidArgument, "need d >= 1 and k >= 2");
  CenterSpec spec{FamilyKind::BicriticalOdd, d, k, seed, std::nullopt, 0.0, 0};
  spec = detail::newton_solve(spec, [&](cplx a) { return cut_point_equation(d, k, a); }, 1e-10);
  const auto orbit = bicritical_orbit(d, k, *spec.found);
  for (int j = 1; j < k; ++j)
    if (std::abs(orbit[j].f) <= 1e-4)
      throw Error(ErrorKind::DegenerateOrbit, "iterate " + std::to_string(j) + " already at 0");
  return spec;
}

// ---------------------------------------------------------------------------
// Orbit portraits

/// Side symbols, closest-return times of the critical cycle and the orientation of the cycle polygon.
struct PortraitCode {
  std::string sides;
  std::vector<int> returns;
  int orientation = 0;

  std::string str() const {
    std::string out = sides + "|";
    for (std::size_t i = 0; i < returns.size(); ++i) out += (i ? "-" : "") + std::to_string(returns[i]);
    return out + "|" + (orientation > 0 ? "+" : orientation < 0 ? "-" : "0");
  }
  friend bool operator==(const PortraitCode&, const PortraitCode&) = default;
};

/// cycle[0] is the critical point; the cycle closes back onto it.
inline PortraitCode portrait_code(const std::vector<cplx>& cycle, std::string sides) {
  PortraitCode code;
  code.sides = std::move(sides);
  const std::size_t p = cycle.size();
  double best = std::numeric_limits<double>::infinity();
  double diam = 0.0;
  for (std::size_t k = 1; k <= p; ++k) {
    const double dist = k == p ? 0.0 : std::abs(cycle[k] - cycle[0]);
    if (dist < best * (1.0 - 1e-9)) {
      code.returns.push_back(static_cast<int>(k));
      best = dist;
    }
    diam = std::max(diam, dist);
  }
  double area = 0.0;
  for (std::size_t k = 0; k < p; ++k) {
    const cplx u = cycle[k] - cycle[0], v = cycle[(k + 1) % p] - cycle[0];
    area += u.real() * v.imag() - u.imag() * v.real();
  }
  if (std::abs(area) > 1e-9 * diam * diam) code.orientation = area > 0 ? 1 : -1;
  return code;
}

/// Critical cycle of z^D + c starting at 0. The whole plane plays the role of the Right side.
inline PortraitCode unicritical_code(int D, int period, cplx c) {
  std::vector<cplx> cycle{0.0};
  const Unicritical f{D - 1, c};
  for (int k = 1; k < period; ++k) cycle.push_back(f(cycle.back()));
  return portrait_code(cycle, std::string(period, 'R'));
}

/// Minimal period of the orbit of +sqrt(d) under p_a, if it returns within max_period steps.
inline std::optional<int> bicritical_period(int d, cplx a, int max_period = 64, double tol = 1e-6) {
  const BicriticalOdd p(d, a);
  const cplx z0 = std::sqrt(static_cast<double>(d));
  cplx z = z0;
  for (int k = 1; k <= max_period; ++k) {
    z = p(z);
    if (std::abs(z - z0) < tol) return k;
  }
  return std::nullopt;
}

/// All centers of period exactly `period` for z^D + c: roots of the polynomial c -> f_c^period(0)
/// polished by Newton, sorted by (re, im).
inline std::vector<cplx> unicritical_centers(int D, int period) {
  if (period < 1) throw Error(ErrorKind::InvalidArgument, "period must be >= 1");
  const double degree = std::pow(static_cast<double>(D), period - 1);
  if (degree > 512) throw Error(ErrorKind::DegreeUnsupported, "too many centers to enumerate");
  Polynomial z{std::vector<cplx>{0.0}};
  const Polynomial c{std::vector<cplx>{0.0, 1.0}};
  for (int k = 0; k < period; ++k) {
    Polynomial zD{std::vector<cplx>{1.0}};
    for (int j = 0; j < D; ++j) zD = zD * z;
    std::vector<cplx> coeffs(zD.coeffs().begin(), zD.coeffs().end());
    if (coeffs.size() < 2) coeffs.resize(2);
    coeffs[1] += 1.0;
    z = Polynomial(std::move(coeffs));
  }
  std::vector<cplx> out;
  for (cplx r : z.roots()) {
    try {
      const cplx found = *solve_center_unicritical(D, period, r).found;
      bool dup = false;
      for (cplx q : out) dup = dup || std::abs(q - found) < 1e-8;
      if (!dup) out.push_back(found);
    } catch (const Error&) {
      // lower period or no convergence
    }
  }
  std::sort(out.begin(), out.end(), [](cplx x, cplx y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return out;
}

struct CenterMatch {
  int period = 0;
  cplx c{};
  PortraitCode code;
};

/// Orbit portrait of the right critical cycle of p_a, sides taken against the separatrix of P_{s(a)}.
inline PortraitCode bicritical_code(int d, cplx a, int period, const MembershipParams& params = {}) {
  const auto br = search_branch(a, d, params.rays);
  if (!br.s || br.ambiguous) throw Error(ErrorKind::NoMatch, "no branch with rays 0, 1/2 landing at 0");
  const MonicOdd m(d, a, *br.s);
  const Separatrix sep = make_separatrix(*br.ray0, *br.ray_half, m.critical_points()[0]);
  std::vector<cplx> cycle{m.critical_points()[0]};
  for (int k = 1; k < period; ++k) cycle.push_back(m(cycle.back()));
  std::string sides;
  for (cplx z : cycle) sides += std::abs(z) < params.eps0 ? std::string("0") : std::string(to_string(side_classify(z, sep)));
  return portrait_code(cycle, sides);
}

/// Unicritical center of degree d+1 whose critical portrait matches the right critical cycle of p_a.
inline CenterMatch match_center(cplx a, int d, const MembershipParams& params = {}) {
  const auto period = bicritical_period(d, a);
  if (!period) throw Error(ErrorKind::NoMatch, "right critical orbit is not periodic");
  const PortraitCode target = bicritical_code(d, a, *period, params);
  for (cplx c : unicritical_centers(d + 1, *period)) {
    const PortraitCode code = unicritical_code(d + 1, *period, c);
    if (code == target) return {*period, c, code};
  }
  throw Error(ErrorKind::NoMatch, "no center with portrait " + target.str());
}

}  // namespace cbo
