#pragma once

#include <chrono>
#include <limits>
#include <optional>
#include <vector>

#include "cbo/angle.hpp"
#include "cbo/dynamics.hpp"

namespace cbo {

using Deadline = std::optional<std::chrono::steady_clock::time_point>;

inline void check_deadline(const Deadline& deadline) {
  if (deadline && std::chrono::steady_clock::now() > *deadline)
    throw Error(ErrorKind::TimeBudgetExceeded, "time budget exceeded");
}

struct RayParams {
  double eta = 8.0;          ///< starting potential
  double step_ratio = 0.5;   ///< potential ratio between recorded points
  int max_levels = 300;
  double newton_tol = 1e-9;  ///< landing: pairwise distance of the last three points
  int newton_max = 60;       ///< iterations per Newton solve
  int substeps = 8;          ///< internal continuation steps between recorded points

  void validate() const {
    if (!(eta > 0) || !(step_ratio > 0 && step_ratio < 1) || max_levels < 1 || !(newton_tol > 0) ||
        newton_max < 1 || substeps < 1)
      throw Error(ErrorKind::InvalidArgument, "invalid ray parameters");
  }
};

enum class RayStatus { Landed, BudgetExhausted, NewtonFailed };

inline std::string_view to_string(RayStatus s) {
  switch (s) {
    case RayStatus::Landed: return "landed";
    case RayStatus::BudgetExhausted: return "budget";
    case RayStatus::NewtonFailed: return "newton_failed";
  }
  return "";
}

struct RayTrace {
  Angle angle;
  std::vector<cplx> points;  ///< one per level, potential eta * step_ratio^k
  std::optional<cplx> landing;
  RayStatus status = RayStatus::BudgetExhausted;
  std::vector<cplx> path;  ///< every continuation point, for drawing and separatrices
};

namespace detail {

/// P^n(z) and (P^n)'(z); non-finite values signal overflow.
template <PolynomialMap M>
std::pair<cplx, cplx> iterate_with_derivative(const M& map, cplx z, int n) {
  cplx dz{1.0, 0.0};
  for (int k = 0; k < n; ++k) {
    auto [w, dw] = map.eval_with_derivative(z);
    dz *= dw;
    z = w;
    if (!is_finite(z) || !is_finite(dz)) break;
  }
  return {z, dz};
}

inline constexpr double kTargetPotential = 24.0;

/// Solves P^n(z) = exp(D^n g + 2 pi i D^n theta) by Newton on the logarithm, where n is the
/// least iterate pushing the potential past kTargetPotential (there phi(w) = w to double precision).
/// turns(n) must return D^n theta mod 1.
template <MonicMap M, class Turns>
std::optional<cplx> solve_level(const M& map, const Turns& turns, double g, cplx seed, int newton_max) {
  const int D = map.degree();
  int n = 0;
  double pot = g;
  while (pot < kTargetPotential) {
    pot *= D;
    ++n;
  }
  const cplx log_target{pot, kTwoPi * turns(n)};
  cplx z = seed;
  double prev_res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < newton_max; ++it) {
    auto [w, dw] = iterate_with_derivative(map, z, n);
    if (!is_finite(w) || !is_finite(dw) || w == cplx{} || dw == cplx{}) return std::nullopt;
    cplx res = std::log(w) - log_target;
    res.imag(std::remainder(res.imag(), kTwoPi));
    // Near critical points the residual bottoms out above 1e-13; a stalled small residual is the floor.
    const double r = std::abs(res);
    if (r <= 1e-9 && r > 0.5 * prev_res) return z;
    prev_res = r;
    const cplx step = res * w / dw;
    if (!is_finite(step)) return std::nullopt;
    z -= step;
    if (std::abs(step) <= 1e-15 * std::abs(z) || r <= 1e-13) return z;
  }
  return std::nullopt;
}

/// Newton for P^{m+p}(z) = P^m(z) from z; the root if it converges.
template <PolynomialMap M>
std::optional<cplx> periodic_point_near(const M& map, cplx z, int m, int p, int max_iter = 60) {
  for (int it = 0; it < max_iter; ++it) {
    auto [wm, dwm] = iterate_with_derivative(map, z, m);
    auto [wp, dwp] = iterate_with_derivative(map, wm, p);
    const cplx f = wp - wm;
    const cplx df = dwp * dwm - dwm;
    if (!is_finite(f) || !is_finite(df) || df == cplx{}) return std::nullopt;
    const cplx step = f / df;
    z -= step;
    if (!is_finite(z)) return std::nullopt;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) return z;
  }
  return std::nullopt;
}

}  // namespace detail

/// Dynamical ray of a monic map, traced inward from potential eta. Newton failures are
/// reported through the status with the partial trace kept.
template <MonicMap M>
RayTrace trace_ray(const M& map, const Angle& theta, const RayParams& params = {}, const Deadline& deadline = {}) {
  params.validate();
  RayTrace tr;
  tr.angle = theta;
  const auto pp = preperiod_period(theta, map.degree(), 512);
  const int D = map.degree();
  auto turns = [&](int n) { return angle_map_turns(theta, D, n); };

  cplx z = std::exp(cplx{params.eta, kTwoPi * theta.turns()});
  auto first = detail::solve_level(map, turns, params.eta, z, params.newton_max);
  if (!first) {
    tr.status = RayStatus::NewtonFailed;
    return tr;
  }
  z = *first;
  tr.points.push_back(z);
  tr.path.push_back(z);

  const double sub_ratio = std::pow(params.step_ratio, 1.0 / params.substeps);
  double g = params.eta;
  for (int level = 1; level <= params.max_levels; ++level) {
    check_deadline(deadline);
    const double g_next = params.eta * std::pow(params.step_ratio, level);
    // Continue from g to g_next; substeps halve on failure.
    double h = sub_ratio;
    while (g > g_next) {
      const double g_try = std::max(g_next, g * h);
      auto sol = detail::solve_level(map, turns, g_try, z, params.newton_max);
      if (sol) {
        z = *sol;
        g = g_try;
        tr.path.push_back(z);
        continue;
      }
      h = std::sqrt(h);
      if (1.0 - h < 1e-6) {
        tr.status = RayStatus::NewtonFailed;
        return tr;
      }
    }
    g = g_next;
    tr.points.push_back(z);

    const std::size_t k = tr.points.size();
    if (k < 4) continue;
    const cplx a = tr.points[k - 3], b = tr.points[k - 2], c = tr.points[k - 1];
    if (std::max({std::abs(a - b), std::abs(b - c), std::abs(a - c)}) >= params.newton_tol) continue;
    // Geometric tail estimate from the last two gaps.
    const double gap0 = std::abs(tr.points[k - 4] - a), gap1 = std::abs(b - c);
    const double q = std::abs(a - b) > 0 ? std::abs(b - c) / std::abs(a - b) : 0.0;
    if (!(q < 1.0) || gap1 * q / (1.0 - q) >= params.newton_tol || gap0 == 0.0) continue;
    if (pp) {
      auto root = detail::periodic_point_near(map, c, pp->first, pp->second);
      if (!root || std::abs(*root - c) > 1e-6) continue;
      tr.landing = *root;
    } else {
      tr.landing = c;
    }
    tr.status = RayStatus::Landed;
    return tr;
  }
  tr.status = RayStatus::BudgetExhausted;
  return tr;
}

/// The point of potential g on the ray at (real) angle t, by continuation from eta.
/// Angles are multiplied in double precision, so g should not be tiny.
template <MonicMap M>
std::optional<cplx> ray_point(const M& map, double t, double g, const RayParams& params = {}) {
  const int D = map.degree();
  auto turns = [&](int n) {
    double x = t - std::floor(t);
    for (int k = 0; k < n; ++k) x = std::fmod(x * D, 1.0);
    return x;
  };
  double pot = std::max(params.eta, g);
  auto z = detail::solve_level(map, turns, pot, std::exp(cplx{pot, kTwoPi * t}), params.newton_max);
  const double sub_ratio = std::pow(params.step_ratio, 1.0 / params.substeps);
  double h = sub_ratio;
  while (z && pot > g) {
    const double next = std::max(g, pot * h);
    auto sol = detail::solve_level(map, turns, next, *z, params.newton_max);
    if (sol) {
      z = sol;
      pot = next;
      continue;
    }
    h = std::sqrt(h);
    if (1.0 - h < 1e-6) return std::nullopt;
  }
  return z;
}

/// Landing point of R_0 for z^D + c: the fixed point nearest the end of the trace.
inline cplx locate_beta(const Unicritical& u, const RayParams& params = {}) {
  const RayTrace tr = trace_ray(u, Angle(0, 1), params);
  if (tr.points.empty()) throw Error(ErrorKind::NewtonFailed, "ray 0 could not be started");
  const cplx end = tr.landing.value_or(tr.points.back());
  std::vector<cplx> fixed(u.degree() + 1, cplx{});
  fixed[0] = u.c;
  fixed[1] = -1.0;
  fixed[u.degree()] = 1.0;
  auto roots = Polynomial(fixed).roots();
  std::sort(roots.begin(), roots.end(), [&](cplx x, cplx y) { return std::abs(x - end) < std::abs(y - end); });
  if (roots.size() > 1 && std::abs(roots[1] - end) < 1e-6)
    throw Error(ErrorKind::LandingAmbiguous, "two fixed points near the end of ray 0");
  cplx beta = roots[0];
  for (int it = 0; it < 8; ++it) {
    auto [w, dw] = u.eval_with_derivative(beta);
    if (dw == 1.0) break;
    beta -= (w - beta) / (dw - 1.0);
  }
  return beta;
}

enum class Side { Left, Right, Near };

inline std::string_view to_string(Side s) {
  switch (s) {
    case Side::Left: return "L";
    case Side::Right: return "R";
    case Side::Near: return "0";
  }
  return "";
}

/// R_0 ∪ {pivot} ∪ R_{1/2}, closed far outside by an arc, as one polygon.
struct Separatrix {
  RayTrace ray0;
  RayTrace ray_half;
  cplx pivot{};
  double eps_sep = 0.0;    ///< default Near band: twice the largest of the last 8 gaps
  double outer_radius = 0.0;
  std::vector<cplx> curve;    ///< open polyline: ray0 inward, pivot, ray_half outward
  std::vector<cplx> polygon;  ///< curve closed by the outer arc
  bool right_parity = true;   ///< crossing parity of +s sqrt(d)
};

namespace detail {

inline bool crossing_parity(const std::vector<cplx>& poly, cplx z) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const cplx a = poly[i], b = poly[j];
    if ((a.imag() > z.imag()) != (b.imag() > z.imag())) {
      const double x = a.real() + (z.imag() - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
      if (z.real() < x) inside = !inside;
    }
  }
  return inside;
}

inline double segment_distance(cplx z, cplx a, cplx b) {
  const cplx ab = b - a;
  const double len2 = norm2(ab);
  double t = len2 > 0 ? ((z - a) * std::conj(ab)).real() / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(z - (a + t * ab));
}

inline double polyline_distance(const std::vector<cplx>& line, cplx z) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) best = std::min(best, segment_distance(z, line[i], line[i + 1]));
  return best;
}

inline double tail_gap(const std::vector<cplx>& pts, int count) {
  double gap = 0.0;
  const int n = static_cast<int>(pts.size());
  for (int i = std::max(1, n - count); i < n; ++i) gap = std::max(gap, std::abs(pts[i] - pts[i - 1]));
  return gap;
}

}  // namespace detail

/// Assembles the separatrix from two landed traces; right_point fixes which side is Right.
inline Separatrix make_separatrix(RayTrace ray0, RayTrace ray_half, cplx right_point) {
  if (ray0.status != RayStatus::Landed || ray_half.status != RayStatus::Landed)
    throw Error(ErrorKind::SeparatrixIncomplete, "both rays must land");
  Separatrix sep;
  sep.pivot = *ray0.landing;
  sep.eps_sep = 2.0 * std::max(detail::tail_gap(ray0.points, 8), detail::tail_gap(ray_half.points, 8));
  sep.curve.assign(ray0.path.begin(), ray0.path.end());
  sep.curve.push_back(sep.pivot);
  sep.curve.insert(sep.curve.end(), ray_half.path.rbegin(), ray_half.path.rend());
  for (cplx p : sep.curve) sep.outer_radius = std::max(sep.outer_radius, std::abs(p));
  // Close with radial spokes and a counterclockwise arc at 4x the largest radius.
  const double big = 4.0 * sep.outer_radius;
  const double t_end = std::arg(sep.curve.back()), t_start = std::arg(sep.curve.front());
  sep.polygon = sep.curve;
  double t1 = t_start;
  while (t1 <= t_end) t1 += kTwoPi;
  const int arc = 256;
  for (int k = 0; k <= arc; ++k) sep.polygon.push_back(std::polar(big, t_end + (t1 - t_end) * k / arc));
  sep.right_parity = detail::crossing_parity(sep.polygon, right_point);
  sep.ray0 = std::move(ray0);
  sep.ray_half = std::move(ray_half);
  return sep;
}

template <MonicMap M>
Separatrix make_separatrix(const M& map, const RayParams& params = {}, const Deadline& deadline = {}) {
  return make_separatrix(trace_ray(map, Angle(0, 1), params, deadline), trace_ray(map, Angle(1, 2), params, deadline),
                         map.critical_points()[0]);
}

/// Side of z relative to the separatrix; eps_sep <= 0 selects the separatrix default.
inline Side side_classify(cplx z, const Separatrix& sep, double eps_sep = 0.0) {
  if (sep.polygon.empty()) throw Error(ErrorKind::SeparatrixIncomplete, "separatrix not built");
  if (eps_sep <= 0.0) eps_sep = sep.eps_sep;
  if (detail::polyline_distance(sep.curve, z) < eps_sep) return Side::Near;
  return detail::crossing_parity(sep.polygon, z) == sep.right_parity ? Side::Right : Side::Left;
}

}  // namespace cbo
