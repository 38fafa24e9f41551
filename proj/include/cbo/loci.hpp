#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "cbo/dynamics.hpp"
#include "cbo/rays.hpp"

namespace cbo {

inline bool in_multibrot(cplx c, int D, int max_iter = kDefaultMembershipIter) {
  if (D < 2) throw Error(ErrorKind::InvalidArgument, "D must be >= 2");
  return in_connectedness_locus(Unicritical{D - 1, c}, max_iter);
}

/// s lies in MBO_d iff P_s has connected filled Julia set, i.e. a(s) lies in CBO_d.
inline bool in_mbo(cplx s, int d, int max_iter = kDefaultMembershipIter) {
  if (s == cplx{}) return true;
  return in_connectedness_locus(MonicOdd::from_s(d, s), max_iter);
}

enum class Outcome { Accept, Reject, Indeterminate };
enum class Reason { Escaped, ZeroNotRepelling, NoBranchLands, SideViolation, NearSeparatrix, BudgetExhausted };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Accept: return "accept";
    case Outcome::Reject: return "reject";
    case Outcome::Indeterminate: return "indeterminate";
  }
  return "";
}

inline std::string_view to_string(Reason r) {
  switch (r) {
    case Reason::Escaped: return "Escaped";
    case Reason::ZeroNotRepelling: return "ZeroNotRepelling";
    case Reason::NoBranchLands: return "NoBranchLands";
    case Reason::SideViolation: return "SideViolation";
    case Reason::NearSeparatrix: return "NearSeparatrix";
    case Reason::BudgetExhausted: return "BudgetExhausted";
  }
  return "";
}

struct Witness {
  int index = 0;
  cplx point{};
  Side side = Side::Left;  ///< the side the point was found on
};

struct PmVerdict {
  cplx a{};
  int d = 1;
  Outcome outcome = Outcome::Indeterminate;
  std::optional<Reason> reason;
  std::optional<cplx> s;
  std::optional<Witness> witness;
  int orbit_len = 0;
};

struct MembershipParams {
  int orbit_len = 200;
  int max_iter = kDefaultMembershipIter;
  double eps0 = 1e-8;       ///< orbit points this close to 0 are allowed on either side
  double eps_sep = 0.0;     ///< <= 0: separatrix default
  double unit_band = 1e-9;  ///< |a| within this of 1 is Indeterminate
  RayParams rays;
};

/// Branch search result: the winning traces are kept so the separatrix need not be retraced.
struct BranchSearch {
  std::optional<cplx> s;
  bool ambiguous = false;
  bool trace_failed = false;
  std::optional<RayTrace> ray0, ray_half;
};

/// Representatives s and e^{i pi/d} s give the same rays up to relabeling by 1/(2d), and s, -s give
/// the same map, so only the d roots in the right half plane (argument in (-pi/2, pi/2]) are tried.
inline std::vector<cplx> candidate_branches(cplx a, int d) {
  std::vector<cplx> out;
  for (cplx s : monic_roots(d, a)) {
    const double tol = 1e-12 * std::abs(s);
    if (s.real() > tol || (std::abs(s.real()) <= tol && s.imag() > 0)) out.push_back(s);
  }
  return out;
}

inline BranchSearch search_branch(cplx a, int d, const RayParams& params = {}, const Deadline& deadline = {},
                                  double landing_tol = 1e-6) {
  BranchSearch res;
  for (cplx s : candidate_branches(a, d)) {
    const MonicOdd m(d, a, s);
    RayTrace r0 = trace_ray(m, Angle(0, 1), params, deadline);
    RayTrace rh = trace_ray(m, Angle(1, 2), params, deadline);
    const bool l0 = r0.status == RayStatus::Landed, lh = rh.status == RayStatus::Landed;
    if (!l0 || !lh) res.trace_failed = true;
    if (l0 && lh && std::abs(*r0.landing) < landing_tol && std::abs(*rh.landing) < landing_tol) {
      if (res.s) {
        res.ambiguous = true;
        continue;
      }
      res.s = s;
      res.ray0 = std::move(r0);
      res.ray_half = std::move(rh);
    }
  }
  return res;
}

/// The branch s(a) for which rays 0 and 1/2 of P_s land at 0, if exactly one does.
inline std::optional<cplx> select_branch(cplx a, int d, const RayParams& params = {}) {
  const auto res = search_branch(a, d, params);
  if (res.ambiguous) return std::nullopt;
  return res.s;
}

/// Semi-decision for membership in the image of the Multibrot embedding: both critical orbits are
/// bounded, 0 is repelling, and the rays 0, 1/2 landing at 0 keep the orbit of +s sqrt(d) on the
/// Right and that of -s sqrt(d) on the Left (passing through 0 allowed).
inline PmVerdict membership_pm(cplx a, int d, const MembershipParams& params = {}, const Deadline& deadline = {}) {
  if (a == cplx{}) throw Error(ErrorKind::ZeroParameter, "a must be nonzero");
  if (!is_finite(a)) throw Error(ErrorKind::NonFiniteInput, "a is not finite");
  PmVerdict v;
  v.a = a;
  v.d = d;
  v.orbit_len = params.orbit_len;
  auto finish = [&](Outcome o, std::optional<Reason> r) {
    v.outcome = o;
    v.reason = r;
    return v;
  };

  const BicriticalOdd p(d, a);
  if (!iterate(p, p.critical_points()[0], params.max_iter, escape_radius_bicritical(d, std::abs(a))).bounded())
    return finish(Outcome::Reject, Reason::Escaped);
  const double r = std::abs(a);
  if (r < 1.0 - params.unit_band) return finish(Outcome::Reject, Reason::ZeroNotRepelling);
  if (r <= 1.0 + params.unit_band) return finish(Outcome::Indeterminate, Reason::ZeroNotRepelling);

  BranchSearch br = search_branch(a, d, params.rays, deadline);
  if (br.ambiguous) return finish(Outcome::Indeterminate, Reason::NoBranchLands);
  if (!br.s) {
    if (br.trace_failed) return finish(Outcome::Indeterminate, Reason::BudgetExhausted);
    return finish(Outcome::Reject, Reason::NoBranchLands);
  }
  v.s = br.s;
  const MonicOdd m(d, a, *br.s);
  const auto crit = m.critical_points();
  const Separatrix sep = make_separatrix(std::move(*br.ray0), std::move(*br.ray_half), crit[0]);

  // Orbits of the two critical points; by oddness the left one is the negative of the right one,
  // but both are classified independently.
  std::vector<cplx> right{crit[0]}, left{crit[1]};
  bool near = false;
  const Side want[2] = {Side::Right, Side::Left};
  for (int k = 0; k <= params.orbit_len; ++k) {
    if (k > 0) {
      right.push_back(m(right.back()));
      left.push_back(m(left.back()));
    }
    std::vector<cplx>* orbits[2] = {&right, &left};
    for (int o = 0; o < 2; ++o) {
      const cplx z = orbits[o]->back();
      if (std::abs(z) < params.eps0) continue;
      const Side side = side_classify(z, sep, params.eps_sep);
      if (side == Side::Near) {
        near = true;
      } else if (side != want[o]) {
        v.witness = Witness{k, z, side};
        return finish(Outcome::Reject, Reason::SideViolation);
      }
    }
    // Floyd: once z_k repeats z_{k/2} the rest of the orbit has been seen.
    if (k > 0 && k % 2 == 0) {
      const cplx zk = right[k], zh = right[k / 2];
      if (std::abs(zk - zh) <= 1e-13 * std::max(1.0, std::abs(zk))) break;
    }
  }
  if (near) return finish(Outcome::Indeterminate, Reason::NearSeparatrix);
  return finish(Outcome::Accept, std::nullopt);
}

/// Outermost |s| of MBO_d over 64 directions, scanning inward in 1% steps.
inline double mbo_radius(int d, int max_iter = kDefaultMembershipIter) {
  double best = 0.0;
  for (int k = 0; k < 64; ++k) {
    const cplx dir = std::polar(1.0, kTwoPi * k / 64);
    for (double r = 4.0; r > 0.0; r -= 0.01) {
      if (in_mbo(r * dir, d, max_iter)) {
        best = std::max(best, r);
        break;
      }
    }
  }
  return best;
}

/// phi_s(P_s(-s sqrt(d))): Böttcher coordinate of the marked critical value. Far iterates use the
/// product formula; each pullback picks the D-th root whose external-ray point at that potential
/// matches the orbit point.
inline cplx parameter_bottcher(cplx s, int d, const RayParams& params = {}, int max_iter = kDefaultMembershipIter) {
  const MonicOdd m = MonicOdd::from_s(d, s);
  const int D = m.degree();
  const cplx v = m(m.critical_points()[1]);
  const double r_safe = bottcher_safe_radius(m);
  std::vector<cplx> orbit{v};
  while (std::abs(orbit.back()) < r_safe) {
    if (static_cast<int>(orbit.size()) > max_iter) throw Error(ErrorKind::NotEscaping, "critical value stays bounded");
    orbit.push_back(m(orbit.back()));
  }
  cplx w = bottcher(m, orbit.back(), r_safe);
  for (int k = static_cast<int>(orbit.size()) - 2; k >= 0; --k) {
    const cplx lw = std::log(w);
    cplx best{};
    double best_dist = std::numeric_limits<double>::infinity();
    for (int j = 0; j < D; ++j) {
      const cplx cand = std::exp((lw + cplx{0.0, kTwoPi * j}) / static_cast<double>(D));
      const double t = std::arg(cand) / kTwoPi;
      auto z = ray_point(m, t, std::log(std::abs(cand)), params);
      if (!z) continue;
      const double dist = std::abs(*z - orbit[k]);
      if (dist < best_dist) {
        best_dist = dist;
        best = cand;
      }
    }
    if (!std::isfinite(best_dist)) throw Error(ErrorKind::NewtonFailed, "pullback ray point failed");
    w = best;
  }
  return w;
}

/// Winding number of s -> parameter_bottcher(s) around the circle |s| = radius.
inline int parameter_winding(int d, double radius, int samples = 4096, const RayParams& params = {}) {
  double total = 0.0;
  cplx prev = parameter_bottcher(cplx{radius, 0.0}, d, params);
  const cplx first = prev;
  for (int k = 1; k <= samples; ++k) {
    const cplx cur = k == samples ? first : parameter_bottcher(std::polar(radius, kTwoPi * k / samples), d, params);
    total += std::arg(cur / prev);
    prev = cur;
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

}  // namespace cbo
