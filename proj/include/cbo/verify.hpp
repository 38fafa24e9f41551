#pragma once

#include <chrono>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cbo/angle.hpp"
#include "cbo/dynamics.hpp"
#include "cbo/family.hpp"
#include "cbo/loci.hpp"
#include "cbo/pcf.hpp"
#include "cbo/rays.hpp"
#include "cbo/render.hpp"

namespace cbo {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

using CheckOutcome = std::pair<bool, std::string>;

struct NamedCheck {
  std::string name;
  std::function<CheckOutcome()> run;
};

inline CheckResult run_check(const NamedCheck& c) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r{c.name, false, "", 0.0};
  try {
    std::tie(r.pass, r.detail) = c.run();
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

namespace detail {

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

inline std::vector<cplx> random_disk(std::mt19937_64& rng, int n, double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<cplx> out;
  while (static_cast<int>(out.size()) < n) {
    const cplx z{u(rng), u(rng)};
    if (std::abs(z) <= radius) out.push_back(z);
  }
  return out;
}

}  // namespace detail

/// The library's invariant suite: the properties every module promises, at reduced sample counts.
inline std::vector<NamedCheck> invariant_checks() {
  using detail::fmt;
  std::vector<NamedCheck> checks;

  checks.push_back({"family.leading_coefficient_exact", []() -> CheckOutcome {
    for (int d = 1; d <= 6; ++d)
      for (const Rational& a : {Rational(1), Rational(-5, 7), Rational(22, 3)})
        if (a * odd_series(d).exact[d] != leading_coeff_exact(d, a)) return CheckOutcome{false, "d=" + std::to_string(d)};
    return CheckOutcome{true, std::string()};
  }});

  checks.push_back({"family.oddness", []() -> CheckOutcome {
    std::mt19937_64 rng(1);
    double worst = 0;
    for (int d = 1; d <= 6; ++d) {
      const BicriticalOdd p(d, cplx(1.7, -0.6));
      for (cplx z : detail::random_disk(rng, 50, 3.0)) worst = std::max(worst, rel_err(p(-z), -p(z)));
    }
    return CheckOutcome{worst <= 1e-12, "max rel " + fmt(worst)};
  }});

  checks.push_back({"family.quotient_even_in_a", []() -> CheckOutcome {
    double worst = 0;
    for (int d = 1; d <= 6; ++d) {
      const auto q1 = quotient_poly(d, cplx(0.8, 1.1)), q2 = quotient_poly(d, cplx(-0.8, -1.1));
      for (std::size_t k = 0; k < q1.coeffs.size(); ++k) worst = std::max(worst, std::abs(q1.coeffs[k] - q2.coeffs[k]));
    }
    return CheckOutcome{worst <= 1e-12, "max diff " + fmt(worst)};
  }});

  checks.push_back({"family.monic_root_ratios", []() -> CheckOutcome {
    double worst = 0;
    for (int d = 1; d <= 6; ++d) {
      const auto r = monic_roots(d, cplx(2.0, 0.5));
      for (std::size_t k = 0; k + 1 < r.size(); ++k)
        worst = std::max(worst, std::abs(r[k + 1] / r[k] - std::polar(1.0, std::numbers::pi / d)));
    }
    return CheckOutcome{worst <= 1e-12, "max " + fmt(worst)};
  }});

  checks.push_back({"family.critical_points", []() -> CheckOutcome {
    double worst = 0;
    for (int d = 1; d <= 6; ++d) {
      const cplx a{2.5, -1.0};
      const BicriticalOdd p(d, a);
      worst = std::max(worst, std::abs(p.eval_with_derivative(0.0).second - a));
      for (cplx c : p.critical_points()) worst = std::max(worst, std::abs(p.eval_with_derivative(c).second));
    }
    return CheckOutcome{worst <= 1e-12, "max " + fmt(worst)};
  }});

  checks.push_back({"dynamics.escape_certificate", []() -> CheckOutcome {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ang(0, kTwoPi);
    for (int d = 1; d <= 5; ++d) {
      const BicriticalOdd p(d, cplx(3.0, 1.0));
      const double R = escape_radius(p);
      for (int k = 0; k < 2000; ++k) {
        const cplx z = std::polar(R, ang(rng));
        if (std::abs(p(z)) < 2 * R * (1 - 1e-12)) return CheckOutcome{false, "d=" + std::to_string(d)};
      }
    }
    return CheckOutcome{true, std::string()};
  }});

  checks.push_back({"dynamics.green_functional_equation", []() -> CheckOutcome {
    std::mt19937_64 rng(3);
    double worst = 0;
    for (int d = 1; d <= 3; ++d) {
      const cplx a{2.0, 0.4};
      const MonicOdd m(d, a, monic_roots(d, a)[0]);
      const double R = escape_radius(m);
      for (cplx z : detail::random_disk(rng, 60, 3.0)) {
        const double g = green(m, z, 500, R).g;
        if (g == 0.0) continue;
        worst = std::max(worst, std::abs(green(m, m(z), 500, R).g / ((2 * d + 1) * g) - 1.0));
      }
    }
    return CheckOutcome{worst <= 1e-9, "max rel " + fmt(worst)};
  }});

  checks.push_back({"dynamics.bottcher_equation_and_oddness", []() -> CheckOutcome {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ang(0, kTwoPi), rad(1.0, 10.0);
    double fe = 0, odd = 0;
    for (int d = 1; d <= 2; ++d) {
      const MonicOdd m(d, 1.5, monic_roots(d, 1.5)[0]);
      const double rs = bottcher_safe_radius(m);
      for (int k = 0; k < 30; ++k) {
        const cplx z = std::polar(rs * rad(rng), ang(rng));
        const cplx phi = bottcher(m, z, rs);
        fe = std::max(fe, rel_err(bottcher(m, m(z), rs), ipow(phi, 2 * d + 1)));
        odd = std::max(odd, std::abs(bottcher(m, -z, rs) + phi) / std::abs(phi));
      }
    }
    return CheckOutcome{fe <= 1e-6 && odd <= 1e-9, "functional " + fmt(fe) + ", odd " + fmt(odd)};
  }});

  checks.push_back({"dynamics.connectedness_symmetry", []() -> CheckOutcome {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.5, 3.5);
    for (int i = 0; i < 200; ++i) {
      const cplx a{u(rng), u(rng)};
      const int d = 1 + i % 3;
      const bool in = in_connectedness_locus(BicriticalOdd(d, a));
      if (in != in_connectedness_locus(BicriticalOdd(d, -a)) || in != in_connectedness_locus(BicriticalOdd(d, std::conj(a))))
        return CheckOutcome{false, "a=(" + fmt(a.real()) + "," + fmt(a.imag()) + ")"};
    }
    return CheckOutcome{true, std::string()};
  }});

  checks.push_back({"rays.angle_map_denominators", []() -> CheckOutcome {
    for (int den = 1; den <= 80; ++den)
      for (int D : {2, 3, 5, 7})
        for (int n = 0; n < den; ++n)
          if (den % angle_map(Angle(n, den), D).den() != 0) return CheckOutcome{false, std::to_string(n) + "/" + std::to_string(den)};
    return CheckOutcome{true, std::string()};
  }});

  checks.push_back({"rays.cut_angles_half_turn", []() -> CheckOutcome {
    for (int d = 1; d <= 3; ++d)
      for (int k = 1; k <= 3; ++k) {
        auto [z, h] = cut_point_angles(d, k);
        std::vector<Angle> all(z);
        all.insert(all.end(), h.begin(), h.end());
        for (const auto& a : all)
          if (std::find(all.begin(), all.end(), rotate_label(a, 1, 1)) == all.end()) return CheckOutcome{false, a.str()};
      }
    return CheckOutcome{true, std::string()};
  }});

  checks.push_back({"rays.potential_and_oddness", []() -> CheckOutcome {
    double pot = 0, odd = 0;
    const RayParams params;
    for (auto [d, a] : {std::pair{1, cplx(1.5)}, std::pair{2, cplx(15.0 / 8.0)}}) {
      const MonicOdd m(d, a, candidate_branches(a, d).back());
      const double R = escape_radius(m);
      for (const Angle& th : {Angle(0, 1), Angle(1, 10), Angle(1, 7)}) {
        const RayTrace t = trace_ray(m, th, params);
        const RayTrace u = trace_ray(m, Angle(th.num() * 2 + th.den(), th.den() * 2), params);
        for (std::size_t k = 0; k < std::min<std::size_t>(t.points.size(), 30); ++k) {
          const double want = params.eta * std::pow(params.step_ratio, static_cast<double>(k));
          pot = std::max(pot, std::abs(green(m, t.points[k], 4000, R).g / want - 1.0));
        }
        for (std::size_t k = 0; k < std::min(t.points.size(), u.points.size()); ++k)
          odd = std::max(odd, std::abs(u.points[k] + t.points[k]) / std::max(std::abs(t.points[k]), 1e-300));
      }
    }
    return CheckOutcome{pot <= 1e-6 && odd <= 1e-6, "potential " + fmt(pot) + ", oddness " + fmt(odd)};
  }});

  checks.push_back({"rays.side_antisymmetry", []() -> CheckOutcome {
    const MonicOdd m(1, 1.5, candidate_branches(1.5, 1)[0]);
    const Separatrix sep = make_separatrix(m);
    std::mt19937_64 rng(6);
    int tested = 0;
    for (cplx z : detail::random_disk(rng, 300, 2.0)) {
      const Side a = side_classify(z, sep), b = side_classify(-z, sep);
      if (a == Side::Near || b == Side::Near) continue;
      ++tested;
      if (a == b) return CheckOutcome{false, "z=(" + fmt(z.real()) + "," + fmt(z.imag()) + ")"};
    }
    return CheckOutcome{tested > 200, std::to_string(tested) + " points"};
  }});

  checks.push_back({"loci.membership_invariants", []() -> CheckOutcome {
    const std::vector<std::pair<int, cplx>> cases{{1, 1.5}, {1, cplx(1.776, 0.48)}, {1, 3.0}, {2, 1.875}, {1, cplx(2.2, 0.3)}};
    for (auto [d, a] : cases) {
      const PmVerdict v = membership_pm(a, d), vc = membership_pm(std::conj(a), d);
      if (v.outcome != vc.outcome) return CheckOutcome{false, "conjugation changes the outcome"};
      if (v.outcome == Outcome::Accept) {
        if (!in_connectedness_locus(BicriticalOdd(d, a))) return CheckOutcome{false, "accept outside CBO_d"};
        MembershipParams longer;
        longer.orbit_len = 2 * v.orbit_len;
        if (membership_pm(a, d, longer).reason == Reason::SideViolation) return CheckOutcome{false, "longer orbit flips"};
      }
    }
    return CheckOutcome{true, std::string()};
  }});

  checks.push_back({"pcf.centers_and_conjugation", []() -> CheckOutcome {
    double worst = 0;
    const auto rabbit = solve_center_unicritical(2, 3, cplx(-0.1, 0.7));
    const auto corabbit = solve_center_unicritical(2, 3, cplx(-0.1, -0.7));
    worst = std::max(worst, std::abs(*corabbit.found - std::conj(*rabbit.found)));
    const auto b = solve_center_bicritical(1, 2, 2.2);
    worst = std::max(worst, std::abs(center_equation_bicritical(1, 2, *b.found).f));
    const auto c = solve_cut_point(1, 2, 2.5);
    worst = std::max(worst, std::abs(cut_point_equation(1, 2, *c.found).f));
    const bool iters = rabbit.newton_iters <= 50 && b.newton_iters <= 50 && c.newton_iters <= 50;
    return CheckOutcome{worst <= 1e-9 && iters, "max " + fmt(worst)};
  }});

  checks.push_back({"render.determinism_and_symmetry", []() -> CheckOutcome {
    RenderJob job;
    job.plane = CboPlane{2};
    job.viewport = {0.0, 6.0, 160, 160};
    job.max_iter = 300;
    const Image one = render(job, 1).image, many = render(job, 4).image;
    if (!(one == many)) return CheckOutcome{false, "thread count changes bytes"};
    if (!(rotate180(one) == one) || !(flip_rows(one) == one)) return CheckOutcome{false, "symmetry broken"};
    return CheckOutcome{true, image_hash(one)};
  }});

  return checks;
}

}  // namespace cbo
