#include <gtest/gtest.h>

#include <random>

#include "cbo/loci.hpp"
#include "cbo/rays.hpp"

using namespace cbo;

namespace {

double level_potential(const RayParams& p, std::size_t k) { return p.eta * std::pow(p.step_ratio, static_cast<double>(k)); }

}  // namespace

// z^2 has phi = id, so ray points are exactly exp(g + 2 pi i theta).
TEST(Rays, SquaringMapClosedForm) {
  const Unicritical sq{1, 0.0};
  const RayParams params;
  for (const Angle& th : {Angle(0, 1), Angle(1, 3), Angle(1, 5), Angle(3, 7)}) {
    const RayTrace tr = trace_ray(sq, th, params);
    ASSERT_EQ(tr.status, RayStatus::Landed) << th.str();
    for (std::size_t k = 0; k < tr.points.size(); ++k) {
      const cplx want = std::exp(cplx{level_potential(params, k), kTwoPi * th.turns()});
      EXPECT_LT(std::abs(tr.points[k] - want), 1e-9 * std::abs(want)) << th.str() << " level " << k;
    }
    EXPECT_NEAR(std::abs(*tr.landing), 1.0, 1e-9);
    EXPECT_NEAR(std::arg(*tr.landing / std::exp(cplx{0, kTwoPi * th.turns()})), 0.0, 1e-6);
  }
}

// z^2 - 2 is conjugate to w -> w^2 by z = w + 1/w outside the unit disk.
TEST(Rays, ChebyshevClosedForm) {
  const Unicritical cheb{1, -2.0};
  const RayParams params;
  struct Case {
    Angle theta;
    double landing;
  };
  for (const auto& [th, land] : {Case{Angle(0, 1), 2.0}, Case{Angle(1, 2), -2.0}, Case{Angle(1, 3), -1.0}}) {
    const RayTrace tr = trace_ray(cheb, th, params);
    for (std::size_t k = 0; k < std::min<std::size_t>(tr.points.size(), 20); ++k) {
      const cplx w = std::exp(cplx{level_potential(params, k), kTwoPi * th.turns()});
      EXPECT_LT(std::abs(tr.points[k] - (w + 1.0 / w)), 1e-8 * std::abs(w)) << th.str() << " level " << k;
    }
    ASSERT_EQ(tr.status, RayStatus::Landed) << th.str();
    EXPECT_NEAR(std::abs(*tr.landing - land), 0.0, 1e-6) << th.str();
  }
}

// Ray 1/4 of z^2 - 2 ends at the critical point: points approach 0 only linearly in the potential,
// so the trace stops unlanded instead of reporting a landing it cannot certify.
TEST(Rays, RayIntoCriticalPointDoesNotClaimLanding) {
  const RayParams params;
  const RayTrace tr = trace_ray(Unicritical{1, -2.0}, Angle(1, 4), params);
  EXPECT_NE(tr.status, RayStatus::Landed);
  EXPECT_FALSE(tr.landing.has_value());
  ASSERT_GT(tr.points.size(), 10u);
  for (std::size_t k = 0; k < tr.points.size(); ++k) {
    const double g = level_potential(params, k);
    EXPECT_LT(std::abs(tr.points[k] - cplx(0, 2 * std::sinh(g))), 1e-6 * std::sinh(g)) << k;
  }
}

TEST(Rays, PotentialOfRecordedPoints) {
  const RayParams params;
  for (auto [d, a] : {std::pair{1, cplx(1.5)}, std::pair{2, cplx(15.0 / 8.0)}, std::pair{1, cplx(2.2, 0.7)}}) {
    const MonicOdd m(d, a, candidate_branches(a, d).front());
    const double R = escape_radius(m);
    const RayTrace tr = trace_ray(m, Angle(1, 7), params);
    ASSERT_GT(tr.points.size(), 10u);
    for (std::size_t k = 0; k < std::min<std::size_t>(tr.points.size(), 25); ++k)
      EXPECT_NEAR(green(m, tr.points[k], 5000, R).g / level_potential(params, k), 1.0, 1e-7) << "level " << k;
  }
}

TEST(Rays, HalfTurnSymmetry) {
  const RayParams params;
  for (auto [d, a] : {std::pair{1, cplx(1.5)}, std::pair{2, cplx(15.0 / 8.0)}, std::pair{2, cplx(2.0, -1.0)}}) {
    const MonicOdd m(d, a, candidate_branches(a, d).front());
    for (const Angle& th : {Angle(0, 1), Angle(1, 5), Angle(2, 9)}) {
      const RayTrace t = trace_ray(m, th, params);
      const RayTrace u = trace_ray(m, rotate_label(th, 1, 1), params);
      ASSERT_EQ(t.points.size(), u.points.size());
      for (std::size_t k = 0; k < t.points.size(); ++k)
        EXPECT_LE(std::abs(u.points[k] + t.points[k]), 1e-9 * std::abs(t.points[k]));
    }
  }
}

// P_{w s}(z) = w P_s(z / w) for w = e^{i pi / d}, so R_theta(w s) = w R_{theta - 1/(2d)}(s).
TEST(Rays, RelabelingBetweenRepresentatives) {
  const int d = 2;
  const cplx a{1.875, 0.3};
  const cplx s = monic_roots(d, a)[0];
  const cplx w = std::polar(1.0, std::numbers::pi / d);
  const MonicOdd m(d, a, s), mw(d, a, w * s);
  const Angle th(3, 11);
  const RayTrace t = trace_ray(mw, th, {});
  const RayTrace u = trace_ray(m, rotate_label(th, -1, d), {});
  ASSERT_GT(std::min(t.points.size(), u.points.size()), 10u);
  for (std::size_t k = 0; k < std::min(t.points.size(), u.points.size()); ++k)
    EXPECT_LE(std::abs(t.points[k] - w * u.points[k]), 1e-8 * std::abs(t.points[k]));
}

TEST(Rays, LandingAtZeroForAcceptedParameter) {
  const cplx a = 1.5;
  const auto s = select_branch(a, 1);
  ASSERT_TRUE(s.has_value());
  EXPECT_NEAR(std::abs(*s - cplx(0, std::sqrt(0.5))), 0.0, 1e-12);
  const MonicOdd m(1, a, *s);
  for (const Angle& th : {Angle(0, 1), Angle(1, 2)}) {
    const RayTrace tr = trace_ray(m, th, {});
    ASSERT_EQ(tr.status, RayStatus::Landed);
    EXPECT_LT(std::abs(*tr.landing), 1e-9);
  }
}

TEST(Rays, RayPointAgreesWithTrace) {
  const MonicOdd m(1, 1.5, candidate_branches(1.5, 1).front());
  const RayParams params;
  const RayTrace tr = trace_ray(m, Angle(1, 5), params);
  for (std::size_t k : {0u, 3u, 9u}) {
    const auto z = ray_point(m, 0.2, level_potential(params, k), params);
    ASSERT_TRUE(z.has_value());
    EXPECT_LT(std::abs(*z - tr.points[k]), 1e-8 * std::abs(tr.points[k]));
  }
}

TEST(Rays, LocateBeta) {
  for (cplx c : {cplx(0.0), cplx(-1.0), cplx(-0.122561166876654, 0.744861766619744), cplx(0.25, 0.1)}) {
    const cplx want = (1.0 + std::sqrt(1.0 - 4.0 * c)) / 2.0;
    EXPECT_LT(std::abs(locate_beta(Unicritical{1, c}) - want), 1e-9) << c;
  }
}

TEST(Rays, ParamsAndDeadline) {
  RayParams bad;
  bad.step_ratio = 1.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = {};
  bad.eta = -1;
  EXPECT_THROW(trace_ray(Unicritical{1, 0.0}, Angle(0, 1), bad), Error);
  const Deadline past = std::chrono::steady_clock::now() - std::chrono::seconds(1);
  try {
    trace_ray(Unicritical{1, -1.0}, Angle(1, 3), {}, past);
    FAIL() << "deadline ignored";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TimeBudgetExceeded);
  }
}

TEST(Rays, BudgetExhaustedStatus) {
  RayParams few;
  few.max_levels = 3;
  const RayTrace tr = trace_ray(Unicritical{1, -1.0}, Angle(1, 3), few);
  EXPECT_EQ(tr.status, RayStatus::BudgetExhausted);
  EXPECT_FALSE(tr.landing.has_value());
  EXPECT_EQ(tr.points.size(), 4u);
  EXPECT_EQ(to_string(tr.status), "budget");
}

TEST(Separatrix, SidesForAcceptedParameter) {
  for (auto [d, a] : {std::pair{1, cplx(1.5)}, std::pair{2, cplx(15.0 / 8.0)}}) {
    const MonicOdd m(d, a, *select_branch(a, d));
    const Separatrix sep = make_separatrix(m);
    const auto crit = m.critical_points();
    EXPECT_EQ(side_classify(crit[0], sep), Side::Right);
    EXPECT_EQ(side_classify(crit[1], sep), Side::Left);
    EXPECT_EQ(side_classify(0.0, sep), Side::Near);
    EXPECT_EQ(side_classify(sep.ray0.points[5], sep), Side::Near);
    EXPECT_GT(sep.eps_sep, 0.0);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.5, 2.5);
    int checked = 0;
    for (int k = 0; k < 500; ++k) {
      const cplx z{u(rng), u(rng)};
      const Side s1 = side_classify(z, sep), s2 = side_classify(-z, sep);
      if (s1 == Side::Near || s2 == Side::Near) continue;
      ++checked;
      EXPECT_NE(s1, s2) << z;
    }
    EXPECT_GT(checked, 400);
  }
}

TEST(Separatrix, NeedsLandedRays) {
  RayParams few;
  few.max_levels = 2;
  const MonicOdd m(1, 1.5, *select_branch(1.5, 1));
  EXPECT_THROW(make_separatrix(m, few), Error);
}
