#include <gtest/gtest.h>

#include <random>

#include "cbo/dynamics.hpp"

using namespace cbo;

TEST(Dynamics, IterateExamples) {
  auto rec = iterate(Unicritical{1, 0.0}, 2.0, 10, 4.0);
  ASSERT_TRUE(rec.escaped_at.has_value());
  EXPECT_EQ(*rec.escaped_at, 1);
  ASSERT_EQ(rec.points.size(), 2u);
  EXPECT_EQ(rec.points[1], cplx(4.0));

  rec = iterate(Unicritical{1, -1.0}, 0.0, 20, 4.0);
  EXPECT_TRUE(rec.bounded());
  EXPECT_EQ(rec.points[1], cplx(-1.0));
  EXPECT_EQ(rec.points[2], cplx(0.0));

  const BicriticalOdd p3(1, 3.0);
  rec = iterate(p3, 1.0, 50, escape_radius(p3));
  EXPECT_TRUE(rec.bounded());
  EXPECT_NEAR(std::abs(rec.points.back() - rec.points[rec.points.size() - 3]), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(rec.points.back()), 2.0, 1e-12);

  EXPECT_THROW(iterate(p3, cplx(NAN, 0), 5, 4.0), Error);
}

TEST(Dynamics, EscapeRadiusCertificate) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ang(0, kTwoPi), ua(-4, 4);
  for (int d = 1; d <= 5; ++d) {
    const BicriticalOdd p(d, cplx(ua(rng), ua(rng)));
    const MonicOdd m(d, p.a(), monic_roots(d, p.a())[0]);
    const Unicritical u{d, cplx(ua(rng) / 2, ua(rng) / 2)};
    const double rp = escape_radius(p), rb = escape_radius_bicritical(d, std::abs(p.a()));
    EXPECT_NEAR(rp, rb, 1e-9 * rb);
    const double rm = escape_radius(m), ru = escape_radius(u);
    for (int k = 0; k < 10000; ++k) {
      const double t = ang(rng);
      for (double scale : {1.0, 1.7}) {
        EXPECT_GE(std::abs(p(std::polar(rp * scale, t))), 2 * rp * scale * (1 - 1e-12));
        EXPECT_GE(std::abs(m(std::polar(rm * scale, t))), 2 * rm * scale * (1 - 1e-12));
        EXPECT_GE(std::abs(u(std::polar(ru * scale, t))), 2 * ru * scale * (1 - 1e-12));
      }
    }
  }
}

TEST(Dynamics, Green) {
  const Unicritical sq{1, 0.0};
  EXPECT_NEAR(green(sq, 4.0, 100, 4.0).g, std::log(4.0), 1e-14);
  EXPECT_EQ(green(Unicritical{1, -1.0}, 0.0, 100, 4.0).g, 0.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ang(0, kTwoPi), rad(1.0, 3.0);
  for (int d = 1; d <= 2; ++d) {
    const cplx a{2.2, 0.5};
    const MonicOdd m(d, a, monic_roots(d, a)[1]);
    const BicriticalOdd p(d, a);
    const double rm = escape_radius(m), rp = escape_radius(p);
    int checked = 0;
    while (checked < 100) {
      const cplx z = std::polar(rad(rng), ang(rng));
      const double g = green(m, z, 500, rm).g;
      if (g == 0.0) continue;
      ++checked;
      EXPECT_LE(std::abs(green(m, m(z), 500, rm).g - (2 * d + 1) * g), 1e-9 * (2 * d + 1) * g);
      // conjugacy invariance: G_p(w) = G_m(w s)... with P_s(z) = s p(z/s)
      EXPECT_LE(std::abs(green(p, z / m.s(), 500, rp).g - g), 1e-9 * g);
    }
  }
}

TEST(Dynamics, Bottcher) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(0, kTwoPi), rad(1.0, 10.0);
  for (int d = 1; d <= 2; ++d) {
    const cplx a{1.5, 0.0};
    const MonicOdd m(d, a, monic_roots(d, a)[d]);
    const double rs = bottcher_safe_radius(m);
    for (int i = 0; i < 50; ++i) {
      const cplx z = std::polar(rs * rad(rng), ang(rng));
      const cplx phi = bottcher(m, z, rs);
      EXPECT_LE(rel_err(bottcher(m, m(z), rs), ipow(phi, 2 * d + 1)), 1e-6);
      EXPECT_LE(std::abs(bottcher(m, -z, rs) + phi), 1e-9 * std::abs(phi));
      // |phi| = exp(G)
      EXPECT_NEAR(std::log(std::abs(phi)), green(m, z, 100, escape_radius(m)).g, 1e-9);
    }
    for (double t : {0.0, 1.0 / 7, 2.0 / 5}) {
      const cplx z = std::polar(1e6, kTwoPi * t);
      EXPECT_LE(std::abs(bottcher(m, z) / z - 1.0), 1e-4);
    }
    EXPECT_THROW(bottcher(m, 0.5 * rs, rs), Error);
  }
  const Unicritical c0{1, 0.0};
  const cplx z{3.0, 1.0};
  EXPECT_LT(std::abs(bottcher(c0, z) - z), 1e-14);
}

TEST(Dynamics, ConnectednessExamples) {
  EXPECT_TRUE(in_connectedness_locus(Unicritical{1, -2.0}));
  EXPECT_FALSE(in_connectedness_locus(Unicritical{1, 1.0}));
  EXPECT_TRUE(in_connectedness_locus(BicriticalOdd(1, 3.0)));
  EXPECT_FALSE(in_connectedness_locus(BicriticalOdd(1, 10.0)));
}

TEST(Dynamics, ConnectednessSymmetry) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3.5, 3.5);
  for (int i = 0; i < 200; ++i) {
    const cplx a{u(rng), u(rng)};
    const int d = 1 + i % 3;
    const bool in = in_connectedness_locus(BicriticalOdd(d, a));
    EXPECT_EQ(in, in_connectedness_locus(BicriticalOdd(d, -a)));
    EXPECT_EQ(in, in_connectedness_locus(BicriticalOdd(d, std::conj(a))));
  }
}
