#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cuspdiv/mesh.hpp"
#include "cuspdiv/quadrature.hpp"
#include "cuspdiv/weights.hpp"

using namespace cuspdiv;
using namespace cuspdiv::weights;

TEST(Quadrature, GaussRuleIntegratesPolynomials) {
  GaussRule r = gauss_legendre(5);
  double s0 = 0, s8 = 0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    s0 += r.weights[i];
    s8 += r.weights[i] * std::pow(r.nodes[i], 8);
  }
  EXPECT_NEAR(s0, 2.0, 1e-14);
  EXPECT_NEAR(s8, 2.0 / 9.0, 1e-14);
}

TEST(Quadrature, TriangleRuleIsDegreeFour) {
  // Integral of x^a y^b over the reference triangle is a! b! / (a+b+2)!.
  const TriangleRule& r = dunavant_degree4();
  auto integrate = [&](int a, int b) {
    double s = 0;
    for (int q = 0; q < 6; ++q) s += 0.5 * r.weights[q] * std::pow(r.bary[q][1], a) * std::pow(r.bary[q][2], b);
    return s;
  };
  EXPECT_NEAR(integrate(0, 0), 0.5, 1e-14);
  EXPECT_NEAR(integrate(4, 0), 24.0 / 720.0, 1e-12);
  EXPECT_NEAR(integrate(2, 2), 4.0 / 720.0, 1e-12);
  EXPECT_NEAR(integrate(3, 1), 6.0 / 720.0, 1e-12);
}

TEST(Quadrature, GridsRecoverArea) {
  for (double alpha : {0.5, 0.75, 1.0}) {
    CuspDomain d(alpha);
    EXPECT_NEAR(cusp_grid(d).total_weight() / d.area(), 1.0, 1e-10);
    EXPECT_NEAR(whitney_grid(d, 10).total_weight() / d.area(), 1.0, 1e-3) << alpha;
  }
  CuspDomain d(0.75);
  TriangulatedMesh m = generate_graded_mesh(d, 0.125, 4.0 / 3.0);
  EXPECT_NEAR(mesh_grid(m).total_weight(), m.area(), 1e-12);
}

TEST(WeightedNorm, AreaAndInverseX) {
  CuspDomain d(0.5);
  NormEstimate one = weighted_lp_norm([](Point) { return 1.0; }, d, 0.0, 2.0);
  EXPECT_NEAR(one.value, std::sqrt(2.0 / 3.0), 1e-8);
  EXPECT_LT(one.rel_error, 1e-6);
  NormEstimate inv = weighted_lp_norm([](Point z) { return 1.0 / z.x; }, d, 0.0, 2.0);
  EXPECT_NEAR(inv.value, std::sqrt(2.0), 1e-8);
}

TEST(WeightedNorm, SurrogatePowerOfDistance) {
  // 2 * int x^{g gamma p} x^g dx * int t^{gamma p} dt.
  for (double gamma : {-0.3, 0.0, 0.7}) {
    CuspDomain d(0.75);
    double p = 2.0, g = d.curve_exponent(), e = gamma * p;
    double exact = 2.0 / ((1.0 + e) * (g * e + g + 1.0));
    NormEstimate n = weighted_lp_norm([](Point) { return 1.0; }, d, gamma, p, {}, DistanceMode::surrogate);
    EXPECT_NEAR(std::pow(n.value, p) / exact, 1.0, 5e-3);
  }
}

TEST(WeightedNorm, RejectsNonFiniteValues) {
  CuspDomain d(0.5);
  EXPECT_THROW(weighted_lp_norm([](Point) { return NAN; }, d, 0.0, 2.0), NumericalError);
}

TEST(FsFamily, Exponents) {
  CuspDomain d(0.5);
  Point z{0.3, 0.01};
  EXPECT_NEAR(fs_family(d, 0.0, 2.0, 1.0)(z), 1.0 / 0.3, 1e-12);
  EXPECT_NEAR(fs_family(d, 0.0, 2.0, 0.8)(z), std::pow(0.3, -0.8), 1e-12);
  EXPECT_NEAR(fs_family(d, 0.0, 3.0, 1.0)(z), std::pow(0.3, -0.5), 1e-12);
  EXPECT_THROW(fs_family(d, 0.0, 2.0, 1.5), DomainError);
  EXPECT_THROW(fs_family(d, 0.6, 2.0, 0.0), DomainError);
}

TEST(ClosedForms, SpecExamples) {
  ClosedForm a = fs_norm_closed_form(0.5, 0.0, 2.0, 1.0);
  EXPECT_DOUBLE_EQ(a.threshold, 1.5);
  EXPECT_DOUBLE_EQ(a.value, 2.0);
  ClosedForm b = fs_norm_closed_form(1.0, 0.0, 2.0, 0.0);
  EXPECT_DOUBLE_EQ(b.threshold, 1.0);
  EXPECT_DOUBLE_EQ(b.value, 1.0);
  ClosedForm c = ys_norm_closed_form(0.5, 2.0, 2.0);
  EXPECT_DOUBLE_EQ(c.threshold, 2.5);
  EXPECT_NEAR(c.value, 2.0 / 3.0, 1e-15);
  ClosedForm e = ys_norm_closed_form(1.0, 2.0, 0.0);
  EXPECT_DOUBLE_EQ(e.threshold, 1.0);
  EXPECT_NEAR(e.value, 1.0 / 3.0, 1e-15);
  EXPECT_THROW(fs_norm_closed_form(0.5, 0.0, 2.0, 1.5), DomainError);
  EXPECT_THROW(ys_norm_closed_form(0.5, 2.0, 2.5), DomainError);
}

TEST(ClosedForms, ProductWithDistanceToThresholdIsConstant) {
  for (double s : {0.0, 0.5, 1.0, 1.4}) {
    ClosedForm f = fs_norm_closed_form(0.5, 0.0, 2.0, s);
    EXPECT_NEAR(f.value * (f.threshold - s), 2.0 / 2.0, 1e-12);
    ClosedForm y = ys_norm_closed_form(0.5, 2.0, s);
    EXPECT_NEAR(y.value * (y.threshold - s), (2.0 / 3.0) / 2.0, 1e-12);
  }
}

TEST(ClosedForms, AgreeWithQuadrature) {
  for (double alpha : {0.5, 0.75, 1.0}) {
    CuspDomain d(alpha);
    QuadratureGrid grid = cusp_grid(d);
    for (double beta : {0.0, alpha - 1.0 + 0.1, 0.5 * (alpha - 1.0)})
      for (double p : {2.0, 3.0}) {
        double A = fs_threshold(alpha, beta, p);
        for (double gap : {1.0, 0.5, 0.25, 0.125}) {
          double cf = fs_norm_closed_form(alpha, beta, p, A - gap).value;
          double q = weighted_lp_integral(fs_family(d, beta, p, A - gap), d, beta, p, grid, DistanceMode::surrogate);
          EXPECT_NEAR(q / cf, 1.0, 5e-3) << alpha << ' ' << beta << ' ' << p << ' ' << gap;
        }
      }
    for (double p : {2.0, 3.0}) {
      double B = ys_threshold(alpha, p), q = conjugate(p);
      for (double gap : {1.0, 0.25}) {
        double cf = ys_norm_closed_form(alpha, p, B - gap).value;
        double num = weighted_lp_integral(ys_field(B - gap), d, 0.0, q, grid);
        EXPECT_NEAR(num / cf, 1.0, 5e-3);
      }
    }
  }
}

TEST(ClosedForms, DivergentFamilyIsReportedInfinite) {
  CuspDomain d(0.5);
  QuadratureGrid grid = cusp_grid(d);
  // s = A: x-band integrals stop decaying.
  double v = weighted_lp_integral([](Point z) { return 1.0 / std::pow(z.x, 1.5); }, d, 0.0, 2.0, grid);
  EXPECT_TRUE(std::isinf(v));
}

TEST(Ap, ConstantWeightGivesOne) {
  CuspDomain d(0.5);
  BallGrid g = make_ball_grid(d, {{0.0, 0.0}, 0.2});
  EXPECT_NEAR(ap_ratio(g, {0.0}, 2.0, d), 1.0, 1e-12);
  EXPECT_NEAR(ap_ratio(g, {0.0}, 3.0, d), 1.0, 1e-12);
}

TEST(Ap, JensenLowerBound) {
  CuspDomain d(0.75);
  for (double mu : {-0.7, 0.3, 0.9})
    for (double r : {0.05, 0.3}) {
      BallGrid g = make_ball_grid(d, {d.upper_point(0.4), r});
      EXPECT_GE(ap_ratio(g, {mu}, 2.0, d), 1.0);
    }
}

TEST(Ap, InteriorBallBound) {
  CuspDomain d(0.5);
  for (Point c : {Point{0.6, 0.0}, Point{0.3, 0.02}, Point{0.8, -0.3}}) {
    double rb = 0.5 * d.distance(c);
    BallGrid g = make_ball_grid(d, {c, rb});
    for (double mu : {-0.5, 0.5, 2.0})
      for (double p : {2.0, 3.0}) {
        double bound = std::pow(3.0, std::abs(mu) * p / (p - 1.0) + std::abs(mu));
        EXPECT_LE(ap_ratio(g, {mu}, p, d), bound);
      }
  }
}

TEST(Ap, MatchesMonteCarlo) {
  CuspDomain d(0.5);
  Ball ball{d.upper_point(0.5), 0.2};
  BallGrid g = make_ball_grid(d, ball);
  double quad = ap_ratio(g, {0.5}, 2.0, d);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double s1 = 0, s2 = 0;
  std::size_t n = 0;
  while (n < 1000000) {
    Point off{u(rng), u(rng)};
    if (norm(off) >= 1.0) continue;
    double dist = d.distance(ball.center + ball.radius * off);
    s1 += std::sqrt(dist);
    s2 += 1.0 / std::sqrt(dist);
    ++n;
  }
  double mc = (s1 / n) * (s2 / n);
  EXPECT_NEAR(quad / mc, 1.0, 0.02);
}

TEST(Ap, QuadratureGridOverload) {
  CuspDomain d(0.5);
  QuadratureGrid grid = whitney_grid(d, 9, 4, WhitneyRegion::whole_box);
  Ball ball{{0.5, 0.0}, 0.1};
  double a = ap_ratio(ball, {0.5}, 2.0, grid, d);
  double b = ap_ratio(make_ball_grid(d, ball), {0.5}, 2.0, d);
  EXPECT_NEAR(a / b, 1.0, 0.02);
  EXPECT_THROW(ap_ratio({{5.0, 5.0}, 0.1}, {0.5}, 2.0, grid, d), DomainError);
}

TEST(Ap, EstimateIsMaxOfBalls) {
  CuspDomain d(0.5);
  ApSampling s = default_ap_sampling(d);
  EXPECT_EQ(s.boundary_centers.size(), 32u);
  EXPECT_EQ(s.interior_centers.size(), 32u);
  EXPECT_EQ(s.radii.size(), 9u);
  s.boundary_centers.resize(3);
  s.interior_centers.resize(2);
  s.radii = {0.25, 0.0625};
  s.resolution.near_depth = 5;
  ApEstimate e = estimate_ap_constant(d, {0.5}, 2.0, s);
  ASSERT_EQ(e.per_ball.size(), 3u * 2u + 2u * 3u);
  double m = 0;
  for (const auto& r : e.per_ball) m = std::max(m, r.ratio);
  EXPECT_EQ(e.value, m);
  ApEstimate flat = estimate_ap_constant(d, {0.0}, 2.0, s);
  EXPECT_NEAR(flat.value, 1.0, 1e-6);
  EXPECT_NEAR(flat.trend, 1.0, 1e-9);
}

TEST(Ap, DecadeGrowthOfPowerLaw) {
  std::vector<BallRecord> recs;
  for (double r : {0.1, 0.01, 0.001}) recs.push_back({{0, 0}, r, std::pow(r, -0.3), true});
  EXPECT_NEAR(decade_growth(recs), std::pow(10.0, 0.3), 1e-12);
}
