#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "cuspdiv/geometry.hpp"
#include "cuspdiv/mesh.hpp"

using namespace cuspdiv;

TEST(Domain, RejectsAlphaOutsideRange) {
  EXPECT_THROW(CuspDomain(0.0), DomainError);
  EXPECT_THROW(CuspDomain(1.2), DomainError);
  EXPECT_NO_THROW(CuspDomain(1.0));
}

TEST(Domain, Contains) {
  EXPECT_TRUE(CuspDomain(1.0).contains({0.5, 0.25}));
  EXPECT_FALSE(CuspDomain(0.5).contains({0.5, 0.3}));
  EXPECT_FALSE(CuspDomain(1.0).contains({0.5, 0.5}));
  EXPECT_TRUE(CuspDomain(0.5).contains({0.5, 0.0}));  // no slit
  EXPECT_FALSE(CuspDomain(0.5).contains({1.0, 0.0}));
}

TEST(Distance, SegmentProjection) {
  CuspDomain d(1.0);
  EXPECT_NEAR(d.distance({0.5, 0.0}), 0.5 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(d.distance({0.5, 0.5}), 0.0, 1e-14);
  ArcKind arc;
  Point foot = d.nearest_boundary_point({0.5, 0.0}, &arc);
  EXPECT_NEAR(foot.x, 0.25, 1e-12);
  EXPECT_NEAR(std::abs(foot.y), 0.25, 1e-12);
  EXPECT_NEAR(d.distance({0.95, 0.0}), 0.05, 1e-14);
  EXPECT_EQ((d.nearest_boundary_point({0.95, 0.0}, &arc), arc), ArcKind::right_edge);
}

double dense_sampling_distance(const CuspDomain& d, Point p, int n) {
  double best = std::hypot(p.x - 1.0, p.y - std::clamp(p.y, -1.0, 1.0));
  for (int i = 0; i <= n; ++i) {
    double t = static_cast<double>(i) / n;
    double y = d.half_width(t);
    best = std::min({best, std::hypot(p.x - t, p.y - y), std::hypot(p.x - t, p.y + y)});
  }
  return best;
}

TEST(Distance, MatchesDenseBoundarySampling) {
  CuspDomain d(0.5);
  EXPECT_NEAR(d.distance({0.9, 0.0}), dense_sampling_distance(d, {0.9, 0.0}, 1000000), 1e-6);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ux(-0.2, 1.2), uy(-1.2, 1.2);
  for (double alpha : {0.5, 0.75, 0.3}) {
    CuspDomain dom(alpha);
    for (int i = 0; i < 40; ++i) {
      Point p{ux(rng), uy(rng)};
      EXPECT_NEAR(dom.distance(p), dense_sampling_distance(dom, p, 200000), 2e-5) << p.x << ' ' << p.y;
    }
  }
}

TEST(Distance, VanishesOnBoundaryAndIsLipschitz) {
  CuspDomain d(0.6);
  for (double t : {0.0, 0.01, 0.3, 0.99}) {
    EXPECT_NEAR(d.distance(d.upper_point(t)), 0.0, 1e-12);
    EXPECT_NEAR(d.distance({t, -d.half_width(t)}), 0.0, 1e-12);
  }
  Point a{0.05, 0.0}, b{0.95, 0.0};
  double prev = d.distance(a);
  for (int i = 1; i <= 2000; ++i) {
    Point p = a + (i / 2000.0) * (b - a);
    double cur = d.distance(p);
    EXPECT_LE(std::abs(cur - prev), norm((1.0 / 2000.0) * (b - a)) * (1 + 1e-9) + 1e-15);
    prev = cur;
  }
}

TEST(Distance, SurrogateEquivalence) {
  CuspDomain d(0.5);
  EXPECT_NEAR(d.surrogate_distance({0.5, 0.1}), 0.15, 1e-15);
  EXPECT_NEAR(CuspDomain(1.0).surrogate_distance({0.5, 0.0}), 0.5, 1e-15);
  EXPECT_THROW(d.surrogate_distance({0.5, 0.3}), DomainError);
  // Equivalence is a statement near the tip; the right edge breaks it for x -> 1.
  double cmin = 1.0;
  for (int i = 1; i < 60; ++i)
    for (int j = 0; j < 60; ++j) {
      double x = 0.5 * i / 60.0;
      Point p{x, d.half_width(x) * j / 60.0};
      double ratio = d.distance(p) / d.surrogate_distance(p);
      EXPECT_LE(ratio, 1.0 + 1e-12);
      cmin = std::min(cmin, ratio);
    }
  EXPECT_GT(cmin, 0.1);
}

TEST(BoundaryMeasure, StraightPieces) {
  CuspDomain d(1.0);
  EXPECT_NEAR(d.boundary_measure({1.0, 0.0}, 0.5), 1.0, 1e-10);
  EXPECT_NEAR(d.boundary_measure({0.5, 0.5}, 0.1), 0.2, 1e-10);
  EXPECT_THROW(d.boundary_measure({0.5, 0.0}, 0.1), DomainError);
}

TEST(BoundaryMeasure, CurvedArcIsLinearInRadius) {
  CuspDomain d(0.5);
  for (Point c : {Point{0.0, 0.0}, d.upper_point(0.4), Point{1.0, 0.3}}) {
    for (double r : {0.01, 0.03, 0.1}) {
      double m = d.boundary_measure(c, r);
      EXPECT_GE(m, r * (1 - 1e-9));
      EXPECT_LE(m, 4.0 * r);
    }
  }
  // Tip: both curves contribute nearly r each for small r.
  EXPECT_NEAR(d.boundary_measure({0.0, 0.0}, 1e-3), 2e-3, 1e-8);
}

TEST(Mesh, InvariantCaseAlphaOne) {
  CuspDomain d(1.0);
  TriangulatedMesh m = generate_graded_mesh(d, 0.25, 1.0);
  for (Point p : m.vertices) EXPECT_LE(std::abs(p.y), p.x + 1e-12);
  EXPECT_GE(m.min_angle_deg(), 15.0);
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) EXPECT_GT(m.triangle_area(t), 0.0);
}

TEST(Mesh, AreaAndBoundaryVertices) {
  for (double alpha : {0.5, 0.75, 1.0}) {
    CuspDomain d(alpha);
    TriangulatedMesh m = generate_graded_mesh(d, 0.125, 1.0 / alpha);
    EXPECT_NEAR(m.area() / d.area(), 1.0, 5e-3) << alpha;
    EXPECT_GE(m.min_angle_deg(), 15.0);
    for (const auto& e : m.boundary)
      for (int v : e.v) EXPECT_TRUE(d.on_boundary(m.vertices[v], 1e-12));
  }
}

TEST(Mesh, ElementCountScalesWithInverseSquareSize) {
  CuspDomain d(0.5);
  double n1 = generate_graded_mesh(d, 0.1, 2.0).triangles.size();
  double n2 = generate_graded_mesh(d, 0.05, 2.0).triangles.size();
  EXPECT_GE(n2 / n1, 2.0);
  EXPECT_LE(n2 / n1, 8.0);
}

TEST(Mesh, IsConforming) {
  // Every interior edge is shared by exactly two triangles, boundary edges by one.
  TriangulatedMesh m = generate_graded_mesh(CuspDomain(0.75), 0.125, 4.0 / 3.0);
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : m.triangles)
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      count[{std::min(a, b), std::max(a, b)}]++;
    }
  std::size_t single = 0;
  for (const auto& [e, c] : count) {
    EXPECT_LE(c, 2);
    if (c == 1) ++single;
  }
  EXPECT_EQ(single, m.boundary.size());
}

TEST(Mesh, RoundTripsThroughText) {
  TriangulatedMesh m = generate_graded_mesh(CuspDomain(0.75), 0.25, 4.0 / 3.0);
  std::stringstream ss;
  write_mesh(ss, m);
  TriangulatedMesh r = read_mesh(ss);
  ASSERT_EQ(r.vertices.size(), m.vertices.size());
  ASSERT_EQ(r.triangles.size(), m.triangles.size());
  ASSERT_EQ(r.boundary.size(), m.boundary.size());
  EXPECT_EQ(r.vertices[5].x, m.vertices[5].x);
  EXPECT_EQ(r.boundary.back().kind, m.boundary.back().kind);
}
