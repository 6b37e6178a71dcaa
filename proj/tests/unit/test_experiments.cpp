#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cuspdiv/experiments.hpp"
#include "cuspdiv/weights.hpp"

using namespace cuspdiv;
using namespace cuspdiv::experiments;

namespace {

std::vector<std::pair<double, double>> sample_law(double T, double kappa, double scale, int n,
                                                  double noise = 0.0) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-noise, noise);
  std::vector<std::pair<double, double>> pts;
  for (double s : geometric_grid(T, 1.0, n)) pts.push_back({s, scale * std::pow(T - s, -kappa) * (1 + u(rng))});
  return pts;
}

}  // namespace

TEST(RateFit, ExactSimplePole) {
  FitResult f = rate_fit(sample_law(1.5, 1.0, 1.0, 8));
  EXPECT_NEAR(f.kappa, 1.0, 1e-8);
  EXPECT_NEAR(f.threshold, 1.5, 1e-8);
  EXPECT_LT(f.residual, 1e-10);
  EXPECT_EQ(f.points, 8);
}

TEST(RateFit, ExactDoublePole) {
  FitResult f = rate_fit(sample_law(2.0, 2.0, 0.3, 8));
  EXPECT_NEAR(f.kappa, 2.0, 1e-8);
  EXPECT_NEAR(f.threshold, 2.0, 1e-8);
  EXPECT_NEAR(f.constant, std::log(0.3), 1e-7);
}

TEST(RateFit, NoisyData) {
  FitResult f = rate_fit(sample_law(1.5, 1.0, 1.0, 8, 0.01));
  EXPECT_NEAR(f.threshold, 1.5, 0.02 * 1.5);
  EXPECT_GT(f.residual, 0.0);
}

TEST(RateFit, Preconditions) {
  auto pts = sample_law(1.5, 1.0, 1.0, 8);
  pts.resize(5);
  EXPECT_THROW(rate_fit(pts), DomainError);
  auto neg = sample_law(1.5, 1.0, 1.0, 8);
  neg[2].second = -1.0;
  EXPECT_THROW(rate_fit(neg), DomainError);
  // No pole: e^-s is matched only in the limit T -> infinity.
  std::vector<std::pair<double, double>> decay;
  for (int i = 0; i < 8; ++i) decay.push_back({0.1 * i, std::exp(-0.1 * i)});
  EXPECT_THROW(rate_fit(decay), NumericalError);
}

TEST(OptimalitySweep, ThresholdsAtHalf) {
  OptimalitySweep r = optimality_sweep(0.5, 0.0, 2.0);
  EXPECT_NEAR(r.fit_A.threshold, 1.5, 0.015);
  EXPECT_NEAR(r.fit_A.kappa, 1.0, 0.02);
  EXPECT_NEAR(r.fit_B.threshold, 2.5, 0.025);
  EXPECT_NEAR(r.fit_B.kappa, 1.0, 0.02);
  ASSERT_EQ(r.records.size(), 16u);
  for (const auto& rec : r.records) {
    double q = rec.family == "fs" ? rec.value("norm_p_surrogate") : rec.value("norm_pprime");
    EXPECT_NEAR(q / rec.value("closed_form"), 1.0, 5e-3) << rec.family << " s=" << rec.param("s");
    if (rec.family == "fs") EXPECT_TRUE(std::isfinite(rec.value("norm_p_exact")));
  }
  // T_B > T_A for beta > alpha - 1, and the chain ratio blows up as s -> A.
  EXPECT_LT(r.fit_A.threshold, r.fit_B.threshold);
  EXPECT_GT(r.chain.back().lhs / r.chain.back().rhs, 4 * r.chain.front().lhs / r.chain.front().rhs);
}

TEST(OptimalitySweep, BorderlineCoincides) {
  for (double alpha : {0.5, 0.75, 1.0}) {
    OptimalitySweep r = optimality_sweep(alpha, alpha - 1.0, 2.0);
    EXPECT_NEAR(r.A, r.B, 1e-14 * r.A);
    EXPECT_NEAR(r.fit_A.threshold, r.fit_B.threshold, 0.02 * r.fit_A.threshold);
  }
}

TEST(OptimalitySweep, OrderingBelowBorderline) {
  // beta < alpha - 1 puts A beyond B.
  OptimalitySweep r = optimality_sweep(0.75, -0.4, 2.0);
  EXPECT_GT(r.A, r.B);
  EXPECT_GT(r.fit_A.threshold, r.fit_B.threshold);
}

TEST(OptimalitySweep, CsvHasEveryRecord) {
  OptimalitySweep r = optimality_sweep(0.5, 0.0, 2.0, {1.0, 6, {}});
  std::ostringstream os;
  write_csv(os, r.records);
  std::string text = os.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 13);
  EXPECT_EQ(text.substr(0, 29), "family,provenance,alpha,beta,");
  EXPECT_THROW(optimality_sweep(0.5, 0.6, 2.0), DomainError);
}

TEST(Necessity, UnweightedRatioGrowsAtCusp) {
  auto rows = necessity_demo(0.75, {0.125}, {0.4, 0.2, 0.1, 0.05});
  ASSERT_EQ(rows.size(), 4u);
  double wmax = 0, wmin = 1e300;
  for (const auto& r : rows) {
    EXPECT_LE(r.constraint_residual, 1e-10);
    wmax = std::max(wmax, r.weighted_ratio);
    wmin = std::min(wmin, r.weighted_ratio);
  }
  EXPECT_GE(rows.back().unweighted_ratio / rows.front().unweighted_ratio, 1.5);
  EXPECT_LE(wmax / wmin, 1.5);
  EXPECT_EQ(to_records(rows, 0.75).size(), 4u);
}

TEST(Necessity, TriangleControl) {
  auto rows = necessity_demo(1.0, {0.125}, {0.4, 0.2, 0.1, 0.05});
  for (const auto& r : rows) EXPECT_NEAR(r.weighted_ratio, r.unweighted_ratio, 1e-12 * r.weighted_ratio);
  EXPECT_LT(rows.back().unweighted_ratio / rows.front().unweighted_ratio, 1.5);
  EXPECT_THROW(necessity_demo(0.5, {0.25}, {0.2}), DomainError);
}
