#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "cuspdiv/geometry.hpp"
#include "cuspdiv/quadrature.hpp"

namespace cuspdiv::weights {

/// Weight d^mu, with d the exact or the surrogate distance.
struct WeightSpec {
  double mu = 0.0;
  DistanceMode mode = DistanceMode::exact;
};

using Field = std::function<double(Point)>;

/// Integral of |f|^p d^(gamma p) over a grid, tail-extrapolated over x-bands.
double weighted_lp_integral(const Field& f, const CuspDomain& domain, double gamma, double p,
                            const QuadratureGrid& grid, DistanceMode mode = DistanceMode::exact);

struct NormEstimate {
  double value = 0.0;
  /// |value - value on the refined grid| / value on the refined grid.
  double rel_error = 0.0;
};

/// ||f||_{L^p(Omega, gamma)} = ||f d^gamma||_{L^p} on the cusp grid and one refinement of it.
NormEstimate weighted_lp_norm(const Field& f, const CuspDomain& domain, double gamma, double p,
                              const CuspGridOptions& opts = {}, DistanceMode mode = DistanceMode::exact);

/// f_s = x^(-s/(p-1)) d^(-p' beta).
Field fs_family(const CuspDomain& domain, double beta, double p, double s, DistanceMode mode = DistanceMode::surrogate);

/// y x^(-s-1).
Field ys_field(double s);

struct ClosedForm {
  double threshold;  // A or B
  double value;      // p-th (or p'-th) power of the norm
};

/// A = (1 - beta p' + alpha)/(alpha p'), ||f_s||^p = 2/((1 - beta p') p' (A - s)) with the surrogate distance.
ClosedForm fs_norm_closed_form(double alpha, double beta, double p, double s);
double fs_threshold(double alpha, double beta, double p);

/// B = (1 - (alpha-1) p' + alpha)/(alpha p'), ||y x^(-s-1)||^{p'} = (2/(p'+1))/(p'(B - s)).
ClosedForm ys_norm_closed_form(double alpha, double p, double s);
double ys_threshold(double alpha, double p);

inline double conjugate(double p) { return p / (p - 1.0); }

struct Ball {
  Point center;
  double radius;
};

struct BallGridOptions {
  /// Cells whose center lies within 1.5 diagonals of F are split down to this depth
  /// relative to the ball's bounding square.
  int near_depth = 7;
  /// Cells cut by the sphere are split down to this depth.
  int rim_depth = 5;
  int order = 4;
};

/// Adaptive product-Gauss rule on a ball, with exact distances cached at the nodes.
/// Node distances are floored at 1/16 of the leaf side, so a weight that is not
/// integrable across F is truncated at the resolution scale instead of being
/// sampled at whatever distance a node happens to land.
struct BallGrid {
  Ball ball;
  std::vector<Point> nodes;
  std::vector<double> weights;
  std::vector<double> distance;
};
BallGrid make_ball_grid(const CuspDomain& domain, const Ball& ball, const BallGridOptions& opts = {});

/// (avg_B w)(avg_B w^(-1/(p-1)))^(p-1) using the grid nodes inside the ball.
double ap_ratio(const Ball& ball, const WeightSpec& w, double p, const QuadratureGrid& grid, const CuspDomain& domain);
double ap_ratio(const BallGrid& grid, const WeightSpec& w, double p, const CuspDomain& domain);

struct BallRecord {
  Point center;
  double radius;
  double ratio;
  bool boundary_centered;
};

struct ApEstimate {
  double value = 0.0;
  std::vector<BallRecord> per_ball;
  /// Largest, over boundary centers, of the fitted ratio growth when the radius shrinks 10x.
  double trend = 1.0;
};

struct ApSampling {
  std::vector<Point> boundary_centers;
  std::vector<double> radii;
  std::vector<Point> interior_centers;
  /// Interior balls use radius = factor * d(center).
  std::vector<double> interior_factors;
  BallGridOptions resolution;
};

/// 32 boundary centers (tip included) x radii 2^-j, j = 2..10, and 32 interior centers.
ApSampling default_ap_sampling(const CuspDomain& domain);

/// Evaluates the plan for several weights while reusing the ball grids.
class ApEvaluator {
 public:
  ApEvaluator(const CuspDomain& domain, ApSampling sampling);
  ApEstimate estimate(const WeightSpec& w, double p);
  const ApSampling& sampling() const { return sampling_; }

 private:
  void build();
  CuspDomain domain_;
  ApSampling sampling_;
  std::vector<BallGrid> grids_;
  std::vector<bool> boundary_;
};

ApEstimate estimate_ap_constant(const CuspDomain& domain, const WeightSpec& w, double p, const ApSampling& sampling);

/// Fitted ratio growth per radius decade (shrinking) for one center's records.
double decade_growth(const std::vector<BallRecord>& records);

}  // namespace cuspdiv::weights
