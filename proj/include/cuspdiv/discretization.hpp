#pragma once

#include <functional>
#include <vector>

#include "cuspdiv/fem.hpp"

namespace cuspdiv::fem {

using ScalarFn = std::function<double(Point)>;
using VectorFn = std::function<Point(Point)>;

/// Taylor-Hood blocks on the zero-BC velocity space:
/// A = int Du:Dv, B = int div v q w, Mw = int p q w, w = scale d^(2 alpha - 2).
struct SaddleSystem {
  SpMat A;
  SpMat B;
  SpMat Mw;
  Restriction restriction;
  double alpha = 1.0;
  double weight_scale = 1.0;
  int velocity_size = 0;  // full vector-P2 length
};
SaddleSystem assemble(const P2Space& s, double alpha, double weight_scale = 1.0);

/// Values at the space's quadrature nodes.
std::vector<double> sample(const P2Space& s, const ScalarFn& f);
std::vector<Point> sample(const P2Space& s, const VectorFn& f);

/// f - (mean of f over the mesh), sampled at quadrature nodes.
std::vector<double> mean_corrected(const P2Space& s, const std::vector<double>& f);

double h1_norm(const DiscreteField& u);
double h1_seminorm(const DiscreteField& u);
/// (int f^2 d^(2 gamma))^(1/2) by the mesh quadrature.
double weighted_l2(const P2Space& s, const std::vector<double>& f, double gamma);

struct DivSolution {
  DiscreteField u;
  DiscreteField multiplier;
  /// |B u - F| / |F|.
  double constraint_residual = 0.0;
  /// |A u + B^T lambda| / |A u|: stationarity of the constrained minimum.
  double optimality_residual = 0.0;
};

/// Minimizes int |Du|^2 over zero-BC vector P2 subject to
/// int (div u - f) q d^(2 alpha - 2) = 0 for every P1 q.
/// For alpha < 1 the full P1 space is used; at alpha = 1 constants are in the
/// kernel of B^T and an extra mean constraint on the multiplier is added.
DivSolution solve_div_right_inverse(const P2Space& s, double alpha, const std::vector<double>& f);

struct StokesSolution {
  DiscreteField u;
  DiscreteField q;
  /// p = q scale d^(2 alpha - 2) at quadrature nodes.
  std::vector<double> p;
  /// max |B u| / max (|B||u|).
  double divergence_residual = 0.0;
  double energy = 0.0;     // u^T A u
  double load_work = 0.0;  // F^T u
  double unweighted_pressure_mean = 0.0;
  double load_norm = 0.0;  // ||f||_L2
};
StokesSolution solve_stokes(const P2Space& s, double alpha, const VectorFn& f, double weight_scale = 1.0);

struct EigenReport {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

struct InfSupOptions {
  /// Restrict pressures to the weighted-mean-zero subspace.
  bool deflate = true;
  int max_iterations = 150;
  double tol = 1e-11;
};

/// sqrt of the smallest eigenvalue of B A^-1 B^T q = lambda Mw q.
EigenReport discrete_infsup(const P2Space& s, double alpha, const InfSupOptions& opts = {});
/// Same quantity from a dense generalized eigen-decomposition.
double dense_infsup(const SaddleSystem& sys, bool deflate = true);

struct PressureNorm {
  double norm = 0.0;   // ||p||_L^r
  double bound = 0.0;  // ||p||_{L^2(Omega, 1 - alpha)} (int d^(2(alpha-1) r/(2-r)))^((2-r)/(2r))
};
PressureNorm pressure_lr_norm(const P2Space& s, const std::vector<double>& p, double r, double alpha);
double max_pressure_exponent(double alpha);

struct ConstantEstimate {
  double alpha = 0.0;
  double beta = 0.0;
  double h = 0.0;
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

/// Largest inscribed disk centered at (0.7, 0).
struct Disk {
  Point center;
  double radius;
};
Disk default_ball(const CuspDomain& domain);

/// sqrt max of ||Du||^2_{L2(1-beta)} / (||eps(u)||^2_{L2(alpha-beta)} + ||u||^2_{L2(B)}) over vector P2.
ConstantEstimate korn_best_constant(const P2Space& s, double alpha, double beta, const Disk& ball);

/// sqrt max of ||f||^2_{L2(1-beta)} / ||grad f||^2_{L2(1+alpha-beta)} over scalar P2 with
/// int f phi = 0, phi the normalized sum of P1 hats at vertices within radius/2 of the center.
ConstantEstimate improved_poincare_constant(const P2Space& s, double alpha, double beta, const Disk& ball);

/// max over Re z^k, Im z^k (1 <= k <= kmax) of ||grad f||_{L2(1-mu)} / ||f||_{L2(-mu)}.
double harmonic_ratio(const CuspDomain& domain, double mu, int kmax, const QuadratureGrid& grid);

struct LanczosResult {
  double theta = 0.0;
  Vec x;
  int iterations = 0;
  double residual = 0.0;
};

/// Largest eigenvalue of an operator self-adjoint in the inner product x^T W y,
/// with full reorthogonalization. The start vector is pushed through op once so
/// iterates stay in its range.
LanczosResult lanczos_largest(const std::function<Vec(const Vec&)>& op, const SpMat& W, int n, int max_iterations,
                              double tol, unsigned seed = 7);

}  // namespace cuspdiv::fem
