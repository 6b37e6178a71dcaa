#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cuspdiv/quadrature.hpp"

namespace cuspdiv::experiments {

struct Measurement {
  std::string name;
  double value = 0.0;
  /// Set when the quantity is infinite (outside the integrability window).
  bool divergent = false;
};

/// One row of a sweep. Parameters and measurements keep insertion order.
struct SweepRecord {
  std::string family;
  std::string provenance;  // closed-form | quadrature | fem
  std::vector<std::pair<std::string, double>> params;
  std::vector<Measurement> values;

  double param(const std::string& name) const;
  double value(const std::string& name) const;
};

/// Rows with the union of their columns, in first-seen order; divergent cells print "inf".
void write_csv(std::ostream& os, const std::vector<SweepRecord>& records);

/// log y = -kappa log(T - s) + c.
struct FitResult {
  double kappa = 0.0;
  double threshold = 0.0;
  double constant = 0.0;
  /// RMS of the log-model error.
  double residual = 0.0;
  int points = 0;
  int iterations = 0;
};

/// Variable projection: (kappa, c) by linear least squares for each T, T by Brent
/// minimization over log(T - max s). Throws NumericalError if the minimum sits on
/// the search bracket or the iteration budget runs out.
FitResult rate_fit(const std::vector<std::pair<double, double>>& points);

/// s_i = threshold - 2^-i span, i = 1..count.
std::vector<double> geometric_grid(double threshold, double span, int count = 8);

struct ChainRow {
  double s = 0.0;
  double lhs = 0.0;  // ||f_s||^(p-1)
  double rhs = 0.0;  // s ||y x^(-s-1)||_{p'} + 1
  /// (B - s)/(A - s): the comparison of 1/(A - s) against 1/(B - s).
  double comparison = 0.0;
};

struct OptimalitySweep {
  double alpha = 0.0, beta = 0.0, p = 0.0;
  double A = 0.0, B = 0.0;
  std::vector<SweepRecord> records;
  FitResult fit_A;
  FitResult fit_B;
  /// On s approaching min(A, B).
  std::vector<ChainRow> chain;
};

struct OptimalityOptions {
  double span = 1.0;
  int count = 8;
  CuspGridOptions grid{};
};

/// f_s norms (surrogate and exact distance) on s approaching A, y x^(-s-1) norms on s
/// approaching B, both next to their closed forms; power-law fits of the quadrature values.
OptimalitySweep optimality_sweep(double alpha, double beta, double p, const OptimalityOptions& opts = {});

struct NecessityRow {
  double h = 0.0;
  double t = 0.0;
  double weighted_ratio = 0.0;    // ||u_h||_H1 / ||f_t||_{L2(alpha-1)}
  double unweighted_ratio = 0.0;  // ||u_h||_H1 / ||f_t||_L2
  double constraint_residual = 0.0;
};

/// Mean-corrected indicators of {x < t}, pushed through the discrete right inverse on
/// graded meshes of size h (grading 1/alpha).
std::vector<NecessityRow> necessity_demo(double alpha, const std::vector<double>& levels,
                                         const std::vector<double>& ts);
std::vector<SweepRecord> to_records(const std::vector<NecessityRow>& rows, double alpha);

}  // namespace cuspdiv::experiments
