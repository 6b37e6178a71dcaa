#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "cuspdiv/geometry.hpp"
#include "cuspdiv/quadrature.hpp"

namespace cuspdiv::potential {

using Field = std::function<double(Point)>;

/// Uniform cell grid: cell (i, j) is [x0 + i h, x0 + (i+1) h] x [y0 + j h, y0 + (j+1) h].
struct CellGrid {
  double x0 = 0.0;
  double y0 = 0.0;
  double h = 1.0;
  int nx = 0;
  int ny = 0;
  Point cell_center(int i, int j) const { return {x0 + (i + 0.5) * h, y0 + (j + 0.5) * h}; }
};

/// Piecewise-constant source on a cell grid; zero outside the grid.
class SourceField {
 public:
  SourceField(CellGrid grid, std::vector<double> values);

  /// Cell averages of f from sub x sub midpoint samples. With a support domain, f is
  /// extended by zero outside it.
  static SourceField sample(const Field& f, const CellGrid& grid, int sub = 4, const CuspDomain* support = nullptr);

  const CellGrid& grid() const { return grid_; }
  double value(int i, int j) const { return values_[static_cast<std::size_t>(j) * grid_.nx + i]; }
  const std::vector<double>& values() const { return values_; }
  double integral() const;
  SourceField scaled(double c) const;

 private:
  CellGrid grid_;
  std::vector<double> values_;
};

void write_source(std::ostream& os, const SourceField& f);
SourceField read_source(std::istream& is);

/// phi(x) = (1/2pi) int log|x - y| f(y) dy and v = grad phi.
///
/// Cells within `near_cells` (Chebyshev index distance) of the anchor cell are
/// integrated in closed form; the rest use the cell midpoint. Evaluations that
/// share an anchor see one consistent field, which finite differences rely on.
class PotentialSolution {
 public:
  explicit PotentialSolution(SourceField f, int near_cells = 4);

  const SourceField& source() const { return source_; }
  int near_cells() const { return near_cells_; }

  double phi(Point x) const { return phi(x, x); }
  Point velocity(Point x) const { return velocity(x, x); }
  double phi(Point x, Point anchor) const;
  Point velocity(Point x, Point anchor) const;

 private:
  SourceField source_;
  int near_cells_;
  std::vector<Point> centers_;
  std::vector<double> masses_;
};

PotentialSolution newtonian_solve(SourceField f);

/// Integrals over the axis-aligned rectangle [a, b] of log|x - y| / (2pi) and of
/// the kernel gradient (x - y)/(2pi |x - y|^2).
double cell_log_integral(Point x, Point a, Point b);
Point cell_gradient_integral(Point x, Point a, Point b);

/// max |div v - f| / max |f| by central differences with the given step
/// (default: a quarter cell). Returns the absolute max residual when f vanishes.
double divergence_residual(const PotentialSolution& sol, const Field& f, const std::vector<Point>& points,
                           double step = 0.0);

/// Relative circulation |loop integral of v.dl| / loop integral of |v| around a square.
double loop_circulation(const PotentialSolution& sol, Point center, double half_side);

/// (||v d^gamma||_p + ||grad v d^gamma||_p) / ||f d^gamma||_p over the grid nodes,
/// with grad v by central differences. Zero when both f and v vanish.
/// Cusp-grid nodes outside the source box plus a 2x2 Gauss rule per source cell inside
/// it (restricted to the domain), so norms resolve sources much smaller than the cusp bands.
QuadratureGrid source_focused_grid(const CuspDomain& domain, const CellGrid& box, const CuspGridOptions& opts = {});

double check_weighted_estimate(const PotentialSolution& sol, const Field& f, const CuspDomain& domain, double gamma,
                               double p, const QuadratureGrid& grid);

}  // namespace cuspdiv::potential
