#include "cuspdiv/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include <boost/math/constants/constants.hpp>

namespace cuspdiv::potential {

namespace {

constexpr double kInvTwoPi = 0.5 / boost::math::constants::pi<double>();

// d2/dudw = log sqrt(u^2 + w^2).
double log_antiderivative(double u, double w) {
  double r2 = u * u + w * w;
  if (r2 == 0.0) return 0.0;
  double out = u * w * (0.5 * std::log(r2) - 1.5);
  if (u != 0.0) out += 0.5 * u * u * std::atan(w / u);
  if (w != 0.0) out += 0.5 * w * w * std::atan(u / w);
  return out;
}

// d2/dudw = u / (u^2 + w^2).
double grad_antiderivative(double u, double w) {
  double r2 = u * u + w * w;
  if (r2 == 0.0) return 0.0;
  double out = 0.5 * w * std::log(r2);
  if (u != 0.0) out += u * std::atan(w / u);
  return out;
}

template <class F>
double corners(F f, double u1, double u2, double w1, double w2) {
  return f(u2, w2) - f(u1, w2) - f(u2, w1) + f(u1, w1);
}

int cell_index(double coord, double origin, double h) { return static_cast<int>(std::floor((coord - origin) / h)); }

}  // namespace

SourceField::SourceField(CellGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (grid_.nx <= 0 || grid_.ny <= 0 || !(grid_.h > 0.0)) throw DomainError("source grid must be non-empty");
  if (values_.size() != static_cast<std::size_t>(grid_.nx) * grid_.ny)
    throw DomainError("source values do not match the grid");
  for (double v : values_)
    if (!std::isfinite(v)) throw DomainError("source values must be finite");
}

SourceField SourceField::sample(const Field& f, const CellGrid& grid, int sub, const CuspDomain* support) {
  if (sub < 1) throw DomainError("subsampling must be positive");
  std::vector<double> values(static_cast<std::size_t>(grid.nx) * grid.ny, 0.0);
  const double hs = grid.h / sub;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      double s = 0.0;
      for (int a = 0; a < sub; ++a)
        for (int b = 0; b < sub; ++b) {
          Point p{grid.x0 + i * grid.h + (a + 0.5) * hs, grid.y0 + j * grid.h + (b + 0.5) * hs};
          if (support && !support->contains(p)) continue;
          s += f(p);
        }
      values[static_cast<std::size_t>(j) * grid.nx + i] = s / (sub * sub);
    }
  return SourceField(grid, std::move(values));
}

double SourceField::integral() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s * grid_.h * grid_.h;
}

SourceField SourceField::scaled(double c) const {
  std::vector<double> v = values_;
  for (double& x : v) x *= c;
  return SourceField(grid_, std::move(v));
}

void write_source(std::ostream& os, const SourceField& f) {
  const CellGrid& g = f.grid();
  char buf[128];
  std::snprintf(buf, sizeof buf, "grid %d %d %.17g %.17g %.17g\n", g.nx, g.ny, g.x0, g.y0, g.h);
  os << buf << "values " << f.values().size() << '\n';
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i, j, f.value(i, j));
      os << buf;
    }
}

SourceField read_source(std::istream& is) {
  std::string tag;
  CellGrid g;
  if (!(is >> tag >> g.nx >> g.ny >> g.x0 >> g.y0 >> g.h) || tag != "grid")
    throw DomainError("source file: expected 'grid nx ny x0 y0 h'");
  std::size_t n = 0;
  if (!(is >> tag >> n) || tag != "values") throw DomainError("source file: expected 'values N'");
  if (g.nx <= 0 || g.ny <= 0 || n != static_cast<std::size_t>(g.nx) * g.ny)
    throw DomainError("source file: value count does not match the grid");
  std::vector<double> values(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    int i, j;
    double v;
    if (!(is >> i >> j >> v)) throw DomainError("source file: truncated value block");
    if (i < 0 || i >= g.nx || j < 0 || j >= g.ny) throw DomainError("source file: cell index out of range");
    values[static_cast<std::size_t>(j) * g.nx + i] = v;
  }
  return SourceField(g, std::move(values));
}

double cell_log_integral(Point x, Point a, Point b) {
  return kInvTwoPi * corners(log_antiderivative, a.x - x.x, b.x - x.x, a.y - x.y, b.y - x.y);
}

Point cell_gradient_integral(Point x, Point a, Point b) {
  double u1 = a.x - x.x, u2 = b.x - x.x, w1 = a.y - x.y, w2 = b.y - x.y;
  double gx = corners(grad_antiderivative, u1, u2, w1, w2);
  double gy = corners([](double u, double w) { return grad_antiderivative(w, u); }, u1, u2, w1, w2);
  return {-kInvTwoPi * gx, -kInvTwoPi * gy};
}

PotentialSolution::PotentialSolution(SourceField f, int near_cells) : source_(std::move(f)), near_cells_(near_cells) {
  if (near_cells_ < 0) throw DomainError("near-field width must be non-negative");
  const CellGrid& g = source_.grid();
  const double area = g.h * g.h;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      double v = source_.value(i, j);
      if (v == 0.0) continue;
      centers_.push_back(g.cell_center(i, j));
      masses_.push_back(v * area);
    }
}

// Midpoint sum over all cells, then the near block is swapped for closed forms.
double PotentialSolution::phi(Point x, Point anchor) const {
  const CellGrid& g = source_.grid();
  double s = 0.0;
  for (std::size_t k = 0; k < centers_.size(); ++k) {
    double dx = x.x - centers_[k].x, dy = x.y - centers_[k].y, r2 = dx * dx + dy * dy;
    if (r2 > 0.0) s += masses_[k] * 0.5 * std::log(r2);
  }
  s *= kInvTwoPi;
  const int ia = cell_index(anchor.x, g.x0, g.h), ja = cell_index(anchor.y, g.y0, g.h);
  for (int j = std::max(0, ja - near_cells_); j <= std::min(g.ny - 1, ja + near_cells_); ++j)
    for (int i = std::max(0, ia - near_cells_); i <= std::min(g.nx - 1, ia + near_cells_); ++i) {
      double v = source_.value(i, j);
      if (v == 0.0) continue;
      Point c = g.cell_center(i, j);
      double dx = x.x - c.x, dy = x.y - c.y, r2 = dx * dx + dy * dy;
      if (r2 > 0.0) s -= kInvTwoPi * v * g.h * g.h * 0.5 * std::log(r2);
      Point lo{g.x0 + i * g.h, g.y0 + j * g.h};
      s += v * cell_log_integral(x, lo, {lo.x + g.h, lo.y + g.h});
    }
  return s;
}

Point PotentialSolution::velocity(Point x, Point anchor) const {
  const CellGrid& g = source_.grid();
  double vx = 0.0, vy = 0.0;
  for (std::size_t k = 0; k < centers_.size(); ++k) {
    double dx = x.x - centers_[k].x, dy = x.y - centers_[k].y, r2 = dx * dx + dy * dy;
    if (r2 > 0.0) {
      double m = masses_[k] / r2;
      vx += m * dx;
      vy += m * dy;
    }
  }
  vx *= kInvTwoPi;
  vy *= kInvTwoPi;
  const int ia = cell_index(anchor.x, g.x0, g.h), ja = cell_index(anchor.y, g.y0, g.h);
  for (int j = std::max(0, ja - near_cells_); j <= std::min(g.ny - 1, ja + near_cells_); ++j)
    for (int i = std::max(0, ia - near_cells_); i <= std::min(g.nx - 1, ia + near_cells_); ++i) {
      double v = source_.value(i, j);
      if (v == 0.0) continue;
      Point c = g.cell_center(i, j);
      double dx = x.x - c.x, dy = x.y - c.y, r2 = dx * dx + dy * dy;
      if (r2 > 0.0) {
        double m = kInvTwoPi * v * g.h * g.h / r2;
        vx -= m * dx;
        vy -= m * dy;
      }
      Point lo{g.x0 + i * g.h, g.y0 + j * g.h};
      Point e = cell_gradient_integral(x, lo, {lo.x + g.h, lo.y + g.h});
      vx += v * e.x;
      vy += v * e.y;
    }
  return {vx, vy};
}

PotentialSolution newtonian_solve(SourceField f) { return PotentialSolution(std::move(f)); }

namespace {

double fd_divergence(const PotentialSolution& sol, Point x, double step) {
  Point ex{step, 0.0}, ey{0.0, step};
  double dx = sol.velocity(x + ex, x).x - sol.velocity(x - ex, x).x;
  double dy = sol.velocity(x + ey, x).y - sol.velocity(x - ey, x).y;
  return (dx + dy) / (2.0 * step);
}

}  // namespace

double divergence_residual(const PotentialSolution& sol, const Field& f, const std::vector<Point>& points,
                           double step) {
  if (step <= 0.0) step = 0.25 * sol.source().grid().h;
  double worst = 0.0, fmax = 0.0;
  for (Point x : points) {
    double fx = f(x);
    fmax = std::max(fmax, std::abs(fx));
    worst = std::max(worst, std::abs(fd_divergence(sol, x, step) - fx));
  }
  return fmax > 0.0 ? worst / fmax : worst;
}

double loop_circulation(const PotentialSolution& sol, Point center, double half_side) {
  const GaussRule rule = gauss_legendre(16);
  const Point corner[4] = {{center.x - half_side, center.y - half_side},
                           {center.x + half_side, center.y - half_side},
                           {center.x + half_side, center.y + half_side},
                           {center.x - half_side, center.y + half_side}};
  double circ = 0.0, mag = 0.0;
  for (int e = 0; e < 4; ++e) {
    Point a = corner[e], b = corner[(e + 1) % 4], t = b - a;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      Point x = a + 0.5 * (1.0 + rule.nodes[q]) * t;
      Point v = sol.velocity(x, center);
      double w = 0.5 * rule.weights[q];
      circ += w * dot(v, t);
      mag += w * norm(v) * norm(t);
    }
  }
  return mag > 0.0 ? std::abs(circ) / mag : 0.0;
}

QuadratureGrid source_focused_grid(const CuspDomain& domain, const CellGrid& box, const CuspGridOptions& opts) {
  const double bx1 = box.x0 + box.nx * box.h, by1 = box.y0 + box.ny * box.h;
  auto in_box = [&](Point p) { return p.x >= box.x0 && p.x < bx1 && p.y >= box.y0 && p.y < by1; };
  QuadratureGrid base = cusp_grid(domain, opts);
  QuadratureGrid out;
  for (std::size_t c = 0; c < base.num_cells(); ++c) {
    for (std::size_t k = base.cell_offsets[c]; k < base.cell_offsets[c + 1]; ++k) {
      if (in_box(base.nodes[k])) continue;
      out.nodes.push_back(base.nodes[k]);
      out.weights.push_back(base.weights[k]);
    }
    out.add_cell(base.band[c]);
  }
  const GaussRule rule = gauss_legendre(2);
  for (int j = 0; j < box.ny; ++j)
    for (int i = 0; i < box.nx; ++i) {
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          Point p{box.x0 + (i + 0.5 + 0.5 * rule.nodes[a]) * box.h, box.y0 + (j + 0.5 + 0.5 * rule.nodes[b]) * box.h};
          if (!domain.contains(p)) continue;
          out.nodes.push_back(p);
          out.weights.push_back(0.25 * box.h * box.h * rule.weights[a] * rule.weights[b]);
        }
      out.add_cell();
    }
  return out;
}

double check_weighted_estimate(const PotentialSolution& sol, const Field& f, const CuspDomain& domain, double gamma,
                               double p, const QuadratureGrid& grid) {
  if (!(p > 1.0)) throw DomainError("p must exceed 1");
  if (!(gamma > -1.0 / p && gamma <= 1.0 - 1.0 / p)) throw DomainError("gamma outside (-1/p, 1 - 1/p]");
  const std::vector<double>& dist = grid.distances(domain, DistanceMode::exact);
  const double step = 0.25 * sol.source().grid().h;
  std::vector<double> fv(grid.nodes.size()), vv(grid.nodes.size()), gv(grid.nodes.size());
  for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
    Point x = grid.nodes[k];
    double wt = std::pow(dist[k], gamma * p);
    Point ex{step, 0.0}, ey{0.0, step};
    Point v = sol.velocity(x, x);
    Point dvx = (1.0 / (2.0 * step)) * (sol.velocity(x + ex, x) - sol.velocity(x - ex, x));
    Point dvy = (1.0 / (2.0 * step)) * (sol.velocity(x + ey, x) - sol.velocity(x - ey, x));
    fv[k] = std::pow(std::abs(f(x)), p) * wt;
    vv[k] = std::pow(norm(v), p) * wt;
    gv[k] = std::pow(std::sqrt(dot(dvx, dvx) + dot(dvy, dvy)), p) * wt;
  }
  double fn = std::pow(integrate_with_tail(grid, fv), 1.0 / p);
  double num = std::pow(integrate_with_tail(grid, vv), 1.0 / p) + std::pow(integrate_with_tail(grid, gv), 1.0 / p);
  if (!std::isfinite(fn) || !std::isfinite(num)) throw NumericalError("weighted norm is not finite");
  if (fn == 0.0) {
    if (num == 0.0) return 0.0;
    throw DomainError("zero denominator: f vanishes on the grid but v does not");
  }
  return num / fn;
}

}  // namespace cuspdiv::potential
