#include "cuspdiv/quadrature.hpp"

#include <algorithm>
#include <boost/math/special_functions/legendre.hpp>
#include <cmath>
#include <limits>

#include "cuspdiv/mesh.hpp"
#include "cuspdiv/whitney.hpp"

namespace cuspdiv {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw DomainError("Gauss rule needs at least one point");
  GaussRule r;
  if (n == 1) {
    r.nodes = {0.0};
    r.weights = {2.0};
    return r;
  }
  std::vector<double> zeros = boost::math::legendre_p_zeros<double>(n);
  for (double z : zeros) {
    double dp = boost::math::legendre_p_prime<double>(n, z);
    double w = 2.0 / ((1.0 - z * z) * dp * dp);
    if (z == 0.0) {
      r.nodes.push_back(0.0);
      r.weights.push_back(w);
    } else {
      r.nodes.push_back(-z);
      r.weights.push_back(w);
      r.nodes.push_back(z);
      r.weights.push_back(w);
    }
  }
  std::vector<std::size_t> idx(r.nodes.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return r.nodes[a] < r.nodes[b]; });
  GaussRule sorted;
  for (std::size_t i : idx) {
    sorted.nodes.push_back(r.nodes[i]);
    sorted.weights.push_back(r.weights[i]);
  }
  return sorted;
}

const TriangleRule& dunavant_degree4() {
  static const TriangleRule rule = [] {
    TriangleRule r;
    const double a1 = 0.445948490915965, b1 = 1.0 - 2.0 * a1, w1 = 0.223381589678011;
    const double a2 = 0.091576213509771, b2 = 1.0 - 2.0 * a2, w2 = 0.109951743655322;
    r.bary = {{{b1, a1, a1}, {a1, b1, a1}, {a1, a1, b1}, {b2, a2, a2}, {a2, b2, a2}, {a2, a2, b2}}};
    r.weights = {w1, w1, w1, w2, w2, w2};
    return r;
  }();
  return rule;
}

double QuadratureGrid::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

int QuadratureGrid::num_bands() const {
  int m = -1;
  for (int b : band) m = std::max(m, b);
  return m + 1;
}

const std::vector<double>& QuadratureGrid::distances(const CuspDomain& domain, DistanceMode mode) const {
  if (cached_alpha_ != domain.alpha()) {
    exact_cache_.clear();
    surrogate_cache_.clear();
    cached_alpha_ = domain.alpha();
  }
  auto& cache = mode == DistanceMode::exact ? exact_cache_ : surrogate_cache_;
  if (cache.size() != nodes.size()) {
    cache.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
      cache[i] = mode == DistanceMode::exact ? domain.distance(nodes[i]) : domain.surrogate_distance(nodes[i]);
  }
  return cache;
}

QuadratureGrid cusp_grid(const CuspDomain& domain, const CuspGridOptions& opts) {
  const double g = domain.curve_exponent();
  const GaussRule rule = gauss_legendre(opts.order);

  std::vector<std::array<double, 3>> xpanels;  // lo, hi, band
  {
    double prev = 0.5;
    for (int i = 2; i <= opts.edge_panels + 1; ++i) {
      double next = 1.0 - std::ldexp(1.0, -i);
      xpanels.push_back({prev, next, 0.0});
      prev = next;
    }
    xpanels.push_back({prev, 1.0, 0.0});
    for (int j = 1; j < opts.x_bands; ++j)
      xpanels.push_back({std::ldexp(1.0, -j - 1), std::ldexp(1.0, -j), static_cast<double>(j)});
  }
  std::vector<std::array<double, 2>> tpanels;
  for (int i = 0; i < opts.t_panels; ++i) tpanels.push_back({std::ldexp(1.0, -i - 1), std::ldexp(1.0, -i)});
  tpanels.push_back({0.0, std::ldexp(1.0, -opts.t_panels)});

  QuadratureGrid grid;
  for (const auto& xp : xpanels) {
    double xm = 0.5 * (xp[0] + xp[1]), xr = 0.5 * (xp[1] - xp[0]);
    for (const auto& tp : tpanels) {
      double tm = 0.5 * (tp[0] + tp[1]), tr = 0.5 * (tp[1] - tp[0]);
      for (int sign : {1, -1}) {
        for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
          double x = xm + xr * rule.nodes[a];
          double hw = std::pow(x, g);
          for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
            double t = tm + tr * rule.nodes[b];
            grid.nodes.push_back({x, sign * hw * (1.0 - t)});
            grid.weights.push_back(rule.weights[a] * xr * rule.weights[b] * tr * hw);
          }
        }
        grid.add_cell(static_cast<int>(xp[2]));
      }
    }
  }
  return grid;
}

CuspGridOptions refined(const CuspGridOptions& opts) {
  return {opts.x_bands + 20, opts.t_panels + 10, opts.order + 4, opts.edge_panels + 6};
}

double integrate_with_tail(const QuadratureGrid& grid, const std::vector<double>& values) {
  const int nb = grid.num_bands();
  std::vector<double> bands(std::max(nb, 0), 0.0);
  double untagged = 0.0;
  for (std::size_t c = 0; c < grid.num_cells(); ++c) {
    double s = 0.0;
    for (std::size_t k = grid.cell_offsets[c]; k < grid.cell_offsets[c + 1]; ++k) s += grid.weights[k] * values[k];
    if (grid.band[c] >= 0)
      bands[grid.band[c]] += s;
    else
      untagged += s;
  }
  double total = untagged;
  for (double b : bands) total += b;
  if (nb >= 3) {
    double last = bands[nb - 1], prev = bands[nb - 2];
    if (last != 0.0) {
      double q = last / prev;
      if (!(std::isfinite(q) && q < 1.0 - 1e-9)) return std::numeric_limits<double>::infinity();
      if (q > 0.0) total += last * q / (1.0 - q);
    }
  }
  return total;
}

QuadratureGrid whitney_grid(const CuspDomain& domain, int kmax, int order, WhitneyRegion region) {
  auto dist = [&](Point p) { return domain.distance(p); };
  whitney::WhitneyDecomposition dec = whitney::decompose(dist, whitney::cusp_bounding_box(), kmax);
  // Unequal orders in x and y keep nodes off cube diagonals, which can lie on F.
  const GaussRule rx = gauss_legendre(order), ry = gauss_legendre(order + 1);
  QuadratureGrid grid;
  auto emit = [&](const whitney::DyadicCube& c, bool indicator) {
    double s = dec.side(c.k);
    Point lo = dec.lower_corner(c);
    for (std::size_t a = 0; a < rx.nodes.size(); ++a)
      for (std::size_t b = 0; b < ry.nodes.size(); ++b) {
        Point p{lo.x + 0.5 * s * (1.0 + rx.nodes[a]), lo.y + 0.5 * s * (1.0 + ry.nodes[b])};
        if (indicator && !domain.contains(p)) continue;
        grid.nodes.push_back(p);
        grid.weights.push_back(0.25 * s * s * rx.weights[a] * ry.weights[b]);
      }
    grid.add_cell();
  };
  const bool inside_only = region == WhitneyRegion::inside_domain;
  for (const auto& c : dec.cubes())
    if (!inside_only || domain.contains(dec.center(c))) emit(c, false);
  for (const auto& c : dec.residual()) emit(c, inside_only);
  return grid;
}

QuadratureGrid mesh_grid(const TriangulatedMesh& mesh) {
  const TriangleRule& rule = dunavant_degree4();
  QuadratureGrid grid;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const auto& T = mesh.triangles[t];
    Point a = mesh.vertices[T[0]], b = mesh.vertices[T[1]], c = mesh.vertices[T[2]];
    double area = mesh.triangle_area(t);
    for (int q = 0; q < 6; ++q) {
      const auto& l = rule.bary[q];
      grid.nodes.push_back({l[0] * a.x + l[1] * b.x + l[2] * c.x, l[0] * a.y + l[1] * b.y + l[2] * c.y});
      grid.weights.push_back(area * rule.weights[q]);
    }
    grid.add_cell();
  }
  return grid;
}

}  // namespace cuspdiv
