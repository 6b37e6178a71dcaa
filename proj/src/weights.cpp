#include "cuspdiv/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cuspdiv::weights {

double weighted_lp_integral(const Field& f, const CuspDomain& domain, double gamma, double p,
                            const QuadratureGrid& grid, DistanceMode mode) {
  if (!(p >= 1.0)) throw DomainError("p must be >= 1");
  std::vector<double> values(grid.nodes.size());
  const std::vector<double>* dist = gamma != 0.0 ? &grid.distances(domain, mode) : nullptr;
  for (std::size_t k = 0; k < values.size(); ++k) {
    double v = std::pow(std::abs(f(grid.nodes[k])), p);
    if (dist) v *= std::pow((*dist)[k], gamma * p);
    if (!std::isfinite(v)) throw NumericalError("non-finite integrand at a quadrature node");
    values[k] = v;
  }
  return integrate_with_tail(grid, values);
}

NormEstimate weighted_lp_norm(const Field& f, const CuspDomain& domain, double gamma, double p,
                              const CuspGridOptions& opts, DistanceMode mode) {
  QuadratureGrid coarse = cusp_grid(domain, opts);
  QuadratureGrid fine = cusp_grid(domain, refined(opts));
  double a = std::pow(weighted_lp_integral(f, domain, gamma, p, coarse, mode), 1.0 / p);
  double b = std::pow(weighted_lp_integral(f, domain, gamma, p, fine, mode), 1.0 / p);
  NormEstimate out;
  out.value = a;
  out.rel_error = std::isfinite(b) && b > 0.0 ? std::abs(a - b) / b : std::numeric_limits<double>::infinity();
  return out;
}

double fs_threshold(double alpha, double beta, double p) {
  double q = conjugate(p);
  return (1.0 - beta * q + alpha) / (alpha * q);
}

double ys_threshold(double alpha, double p) {
  double q = conjugate(p);
  return (1.0 - (alpha - 1.0) * q + alpha) / (alpha * q);
}

Field fs_family(const CuspDomain& domain, double beta, double p, double s, DistanceMode mode) {
  if (!(p > 1.0)) throw DomainError("p must exceed 1");
  double q = conjugate(p);
  if (!(beta * q < 1.0)) throw DomainError("f_s requires beta p' < 1");
  if (!(s < fs_threshold(domain.alpha(), beta, p))) throw DomainError("f_s requires s < A");
  const double ex = -s / (p - 1.0), ed = -q * beta;
  if (mode == DistanceMode::surrogate)
    return [domain, ex, ed](Point z) { return std::pow(z.x, ex) * std::pow(domain.surrogate_distance(z), ed); };
  return [domain, ex, ed](Point z) { return std::pow(z.x, ex) * std::pow(domain.distance(z), ed); };
}

Field ys_field(double s) {
  return [s](Point z) { return z.y * std::pow(z.x, -s - 1.0); };
}

ClosedForm fs_norm_closed_form(double alpha, double beta, double p, double s) {
  if (!(p > 1.0)) throw DomainError("p must exceed 1");
  double q = conjugate(p);
  if (!(beta * q < 1.0)) throw DomainError("closed form requires beta p' < 1");
  double A = fs_threshold(alpha, beta, p);
  if (!(s < A)) throw DomainError("norm is infinite for s >= A");
  return {A, 2.0 / ((1.0 - beta * q) * q * (A - s))};
}

ClosedForm ys_norm_closed_form(double alpha, double p, double s) {
  if (!(p > 1.0)) throw DomainError("p must exceed 1");
  double q = conjugate(p);
  double B = ys_threshold(alpha, p);
  if (!(s < B)) throw DomainError("norm is infinite for s >= B");
  return {B, (2.0 / (q + 1.0)) / (q * (B - s))};
}

BallGrid make_ball_grid(const CuspDomain& domain, const Ball& ball, const BallGridOptions& opts) {
  struct Cell {
    double x0, y0, s;
    int depth;
  };
  const GaussRule rx = gauss_legendre(opts.order), ry = gauss_legendre(opts.order + 1);
  const Point c = ball.center;
  const double r = ball.radius;
  BallGrid out;
  out.ball = ball;
  std::vector<Cell> stack{{c.x - r, c.y - r, 2.0 * r, 0}};
  while (!stack.empty()) {
    Cell cell = stack.back();
    stack.pop_back();
    double nx = std::clamp(c.x, cell.x0, cell.x0 + cell.s), ny = std::clamp(c.y, cell.y0, cell.y0 + cell.s);
    if (std::hypot(nx - c.x, ny - c.y) >= r) continue;
    double fx = std::max(std::abs(cell.x0 - c.x), std::abs(cell.x0 + cell.s - c.x));
    double fy = std::max(std::abs(cell.y0 - c.y), std::abs(cell.y0 + cell.s - c.y));
    bool straddles = std::hypot(fx, fy) > r;
    double diag = cell.s * std::sqrt(2.0);
    bool near_f = domain.distance({cell.x0 + 0.5 * cell.s, cell.y0 + 0.5 * cell.s}) < 1.5 * diag;
    bool split = cell.depth < 2 || (near_f && cell.depth < opts.near_depth) || (straddles && cell.depth < opts.rim_depth);
    if (split) {
      double h = 0.5 * cell.s;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) stack.push_back({cell.x0 + a * h, cell.y0 + b * h, h, cell.depth + 1});
      continue;
    }
    for (std::size_t a = 0; a < rx.nodes.size(); ++a)
      for (std::size_t b = 0; b < ry.nodes.size(); ++b) {
        Point p{cell.x0 + 0.5 * cell.s * (1.0 + rx.nodes[a]), cell.y0 + 0.5 * cell.s * (1.0 + ry.nodes[b])};
        if (straddles && std::hypot(p.x - c.x, p.y - c.y) >= r) continue;
        out.nodes.push_back(p);
        out.weights.push_back(0.25 * cell.s * cell.s * rx.weights[a] * ry.weights[b]);
        out.distance.push_back(std::max(domain.distance(p), cell.s / 16.0));
      }
  }
  return out;
}

namespace {

double ratio_from(const std::vector<double>& wts, const std::vector<double>& dist, double mu, double p,
                  const std::vector<std::size_t>* subset) {
  double sw = 0.0, s1 = 0.0, s2 = 0.0;
  const double e2 = -mu / (p - 1.0);
  auto add = [&](std::size_t k) {
    double d = dist[k];
    sw += wts[k];
    s1 += wts[k] * std::pow(d, mu);
    s2 += wts[k] * std::pow(d, e2);
  };
  if (subset)
    for (std::size_t k : *subset) add(k);
  else
    for (std::size_t k = 0; k < wts.size(); ++k) add(k);
  if (!(sw > 0.0)) throw DomainError("ball has empty intersection with the quadrature support");
  double r = (s1 / sw) * std::pow(s2 / sw, p - 1.0);
  if (!std::isfinite(r)) throw NumericalError("non-finite weight average (node on the boundary set)");
  return r;
}

}  // namespace

double ap_ratio(const Ball& ball, const WeightSpec& w, double p, const QuadratureGrid& grid, const CuspDomain& domain) {
  if (!(p > 1.0)) throw DomainError("p must exceed 1");
  std::vector<std::size_t> inside;
  for (std::size_t k = 0; k < grid.nodes.size(); ++k)
    if (norm(grid.nodes[k] - ball.center) < ball.radius) inside.push_back(k);
  if (inside.empty()) throw DomainError("ball has empty intersection with the quadrature support");
  if (w.mode == DistanceMode::surrogate) {
    std::vector<double> d(grid.nodes.size(), 1.0);
    for (std::size_t k : inside) d[k] = domain.surrogate_distance(grid.nodes[k]);
    return ratio_from(grid.weights, d, w.mu, p, &inside);
  }
  return ratio_from(grid.weights, grid.distances(domain, DistanceMode::exact), w.mu, p, &inside);
}

double ap_ratio(const BallGrid& grid, const WeightSpec& w, double p, const CuspDomain& domain) {
  if (!(p > 1.0)) throw DomainError("p must exceed 1");
  if (w.mode == DistanceMode::surrogate) {
    std::vector<double> d(grid.nodes.size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = domain.surrogate_distance(grid.nodes[k]);
    return ratio_from(grid.weights, d, w.mu, p, nullptr);
  }
  return ratio_from(grid.weights, grid.distance, w.mu, p, nullptr);
}

ApSampling default_ap_sampling(const CuspDomain& domain) {
  ApSampling s;
  s.boundary_centers.push_back({0.0, 0.0});
  for (int i = 0; i < 12; ++i) {
    double x = (i + 0.5) / 12.0;
    s.boundary_centers.push_back(domain.upper_point(x));
    s.boundary_centers.push_back({x, -domain.half_width(x)});
  }
  for (int i = 0; i < 7; ++i) s.boundary_centers.push_back({1.0, -0.75 + 0.25 * i});
  for (int j = 2; j <= 10; ++j) s.radii.push_back(std::ldexp(1.0, -j));
  for (int i = 0; i < 8; ++i) {
    double x = (i + 0.5) / 8.0;
    for (double f : {-0.5, -0.15, 0.15, 0.5}) s.interior_centers.push_back({x, f * domain.half_width(x)});
  }
  s.interior_factors = {0.25, 0.5, 0.9};
  return s;
}

ApEvaluator::ApEvaluator(const CuspDomain& domain, ApSampling sampling)
    : domain_(domain), sampling_(std::move(sampling)) {}

void ApEvaluator::build() {
  if (!grids_.empty()) return;
  for (Point c : sampling_.boundary_centers)
    for (double r : sampling_.radii) {
      grids_.push_back(make_ball_grid(domain_, {c, r}, sampling_.resolution));
      boundary_.push_back(true);
    }
  for (Point c : sampling_.interior_centers) {
    double d = domain_.distance(c);
    for (double f : sampling_.interior_factors) {
      grids_.push_back(make_ball_grid(domain_, {c, f * d}, sampling_.resolution));
      boundary_.push_back(false);
    }
  }
}

double decade_growth(const std::vector<BallRecord>& records) {
  if (records.size() < 2) return 1.0;
  double mx = 0, my = 0;
  for (const auto& r : records) {
    mx += std::log10(r.radius);
    my += std::log(r.ratio);
  }
  mx /= records.size();
  my /= records.size();
  double sxy = 0, sxx = 0;
  for (const auto& r : records) {
    double dx = std::log10(r.radius) - mx;
    sxy += dx * (std::log(r.ratio) - my);
    sxx += dx * dx;
  }
  return std::exp(-sxy / sxx);
}

ApEstimate ApEvaluator::estimate(const WeightSpec& w, double p) {
  build();
  ApEstimate out;
  out.trend = 0.0;
  for (std::size_t b = 0; b < grids_.size(); ++b) {
    double ratio = ap_ratio(grids_[b], w, p, domain_);
    out.per_ball.push_back({grids_[b].ball.center, grids_[b].ball.radius, ratio, boundary_[b]});
    out.value = std::max(out.value, ratio);
  }
  const std::size_t nr = sampling_.radii.size();
  for (std::size_t c = 0; c < sampling_.boundary_centers.size(); ++c) {
    std::vector<BallRecord> recs(out.per_ball.begin() + c * nr, out.per_ball.begin() + (c + 1) * nr);
    out.trend = std::max(out.trend, decade_growth(recs));
  }
  if (sampling_.boundary_centers.empty() || nr < 2) out.trend = 1.0;
  return out;
}

ApEstimate estimate_ap_constant(const CuspDomain& domain, const WeightSpec& w, double p, const ApSampling& sampling) {
  ApEvaluator ev(domain, sampling);
  return ev.estimate(w, p);
}

}  // namespace cuspdiv::weights
