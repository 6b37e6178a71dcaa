#include "cuspdiv/geometry.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <limits>
#include <vector>

namespace cuspdiv {

std::string to_string(ArcKind kind) {
  switch (kind) {
    case ArcKind::upper_curve:
      return "upper";
    case ArcKind::lower_curve:
      return "lower";
    case ArcKind::right_edge:
      return "right";
  }
  return "?";
}

ArcKind arc_kind_from_string(const std::string& tag) {
  if (tag == "upper") return ArcKind::upper_curve;
  if (tag == "lower") return ArcKind::lower_curve;
  if (tag == "right") return ArcKind::right_edge;
  throw DomainError("unknown arc tag: " + tag);
}

CuspDomain::CuspDomain(double alpha) : alpha_(alpha), gamma_(1.0 / alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0,1]");
}

std::array<BoundaryArc, 3> CuspDomain::boundary_arcs() const {
  return {BoundaryArc{ArcKind::upper_curve, 0.0, 1.0}, BoundaryArc{ArcKind::lower_curve, 0.0, 1.0},
          BoundaryArc{ArcKind::right_edge, -1.0, 1.0}};
}

bool CuspDomain::contains(Point p) const {
  return p.x > 0.0 && p.x < 1.0 && std::abs(p.y) < std::pow(p.x, gamma_);
}

double CuspDomain::surrogate_distance(Point p) const {
  if (!contains(p)) throw DomainError("surrogate distance requested outside the domain");
  return std::pow(p.x, gamma_) - std::abs(p.y);
}

// Nearest point of the upper curve {(t, t^g) : 0 <= t <= 1} to q.
CuspDomain::CurveFoot CuspDomain::upper_curve_foot(Point q) const {
  const double g = gamma_;
  if (g == 1.0) {
    double t = std::clamp(0.5 * (q.x + q.y), 0.0, 1.0);
    return {t, std::hypot(q.x - t, q.y - t)};
  }
  auto phi = [&](double t) {
    double dx = t - q.x, dy = std::pow(t, g) - q.y;
    return dx * dx + dy * dy;
  };
  // Any minimizer t* satisfies |t* - q.x| <= |q - curve(t*)| <= D0.
  double xc = std::clamp(q.x, 0.0, 1.0);
  double d0 = std::sqrt(phi(xc));
  double lo = std::max(0.0, q.x - d0), hi = std::min(1.0, q.x + d0);
  if (!(hi > lo)) return {xc, d0};

  constexpr int kSamples = 24;
  double step = (hi - lo) / kSamples;
  int best = 0;
  double fbest = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kSamples; ++i) {
    double f = phi(lo + i * step);
    if (f < fbest) {
      fbest = f;
      best = i;
    }
  }
  double a = lo + std::max(0, best - 1) * step;
  double b = lo + std::min(kSamples, best + 1) * step;

  // Golden-section contraction of the sampled bracket.
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = phi(c), fd = phi(d);
  for (int it = 0; it < 8; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = phi(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = phi(d);
    }
  }
  double t = fc < fd ? c : d;
  double ft = std::min(fc, fd);

  // Safeguarded Newton polish on phi'(t) = 0 inside [a, b].
  for (int it = 0; it < 40; ++it) {
    if (t <= 0.0) break;
    double tg1 = std::pow(t, g - 1.0);
    double tg = tg1 * t;
    double r = tg - q.y;
    double d1 = 2.0 * (t - q.x) + 2.0 * r * g * tg1;
    double d2 = 2.0 + 2.0 * g * g * tg1 * tg1 + 2.0 * r * g * (g - 1.0) * tg1 / t;
    double tn = (d2 > 0.0) ? t - d1 / d2 : (d1 > 0.0 ? 0.5 * (a + t) : 0.5 * (t + b));
    if (!(tn > a && tn < b)) tn = d1 > 0.0 ? 0.5 * (a + t) : 0.5 * (t + b);
    if (d1 > 0.0)
      b = t;
    else
      a = t;
    double fn = phi(tn);
    double dt = std::abs(tn - t);
    if (fn <= ft) {
      t = tn;
      ft = fn;
    }
    if (dt <= 1e-13 * std::max(t, 1e-300) || b - a <= 1e-14 * std::max(t, 1e-300)) break;
  }
  for (double e : {lo, hi}) {
    double fe = phi(e);
    if (fe < ft) {
      ft = fe;
      t = e;
    }
  }
  return {t, std::sqrt(ft)};
}

Point CuspDomain::nearest_boundary_point(Point p, ArcKind* arc) const {
  // For y >= 0 the upper curve is never farther than the lower one.
  bool lower = p.y < 0.0;
  Point q{p.x, std::abs(p.y)};
  CurveFoot foot = upper_curve_foot(q);
  double ey = std::clamp(p.y, -1.0, 1.0);
  double edge = std::hypot(p.x - 1.0, p.y - ey);
  if (edge < foot.dist) {
    if (arc) *arc = ArcKind::right_edge;
    return {1.0, ey};
  }
  if (arc) *arc = lower ? ArcKind::lower_curve : ArcKind::upper_curve;
  double yt = std::pow(foot.t, gamma_);
  return {foot.t, lower ? -yt : yt};
}

double CuspDomain::distance(Point p) const {
  double ey = std::clamp(p.y, -1.0, 1.0);
  double edge = std::hypot(p.x - 1.0, p.y - ey);
  CurveFoot foot = upper_curve_foot({p.x, std::abs(p.y)});
  return std::min(edge, foot.dist);
}

double CuspDomain::upper_curve_measure(Point c, double r) const {
  const double g = gamma_;
  // |curve(t) - c| >= |t - c.x|, so the ball only meets t in [c.x - r, c.x + r].
  double lo = std::max(0.0, c.x - r), hi = std::min(1.0, c.x + r);
  if (!(hi > lo)) return 0.0;
  auto psi = [&](double t) {
    double dx = t - c.x, dy = std::pow(t, g) - c.y;
    return dx * dx + dy * dy - r * r;
  };
  auto speed = [&](double t) {
    double s = g * std::pow(t, g - 1.0);
    return std::sqrt(1.0 + s * s);
  };
  constexpr int kSamples = 512;
  std::vector<double> cuts{lo};
  double prev = psi(lo);
  for (int i = 1; i <= kSamples; ++i) {
    double t = lo + (hi - lo) * i / kSamples;
    double cur = psi(t);
    if ((prev < 0.0) != (cur < 0.0)) {
      double a = lo + (hi - lo) * (i - 1) / kSamples;
      std::uintmax_t iters = 200;
      auto tol = [](double u, double v) { return std::abs(u - v) <= 1e-15 * std::max(1.0, std::abs(u)); };
      auto root = boost::math::tools::toms748_solve(psi, a, t, prev, cur, tol, iters);
      cuts.push_back(0.5 * (root.first + root.second));
    }
    prev = cur;
  }
  cuts.push_back(hi);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double a = cuts[k], b = cuts[k + 1];
    if (!(b > a)) continue;
    if (psi(0.5 * (a + b)) >= 0.0) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(speed, a, b, 20, 1e-12);
  }
  return total;
}

double CuspDomain::boundary_measure(Point center, double r) const {
  if (!(r > 0.0)) throw DomainError("radius must be positive");
  if (!on_boundary(center, 1e-10)) throw DomainError("center is not on the boundary");
  double total = 0.0;
  double dx = 1.0 - center.x;
  if (std::abs(dx) < r) {
    double half = std::sqrt(r * r - dx * dx);
    double a = std::max(-1.0, center.y - half), b = std::min(1.0, center.y + half);
    if (b > a) total += b - a;
  }
  total += upper_curve_measure(center, r);
  total += upper_curve_measure({center.x, -center.y}, r);
  return total;
}

}  // namespace cuspdiv
