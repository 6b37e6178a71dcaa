#include "cuspdiv/experiments.hpp"

#include <algorithm>
#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <future>
#include <limits>
#include <ostream>

#include "cuspdiv/discretization.hpp"
#include "cuspdiv/weights.hpp"

namespace cuspdiv::experiments {

double SweepRecord::param(const std::string& name) const {
  for (const auto& [k, v] : params)
    if (k == name) return v;
  throw DomainError("no parameter " + name);
}

double SweepRecord::value(const std::string& name) const {
  for (const auto& m : values)
    if (m.name == name) return m.divergent ? std::numeric_limits<double>::infinity() : m.value;
  throw DomainError("no measurement " + name);
}

namespace {

void put(std::ostream& os, double v) {
  if (std::isinf(v)) {
    os << (v > 0 ? "inf" : "-inf");
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  os << buf;
}

// (kappa, c, rms) of the linear fit in log(T - s) for fixed T.
struct LinearFit {
  double kappa, c, rms;
};

LinearFit linear_fit(const std::vector<std::pair<double, double>>& pts, double T) {
  double n = static_cast<double>(pts.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [s, y] : pts) {
    double u = std::log(T - s), v = std::log(y);
    sx += u;
    sy += v;
    sxx += u * u;
    sxy += u * v;
  }
  double den = n * sxx - sx * sx;
  double slope = (n * sxy - sx * sy) / den;
  double c = (sy - slope * sx) / n;
  double ss = 0;
  for (auto [s, y] : pts) {
    double e = std::log(y) - (slope * std::log(T - s) + c);
    ss += e * e;
  }
  return {-slope, c, std::sqrt(ss / n)};
}

Measurement measure(const std::string& name, double v) {
  if (!std::isfinite(v)) return {name, 0.0, true};
  return {name, v, false};
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  std::vector<std::string> pcols, vcols;
  for (const auto& r : records) {
    for (const auto& [k, v] : r.params)
      if (std::find(pcols.begin(), pcols.end(), k) == pcols.end()) pcols.push_back(k);
    for (const auto& m : r.values)
      if (std::find(vcols.begin(), vcols.end(), m.name) == vcols.end()) vcols.push_back(m.name);
  }
  os << "family,provenance";
  for (const auto& c : pcols) os << ',' << c;
  for (const auto& c : vcols) os << ',' << c;
  os << '\n';
  for (const auto& r : records) {
    os << r.family << ',' << r.provenance;
    for (const auto& c : pcols) {
      os << ',';
      auto it = std::find_if(r.params.begin(), r.params.end(), [&](const auto& kv) { return kv.first == c; });
      if (it != r.params.end()) put(os, it->second);
    }
    for (const auto& c : vcols) {
      os << ',';
      auto it = std::find_if(r.values.begin(), r.values.end(), [&](const Measurement& m) { return m.name == c; });
      if (it != r.values.end()) put(os, it->divergent ? std::numeric_limits<double>::infinity() : it->value);
    }
    os << '\n';
  }
}

FitResult rate_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 6) throw DomainError("rate fit needs at least 6 points");
  double smax = -std::numeric_limits<double>::infinity(), smin = -smax;
  for (auto [s, y] : points) {
    if (!(y > 0.0) || !std::isfinite(y)) throw DomainError("rate fit needs positive finite values");
    smax = std::max(smax, s);
    smin = std::min(smin, s);
  }
  const double span = smax - smin;
  if (!(span > 0.0)) throw DomainError("rate fit needs distinct abscissae");

  // T = smax + span e^u, started from u = 0 (gap = span).
  auto objective = [&](double u) { return linear_fit(points, smax + span * std::exp(u)).rms; };
  const double lo = std::log(1e-8), hi = std::log(1e3);
  std::uintmax_t iters = 200;
  auto [u, rms] = boost::math::tools::brent_find_minima(objective, lo, hi, 50, iters);
  if (iters >= 200) throw NumericalError("rate fit: no convergence within 200 iterations");
  if (u - lo < 1e-3 || hi - u < 1e-3) throw NumericalError("rate fit: threshold runs to the search bracket");

  // Levenberg-Marquardt polish in (kappa, T, c); Brent stops near sqrt(eps) in T.
  const int n = static_cast<int>(points.size());
  double T = smax + span * std::exp(u);
  LinearFit lf = linear_fit(points, T);
  Eigen::Vector3d x(lf.kappa, T, lf.c);
  auto residuals = [&](const Eigen::Vector3d& v, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
    r.resize(n);
    if (J) J->resize(n, 3);
    for (int i = 0; i < n; ++i) {
      double g = v[1] - points[i].first;
      r[i] = std::log(points[i].second) + v[0] * std::log(g) - v[2];
      if (J) J->row(i) << std::log(g), v[0] / g, -1.0;
    }
    return r.squaredNorm();
  };
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  double cost = residuals(x, r, &J), lambda = 1e-3;
  int it = 0;
  for (; it < 100 && cost > 0.0; ++it) {
    Eigen::Matrix3d H = J.transpose() * J;
    Eigen::Vector3d g = J.transpose() * r;
    Eigen::Matrix3d D = H.diagonal().asDiagonal();
    Eigen::Vector3d step = (H + lambda * D).ldlt().solve(-g);
    Eigen::Vector3d y = x + step;
    if (!(y[1] > smax)) {
      lambda *= 10;
      continue;
    }
    Eigen::VectorXd ry;
    double cy = residuals(y, ry, nullptr);
    if (cy < cost) {
      double rel = (cost - cy) / cost;
      x = y;
      cost = residuals(x, r, &J);
      lambda = std::max(lambda / 10, 1e-12);
      if (rel < 1e-14 || step.norm() < 1e-15 * x.norm()) break;
    } else {
      lambda *= 10;
      if (lambda > 1e12) break;
    }
  }

  FitResult out;
  out.kappa = x[0];
  out.threshold = x[1];
  out.constant = x[2];
  out.residual = std::sqrt(cost / n);
  out.points = n;
  out.iterations = static_cast<int>(iters) + it;
  return out;
}

std::vector<double> geometric_grid(double threshold, double span, int count) {
  std::vector<double> s;
  for (int i = 1; i <= count; ++i) s.push_back(threshold - std::ldexp(span, -i));
  return s;
}

OptimalitySweep optimality_sweep(double alpha, double beta, double p, const OptimalityOptions& opts) {
  if (!(p > 1.0)) throw DomainError("p must exceed 1");
  const double q = weights::conjugate(p);
  if (!(beta * q < 1.0)) throw DomainError("beta p' must be below 1");
  CuspDomain d(alpha);
  OptimalitySweep out;
  out.alpha = alpha;
  out.beta = beta;
  out.p = p;
  out.A = weights::fs_threshold(alpha, beta, p);
  out.B = weights::ys_threshold(alpha, p);

  QuadratureGrid grid = cusp_grid(d, opts.grid);
  // Fill both distance caches before the grid is shared across threads.
  grid.distances(d, DistanceMode::exact);
  grid.distances(d, DistanceMode::surrogate);

  auto fs_norm = [&](double s, DistanceMode mode) {
    try {
      return weights::weighted_lp_integral(weights::fs_family(d, beta, p, s, mode), d, beta, p, grid, mode);
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  auto ys_norm = [&](double s) {
    try {
      return weights::weighted_lp_integral(weights::ys_field(s), d, 0.0, q, grid);
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const std::vector<double> sa = geometric_grid(out.A, opts.span, opts.count);
  const std::vector<double> sb = geometric_grid(out.B, opts.span, opts.count);
  const std::vector<double> sc = geometric_grid(std::min(out.A, out.B), opts.span, opts.count);

  std::vector<std::future<SweepRecord>> fa, fb;
  for (double s : sa)
    fa.push_back(std::async(std::launch::async, [&, s] {
      SweepRecord r{"fs", "quadrature", {{"alpha", alpha}, {"beta", beta}, {"p", p}, {"s", s}}, {}};
      r.values.push_back(measure("norm_p_surrogate", fs_norm(s, DistanceMode::surrogate)));
      r.values.push_back(measure("norm_p_exact", fs_norm(s, DistanceMode::exact)));
      r.values.push_back(measure("closed_form", weights::fs_norm_closed_form(alpha, beta, p, s).value));
      return r;
    }));
  for (double s : sb)
    fb.push_back(std::async(std::launch::async, [&, s] {
      SweepRecord r{"ys", "quadrature", {{"alpha", alpha}, {"p", p}, {"s", s}}, {}};
      r.values.push_back(measure("norm_pprime", ys_norm(s)));
      r.values.push_back(measure("closed_form", weights::ys_norm_closed_form(alpha, p, s).value));
      return r;
    }));

  std::vector<std::pair<double, double>> pa, pb;
  for (auto& f : fa) {
    out.records.push_back(f.get());
    const SweepRecord& r = out.records.back();
    if (std::isfinite(r.value("norm_p_surrogate"))) pa.push_back({r.param("s"), r.value("norm_p_surrogate")});
  }
  for (auto& f : fb) {
    out.records.push_back(f.get());
    const SweepRecord& r = out.records.back();
    if (std::isfinite(r.value("norm_pprime"))) pb.push_back({r.param("s"), r.value("norm_pprime")});
  }
  out.fit_A = rate_fit(pa);
  out.fit_B = rate_fit(pb);

  for (double s : sc) {
    ChainRow c;
    c.s = s;
    c.lhs = std::pow(fs_norm(s, DistanceMode::surrogate), (p - 1.0) / p);
    c.rhs = s * std::pow(ys_norm(s), 1.0 / q) + 1.0;
    c.comparison = (out.B - s) / (out.A - s);
    out.chain.push_back(c);
  }
  return out;
}

std::vector<NecessityRow> necessity_demo(double alpha, const std::vector<double>& levels,
                                         const std::vector<double>& ts) {
  if (!(alpha > 0.5 && alpha <= 1.0)) throw DomainError("alpha must lie in (1/2, 1] for the discrete right inverse");
  CuspDomain d(alpha);
  std::vector<NecessityRow> rows;
  for (double h : levels) {
    fem::P2Space s(d, generate_graded_mesh(d, h, 1.0 / alpha));
    for (double t : ts) {
      if (!(t > 0.0 && t < 1.0)) throw DomainError("indicator cut t must lie in (0, 1)");
      auto f = fem::mean_corrected(s, fem::sample(s, fem::ScalarFn([t](Point z) { return z.x < t ? 1.0 : 0.0; })));
      fem::DivSolution sol = fem::solve_div_right_inverse(s, alpha, f);
      double un = fem::h1_norm(sol.u);
      rows.push_back({h, t, un / fem::weighted_l2(s, f, alpha - 1.0), un / fem::weighted_l2(s, f, 0.0),
                      sol.constraint_residual});
    }
  }
  return rows;
}

std::vector<SweepRecord> to_records(const std::vector<NecessityRow>& rows, double alpha) {
  std::vector<SweepRecord> out;
  for (const auto& r : rows)
    out.push_back({"necessity",
                   "fem",
                   {{"alpha", alpha}, {"h", r.h}, {"t", r.t}},
                   {measure("weighted_ratio", r.weighted_ratio), measure("unweighted_ratio", r.unweighted_ratio),
                    measure("constraint_residual", r.constraint_residual)}});
  return out;
}

}  // namespace cuspdiv::experiments
