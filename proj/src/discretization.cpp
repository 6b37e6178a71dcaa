#include "cuspdiv/discretization.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <random>

#include "cuspdiv/weights.hpp"

namespace cuspdiv::fem {

namespace {

void require_saddle_alpha(double alpha) {
  if (!(alpha > 0.5 && alpha <= 1.0)) throw DomainError("alpha must exceed 1/2 (and be at most 1) for the saddle system");
}

// [A B^T 0; B 0 c; 0 c^T 0], the last row/column only when c is non-empty.
SpMat kkt(const SpMat& A, const SpMat& B, const Vec& c) {
  const int nu = static_cast<int>(A.rows()), np = static_cast<int>(B.rows());
  const int extra = c.size() > 0 ? 1 : 0;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(A.nonZeros() + 2 * B.nonZeros() + 2 * np);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < B.outerSize(); ++k)
    for (SpMat::InnerIterator it(B, k); it; ++it) {
      trip.emplace_back(nu + it.row(), it.col(), it.value());
      trip.emplace_back(it.col(), nu + it.row(), it.value());
    }
  if (extra)
    for (int i = 0; i < np; ++i) {
      trip.emplace_back(nu + i, nu + np, c[i]);
      trip.emplace_back(nu + np, nu + i, c[i]);
    }
  SpMat K(nu + np + extra, nu + np + extra);
  K.setFromTriplets(trip.begin(), trip.end());
  K.makeCompressed();
  return K;
}

struct SaddleSolver {
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  int nu = 0, np = 0, extra = 0;

  SaddleSolver(const SaddleSystem& sys, const Vec& c) {
    nu = static_cast<int>(sys.A.rows());
    np = static_cast<int>(sys.B.rows());
    extra = c.size() > 0 ? 1 : 0;
    SpMat K = kkt(sys.A, sys.B, c);
    lu.compute(K);
    if (lu.info() != Eigen::Success) throw NumericalError("singular saddle system");
  }
  Vec solve(const Vec& rhs_u, const Vec& rhs_p) {
    Vec rhs = Vec::Zero(nu + np + extra);
    rhs.head(nu) = rhs_u;
    rhs.segment(nu, np) = rhs_p;
    Vec x = lu.solve(rhs);
    if (!x.allFinite()) throw NumericalError("saddle solve produced non-finite values");
    return x;
  }
};

Vec ones(int n) { return Vec::Ones(n); }

double max_abs_product(const SpMat& B, const Vec& u) {
  Vec s = Vec::Zero(B.rows());
  for (int k = 0; k < B.outerSize(); ++k)
    for (SpMat::InnerIterator it(B, k); it; ++it) s[it.row()] += std::abs(it.value() * u[it.col()]);
  return s.size() ? s.maxCoeff() : 0.0;
}

// Value and gradient of a P2 field (component c) at node q of triangle t.
void p2_eval(const DiscreteField& f, int t, int q, int c, double& value, Point& grad) {
  std::array<double, 6> v;
  std::array<Point, 6> g;
  f.space->shape(t, q, v, g);
  const int off = f.kind == SpaceKind::vector_p2 ? c * f.space->num_nodes() : 0;
  value = 0.0;
  grad = {0.0, 0.0};
  for (int i = 0; i < 6; ++i) {
    double a = f.coeffs[off + f.space->dofs(t)[i]];
    value += a * v[i];
    grad = grad + a * g[i];
  }
}

}  // namespace

SaddleSystem assemble(const P2Space& s, double alpha, double weight_scale) {
  require_saddle_alpha(alpha);
  if (!(weight_scale > 0.0)) throw DomainError("weight scale must be positive");
  SaddleSystem sys;
  sys.alpha = alpha;
  sys.weight_scale = weight_scale;
  sys.velocity_size = 2 * s.num_nodes();
  sys.restriction = zero_bc_restriction(s);
  const double e = 2.0 * alpha - 2.0;
  sys.A = sys.restriction.restrict_both(vector_stiffness(s, 0.0));
  sys.B = sys.restriction.restrict_columns(divergence_matrix(s, e, weight_scale));
  sys.Mw = p1_mass(s, e, weight_scale);
  return sys;
}

std::vector<double> sample(const P2Space& s, const ScalarFn& f) {
  std::vector<double> out;
  out.reserve(s.quadrature().nodes.size());
  for (Point p : s.quadrature().nodes) out.push_back(f(p));
  return out;
}

std::vector<Point> sample(const P2Space& s, const VectorFn& f) {
  std::vector<Point> out;
  out.reserve(s.quadrature().nodes.size());
  for (Point p : s.quadrature().nodes) out.push_back(f(p));
  return out;
}

std::vector<double> mean_corrected(const P2Space& s, const std::vector<double>& f) {
  const auto& w = s.quadrature().weights;
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    num += w[k] * f[k];
    den += w[k];
  }
  std::vector<double> out(f);
  for (double& v : out) v -= num / den;
  return out;
}

double h1_seminorm(const DiscreteField& u) {
  const P2Space& s = *u.space;
  const auto& w = s.quadrature().weights;
  const int nc = u.kind == SpaceKind::vector_p2 ? 2 : 1;
  double sum = 0.0;
  for (int t = 0; t < s.num_triangles(); ++t)
    for (int q = 0; q < 6; ++q)
      for (int c = 0; c < nc; ++c) {
        double v;
        Point g;
        p2_eval(u, t, q, c, v, g);
        sum += w[6 * t + q] * dot(g, g);
      }
  return std::sqrt(sum);
}

double h1_norm(const DiscreteField& u) {
  const P2Space& s = *u.space;
  const auto& w = s.quadrature().weights;
  const int nc = u.kind == SpaceKind::vector_p2 ? 2 : 1;
  double sum = 0.0;
  for (int t = 0; t < s.num_triangles(); ++t)
    for (int q = 0; q < 6; ++q)
      for (int c = 0; c < nc; ++c) {
        double v;
        Point g;
        p2_eval(u, t, q, c, v, g);
        sum += w[6 * t + q] * (v * v + dot(g, g));
      }
  return std::sqrt(sum);
}

double weighted_l2(const P2Space& s, const std::vector<double>& f, double gamma) {
  const auto wt = s.weight(2.0 * gamma);
  const auto& w = s.quadrature().weights;
  double sum = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) sum += w[k] * wt[k] * f[k] * f[k];
  return std::sqrt(sum);
}

DivSolution solve_div_right_inverse(const P2Space& s, double alpha, const std::vector<double>& f) {
  SaddleSystem sys = assemble(s, alpha);
  const auto& w = s.quadrature().weights;
  if (f.size() != w.size()) throw DomainError("f must be sampled at the quadrature nodes");
  double mean = 0.0, mass = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    mean += w[k] * f[k];
    mass += w[k] * std::abs(f[k]);
  }
  if (std::abs(mean) > 1e-8 * std::max(mass, 1e-300)) throw DomainError("incompatible f: nonzero mean");

  DivSolution out;
  out.u = {SpaceKind::vector_p2, Vec::Zero(sys.velocity_size), &s, true};
  out.multiplier = {SpaceKind::pressure_p1, Vec::Zero(s.num_vertices()), &s, false};
  Vec F = p1_load(s, f, 2.0 * alpha - 2.0);
  if (F.norm() == 0.0) return out;

  const bool constrained = alpha == 1.0;
  SaddleSolver solver(sys, constrained ? Vec(sys.Mw * ones(s.num_vertices())) : Vec());
  Vec x = solver.solve(Vec::Zero(solver.nu), F);
  Vec u = x.head(solver.nu), lam = x.segment(solver.nu, solver.np);
  out.u.coeffs = sys.restriction.prolong(u, sys.velocity_size);
  out.multiplier.coeffs = lam;
  out.constraint_residual = (sys.B * u - F).norm() / F.norm();
  Vec Au = sys.A * u;
  out.optimality_residual = (Au + sys.B.transpose() * lam).norm() / std::max(Au.norm(), 1e-300);
  return out;
}

StokesSolution solve_stokes(const P2Space& s, double alpha, const VectorFn& f, double weight_scale) {
  SaddleSystem sys = assemble(s, alpha, weight_scale);
  std::vector<Point> fs = sample(s, f);
  Vec Ffull = vector_load(s, fs);
  Vec F(sys.restriction.reduced_size());
  for (int k = 0; k < F.size(); ++k) F[k] = Ffull[sys.restriction.full_of_reduced[k]];

  StokesSolution out;
  out.u = {SpaceKind::vector_p2, Vec::Zero(sys.velocity_size), &s, true};
  out.q = {SpaceKind::pressure_p1, Vec::Zero(s.num_vertices()), &s, false};
  out.p.assign(s.quadrature().nodes.size(), 0.0);
  {
    const auto& w = s.quadrature().weights;
    double n2 = 0.0;
    for (std::size_t k = 0; k < fs.size(); ++k) n2 += w[k] * dot(fs[k], fs[k]);
    out.load_norm = std::sqrt(n2);
  }
  if (F.norm() == 0.0) return out;

  const bool constrained = alpha == 1.0;
  SaddleSolver solver(sys, constrained ? Vec(sys.Mw * ones(s.num_vertices())) : Vec());
  Vec x = solver.solve(F, Vec::Zero(solver.np));
  Vec u = x.head(solver.nu), q = x.segment(solver.nu, solver.np);
  out.u.coeffs = sys.restriction.prolong(u, sys.velocity_size);
  out.q.coeffs = q;

  Vec Bu = sys.B * u;
  double scale = max_abs_product(sys.B, u);
  out.divergence_residual = scale > 0.0 ? Bu.cwiseAbs().maxCoeff() / scale : 0.0;
  out.energy = u.dot(sys.A * u);
  out.load_work = F.dot(u);

  const auto wt = s.weight(2.0 * alpha - 2.0, weight_scale);
  const auto& w = s.quadrature().weights;
  double qm = 0.0, area = 0.0;
  for (int t = 0; t < s.num_triangles(); ++t)
    for (int qn = 0; qn < 6; ++qn) {
      int k = 6 * t + qn;
      double qv = out.q.value_at(t, qn);
      out.p[k] = qv * wt[k];
      qm += w[k] * qv;
      area += w[k];
    }
  out.unweighted_pressure_mean = qm / area;
  return out;
}

LanczosResult lanczos_largest(const std::function<Vec(const Vec&)>& op, const SpMat& W, int n, int max_iterations,
                              double tol, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Vec r(n);
  for (int i = 0; i < n; ++i) r[i] = gauss(rng);
  Vec v = op(r);
  double nv = std::sqrt(std::max(0.0, v.dot(W * v)));
  if (!(nv > 0.0)) throw NumericalError("Lanczos start vector collapsed");
  v /= nv;

  std::vector<Vec> V, WV;
  std::vector<double> al, be;
  LanczosResult out;
  Eigen::VectorXd s;
  bool converged = false;
  for (int j = 0; j < max_iterations; ++j) {
    V.push_back(v);
    WV.push_back(W * v);
    Vec w = op(v);
    al.push_back(w.dot(WV[j]));
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= j; ++i) w -= w.dot(WV[i]) * V[i];
    double b = std::sqrt(std::max(0.0, w.dot(W * w)));

    const int m = j + 1;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) T(i, i) = al[i];
    for (int i = 0; i + 1 < m; ++i) T(i, i + 1) = T(i + 1, i) = be[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    out.theta = es.eigenvalues()[m - 1];
    s = es.eigenvectors().col(m - 1);
    out.iterations = m;
    double est = std::abs(b * s[m - 1]) / std::max(std::abs(out.theta), 1e-300);
    if (est < tol || b <= 1e-14 * std::abs(out.theta) || m >= n) {
      converged = true;
      break;
    }
    be.push_back(b);
    v = w / b;
  }
  out.x = Vec::Zero(n);
  for (int i = 0; i < out.iterations; ++i) out.x += s[i] * V[i];
  out.x /= std::sqrt(out.x.dot(W * out.x));
  Vec res = op(out.x) - out.theta * out.x;
  out.residual = std::sqrt(std::max(0.0, res.dot(W * res))) / std::max(std::abs(out.theta), 1e-300);
  if (!converged && out.residual > 1e-8) throw NumericalError("eigen-solver stagnation");
  return out;
}

EigenReport discrete_infsup(const P2Space& s, double alpha, const InfSupOptions& opts) {
  SaddleSystem sys = assemble(s, alpha);
  const int np = s.num_vertices();
  Vec c = opts.deflate ? Vec(sys.Mw * ones(np)) : Vec();
  std::unique_ptr<SaddleSolver> solver;
  try {
    solver = std::make_unique<SaddleSolver>(sys, c);
  } catch (const NumericalError&) {
    throw NumericalError("zero inf-sup eigenvalue: the pressure space meets the kernel of B^T");
  }
  auto op = [&](const Vec& q) -> Vec {
    Vec x = solver->solve(Vec::Zero(solver->nu), -(sys.Mw * q));
    return x.segment(solver->nu, np);
  };
  LanczosResult L = lanczos_largest(op, sys.Mw, np, opts.max_iterations, opts.tol);
  double lambda = 1.0 / L.theta;
  if (!(L.theta > 0.0) || !std::isfinite(lambda) || lambda < 1e-10)
    throw NumericalError("zero inf-sup eigenvalue: the pressure space meets the kernel of B^T");
  return {std::sqrt(lambda), L.iterations, L.residual};
}

double dense_infsup(const SaddleSystem& sys, bool deflate) {
  const int np = static_cast<int>(sys.B.rows());
  if (np > 400) throw DomainError("dense inf-sup oracle is limited to 400 pressure unknowns");
  Eigen::SimplicialLLT<SpMat> chol(sys.A);
  if (chol.info() != Eigen::Success) throw NumericalError("velocity stiffness is not positive definite");
  Eigen::MatrixXd Bt = Eigen::MatrixXd(sys.B.transpose());
  Eigen::MatrixXd X = chol.solve(Bt);
  Eigen::MatrixXd S = sys.B * X;
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::MatrixXd M = Eigen::MatrixXd(sys.Mw);
  if (deflate) {
    Vec c = M * Vec::Ones(np);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(c);
    Eigen::MatrixXd Q = qr.householderQ();
    Eigen::MatrixXd Z = Q.rightCols(np - 1);
    S = Z.transpose() * S * Z;
    M = Z.transpose() * M * Z;
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, M);
  return std::sqrt(std::max(0.0, es.eigenvalues()[0]));
}

double max_pressure_exponent(double alpha) { return 2.0 / (3.0 - 2.0 * alpha); }

PressureNorm pressure_lr_norm(const P2Space& s, const std::vector<double>& p, double r, double alpha) {
  if (!(alpha > 0.5 && alpha <= 1.0)) throw DomainError("alpha must lie in (1/2, 1]");
  if (!(r >= 1.0 && r < max_pressure_exponent(alpha))) throw DomainError("r must satisfy 1 <= r < 2/(3 - 2 alpha)");
  const auto& w = s.quadrature().weights;
  const auto& d = s.distance();
  const double e = 2.0 * (alpha - 1.0) * r / (2.0 - r);
  double lr = 0.0, l2w = 0.0, dint = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    lr += w[k] * std::pow(std::abs(p[k]), r);
    l2w += w[k] * p[k] * p[k] * std::pow(d[k], 2.0 * (1.0 - alpha));
    dint += w[k] * std::pow(d[k], e);
  }
  return {std::pow(lr, 1.0 / r), std::sqrt(l2w) * std::pow(dint, (2.0 - r) / (2.0 * r))};
}

Disk default_ball(const CuspDomain& domain) {
  Point c{0.7, 0.0};
  return {c, domain.distance(c)};
}

ConstantEstimate korn_best_constant(const P2Space& s, double alpha, double beta, const Disk& ball) {
  if (!(ball.radius > 0.0)) throw DomainError("ball radius must be positive");
  SpMat N = vector_stiffness(s, 2.0 * (1.0 - beta));
  SpMat D = strain_stiffness(s, 2.0 * (alpha - beta)) + vector_ball_mass(s, ball.center, ball.radius);
  Eigen::SimplicialLLT<SpMat> chol(D);
  if (chol.info() != Eigen::Success) throw NumericalError("denominator matrix singular (ball too small for the mesh)");
  auto op = [&](const Vec& x) -> Vec { return chol.solve(N * x); };
  LanczosResult L = lanczos_largest(op, D, static_cast<int>(D.rows()), 150, 1e-10);
  return {alpha, beta, s.mesh_size(), std::sqrt(L.theta), L.iterations, L.residual};
}

ConstantEstimate improved_poincare_constant(const P2Space& s, double alpha, double beta, const Disk& ball) {
  if (!(ball.radius > 0.0)) throw DomainError("ball radius must be positive");
  const int n = s.num_nodes();
  const auto& mesh = s.mesh();
  std::vector<bool> cluster(s.num_vertices(), false);
  int nearest = 0;
  bool any = false;
  for (int v = 0; v < s.num_vertices(); ++v) {
    double dv = norm(mesh.vertices[v] - ball.center);
    if (dv < 0.5 * ball.radius) cluster[v] = any = true;
    if (dv < norm(mesh.vertices[nearest] - ball.center)) nearest = v;
  }
  if (!any) cluster[nearest] = true;

  // l_i = int psi_i phi with phi the normalized hat cluster; the rule is exact for P2 x P1.
  Vec ell = Vec::Zero(n);
  double phi_mass = 0.0;
  const auto& qw = s.quadrature().weights;
  std::array<double, 6> v;
  std::array<Point, 6> g;
  for (int t = 0; t < s.num_triangles(); ++t) {
    const auto& T = mesh.triangles[t];
    for (int q = 0; q < 6; ++q) {
      const auto& l = s.p1_shape(q);
      double phi = 0.0;
      for (int i = 0; i < 3; ++i)
        if (cluster[T[i]]) phi += l[i];
      if (phi == 0.0) continue;
      s.shape(t, q, v, g);
      double wq = qw[6 * t + q];
      phi_mass += wq * phi;
      for (int i = 0; i < 6; ++i) ell[s.dofs(t)[i]] += wq * phi * v[i];
    }
  }
  ell /= phi_mass;

  SpMat M = p2_mass(s, 2.0 * (1.0 - beta));
  SpMat K = p2_stiffness(s, 2.0 * (1.0 + alpha - beta));
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < K.outerSize(); ++k)
    for (SpMat::InnerIterator it(K, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < n; ++i)
    if (ell[i] != 0.0) {
      trip.emplace_back(i, n, ell[i]);
      trip.emplace_back(n, i, ell[i]);
    }
  SpMat Kc(n + 1, n + 1);
  Kc.setFromTriplets(trip.begin(), trip.end());
  Kc.makeCompressed();
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu(Kc);
  if (lu.info() != Eigen::Success) throw NumericalError("constrained stiffness is singular");
  auto op = [&](const Vec& x) -> Vec {
    Vec rhs = Vec::Zero(n + 1);
    rhs.head(n) = M * x;
    Vec y = lu.solve(rhs);
    return y.head(n);
  };
  LanczosResult L = lanczos_largest(op, K, n, 150, 1e-10);
  return {alpha, beta, s.mesh_size(), std::sqrt(L.theta), L.iterations, L.residual};
}

double harmonic_ratio(const CuspDomain& domain, double mu, int kmax, const QuadratureGrid& grid) {
  double best = 0.0;
  for (int k = 1; k <= kmax; ++k)
    for (int part = 0; part < 2; ++part) {
      auto f = [k, part](Point p) {
        std::complex<double> z(p.x, p.y), zk = 1.0;
        for (int i = 0; i < k; ++i) zk *= z;
        return part == 0 ? zk.real() : zk.imag();
      };
      auto grad = [k](Point p) { return k * std::pow(std::hypot(p.x, p.y), k - 1); };
      double num = weights::weighted_lp_integral(grad, domain, 1.0 - mu, 2.0, grid);
      double den = weights::weighted_lp_integral(f, domain, -mu, 2.0, grid);
      best = std::max(best, std::sqrt(num / den));
    }
  return best;
}

}  // namespace cuspdiv::fem
