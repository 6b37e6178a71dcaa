#include "cuspdiv/fem.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace cuspdiv::fem {

namespace {

constexpr int kEdge[3][2] = {{0, 1}, {1, 2}, {2, 0}};

void p2_values(const std::array<double, 3>& l, std::array<double, 6>& v) {
  for (int i = 0; i < 3; ++i) v[i] = l[i] * (2.0 * l[i] - 1.0);
  for (int k = 0; k < 3; ++k) v[3 + k] = 4.0 * l[kEdge[k][0]] * l[kEdge[k][1]];
}

double segment_distance(Point p, Point a, Point b) {
  Point ab = b - a;
  double t = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
  return norm(p - (a + t * ab));
}

template <class Local>
SpMat assemble_square(int n, int num_triangles, const Local& local) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int t = 0; t < num_triangles; ++t) local(t, trip);
  SpMat m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace

P2Space::P2Space(const CuspDomain& domain, TriangulatedMesh mesh) : domain_(domain), mesh_(std::move(mesh)) {
  nodes_ = mesh_.vertices;
  std::map<std::pair<int, int>, int> edge_node;
  dofs_.resize(mesh_.triangles.size());
  for (std::size_t t = 0; t < mesh_.triangles.size(); ++t) {
    const auto& T = mesh_.triangles[t];
    for (int i = 0; i < 3; ++i) dofs_[t][i] = T[i];
    for (int k = 0; k < 3; ++k) {
      int a = T[kEdge[k][0]], b = T[kEdge[k][1]];
      auto key = std::minmax(a, b);
      auto [it, fresh] = edge_node.try_emplace({key.first, key.second}, static_cast<int>(nodes_.size()));
      if (fresh) nodes_.push_back(0.5 * (mesh_.vertices[a] + mesh_.vertices[b]));
      dofs_[t][3 + k] = it->second;
    }
  }
  boundary_.assign(nodes_.size(), false);
  for (const auto& e : mesh_.boundary) {
    boundary_[e.v[0]] = boundary_[e.v[1]] = true;
    auto key = std::minmax(e.v[0], e.v[1]);
    auto it = edge_node.find({key.first, key.second});
    if (it == edge_node.end()) throw DomainError("boundary edge is not a mesh edge");
    boundary_[it->second] = true;
  }
  grid_ = mesh_grid(mesh_);
  bary_grad_.resize(mesh_.triangles.size());
  for (std::size_t t = 0; t < mesh_.triangles.size(); ++t) {
    const auto& T = mesh_.triangles[t];
    Point a = mesh_.vertices[T[0]], b = mesh_.vertices[T[1]], c = mesh_.vertices[T[2]];
    double a2 = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    bary_grad_[t] = {Point{(b.y - c.y) / a2, (c.x - b.x) / a2}, Point{(c.y - a.y) / a2, (a.x - c.x) / a2},
                     Point{(a.y - b.y) / a2, (b.x - a.x) / a2}};
  }
}

std::vector<double> P2Space::weight(double exponent, double scale) const {
  std::vector<double> w(grid_.nodes.size(), scale);
  if (exponent != 0.0) {
    const auto& d = distance();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = scale * std::pow(d[k], exponent);
  }
  return w;
}

const std::array<double, 3>& P2Space::p1_shape(int q) const { return dunavant_degree4().bary[q]; }

void P2Space::shape(int t, int q, std::array<double, 6>& value, std::array<Point, 6>& grad) const {
  const auto& l = p1_shape(q);
  const auto& g = bary_grad_[t];
  p2_values(l, value);
  for (int i = 0; i < 3; ++i) grad[i] = (4.0 * l[i] - 1.0) * g[i];
  for (int k = 0; k < 3; ++k) {
    int a = kEdge[k][0], b = kEdge[k][1];
    grad[3 + k] = 4.0 * (l[a] * g[b] + l[b] * g[a]);
  }
}

double P2Space::mesh_size() const {
  double h = 0.0;
  for (int t = 0; t < num_triangles(); ++t) h = std::max(h, mesh_.triangle_diameter(t));
  return h;
}

double DiscreteField::value_at(int t, int q, int c) const {
  if (!space) throw DomainError("field has no space");
  if (kind == SpaceKind::scalar_p1 || kind == SpaceKind::pressure_p1) {
    const auto& l = space->p1_shape(q);
    const auto& T = space->mesh().triangles[t];
    return l[0] * coeffs[T[0]] + l[1] * coeffs[T[1]] + l[2] * coeffs[T[2]];
  }
  std::array<double, 6> v;
  std::array<Point, 6> g;
  space->shape(t, q, v, g);
  const int off = kind == SpaceKind::vector_p2 ? c * space->num_nodes() : 0;
  double s = 0.0;
  for (int i = 0; i < 6; ++i) s += v[i] * coeffs[off + space->dofs(t)[i]];
  return s;
}

SpMat p2_stiffness(const P2Space& s, double exponent, double scale) {
  const auto w = s.weight(exponent, scale);
  const auto& qw = s.quadrature().weights;
  return assemble_square(s.num_nodes(), s.num_triangles(), [&](int t, auto& trip) {
    double e[6][6] = {};
    std::array<double, 6> v;
    std::array<Point, 6> g;
    for (int q = 0; q < 6; ++q) {
      s.shape(t, q, v, g);
      double wq = qw[6 * t + q] * w[6 * t + q];
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) e[i][j] += wq * dot(g[i], g[j]);
    }
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) trip.emplace_back(s.dofs(t)[i], s.dofs(t)[j], e[i][j]);
  });
}

SpMat p2_mass(const P2Space& s, double exponent, double scale) {
  const auto w = s.weight(exponent, scale);
  const auto& qw = s.quadrature().weights;
  return assemble_square(s.num_nodes(), s.num_triangles(), [&](int t, auto& trip) {
    double e[6][6] = {};
    std::array<double, 6> v;
    std::array<Point, 6> g;
    for (int q = 0; q < 6; ++q) {
      s.shape(t, q, v, g);
      double wq = qw[6 * t + q] * w[6 * t + q];
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) e[i][j] += wq * v[i] * v[j];
    }
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) trip.emplace_back(s.dofs(t)[i], s.dofs(t)[j], e[i][j]);
  });
}

SpMat vector_stiffness(const P2Space& s, double exponent) {
  const int n = s.num_nodes();
  SpMat k = p2_stiffness(s, exponent);
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < 2; ++c)
    for (int col = 0; col < k.outerSize(); ++col)
      for (SpMat::InnerIterator it(k, col); it; ++it) trip.emplace_back(c * n + it.row(), c * n + it.col(), it.value());
  SpMat m(2 * n, 2 * n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

// eps(phi e_c):eps(psi e_d) = (delta_cd grad phi.grad psi + d_d phi d_c psi)/2.
SpMat strain_stiffness(const P2Space& s, double exponent) {
  const int n = s.num_nodes();
  const auto w = s.weight(exponent);
  const auto& qw = s.quadrature().weights;
  return assemble_square(2 * n, s.num_triangles(), [&](int t, auto& trip) {
    double e[12][12] = {};
    std::array<double, 6> v;
    std::array<Point, 6> g;
    for (int q = 0; q < 6; ++q) {
      s.shape(t, q, v, g);
      double wq = qw[6 * t + q] * w[6 * t + q];
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
          double gg = dot(g[i], g[j]);
          double gi[2] = {g[i].x, g[i].y}, gj[2] = {g[j].x, g[j].y};
          for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d) e[c * 6 + i][d * 6 + j] += wq * 0.5 * ((c == d ? gg : 0.0) + gi[d] * gj[c]);
        }
    }
    for (int a = 0; a < 12; ++a)
      for (int b = 0; b < 12; ++b)
        trip.emplace_back((a / 6) * n + s.dofs(t)[a % 6], (b / 6) * n + s.dofs(t)[b % 6], e[a][b]);
  });
}

SpMat vector_ball_mass(const P2Space& s, Point center, double radius) {
  const int n = s.num_nodes();
  const auto& mesh = s.mesh();
  const TriangleRule& rule = dunavant_degree4();
  constexpr int kLevels = 4;
  return assemble_square(2 * n, s.num_triangles(), [&](int t, auto& trip) {
    const auto& T = mesh.triangles[t];
    Point P[3] = {mesh.vertices[T[0]], mesh.vertices[T[1]], mesh.vertices[T[2]]};
    bool all_in = true;
    double dmin = 1e300;
    for (int i = 0; i < 3; ++i) {
      all_in = all_in && norm(P[i] - center) < radius;
      dmin = std::min(dmin, segment_distance(center, P[i], P[(i + 1) % 3]));
    }
    // Center inside the triangle means the disk meets it.
    auto side = [](Point a, Point b, Point p) { return (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y); };
    bool center_in = side(P[0], P[1], center) >= 0 && side(P[1], P[2], center) >= 0 && side(P[2], P[0], center) >= 0;
    if (!all_in && !center_in && dmin >= radius) return;
    const double area = mesh.triangle_area(t);
    double e[6][6] = {};
    std::array<double, 6> v;
    auto add = [&](const std::array<double, 3>& l, double wq) {
      p2_values(l, v);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) e[i][j] += wq * v[i] * v[j];
    };
    if (all_in) {
      for (int q = 0; q < 6; ++q) add(rule.bary[q], area * rule.weights[q]);
    } else {
      // Uniform 4^L subdivision in barycentric coordinates, indicator at each node.
      const int m = 1 << kLevels;
      const double sub_area = area / (m * m);
      auto emit = [&](std::array<double, 3> A, std::array<double, 3> B, std::array<double, 3> C) {
        for (int q = 0; q < 6; ++q) {
          const auto& r = rule.bary[q];
          std::array<double, 3> l;
          for (int k = 0; k < 3; ++k) l[k] = r[0] * A[k] + r[1] * B[k] + r[2] * C[k];
          Point x = l[0] * P[0] + l[1] * P[1] + l[2] * P[2];
          if (norm(x - center) < radius) add(l, sub_area * rule.weights[q]);
        }
      };
      auto bc = [&](int i, int j) { return std::array<double, 3>{1.0 - double(i + j) / m, double(i) / m, double(j) / m}; };
      for (int i = 0; i < m; ++i)
        for (int j = 0; i + j < m; ++j) {
          emit(bc(i, j), bc(i + 1, j), bc(i, j + 1));
          if (i + j + 1 < m) emit(bc(i + 1, j), bc(i + 1, j + 1), bc(i, j + 1));
        }
    }
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) trip.emplace_back(c * n + s.dofs(t)[i], c * n + s.dofs(t)[j], e[i][j]);
  });
}

SpMat divergence_matrix(const P2Space& s, double exponent, double scale) {
  const int n = s.num_nodes();
  const auto w = s.weight(exponent, scale);
  const auto& qw = s.quadrature().weights;
  std::vector<Eigen::Triplet<double>> trip;
  std::array<double, 6> v;
  std::array<Point, 6> g;
  for (int t = 0; t < s.num_triangles(); ++t) {
    double e[3][12] = {};
    for (int q = 0; q < 6; ++q) {
      s.shape(t, q, v, g);
      const auto& l = s.p1_shape(q);
      double wq = qw[6 * t + q] * w[6 * t + q];
      for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 6; ++j) {
          e[k][j] += wq * l[k] * g[j].x;
          e[k][6 + j] += wq * l[k] * g[j].y;
        }
    }
    const auto& T = s.mesh().triangles[t];
    for (int k = 0; k < 3; ++k)
      for (int a = 0; a < 12; ++a) trip.emplace_back(T[k], (a / 6) * n + s.dofs(t)[a % 6], e[k][a]);
  }
  SpMat m(s.num_vertices(), 2 * n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SpMat p1_mass(const P2Space& s, double exponent, double scale) {
  const auto w = s.weight(exponent, scale);
  const auto& qw = s.quadrature().weights;
  return assemble_square(s.num_vertices(), s.num_triangles(), [&](int t, auto& trip) {
    const auto& T = s.mesh().triangles[t];
    double e[3][3] = {};
    for (int q = 0; q < 6; ++q) {
      const auto& l = s.p1_shape(q);
      double wq = qw[6 * t + q] * w[6 * t + q];
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) e[i][j] += wq * l[i] * l[j];
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(T[i], T[j], e[i][j]);
  });
}

Vec p1_load(const P2Space& s, const std::vector<double>& f, double exponent, double scale) {
  const auto w = s.weight(exponent, scale);
  const auto& qw = s.quadrature().weights;
  Vec b = Vec::Zero(s.num_vertices());
  for (int t = 0; t < s.num_triangles(); ++t) {
    const auto& T = s.mesh().triangles[t];
    for (int q = 0; q < 6; ++q) {
      const auto& l = s.p1_shape(q);
      double wq = qw[6 * t + q] * w[6 * t + q] * f[6 * t + q];
      for (int i = 0; i < 3; ++i) b[T[i]] += wq * l[i];
    }
  }
  return b;
}

Vec vector_load(const P2Space& s, const std::vector<Point>& f) {
  const int n = s.num_nodes();
  const auto& qw = s.quadrature().weights;
  Vec b = Vec::Zero(2 * n);
  std::array<double, 6> v;
  std::array<Point, 6> g;
  for (int t = 0; t < s.num_triangles(); ++t)
    for (int q = 0; q < 6; ++q) {
      s.shape(t, q, v, g);
      Point fq = f[6 * t + q];
      double wq = qw[6 * t + q];
      for (int i = 0; i < 6; ++i) {
        b[s.dofs(t)[i]] += wq * fq.x * v[i];
        b[n + s.dofs(t)[i]] += wq * fq.y * v[i];
      }
    }
  return b;
}

Restriction zero_bc_restriction(const P2Space& s) {
  const int n = s.num_nodes();
  Restriction r;
  r.reduced_of_full.assign(2 * n, -1);
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < n; ++i)
      if (!s.on_boundary(i)) {
        r.reduced_of_full[c * n + i] = r.reduced_size();
        r.full_of_reduced.push_back(c * n + i);
      }
  return r;
}

namespace {

SpMat selection(const Restriction& r, int full_size) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < r.reduced_size(); ++k) trip.emplace_back(r.full_of_reduced[k], k, 1.0);
  SpMat p(full_size, r.reduced_size());
  p.setFromTriplets(trip.begin(), trip.end());
  return p;
}

}  // namespace

SpMat Restriction::restrict_columns(const SpMat& m) const {
  SpMat out = m * selection(*this, static_cast<int>(m.cols()));
  return out;
}

SpMat Restriction::restrict_both(const SpMat& m) const {
  SpMat p = selection(*this, static_cast<int>(m.cols()));
  SpMat out = SpMat(p.transpose()) * m * p;
  return out;
}

Vec Restriction::prolong(const Vec& reduced, int full_size) const {
  Vec out = Vec::Zero(full_size);
  for (int k = 0; k < reduced_size(); ++k) out[full_of_reduced[k]] = reduced[k];
  return out;
}

double relative_asymmetry(const SpMat& m) {
  SpMat d = SpMat(m.transpose()) - m;
  double nm = m.norm();
  return nm > 0.0 ? d.norm() / nm : 0.0;
}

}  // namespace cuspdiv::fem
