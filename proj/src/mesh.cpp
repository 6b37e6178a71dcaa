#include "cuspdiv/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace cuspdiv {

namespace {

double tri_min_angle(Point a, Point b, Point c) {
  auto ang = [](Point p, Point q, Point r) {
    Point u = q - p, v = r - p;
    return std::atan2(std::abs(u.x * v.y - u.y * v.x), dot(u, v));
  };
  double m = std::min({ang(a, b, c), ang(b, c, a), ang(c, a, b)});
  return m * 180.0 / std::numbers::pi;
}

double signed_area(Point a, Point b, Point c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

int pow2_round(double v) {
  if (v <= 1.0) return 1;
  return 1 << static_cast<int>(std::lround(std::log2(v)));
}

struct Column {
  double x;
  int n;
  int first = 0;
};

// Marches columns from x = 1 toward the tip. Returns false if the tip
// column could not be placed at an admissible position.
bool march(const CuspDomain& dom, double h, double grading, double c, double x_trigger,
           double x_angle, int n_tip, std::vector<Column>& cols) {
  const double g = dom.curve_exponent();
  auto width = [&](double x) { return 2.0 * std::pow(x, g); };
  auto spacing = [&](double x, int n) {
    double slope = g * std::pow(x, g - 1.0);
    return width(x) / n / std::max(1.0, slope);
  };
  auto rows = [&](double x) { return std::max(2, pow2_round(width(x) / (h * std::pow(x, grading)))); };

  cols.clear();
  double x = 1.0;
  int n = rows(1.0);
  bool coarsening = false;
  for (int guard = 0; guard < 1000000; ++guard) {
    cols.push_back({x, n});
    if (coarsening && n == n_tip) return x >= x_angle * (1.0 - 1e-12);
    double xn;
    int nn;
    if (!coarsening) {
      xn = x - c * spacing(x, n);
      if (xn <= x_trigger) coarsening = true;
    }
    if (coarsening) {
      xn = x - 0.5 * c * spacing(x, n);
      nn = std::max(n_tip, n / 2);
    } else {
      nn = std::clamp(rows(xn), std::max(2, n / 2), 2 * n);
    }
    if (!(xn > 0.0)) return false;
    x = xn;
    n = nn;
  }
  return false;
}

void add_tri(TriangulatedMesh& m, int a, int b, int c) {
  if (signed_area(m.vertices[a], m.vertices[b], m.vertices[c]) < 0.0) std::swap(b, c);
  m.triangles.push_back({a, b, c});
}

TriangulatedMesh build(const CuspDomain& dom, std::vector<Column>& cols, int n_tip) {
  const double g = dom.curve_exponent();
  TriangulatedMesh m;
  for (auto& col : cols) {
    col.first = static_cast<int>(m.vertices.size());
    double w = std::pow(col.x, g);
    for (int k = 0; k <= col.n; ++k) {
      double y = (k == 0) ? -w : (k == col.n ? w : w * (-1.0 + 2.0 * k / col.n));
      m.vertices.push_back({col.x, y});
    }
  }
  const int tip = static_cast<int>(m.vertices.size());
  m.vertices.push_back({0.0, 0.0});

  for (std::size_t j = 0; j + 1 < cols.size(); ++j) {
    const Column& R = cols[j];
    const Column& L = cols[j + 1];
    auto r = [&](int k) { return R.first + k; };
    auto l = [&](int k) { return L.first + k; };
    if (R.n == L.n) {
      for (int k = 0; k < R.n; ++k) {
        Point pl0 = m.vertices[l(k)], pl1 = m.vertices[l(k + 1)];
        Point pr0 = m.vertices[r(k)], pr1 = m.vertices[r(k + 1)];
        double qa = std::min(tri_min_angle(pl0, pr0, pr1), tri_min_angle(pl0, pr1, pl1));
        double qb = std::min(tri_min_angle(pl0, pr0, pl1), tri_min_angle(pr0, pr1, pl1));
        if (qa >= qb) {
          add_tri(m, l(k), r(k), r(k + 1));
          add_tri(m, l(k), r(k + 1), l(k + 1));
        } else {
          add_tri(m, l(k), r(k), l(k + 1));
          add_tri(m, r(k), r(k + 1), l(k + 1));
        }
      }
    } else if (R.n == 2 * L.n) {
      for (int k = 0; k < L.n; ++k) {
        add_tri(m, l(k), r(2 * k), r(2 * k + 1));
        add_tri(m, l(k), r(2 * k + 1), l(k + 1));
        add_tri(m, l(k + 1), r(2 * k + 1), r(2 * k + 2));
      }
    } else {
      for (int k = 0; k < R.n; ++k) {
        add_tri(m, r(k), l(2 * k), l(2 * k + 1));
        add_tri(m, r(k), l(2 * k + 1), r(k + 1));
        add_tri(m, r(k + 1), l(2 * k + 1), l(2 * k + 2));
      }
    }
  }
  const Column& last = cols.back();
  for (int k = 0; k < last.n; ++k) add_tri(m, tip, last.first + k, last.first + k + 1);

  const Column& c0 = cols.front();
  for (int k = 0; k < c0.n; ++k) m.boundary.push_back({{c0.first + k, c0.first + k + 1}, ArcKind::right_edge});
  for (std::size_t j = 0; j + 1 < cols.size(); ++j) {
    m.boundary.push_back({{cols[j].first + cols[j].n, cols[j + 1].first + cols[j + 1].n}, ArcKind::upper_curve});
    m.boundary.push_back({{cols[j].first, cols[j + 1].first}, ArcKind::lower_curve});
  }
  m.boundary.push_back({{last.first + last.n, tip}, ArcKind::upper_curve});
  m.boundary.push_back({{last.first, tip}, ArcKind::lower_curve});
  (void)n_tip;
  return m;
}

}  // namespace

double TriangulatedMesh::triangle_area(int t) const {
  const auto& T = triangles[t];
  return signed_area(vertices[T[0]], vertices[T[1]], vertices[T[2]]);
}

double TriangulatedMesh::triangle_diameter(int t) const {
  const auto& T = triangles[t];
  Point a = vertices[T[0]], b = vertices[T[1]], c = vertices[T[2]];
  return std::max({norm(a - b), norm(b - c), norm(c - a)});
}

Point TriangulatedMesh::centroid(int t) const {
  const auto& T = triangles[t];
  Point a = vertices[T[0]], b = vertices[T[1]], c = vertices[T[2]];
  return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

double TriangulatedMesh::area() const {
  double s = 0.0;
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t) s += triangle_area(t);
  return s;
}

double TriangulatedMesh::min_angle_deg() const {
  double m = 180.0;
  for (const auto& T : triangles) m = std::min(m, tri_min_angle(vertices[T[0]], vertices[T[1]], vertices[T[2]]));
  return m;
}

TriangulatedMesh generate_graded_mesh(const CuspDomain& domain, double h, double grading, const MeshOptions& opts) {
  if (!(h > 0.0 && h < 1.0)) throw DomainError("mesh size h must lie in (0,1)");
  if (!(grading >= 1.0)) throw DomainError("grading exponent must be >= 1");
  const double g = domain.curve_exponent();
  const int n_tip = g > 1.0 ? 1 : 2;
  // A single tip triangle needs an opening of at least twice the tip half-angle.
  const double x_angle =
      g > 1.0 ? std::pow(std::tan(opts.tip_half_angle_deg * std::numbers::pi / 180.0), 1.0 / (g - 1.0)) : 0.0;

  static constexpr double kAspect[] = {1.0, 0.8, 1.2, 0.65, 1.4, 0.55, 0.9, 1.1, 0.7, 1.3};
  const int tries = std::min<int>(opts.max_retries, std::size(kAspect));
  double best_angle = 0.0;
  std::vector<Column> cols;
  for (int attempt = 0; attempt < tries; ++attempt) {
    double c = kAspect[attempt];
    double x_trigger = std::max(x_angle, h * h);
    bool ok = false;
    for (int grow = 0; grow < 60 && x_trigger < 1.0; ++grow) {
      if (march(domain, h, grading, c, x_trigger, x_angle, n_tip, cols)) {
        ok = true;
        break;
      }
      x_trigger *= 1.15;
    }
    if (!ok) continue;
    TriangulatedMesh m = build(domain, cols, n_tip);
    double a = m.min_angle_deg();
    best_angle = std::max(best_angle, a);
    if (a >= opts.min_angle_deg) return m;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "mesh generation failed: best minimum angle %.2f deg < %.2f deg", best_angle,
                opts.min_angle_deg);
  throw NumericalError(buf);
}

void write_mesh(std::ostream& os, const TriangulatedMesh& mesh) {
  char buf[128];
  os << "vertices " << mesh.vertices.size() << '\n';
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu %.17g %.17g\n", i, mesh.vertices[i].x, mesh.vertices[i].y);
    os << buf;
  }
  os << "triangles " << mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "boundary " << mesh.boundary.size() << '\n';
  for (const auto& e : mesh.boundary) os << e.v[0] << ' ' << e.v[1] << ' ' << to_string(e.kind) << '\n';
}

TriangulatedMesh read_mesh(std::istream& is) {
  TriangulatedMesh m;
  std::string word;
  std::size_t n = 0;
  auto expect = [&](const char* name) {
    if (!(is >> word >> n) || word != name) throw DomainError(std::string("mesh file: expected block ") + name);
  };
  expect("vertices");
  m.vertices.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t idx;
    is >> idx >> m.vertices[i].x >> m.vertices[i].y;
  }
  expect("triangles");
  m.triangles.resize(n);
  for (auto& t : m.triangles) is >> t[0] >> t[1] >> t[2];
  expect("boundary");
  m.boundary.resize(n);
  for (auto& e : m.boundary) {
    is >> e.v[0] >> e.v[1] >> word;
    e.kind = arc_kind_from_string(word);
  }
  if (!is) throw DomainError("mesh file: truncated input");
  return m;
}

}  // namespace cuspdiv
