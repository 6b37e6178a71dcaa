#pragma once

#include <Eigen/Sparse>
#include <array>
#include <vector>

#include "cuspdiv/geometry.hpp"
#include "cuspdiv/mesh.hpp"
#include "cuspdiv/quadrature.hpp"

namespace cuspdiv::fem {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

/// Continuous P2 numbering on a mesh: vertices first, then one node per edge.
/// Local order per triangle: the three vertices, then edges (0,1), (1,2), (2,0).
/// Carries the degree-4 quadrature with exact boundary distances at its nodes.
class P2Space {
 public:
  P2Space(const CuspDomain& domain, TriangulatedMesh mesh);

  const CuspDomain& domain() const { return domain_; }
  const TriangulatedMesh& mesh() const { return mesh_; }
  int num_vertices() const { return static_cast<int>(mesh_.vertices.size()); }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_triangles() const { return static_cast<int>(mesh_.triangles.size()); }
  const std::array<int, 6>& dofs(int t) const { return dofs_[t]; }
  Point node(int i) const { return nodes_[i]; }
  bool on_boundary(int i) const { return boundary_[i]; }

  /// Six quadrature nodes per triangle, in triangle order.
  const QuadratureGrid& quadrature() const { return grid_; }
  const std::vector<double>& distance() const { return grid_.distances(domain_, DistanceMode::exact); }
  /// d^e at every quadrature node (1 for e = 0).
  std::vector<double> weight(double exponent, double scale = 1.0) const;

  /// P2 shape values (6) and gradients at quadrature node q of triangle t.
  void shape(int t, int q, std::array<double, 6>& value, std::array<Point, 6>& grad) const;
  /// Barycentric coordinates (P1 shape values) of quadrature node q.
  const std::array<double, 3>& p1_shape(int q) const;

  /// Largest triangle diameter.
  double mesh_size() const;

 private:
  CuspDomain domain_;
  TriangulatedMesh mesh_;
  std::vector<std::array<int, 6>> dofs_;
  std::vector<Point> nodes_;
  std::vector<bool> boundary_;
  QuadratureGrid grid_;
  std::vector<std::array<Point, 3>> bary_grad_;
};

enum class SpaceKind { scalar_p1, scalar_p2, vector_p2, pressure_p1 };

/// Coefficients in one of the discrete spaces. Vector-P2 fields store all x
/// components, then all y components.
struct DiscreteField {
  SpaceKind kind = SpaceKind::scalar_p2;
  Vec coeffs;
  const P2Space* space = nullptr;
  bool zero_bc = false;

  /// Value at quadrature node q of triangle t (component c for vector fields).
  double value_at(int t, int q, int c = 0) const;
};

/// Scalar P2 matrices with weight scale * d^exponent.
SpMat p2_stiffness(const P2Space& s, double exponent, double scale = 1.0);
SpMat p2_mass(const P2Space& s, double exponent, double scale = 1.0);
/// Vector P2: integral of Du:Dv, and of eps(u):eps(v), weighted.
SpMat vector_stiffness(const P2Space& s, double exponent);
SpMat strain_stiffness(const P2Space& s, double exponent);
/// Vector P2 mass restricted to a disk (triangles cut by the circle are subdivided).
SpMat vector_ball_mass(const P2Space& s, Point center, double radius);
/// Rows: P1 pressures; columns: vector P2. Entry = integral div(phi_j) psi_i scale d^exponent.
SpMat divergence_matrix(const P2Space& s, double exponent, double scale = 1.0);
SpMat p1_mass(const P2Space& s, double exponent, double scale = 1.0);
/// Integral of f times each P1 (or P2) basis function, weighted.
Vec p1_load(const P2Space& s, const std::vector<double>& f_at_nodes, double exponent, double scale = 1.0);
Vec vector_load(const P2Space& s, const std::vector<Point>& f_at_nodes);

/// Interior vector-P2 unknowns (boundary nodes removed) and the prolongation back.
struct Restriction {
  std::vector<int> full_of_reduced;
  std::vector<int> reduced_of_full;  // -1 on boundary
  int reduced_size() const { return static_cast<int>(full_of_reduced.size()); }
  SpMat restrict_columns(const SpMat& m) const;
  SpMat restrict_both(const SpMat& m) const;
  Vec prolong(const Vec& reduced, int full_size) const;
};
Restriction zero_bc_restriction(const P2Space& s);

double relative_asymmetry(const SpMat& m);

}  // namespace cuspdiv::fem
