#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "cuspdiv/geometry.hpp"

namespace cuspdiv {

struct BoundaryEdge {
  std::array<int, 2> v;
  ArcKind kind;
};

/// Conforming triangulation with counter-clockwise triangles and tagged boundary edges.
struct TriangulatedMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary;

  double area() const;
  double min_angle_deg() const;
  double triangle_area(int t) const;
  double triangle_diameter(int t) const;
  Point centroid(int t) const;
};

struct MeshOptions {
  double min_angle_deg = 15.0;
  /// Half-angle at the cusp tip used to place the tip triangle.
  double tip_half_angle_deg = 8.5;
  int max_retries = 8;
};

/// Column-structured graded triangulation of the cusp domain.
///
/// Vertices sit on vertical columns x = x_j with y = x_j^(1/alpha)(-1 + 2k/n_j),
/// so every boundary vertex lies on the exact curve. The local size near x is
/// h * x^grading, floored near the tip where a single fan closes the mesh.
TriangulatedMesh generate_graded_mesh(const CuspDomain& domain, double h, double grading,
                                      const MeshOptions& opts = {});

void write_mesh(std::ostream& os, const TriangulatedMesh& mesh);
TriangulatedMesh read_mesh(std::istream& is);

}  // namespace cuspdiv
