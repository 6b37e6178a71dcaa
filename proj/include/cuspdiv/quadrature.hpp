#pragma once

#include <array>
#include <functional>
#include <vector>

#include "cuspdiv/geometry.hpp"

namespace cuspdiv {

struct TriangulatedMesh;

enum class DistanceMode { exact, surrogate };

/// One-dimensional Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

/// Degree-4 six-point rule on the reference triangle (0,0),(1,0),(0,1):
/// barycentric points and weights summing to 1.
struct TriangleRule {
  std::array<std::array<double, 3>, 6> bary;
  std::array<double, 6> weights;
};
const TriangleRule& dunavant_degree4();

/// Weighted point set. Nodes are grouped into cells; `band` tags each cell with
/// a geometric x-band (or -1) so that integrals over a cusp can be tail-extrapolated.
class QuadratureGrid {
 public:
  std::vector<Point> nodes;
  std::vector<double> weights;
  std::vector<std::size_t> cell_offsets{0};
  std::vector<int> band;

  std::size_t num_cells() const { return cell_offsets.size() - 1; }
  double total_weight() const;
  void add_cell(int band_id = -1) {
    cell_offsets.push_back(nodes.size());
    band.push_back(band_id);
  }
  int num_bands() const;

  /// Distance at every node, computed once per mode.
  const std::vector<double>& distances(const CuspDomain& domain, DistanceMode mode) const;

 private:
  mutable std::vector<double> exact_cache_;
  mutable std::vector<double> surrogate_cache_;
  mutable double cached_alpha_ = -1.0;
};

struct CuspGridOptions {
  int x_bands = 60;   // panels [2^-j-1, 2^-j]
  int t_panels = 30;  // geometric panels toward the curves
  int order = 6;      // Gauss points per panel direction
  int edge_panels = 12;
};

/// Tensor Gauss grid on the cusp mapped by y = +-x^(1/alpha)(1 - t), geometric in x
/// toward the tip and in t toward the curves.
QuadratureGrid cusp_grid(const CuspDomain& domain, const CuspGridOptions& opts = {});
CuspGridOptions refined(const CuspGridOptions& opts);

/// Sum over a band-tagged grid with a geometric tail for the bands beyond the last:
/// tail = I_M q/(1-q), q = I_M/I_{M-1}. Returns +inf when the band sums do not decay.
double integrate_with_tail(const QuadratureGrid& grid, const std::vector<double>& values);

enum class WhitneyRegion { inside_domain, whole_box };

/// Product Gauss rule of the given order on Whitney cubes; the cubes discarded at
/// kmax are kept with an inside-the-domain indicator so the measure is not lost.
QuadratureGrid whitney_grid(const CuspDomain& domain, int kmax, int order = 4,
                            WhitneyRegion region = WhitneyRegion::inside_domain);

/// Degree-4 rule on every mesh triangle.
QuadratureGrid mesh_grid(const TriangulatedMesh& mesh);

}  // namespace cuspdiv
