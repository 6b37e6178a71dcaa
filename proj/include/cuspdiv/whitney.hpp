#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <unordered_set>
#include <vector>

#include "cuspdiv/geometry.hpp"

namespace cuspdiv::whitney {

using DistanceFn = std::function<double(Point)>;

/// Axis-aligned square [lower.x, lower.x+side] x [lower.y, lower.y+side].
struct Box {
  Point lower;
  double side;
};

/// [0,1]x[-1,1] inflated by 25% about its center and made square.
Box cusp_bounding_box();

/// Dyadic cube of generation k: side 2^-k, lower corner box.lower + 2^-k (i, j).
/// The box is tiled by root cubes of the smallest generation k0 >= 0 whose side
/// divides box.side, so generations never go below zero.
struct DyadicCube {
  int k;
  std::int64_t i;
  std::int64_t j;
  friend bool operator==(const DyadicCube&, const DyadicCube&) = default;
  friend auto operator<=>(const DyadicCube&, const DyadicCube&) = default;
};

class WhitneyDecomposition {
 public:
  WhitneyDecomposition(Box box, int kmax, std::vector<DyadicCube> cubes, std::vector<DyadicCube> residual = {});

  const Box& box() const { return box_; }
  int kmax() const { return kmax_; }
  int root_generation() const { return k0_; }
  /// Accepted cubes sorted by (k, i, j).
  const std::vector<DyadicCube>& cubes() const { return cubes_; }
  /// Cubes still too close to F at kmax; not part of the decomposition.
  const std::vector<DyadicCube>& residual() const { return residual_; }

  double side(int k) const;
  double diameter(int k) const { return side(k) * 1.4142135623730951; }
  Point lower_corner(const DyadicCube& c) const;
  Point center(const DyadicCube& c) const;

  bool contains_cube(const DyadicCube& c) const;
  /// Accepted cube containing p (closed cubes, smallest generation first), or nullptr.
  const DyadicCube* find_containing(Point p) const;
  std::vector<std::size_t> generation_counts() const;

 private:
  Box box_;
  int kmax_;
  int k0_;
  std::int64_t n0_;
  std::vector<DyadicCube> cubes_;
  std::vector<DyadicCube> residual_;
  std::unordered_set<std::uint64_t> index_;
};

/// Root generation for a box: smallest k >= 0 with box.side * 2^k an integer.
int root_generation(const Box& box);

/// Recursive dyadic subdivision of the box. A cube with center distance dc is
/// accepted when dc - l/2 >= l + l/8 and dc <= 4l (l the diameter); cubes still
/// rejected at kmax are discarded.
WhitneyDecomposition decompose(const DistanceFn& distance, const Box& box, int kmax);

/// Number of generation-k cubes entirely inside the closed ball B(center, R).
std::size_t count_generation(const WhitneyDecomposition& dec, Point center, double R, int k);

/// Least-squares slope of log2 N_k against k over [k_begin, k_end], skipping empty generations.
double count_slope(const WhitneyDecomposition& dec, Point center, double R, int k_begin, int k_end);

/// Worst-case margins of the band l <= d(Q,F) <= 4l, with d(Q,F) estimated as the
/// minimum of the distance over a 5x5 sample of the cube minus l/8.
struct BandCheck {
  std::size_t checked = 0;
  std::size_t failures = 0;
  double min_lower_ratio = 0.0;  // min over cubes of d/l
  double max_upper_ratio = 0.0;  // max over cubes of d/l
};
BandCheck verify_band(const WhitneyDecomposition& dec, const DistanceFn& distance);

/// True when no accepted cube has an accepted ancestor (dyadic disjointness).
bool verify_disjoint(const WhitneyDecomposition& dec);

struct CoverageCheck {
  std::size_t sampled = 0;
  std::size_t covered = 0;
  double fraction() const { return sampled ? static_cast<double>(covered) / sampled : 0.0; }
};
/// Uniform points of the box with distance > 8 * side(kmax), tested for membership.
CoverageCheck verify_coverage(const WhitneyDecomposition& dec, const DistanceFn& distance, std::size_t samples,
                              std::uint64_t seed);

struct MSetReport {
  double c_low = 0.0;
  double c_high = 0.0;
  double m_fit = 0.0;
  bool ok = false;
};
using MeasureFn = std::function<double(Point, double)>;
/// Ratios H^1(B(x,r) n F)/r over the grid and the pooled slope of log measure vs log r.
MSetReport verify_mset(const MeasureFn& measure, const std::vector<Point>& centers, const std::vector<double>& radii);

/// Writes `k i j` lines in sorted order.
void write_decomposition(std::ostream& os, const WhitneyDecomposition& dec);

}  // namespace cuspdiv::whitney
