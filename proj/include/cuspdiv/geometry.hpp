#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cuspdiv {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }

/// Raised when an operation is called with arguments outside its validity window.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative or direct numerical procedure fails.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ArcKind { upper_curve, lower_curve, right_edge };

std::string to_string(ArcKind kind);
ArcKind arc_kind_from_string(const std::string& tag);

/// One of the three pieces of the boundary. Curves are parametrized by x in
/// [t_begin, t_end]; the right edge by y.
struct BoundaryArc {
  ArcKind kind;
  double t_begin;
  double t_end;
};

/// The planar domain {(x,y) : 0 < x < 1, |y| < x^(1/alpha)}, 0 < alpha <= 1.
///
/// The segment y = 0 belongs to the domain (no slit). The boundary is the
/// union of the upper curve y = x^(1/alpha), the lower curve y = -x^(1/alpha)
/// and the right edge x = 1, |y| <= 1; the curves meet at the cusp tip (0,0).
class CuspDomain {
 public:
  explicit CuspDomain(double alpha);

  double alpha() const { return alpha_; }
  /// Exponent of the boundary curves, 1/alpha.
  double curve_exponent() const { return gamma_; }
  double half_width(double x) const { return std::pow(x, gamma_); }
  Point upper_point(double t) const { return {t, std::pow(t, gamma_)}; }
  double area() const { return 2.0 * alpha_ / (alpha_ + 1.0); }
  std::array<BoundaryArc, 3> boundary_arcs() const;

  bool contains(Point p) const;

  /// Euclidean distance from p to the boundary; defined on the whole plane.
  double distance(Point p) const;
  /// Closest boundary point together with the arc it lies on.
  Point nearest_boundary_point(Point p, ArcKind* arc = nullptr) const;

  /// x^(1/alpha) - |y|. Throws DomainError outside the domain.
  double surrogate_distance(Point p) const;

  bool on_boundary(Point p, double tol = 1e-10) const { return distance(p) <= tol; }

  /// Arclength of the boundary inside the open ball B(center, r).
  /// center must lie on the boundary (within 1e-10).
  double boundary_measure(Point center, double r) const;

 private:
  struct CurveFoot {
    double t;
    double dist;
  };
  CurveFoot upper_curve_foot(Point q) const;
  double upper_curve_measure(Point c, double r) const;

  double alpha_;
  double gamma_;
};

}  // namespace cuspdiv
