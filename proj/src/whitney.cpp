#include "cuspdiv/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace cuspdiv::whitney {

namespace {

constexpr int kMaxGeneration = 26;

std::uint64_t key(int k, std::int64_t i, std::int64_t j) {
  constexpr std::uint64_t mask = (std::uint64_t{1} << 29) - 1;
  return (static_cast<std::uint64_t>(k) << 58) | ((static_cast<std::uint64_t>(i) & mask) << 29) |
         (static_cast<std::uint64_t>(j) & mask);
}

}  // namespace

Box cusp_bounding_box() {
  const double side = 2.0 * 1.25;
  return {{0.5 - 0.5 * side, -0.5 * side}, side};
}

int root_generation(const Box& box) {
  for (int k = 0; k <= 20; ++k) {
    double n = std::ldexp(box.side, k);
    if (n >= 1.0 && std::abs(n - std::round(n)) <= 1e-12 * n) return k;
  }
  throw DomainError("box side is not a dyadic multiple");
}

WhitneyDecomposition::WhitneyDecomposition(Box box, int kmax, std::vector<DyadicCube> cubes,
                                           std::vector<DyadicCube> residual)
    : box_(box),
      kmax_(kmax),
      k0_(whitney::root_generation(box)),
      n0_(std::llround(std::ldexp(box.side, k0_))),
      cubes_(std::move(cubes)),
      residual_(std::move(residual)) {
  std::sort(cubes_.begin(), cubes_.end());
  std::sort(residual_.begin(), residual_.end());
  index_.reserve(cubes_.size() * 2);
  for (const auto& c : cubes_) index_.insert(key(c.k, c.i, c.j));
}

double WhitneyDecomposition::side(int k) const { return std::ldexp(1.0, -k); }

Point WhitneyDecomposition::lower_corner(const DyadicCube& c) const {
  double s = side(c.k);
  return {box_.lower.x + s * static_cast<double>(c.i), box_.lower.y + s * static_cast<double>(c.j)};
}

Point WhitneyDecomposition::center(const DyadicCube& c) const {
  double s = side(c.k);
  Point lo = lower_corner(c);
  return {lo.x + 0.5 * s, lo.y + 0.5 * s};
}

bool WhitneyDecomposition::contains_cube(const DyadicCube& c) const { return index_.count(key(c.k, c.i, c.j)) > 0; }

const DyadicCube* WhitneyDecomposition::find_containing(Point p) const {
  double u = (p.x - box_.lower.x) / box_.side, v = (p.y - box_.lower.y) / box_.side;
  if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0) return nullptr;
  for (int k = k0_; k <= kmax_; ++k) {
    auto n = n0_ << (k - k0_);
    auto i = std::min(static_cast<std::int64_t>(u * static_cast<double>(n)), n - 1);
    auto j = std::min(static_cast<std::int64_t>(v * static_cast<double>(n)), n - 1);
    DyadicCube c{k, i, j};
    if (contains_cube(c)) return &*std::lower_bound(cubes_.begin(), cubes_.end(), c);
  }
  return nullptr;
}

std::vector<std::size_t> WhitneyDecomposition::generation_counts() const {
  std::vector<std::size_t> counts(kmax_ + 1, 0);
  for (const auto& c : cubes_) counts[c.k]++;
  return counts;
}

WhitneyDecomposition decompose(const DistanceFn& distance, const Box& box, int kmax) {
  if (kmax < 2) throw DomainError("kmax must be at least 2");
  if (kmax > kMaxGeneration) throw DomainError("kmax exceeds supported generation depth");
  const int k0 = root_generation(box);
  if (kmax <= k0) throw DomainError("kmax must exceed the root generation of the box");
  const std::int64_t n0 = std::llround(std::ldexp(box.side, k0));
  std::vector<DyadicCube> accepted, residual;
  std::vector<DyadicCube> stack;
  for (std::int64_t i = n0 - 1; i >= 0; --i)
    for (std::int64_t j = n0 - 1; j >= 0; --j) stack.push_back({k0, i, j});
  while (!stack.empty()) {
    DyadicCube c = stack.back();
    stack.pop_back();
    double s = std::ldexp(1.0, -c.k);
    double l = s * std::sqrt(2.0);
    Point mid{box.lower.x + s * (static_cast<double>(c.i) + 0.5), box.lower.y + s * (static_cast<double>(c.j) + 0.5)};
    double dc = distance(mid);
    if (dc - 0.5 * l >= 1.125 * l && dc <= 4.0 * l) {
      accepted.push_back(c);
      continue;
    }
    if (c.k == kmax) {
      if (dc - 0.5 * l < 1.125 * l) residual.push_back(c);
      continue;
    }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) stack.push_back({c.k + 1, 2 * c.i + a, 2 * c.j + b});
  }
  if (accepted.empty()) throw NumericalError("Whitney decomposition accepted no cube; increase kmax");
  return WhitneyDecomposition(box, kmax, std::move(accepted), std::move(residual));
}

std::size_t count_generation(const WhitneyDecomposition& dec, Point center, double R, int k) {
  double s = dec.side(k);
  std::size_t n = 0;
  for (const auto& c : dec.cubes()) {
    if (c.k != k) continue;
    Point lo = dec.lower_corner(c);
    double fx = std::max(std::abs(lo.x - center.x), std::abs(lo.x + s - center.x));
    double fy = std::max(std::abs(lo.y - center.y), std::abs(lo.y + s - center.y));
    if (fx * fx + fy * fy <= R * R) ++n;
  }
  return n;
}

double count_slope(const WhitneyDecomposition& dec, Point center, double R, int k_begin, int k_end) {
  std::vector<double> ks, ls;
  for (int k = k_begin; k <= k_end; ++k) {
    std::size_t n = count_generation(dec, center, R, k);
    if (n == 0) continue;
    ks.push_back(k);
    ls.push_back(std::log2(static_cast<double>(n)));
  }
  if (ks.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mk = 0, ml = 0;
  for (std::size_t a = 0; a < ks.size(); ++a) {
    mk += ks[a];
    ml += ls[a];
  }
  mk /= ks.size();
  ml /= ks.size();
  double sxy = 0, sxx = 0;
  for (std::size_t a = 0; a < ks.size(); ++a) {
    sxy += (ks[a] - mk) * (ls[a] - ml);
    sxx += (ks[a] - mk) * (ks[a] - mk);
  }
  return sxy / sxx;
}

BandCheck verify_band(const WhitneyDecomposition& dec, const DistanceFn& distance) {
  BandCheck out;
  out.min_lower_ratio = std::numeric_limits<double>::infinity();
  out.max_upper_ratio = 0.0;
  for (const auto& c : dec.cubes()) {
    double s = dec.side(c.k), l = dec.diameter(c.k);
    Point lo = dec.lower_corner(c);
    double dmin = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) dmin = std::min(dmin, distance({lo.x + s * a / 4.0, lo.y + s * b / 4.0}));
    double d = dmin - l / 8.0;
    double ratio = d / l;
    out.min_lower_ratio = std::min(out.min_lower_ratio, ratio);
    out.max_upper_ratio = std::max(out.max_upper_ratio, ratio);
    ++out.checked;
    if (!(ratio >= 1.0 && ratio <= 4.0)) ++out.failures;
  }
  return out;
}

bool verify_disjoint(const WhitneyDecomposition& dec) {
  for (const auto& c : dec.cubes()) {
    DyadicCube a = c;
    while (a.k > dec.root_generation()) {
      a = {a.k - 1, a.i >> 1, a.j >> 1};
      if (dec.contains_cube(a)) return false;
    }
  }
  return true;
}

CoverageCheck verify_coverage(const WhitneyDecomposition& dec, const DistanceFn& distance, std::size_t samples,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Box& b = dec.box();
  const double threshold = 8.0 * dec.side(dec.kmax());
  CoverageCheck out;
  std::size_t guard = 0;
  while (out.sampled < samples && guard < 1000 * samples) {
    ++guard;
    Point p{b.lower.x + b.side * u(rng), b.lower.y + b.side * u(rng)};
    if (distance(p) <= threshold) continue;
    ++out.sampled;
    if (dec.find_containing(p)) ++out.covered;
  }
  return out;
}

MSetReport verify_mset(const MeasureFn& measure, const std::vector<Point>& centers, const std::vector<double>& radii) {
  if (centers.empty() || radii.empty()) throw DomainError("m-set check needs nonempty center and radius grids");
  MSetReport out;
  out.c_low = std::numeric_limits<double>::infinity();
  out.c_high = 0.0;
  std::vector<double> lx, ly;
  bool degenerate = false;
  for (Point c : centers)
    for (double r : radii) {
      double m = measure(c, r);
      out.c_low = std::min(out.c_low, m / r);
      out.c_high = std::max(out.c_high, m / r);
      if (!(m > 0.0)) {
        degenerate = true;
        continue;
      }
      lx.push_back(std::log(r));
      ly.push_back(std::log(m));
    }
  if (degenerate || lx.size() < 2) {
    out.m_fit = std::numeric_limits<double>::quiet_NaN();
    out.ok = false;
    return out;
  }
  // Pooled slope with a separate intercept per center.
  const std::size_t nr = radii.size();
  double sxy = 0, sxx = 0;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    double mx = 0, my = 0;
    for (std::size_t r = 0; r < nr; ++r) {
      mx += lx[c * nr + r];
      my += ly[c * nr + r];
    }
    mx /= nr;
    my /= nr;
    for (std::size_t r = 0; r < nr; ++r) {
      sxy += (lx[c * nr + r] - mx) * (ly[c * nr + r] - my);
      sxx += (lx[c * nr + r] - mx) * (lx[c * nr + r] - mx);
    }
  }
  out.m_fit = sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
  out.ok = std::isfinite(out.m_fit) && out.c_low > 0.0;
  return out;
}

void write_decomposition(std::ostream& os, const WhitneyDecomposition& dec) {
  for (const auto& c : dec.cubes()) os << c.k << ' ' << c.i << ' ' << c.j << '\n';
}

}  // namespace cuspdiv::whitney
