#include "cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <algorithm>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <sstream>

#include "cuspdiv/discretization.hpp"
#include "cuspdiv/experiments.hpp"
#include "cuspdiv/potential.hpp"
#include "cuspdiv/weights.hpp"
#include "cuspdiv/whitney.hpp"

#ifndef CUSPDIV_VERSION
#define CUSPDIV_VERSION "unknown"
#endif

namespace cuspdiv::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// ---------------------------------------------------------------- config

std::string RunConfig::text(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw UsageError("missing required key '" + key + "'");
  return it->second;
}

std::string RunConfig::text(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

namespace {

double parse_number(const std::string& key, const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
  if (used == 0 || used != s.size()) throw UsageError("key '" + key + "' expects a number, got '" + s + "'");
  return v;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

double RunConfig::number(const std::string& key) const { return parse_number(key, text(key)); }

double RunConfig::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

int RunConfig::integer(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  double v = number(key);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw UsageError("key '" + key + "' expects an integer");
  return static_cast<int>(v);
}

std::vector<double> RunConfig::list(const std::string& key, const std::vector<double>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  std::stringstream ss(text(key));
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(key, trim(item)));
  if (out.empty()) throw UsageError("key '" + key + "' expects a comma-separated list");
  return out;
}

Point RunConfig::point(const std::string& key, Point fallback) const {
  if (!has(key)) return fallback;
  auto v = list(key, {});
  if (v.size() != 2) throw UsageError("key '" + key + "' expects two comma-separated numbers");
  return {v[0], v[1]};
}

void write_config(std::ostream& os, const RunConfig& cfg) {
  os << "command=" << cfg.command << '\n';
  for (const auto& [k, v] : cfg.values) os << k << '=' << v << '\n';
}

RunConfig read_config(std::istream& is) {
  RunConfig cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw UsageError("config line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError("config line " + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    if (key == "command")
      cfg.command = value;
    else
      cfg.values[key] = value;
  }
  return cfg;
}

// ---------------------------------------------------------------- output

namespace {

const char* kManifest = "run.manifest";

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json jnum(double v) {
  if (std::isfinite(v)) return v;
  return num(v);
}

class Output {
 public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw UsageError("cannot write " + (dir_ / name).string());
    files_.push_back(name);
    return f;
  }

  void json_file(const std::string& name, json body) {
    json doc;
    doc["manifest"] = kManifest;
    for (auto& [k, v] : body.items()) doc[k] = v;
    auto f = open(name);
    f << doc.dump(2) << '\n';
  }

  /// CSV with a leading manifest comment.
  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows) {
    auto f = open(name);
    f << "# manifest=" << kManifest << '\n';
    for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
    f << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << r[i];
      f << '\n';
    }
  }

  void records(const std::string& name, const std::vector<experiments::SweepRecord>& recs) {
    auto f = open(name);
    f << "# manifest=" << kManifest << '\n';
    experiments::write_csv(f, recs);
  }

  const std::vector<std::string>& files() const { return files_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

struct Context {
  const RunConfig& cfg;
  Output& out;
  std::ostream& log;
};

// ---------------------------------------------------------------- helpers

CuspDomain domain_of(const RunConfig& cfg) {
  double a = cfg.number("alpha");
  if (!(a > 0.0 && a <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
  return CuspDomain(a);
}

void require_saddle(double alpha, const std::string& what) {
  if (!(alpha > 0.5)) throw DomainError("alpha must exceed 1/2 for " + what);
}

std::vector<double> levels_of(const RunConfig& cfg, std::vector<double> fallback) {
  auto lv = cfg.list("levels", fallback);
  for (double h : lv)
    if (!(h > 0.0 && h <= 1.0)) throw DomainError("levels must lie in (0, 1]");
  return lv;
}

// (h, space) pairs: the mesh file if given, else one graded mesh per level.
std::vector<std::pair<double, fem::P2Space>> spaces(const RunConfig& cfg, const CuspDomain& d,
                                                    std::vector<double> fallback) {
  std::vector<std::pair<double, fem::P2Space>> out;
  if (cfg.has("mesh")) {
    std::ifstream f(cfg.text("mesh"));
    if (!f) throw UsageError("cannot read mesh " + cfg.text("mesh"));
    fem::P2Space s(d, read_mesh(f));
    double h = s.mesh_size();
    out.emplace_back(h, std::move(s));
    return out;
  }
  double grading = cfg.number("grading", 1.0 / d.alpha());
  for (double h : levels_of(cfg, fallback)) out.emplace_back(h, fem::P2Space(d, generate_graded_mesh(d, h, grading)));
  return out;
}

potential::SourceField load_source(const RunConfig& cfg) {
  std::ifstream f(cfg.text("source"));
  if (!f) throw UsageError("cannot read source " + cfg.text("source"));
  return potential::read_source(f);
}

double lookup(const potential::SourceField& src, Point p) {
  const auto& g = src.grid();
  int i = static_cast<int>(std::floor((p.x - g.x0) / g.h)), j = static_cast<int>(std::floor((p.y - g.y0) / g.h));
  if (i < 0 || j < 0 || i >= g.nx || j >= g.ny) return 0.0;
  return src.value(i, j);
}

double spread(const std::vector<double>& v) {
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo - 1.0;
}

// ---------------------------------------------------------------- commands

int cmd_whitney(Context& c) {
  CuspDomain d = domain_of(c.cfg);
  int kmax = c.cfg.integer("kmax", 12);
  auto dist = [&](Point p) { return d.distance(p); };
  whitney::WhitneyDecomposition dec = whitney::decompose(dist, whitney::cusp_bounding_box(), kmax);
  whitney::BandCheck band = whitney::verify_band(dec, dist);
  bool disjoint = whitney::verify_disjoint(dec);
  auto samples = static_cast<std::size_t>(c.cfg.integer("samples", 10000));
  auto seed = static_cast<std::uint64_t>(c.cfg.integer("seed", 1));
  whitney::CoverageCheck cov = whitney::verify_coverage(dec, dist, samples, seed);
  Point center = c.cfg.point("center", d.upper_point(0.25));
  double radius = c.cfg.number("radius", 0.2);
  int k_begin = c.cfg.integer("k_begin", std::min(6, kmax));
  double slope = whitney::count_slope(dec, center, radius, k_begin, kmax);

  {
    auto f = c.out.open("decomposition.txt");
    f << "# manifest=" << kManifest << '\n';
    whitney::write_decomposition(f, dec);
  }
  std::vector<std::vector<std::string>> rows;
  auto counts = dec.generation_counts();
  for (int k = 0; k < static_cast<int>(counts.size()); ++k)
    if (counts[k] > 0)
      rows.push_back({std::to_string(k), std::to_string(counts[k]),
                      std::to_string(whitney::count_generation(dec, center, radius, k))});
  c.out.csv("counts.csv", {"k", "count", "count_in_ball"}, rows);
  c.out.json_file("summary.json", {{"alpha", d.alpha()},
                                   {"kmax", kmax},
                                   {"cubes", dec.cubes().size()},
                                   {"residual_cubes", dec.residual().size()},
                                   {"band_failures", band.failures},
                                   {"band_min_ratio", jnum(band.min_lower_ratio)},
                                   {"band_max_ratio", jnum(band.max_upper_ratio)},
                                   {"disjoint", disjoint},
                                   {"coverage", jnum(cov.fraction())},
                                   {"coverage_samples", cov.sampled},
                                   {"slope_center", {center.x, center.y}},
                                   {"slope_radius", radius},
                                   {"count_slope", jnum(slope)}});
  c.log << "whitney: " << dec.cubes().size() << " cubes, band failures " << band.failures << ", coverage "
        << num(cov.fraction()) << ", slope " << num(slope) << '\n';
  return 0;
}

int cmd_mset(Context& c) {
  CuspDomain d = domain_of(c.cfg);
  int n = c.cfg.integer("centers", 8);
  if (n < 1) throw DomainError("centers must be positive");
  auto radii = c.cfg.list("radii", {0.01, 0.03, 0.1, 0.3});
  for (double r : radii)
    if (!(r > 0.0)) throw DomainError("radii must be positive");
  std::vector<Point> centers{{0.0, 0.0}, {1.0, 1.0}, {1.0, -1.0}};
  for (int i = 1; i < n; ++i) {
    double t = static_cast<double>(i) / n;
    centers.push_back(d.upper_point(t));
    centers.push_back({t, -d.half_width(t)});
    centers.push_back({1.0, -1.0 + 2.0 * t});
  }
  auto measure = [&](Point p, double r) { return d.boundary_measure(p, r); };
  whitney::MSetReport rep = whitney::verify_mset(measure, centers, radii);
  std::vector<std::vector<std::string>> rows;
  for (Point p : centers)
    for (double r : radii) {
      double m = measure(p, r);
      rows.push_back({num(p.x), num(p.y), num(r), num(m), num(m / r)});
    }
  c.out.csv("ratios.csv", {"center_x", "center_y", "radius", "measure", "ratio"}, rows);
  c.out.json_file("summary.json", {{"alpha", d.alpha()},
                                   {"c_low", jnum(rep.c_low)},
                                   {"c_high", jnum(rep.c_high)},
                                   {"m_fit", jnum(rep.m_fit)},
                                   {"ok", rep.ok}});
  c.log << "mset-check: m_fit " << num(rep.m_fit) << (rep.ok ? " ok" : " not an m-set at these scales") << '\n';
  return 0;
}

int cmd_ap(Context& c) {
  CuspDomain d = domain_of(c.cfg);
  double mu = c.cfg.number("mu"), p = c.cfg.number("p", 2.0);
  if (!(p > 1.0)) throw DomainError("p must exceed 1");
  std::string mode = c.cfg.text("mode", "exact");
  if (mode != "exact" && mode != "surrogate") throw UsageError("mode must be exact or surrogate");
  weights::ApSampling plan = weights::default_ap_sampling(d);
  plan.resolution.near_depth = c.cfg.integer("near_depth", plan.resolution.near_depth);
  plan.resolution.rim_depth = c.cfg.integer("rim_depth", plan.resolution.rim_depth);
  weights::WeightSpec w{mu, mode == "exact" ? DistanceMode::exact : DistanceMode::surrogate};
  weights::ApEstimate e = weights::estimate_ap_constant(d, w, p, plan);
  std::vector<std::vector<std::string>> rows;
  for (const auto& b : e.per_ball)
    rows.push_back({num(b.center.x), num(b.center.y), num(b.radius), num(b.ratio), b.boundary_centered ? "1" : "0"});
  c.out.csv("balls.csv", {"center_x", "center_y", "radius", "ratio", "boundary"}, rows);
  c.out.json_file("summary.json", {{"alpha", d.alpha()},
                                   {"mu", mu},
                                   {"p", p},
                                   {"mode", mode},
                                   {"admissible", mu > -1.0 && mu < p - 1.0},
                                   {"value", jnum(e.value)},
                                   {"trend", jnum(e.trend)},
                                   {"balls", e.per_ball.size()}});
  c.log << "ap-check: sup " << num(e.value) << ", trend per decade " << num(e.trend) << '\n';
  return 0;
}

int cmd_div_potential(Context& c) {
  potential::SourceField src = load_source(c.cfg);
  potential::PotentialSolution sol(src, c.cfg.integer("near", 4));
  const auto& g = src.grid();
  int nx = c.cfg.integer("sample.nx", 32), ny = c.cfg.integer("sample.ny", 32);
  if (nx < 1 || ny < 1) throw DomainError("sample.nx and sample.ny must be positive");
  double wx = g.nx * g.h, wy = g.ny * g.h, vmax = 0.0;
  std::vector<std::vector<std::string>> rows;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Point x{g.x0 + (i + 0.5) * wx / nx, g.y0 + (j + 0.5) * wy / ny};
      Point v = sol.velocity(x);
      vmax = std::max(vmax, norm(v));
      rows.push_back({num(x.x), num(x.y), num(sol.phi(x)), num(v.x), num(v.y)});
    }
  c.out.csv("velocity.csv", {"x", "y", "phi", "vx", "vy"}, rows);
  // Cell centers keep the finite-difference stencil inside one cell.
  std::vector<Point> pts;
  int si = std::max(1, g.nx / 20), sj = std::max(1, g.ny / 20);
  for (int j = sj / 2; j < g.ny; j += sj)
    for (int i = si / 2; i < g.nx; i += si) pts.push_back(g.cell_center(i, j));
  double res = potential::divergence_residual(sol, [&](Point p) { return lookup(src, p); }, pts);
  c.out.json_file("summary.json", {{"method", "potential"},
                                   {"cells", src.values().size()},
                                   {"integral", jnum(src.integral())},
                                   {"max_speed", jnum(vmax)},
                                   {"divergence_residual", jnum(res)},
                                   {"residual_points", pts.size()}});
  c.log << "div-solve (potential): divergence residual " << num(res) << '\n';
  return 0;
}

int cmd_div_fem(Context& c) {
  CuspDomain d = domain_of(c.cfg);
  require_saddle(d.alpha(), "div-solve --method=fem");
  auto sp = spaces(c.cfg, d, {c.cfg.number("h", 0.125)});
  const fem::P2Space& s = sp.front().second;
  std::vector<double> f;
  if (c.cfg.has("source")) {
    potential::SourceField src = load_source(c.cfg);
    f = fem::sample(s, fem::ScalarFn([&](Point p) { return lookup(src, p); }));
  } else if (c.cfg.has("indicator")) {
    double t = c.cfg.number("indicator");
    if (!(t > 0.0 && t < 1.0)) throw DomainError("indicator must lie in (0, 1)");
    f = fem::sample(s, fem::ScalarFn([t](Point p) { return p.x < t ? 1.0 : 0.0; }));
  } else {
    throw UsageError("div-solve --method=fem needs source or indicator");
  }
  f = fem::mean_corrected(s, f);
  fem::DivSolution sol = fem::solve_div_right_inverse(s, d.alpha(), f);
  std::vector<std::vector<std::string>> rows;
  const int n = s.num_nodes();
  for (int i = 0; i < n; ++i)
    rows.push_back({std::to_string(i), num(s.node(i).x), num(s.node(i).y), num(sol.u.coeffs[i]),
                    num(sol.u.coeffs[n + i])});
  c.out.csv("u.csv", {"node", "x", "y", "ux", "uy"}, rows);
  double un = fem::h1_norm(sol.u), fw = fem::weighted_l2(s, f, d.alpha() - 1.0), fu = fem::weighted_l2(s, f, 0.0);
  c.out.json_file("summary.json", {{"method", "fem"},
                                   {"alpha", d.alpha()},
                                   {"h", sp.front().first},
                                   {"triangles", s.num_triangles()},
                                   {"h1_norm", jnum(un)},
                                   {"f_weighted_l2", jnum(fw)},
                                   {"f_l2", jnum(fu)},
                                   {"weighted_ratio", jnum(fw > 0 ? un / fw : 0.0)},
                                   {"unweighted_ratio", jnum(fu > 0 ? un / fu : 0.0)},
                                   {"constraint_residual", jnum(sol.constraint_residual)},
                                   {"optimality_residual", jnum(sol.optimality_residual)}});
  c.log << "div-solve (fem): |u|_H1 " << num(un) << ", constraint residual " << num(sol.constraint_residual) << '\n';
  return 0;
}

int cmd_div(Context& c) {
  std::string m = c.cfg.text("method");
  if (m == "potential") return cmd_div_potential(c);
  if (m == "fem") return cmd_div_fem(c);
  throw UsageError("method must be potential or fem");
}

fem::VectorFn load_of(const std::string& name) {
  if (name == "rotation") return [](Point p) { return Point{-p.y, p.x}; };
  if (name == "gravity") return [](Point) { return Point{0.0, -1.0}; };
  if (name == "shear") return [](Point p) { return Point{p.y, 0.0}; };
  throw UsageError("load must be rotation, gravity or shear");
}

int cmd_stokes(Context& c) {
  CuspDomain d = domain_of(c.cfg);
  require_saddle(d.alpha(), "stokes");
  double r = c.cfg.number("r", 1.3);
  double rmax = fem::max_pressure_exponent(d.alpha());
  if (!(r >= 1.0 && r < rmax)) throw DomainError("r must lie in [1, 2/(3-2 alpha)) = [1, " + num(rmax) + ")");
  fem::VectorFn load = load_of(c.cfg.text("load", "rotation"));
  bool infsup = c.cfg.integer("infsup", 1) != 0;
  std::vector<std::vector<std::string>> rows;
  std::vector<double> betas;
  json levels = json::array();
  for (auto& [h, s] : spaces(c.cfg, d, {0.25, 0.125})) {
    fem::StokesSolution sol = fem::solve_stokes(s, d.alpha(), load);
    fem::PressureNorm pn = fem::pressure_lr_norm(s, sol.p, r, d.alpha());
    double beta = std::nan("");
    int it = 0;
    if (infsup) {
      fem::EigenReport e = fem::discrete_infsup(s, d.alpha());
      beta = e.value;
      it = e.iterations;
      betas.push_back(beta);
    }
    rows.push_back({num(h), std::to_string(s.num_triangles()), num(beta), std::to_string(it),
                    num(sol.divergence_residual), num(sol.energy), num(sol.load_work), num(pn.norm), num(pn.bound)});
    levels.push_back({{"h", h},
                      {"infsup", jnum(beta)},
                      {"divergence_residual", jnum(sol.divergence_residual)},
                      {"energy", jnum(sol.energy)},
                      {"pressure_lr", jnum(pn.norm)},
                      {"holder_bound", jnum(pn.bound)},
                      {"holder_holds", pn.norm <= pn.bound}});
  }
  c.out.csv("convergence.csv",
            {"h", "triangles", "infsup", "iterations", "divergence_residual", "energy", "load_work", "pressure_lr",
             "holder_bound"},
            rows);
  json summary = {{"alpha", d.alpha()}, {"r", r}, {"load", c.cfg.text("load", "rotation")}, {"levels", levels}};
  if (betas.size() > 1) summary["infsup_variation"] = jnum(spread(betas));
  c.out.json_file("summary.json", summary);
  c.log << "stokes: " << rows.size() << " level(s)";
  if (!betas.empty()) c.log << ", inf-sup " << num(betas.back());
  c.log << '\n';
  return 0;
}

int cmd_constants(Context& c, bool korn) {
  CuspDomain d = domain_of(c.cfg);
  double beta = c.cfg.number("beta");
  fem::Disk ball = fem::default_ball(d);
  ball.center = c.cfg.point("ball.center", ball.center);
  ball.radius = c.cfg.has("ball.radius") ? c.cfg.number("ball.radius") : d.distance(ball.center);
  if (!d.contains(ball.center) || !(ball.radius > 0.0) || ball.radius > d.distance(ball.center) + 1e-12)
    throw DomainError("ball must lie inside the domain");
  std::vector<std::vector<std::string>> rows;
  json records = json::array();
  double prev = 0.0;
  std::vector<double> values;
  for (auto& [h, s] : spaces(c.cfg, d, {0.25, 0.125, 0.0625})) {
    fem::ConstantEstimate e = korn ? fem::korn_best_constant(s, d.alpha(), beta, ball)
                                   : fem::improved_poincare_constant(s, d.alpha(), beta, ball);
    double growth = prev > 0.0 ? e.value / prev : std::nan("");
    prev = e.value;
    values.push_back(e.value);
    rows.push_back({num(h), num(e.h), num(e.value), std::to_string(e.iterations), num(e.residual), num(growth)});
    records.push_back({{"alpha", e.alpha},
                       {"beta", e.beta},
                       {"h", h},
                       {"mesh_size", e.h},
                       {"value", jnum(e.value)},
                       {"iterations", e.iterations},
                       {"residual", jnum(e.residual)}});
  }
  const std::string name = korn ? "korn" : "poincare";
  c.out.csv("table.csv", {"h", "mesh_size", "value", "iterations", "residual", "growth"}, rows);
  c.out.json_file("estimates.json", {{"constant", name},
                                     {"alpha", d.alpha()},
                                     {"beta", beta},
                                     {"admissible", beta >= d.alpha() && beta <= 1.0},
                                     {"ball", {{"center", {ball.center.x, ball.center.y}}, {"radius", ball.radius}}},
                                     {"variation", jnum(spread(values))},
                                     {"records", records}});
  c.log << name << "-sweep: " << num(values.back()) << " at finest level, variation " << num(spread(values)) << '\n';
  return 0;
}

json fit_json(const experiments::FitResult& f) {
  return {{"kappa", jnum(f.kappa)},
          {"threshold", jnum(f.threshold)},
          {"constant", jnum(f.constant)},
          {"residual", jnum(f.residual)},
          {"points", f.points}};
}

int cmd_optimality(Context& c) {
  CuspDomain d = domain_of(c.cfg);
  double beta = c.cfg.number("beta"), p = c.cfg.number("p", 2.0);
  experiments::OptimalityOptions opts;
  opts.span = c.cfg.number("span", opts.span);
  opts.count = c.cfg.integer("count", opts.count);
  if (opts.count < 6) throw DomainError("count must be at least 6 for the rate fit");
  if (!(opts.span > 0.0)) throw DomainError("span must be positive");
  experiments::OptimalitySweep r = experiments::optimality_sweep(d.alpha(), beta, p, opts);
  c.out.records("records.csv", r.records);
  std::vector<std::vector<std::string>> rows;
  for (const auto& ch : r.chain)
    rows.push_back({num(ch.s), num(ch.lhs), num(ch.rhs), num(ch.lhs / ch.rhs), num(ch.comparison)});
  c.out.csv("chain.csv", {"s", "lhs", "rhs", "ratio", "comparison"}, rows);
  std::string order = r.fit_A.threshold < r.fit_B.threshold ? "T_A < T_B" : "T_A >= T_B";
  c.out.json_file("fit.json", {{"alpha", d.alpha()},
                               {"beta", beta},
                               {"p", p},
                               {"A", r.A},
                               {"B", r.B},
                               {"fit_A", fit_json(r.fit_A)},
                               {"fit_B", fit_json(r.fit_B)},
                               {"ordering", order}});
  c.log << "optimality-sweep: T_A " << num(r.fit_A.threshold) << " (A " << num(r.A) << "), T_B "
        << num(r.fit_B.threshold) << " (B " << num(r.B) << ")\n";
  return 0;
}

int cmd_necessity(Context& c) {
  CuspDomain d = domain_of(c.cfg);
  require_saddle(d.alpha(), "necessity-demo");
  auto levels = levels_of(c.cfg, {0.25, 0.125, 0.0625});
  auto ts = c.cfg.list("t", {0.4, 0.2, 0.1, 0.05});
  auto rows = experiments::necessity_demo(d.alpha(), levels, ts);
  c.out.records("necessity.csv", experiments::to_records(rows, d.alpha()));
  json per_level = json::array();
  for (double h : levels) {
    std::vector<double> rw, ru;
    for (const auto& r : rows)
      if (r.h == h) {
        rw.push_back(r.weighted_ratio);
        ru.push_back(r.unweighted_ratio);
      }
    per_level.push_back({{"h", h}, {"unweighted_growth", jnum(ru.back() / ru.front())}, {"weighted_spread", jnum(spread(rw))}});
  }
  json per_t = json::array();
  for (double t : ts) {
    std::vector<double> rw;
    for (const auto& r : rows)
      if (r.t == t) rw.push_back(r.weighted_ratio);
    per_t.push_back({{"t", t}, {"weighted_spread_over_levels", jnum(spread(rw))}});
  }
  c.out.json_file("summary.json", {{"alpha", d.alpha()}, {"levels", per_level}, {"indicators", per_t}});
  c.log << "necessity-demo: " << rows.size() << " solves\n";
  return 0;
}

// ---------------------------------------------------------------- dispatch

struct Command {
  std::string name;
  std::string description;
  std::vector<std::pair<std::string, std::string>> keys;  // key, help
  std::vector<std::string> required;
  std::function<int(Context&)> handler;
};

std::vector<Command> commands() {
  const std::pair<std::string, std::string> alpha{"alpha", "cusp exponent, domain |y| < x^(1/alpha)"};
  const std::pair<std::string, std::string> levels{"levels", "comma-separated mesh sizes h"};
  const std::pair<std::string, std::string> grading{"grading", "mesh grading exponent (default 1/alpha)"};
  const std::pair<std::string, std::string> mesh{"mesh", "mesh file (overrides levels)"};
  return {
      {"whitney",
       "Whitney decomposition of the bounding box minus the boundary",
       {alpha,
        {"kmax", "deepest generation"},
        {"samples", "coverage sample points"},
        {"center", "x,y of the counting ball"},
        {"radius", "counting ball radius"},
        {"k_begin", "first generation of the count regression"}},
       {"alpha"},
       cmd_whitney},
      {"mset-check",
       "boundary measure ratios H^1(B(x,r) n F)/r",
       {alpha, {"centers", "centers per boundary piece"}, {"radii", "comma-separated radii"}},
       {"alpha"},
       cmd_mset},
      {"ap-check",
       "A_p ratios of d^mu over boundary and interior balls",
       {alpha,
        {"mu", "weight exponent"},
        {"p", "A_p exponent"},
        {"mode", "exact or surrogate distance"},
        {"near_depth", "ball grid refinement near the boundary"},
        {"rim_depth", "ball grid refinement at the sphere"}},
       {"alpha", "mu"},
       cmd_ap},
      {"div-solve",
       "right inverse of the divergence",
       {alpha,
        {"method", "potential or fem"},
        {"source", "source field file"},
        {"indicator", "fem: use the mean-corrected indicator of {x < t}"},
        {"h", "fem mesh size"},
        grading,
        mesh,
        {"near", "potential: closed-form cell radius"},
        {"sample.nx", "potential: sample columns"},
        {"sample.ny", "potential: sample rows"}},
       {"method"},
       cmd_div},
      {"stokes",
       "weighted Stokes solve and inf-sup constant",
       {alpha,
        levels,
        grading,
        mesh,
        {"load", "rotation, gravity or shear"},
        {"r", "pressure Lebesgue exponent"},
        {"infsup", "1 to compute the inf-sup constant"}},
       {"alpha"},
       cmd_stokes},
      {"korn-sweep",
       "weighted Korn constant over refinements",
       {alpha, {"beta", "weight parameter"}, levels, grading, mesh, {"ball.center", "x,y"}, {"ball.radius", "radius"}},
       {"alpha", "beta"},
       [](Context& c) { return cmd_constants(c, true); }},
      {"poincare-sweep",
       "improved Poincare constant over refinements",
       {alpha, {"beta", "weight parameter"}, levels, grading, mesh, {"ball.center", "x,y"}, {"ball.radius", "radius"}},
       {"alpha", "beta"},
       [](Context& c) { return cmd_constants(c, false); }},
      {"optimality-sweep",
       "f_s and y x^(-s-1) norms near their thresholds, with rate fits",
       {alpha, {"beta", "weight exponent"}, {"p", "Lebesgue exponent"}, {"span", "s grid span"}, {"count", "s grid size"}},
       {"alpha", "beta"},
       cmd_optimality},
      {"necessity-demo",
       "weighted and unweighted right-inverse ratios for indicators shrinking to the tip",
       {alpha, levels, {"t", "comma-separated indicator cuts"}},
       {"alpha"},
       cmd_necessity},
  };
}

std::string manifest_time(double seconds) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", seconds);
  return buf;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  CLI::App app{"Weighted divergence computations on planar cusp domains", "cuspdiv"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", CUSPDIV_VERSION);

  std::vector<Command> cmds = commands();
  std::map<std::string, std::map<std::string, std::string>> flags;
  std::map<std::string, std::map<std::string, CLI::Option*>> opts;
  std::map<std::string, CLI::App*> subs;
  for (const auto& cmd : cmds) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.description);
    subs[cmd.name] = sub;
    auto& store = flags[cmd.name];
    std::vector<std::pair<std::string, std::string>> keys = cmd.keys;
    keys.push_back({"config", "key=value config file; flags override it"});
    keys.push_back({"out", "output directory (default .)"});
    keys.push_back({"seed", "random seed (default 1)"});
    for (const auto& [k, help] : keys) {
      std::string h = help;
      if (std::find(cmd.required.begin(), cmd.required.end(), k) != cmd.required.end()) h += " [required]";
      opts[cmd.name][k] = sub->add_option("--" + k, store[k], h);
    }
  }

  std::vector<std::string> argv_store{"cuspdiv"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << CUSPDIV_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n";
    auto chosen = app.get_subcommands();
    err << (chosen.empty() ? app.help() : chosen.front()->help());
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const Command& cmd = *std::find_if(cmds.begin(), cmds.end(), [&](const Command& c) { return c.name == sub->get_name(); });
  auto& given = opts[cmd.name];

  RunConfig cfg;
  cfg.command = cmd.name;
  try {
    if (given["config"]->count() > 0) {
      std::ifstream f(flags[cmd.name]["config"]);
      if (!f) throw UsageError("cannot read config " + flags[cmd.name]["config"]);
      RunConfig file = read_config(f);
      if (!file.command.empty() && file.command != cmd.name)
        throw UsageError("config is for '" + file.command + "', not '" + cmd.name + "'");
      for (const auto& [k, v] : file.values) {
        if (given.count(k) == 0 || k == "config") throw UsageError("unknown key '" + k + "' for " + cmd.name);
        cfg.values[k] = v;
      }
    }
    for (const auto& [k, opt] : given)
      if (k != "config" && opt->count() > 0) cfg.values[k] = flags[cmd.name][k];
    for (const auto& k : cmd.required)
      if (!cfg.has(k)) throw UsageError("missing required key '" + k + "'");
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return 2;
  }

  int status = 0;
  try {
    Output output(cfg.text("out", "."));
    Context ctx{cfg, output, out};
    status = cmd.handler(ctx);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ofstream m(output.dir() / kManifest, std::ios::binary);
    write_config(m, cfg);
    m << "version=" << CUSPDIV_VERSION << '\n'
      << "eigen=" << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n'
      << "boost=" << BOOST_LIB_VERSION << '\n'
      << "wall_time=" << manifest_time(wall) << '\n'
      << "outputs=";
    for (std::size_t i = 0; i < output.files().size(); ++i) m << (i ? "," : "") << output.files()[i];
    m << '\n';
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return 1;
  }
  return status;
}

}  // namespace cuspdiv::cli
