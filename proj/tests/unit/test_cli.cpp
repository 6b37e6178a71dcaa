#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "cuspdiv/potential.hpp"

using namespace cuspdiv;
using namespace cuspdiv::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("cuspdiv_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int call(std::vector<std::string> args, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  int code = run(args, out, err);
  if (err_text) *err_text = err.str();
  return code;
}

}  // namespace

TEST(Config, RoundTrip) {
  RunConfig cfg{"korn-sweep", {{"alpha", "0.5"}, {"ball.center", "0.7,0"}, {"levels", "0.25,0.125"}}};
  std::stringstream ss;
  write_config(ss, cfg);
  RunConfig back = read_config(ss);
  EXPECT_EQ(back.command, cfg.command);
  EXPECT_EQ(back.values, cfg.values);
  EXPECT_EQ(back.list("levels", {}), (std::vector<double>{0.25, 0.125}));
  EXPECT_EQ(back.point("ball.center", {}).x, 0.7);
}

TEST(Config, SectionsAndComments) {
  std::stringstream ss("# a comment\nalpha = 0.75\n[ball]\ncenter=0.6,0\nradius=0.1\n");
  RunConfig cfg = read_config(ss);
  EXPECT_EQ(cfg.text("ball.center"), "0.6,0");
  EXPECT_EQ(cfg.number("ball.radius"), 0.1);
  EXPECT_EQ(cfg.number("alpha"), 0.75);
  EXPECT_THROW(cfg.number("beta"), UsageError);
  RunConfig bad{"x", {{"alpha", "half"}}};
  EXPECT_THROW(bad.number("alpha"), UsageError);
  std::stringstream broken("alpha\n");
  EXPECT_THROW(read_config(broken), UsageError);
}

TEST(Cli, UsageErrors) {
  std::string err;
  EXPECT_EQ(call({}, &err), 2);
  EXPECT_EQ(call({"stokes"}, &err), 2);
  EXPECT_NE(err.find("Usage"), std::string::npos);
  EXPECT_EQ(call({"stokes", "--alpha", "0.5", "--out", scratch("u1").string()}, &err), 2);
  EXPECT_NE(err.find("alpha must exceed 1/2 for stokes"), std::string::npos);
  EXPECT_EQ(call({"no-such-command"}), 2);
  EXPECT_EQ(call({"korn-sweep", "--alpha", "0.5", "--beta", "x", "--out", scratch("u2").string()}), 2);
  EXPECT_EQ(call({"stokes", "--alpha", "0.75", "--r", "1.4", "--out", scratch("u3").string()}, &err), 2);
  EXPECT_NE(err.find("r must lie in"), std::string::npos);
  EXPECT_EQ(call({"ap-check", "--help"}), 0);
}

TEST(Cli, ConfigFileWithOverride) {
  fs::path dir = scratch("cfg");
  {
    std::ofstream f(dir / "run.cfg");
    f << "command=korn-sweep\nalpha=0.5\nbeta=0.25\nlevels=0.25\n";
  }
  fs::path out = dir / "out";
  ASSERT_EQ(call({"korn-sweep", "--config", (dir / "run.cfg").string(), "--beta", "0.5", "--out", out.string()}), 0);
  std::string manifest = slurp(out / "run.manifest");
  EXPECT_NE(manifest.find("beta=0.5\n"), std::string::npos);
  EXPECT_NE(manifest.find("levels=0.25\n"), std::string::npos);
  std::string est = slurp(out / "estimates.json");
  EXPECT_NE(est.find("\"manifest\": \"run.manifest\""), std::string::npos);
  EXPECT_NE(est.find("\"admissible\": true"), std::string::npos);

  {
    std::ofstream f(dir / "bad.cfg");
    f << "alpha=0.5\nbeta=0.5\nwhatever=1\n";
  }
  EXPECT_EQ(call({"korn-sweep", "--config", (dir / "bad.cfg").string(), "--out", out.string()}), 2);
  {
    std::ofstream f(dir / "other.cfg");
    f << "command=stokes\nalpha=0.75\n";
  }
  EXPECT_EQ(call({"korn-sweep", "--config", (dir / "other.cfg").string(), "--out", out.string()}), 2);
}

TEST(Cli, DeterministicOutputs) {
  fs::path a = scratch("det_a"), b = scratch("det_b");
  std::vector<std::string> base{"optimality-sweep", "--alpha", "0.5", "--beta", "0", "--p", "2", "--seed", "5"};
  auto with = [&](const fs::path& d) {
    auto v = base;
    v.push_back("--out");
    v.push_back(d.string());
    return v;
  };
  ASSERT_EQ(call(with(a)), 0);
  ASSERT_EQ(call(with(b)), 0);
  for (const char* f : {"records.csv", "chain.csv", "fit.json"}) {
    EXPECT_FALSE(slurp(a / f).empty());
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  std::string fit = slurp(a / "fit.json");
  EXPECT_NE(fit.find("\"A\": 1.5"), std::string::npos);
}

TEST(Cli, PotentialDivSolveFromFile) {
  fs::path dir = scratch("pot");
  potential::CellGrid g{0.3, -0.2, 0.4 / 32, 32, 32};
  auto bump = [](Point p) {
    double s = dot(p - Point{0.5, 0.0}, p - Point{0.5, 0.0}) / 0.02;
    return s < 1 ? (1 - s) * (1 - s) : 0.0;
  };
  {
    std::ofstream f(dir / "src.txt");
    potential::write_source(f, potential::SourceField::sample(bump, g, 4));
  }
  ASSERT_EQ(call({"div-solve", "--method", "potential", "--source", (dir / "src.txt").string(), "--sample.nx", "8",
                  "--sample.ny", "4", "--out", dir.string()}),
            0);
  std::string csv = slurp(dir / "velocity.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2 + 32);
  EXPECT_EQ(call({"div-solve", "--method", "spectral", "--out", dir.string()}), 2);
  EXPECT_EQ(call({"div-solve", "--method", "fem", "--alpha", "0.75", "--out", dir.string()}), 2);
}

TEST(Cli, FemCommands) {
  fs::path dir = scratch("fem");
  EXPECT_EQ(call({"div-solve", "--method=fem", "--alpha", "0.75", "--h", "0.25", "--indicator", "0.3", "--out",
                  (dir / "d").string()}),
            0);
  EXPECT_NE(slurp(dir / "d" / "summary.json").find("weighted_ratio"), std::string::npos);
  EXPECT_EQ(call({"stokes", "--alpha", "0.75", "--levels", "0.25", "--out", (dir / "s").string()}), 0);
  EXPECT_EQ(call({"necessity-demo", "--alpha", "0.75", "--levels", "0.25", "--t", "0.4,0.1", "--out",
                  (dir / "n").string()}),
            0);
  EXPECT_EQ(call({"poincare-sweep", "--alpha", "0.5", "--beta", "1", "--levels", "0.25", "--ball.center", "0.7,0",
                  "--ball.radius", "0.2", "--out", (dir / "p").string()}),
            0);
  EXPECT_EQ(call({"poincare-sweep", "--alpha", "0.5", "--beta", "1", "--levels", "0.25", "--ball.radius", "0.9",
                  "--out", (dir / "p2").string()}),
            2);
}

TEST(Cli, GeometryCommands) {
  fs::path dir = scratch("geo");
  EXPECT_EQ(call({"whitney", "--alpha", "1", "--kmax", "8", "--samples", "500", "--out", (dir / "w").string()}), 0);
  std::string dec = slurp(dir / "w" / "decomposition.txt");
  EXPECT_EQ(dec.substr(0, 24), "# manifest=run.manifest\n");
  EXPECT_EQ(call({"mset-check", "--alpha", "0.5", "--out", (dir / "m").string()}), 0);
  EXPECT_NE(slurp(dir / "m" / "summary.json").find("\"ok\": true"), std::string::npos);
}
