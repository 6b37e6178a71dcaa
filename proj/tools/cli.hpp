#pragma once

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cuspdiv/geometry.hpp"

namespace cuspdiv::cli {

/// Bad flags, missing keys or malformed values. Exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key=value configuration. Keys may be dotted (ball.center); values are
/// kept as text and parsed on access.
struct RunConfig {
  std::string command;
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string text(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
  /// Comma-separated numbers.
  std::vector<double> list(const std::string& key, const std::vector<double>& fallback) const;
  Point point(const std::string& key, Point fallback) const;
};

/// `command=NAME` then `key=value` lines in key order.
void write_config(std::ostream& os, const RunConfig& cfg);
/// Accepts `key=value` lines, `# comments` and `[section]` headers that prefix
/// the following keys with `section.`.
RunConfig read_config(std::istream& is);

/// Full command line without the program name. Returns the exit status:
/// 0 success, 1 numerical failure, 2 usage or configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cuspdiv::cli
