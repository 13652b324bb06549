#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace logsymp::cli {

struct Check {
  std::string name;
  double value = 0.0;
  std::string relation;  ///< "<=", ">=", ">" or "=="
  double limit = 0.0;
  std::string text_value, text_limit;  ///< for string comparisons
  bool pass = false;
};

/// Result of one run. Holds no timing, so identical scenarios give identical
/// reports.
struct Report {
  std::string command;
  std::string manifold;
  std::string digest;
  nlohmann::ordered_json results = nlohmann::ordered_json::object();
  std::vector<Check> checks;
  std::map<std::string, std::string> csv;  ///< file name -> contents
  std::string error;                       ///< set when the run stopped on an error

  void at_most(const std::string& name, double value, double limit);
  void at_least(const std::string& name, double value, double limit);
  void above(const std::string& name, double value, double limit);
  void equals(const std::string& name, const std::string& value, const std::string& expected);
  void holds(const std::string& name, bool value);

  bool passed() const;
  std::vector<std::string> failing() const;

  std::string text() const;
  nlohmann::ordered_json json() const;
};

/// Shortest round-tripping decimal form.
std::string fmt(double v);

/// 16 hex digits of FNV-1a over the text.
std::string digest_of(const std::string& text);

}  // namespace logsymp::cli
