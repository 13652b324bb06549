#include "logsymp/cli/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <sstream>

namespace logsymp::cli {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string digest_of(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

void Report::at_most(const std::string& name, double value, double limit) {
  checks.push_back({name, value, "<=", limit, "", "", value <= limit});
}

void Report::at_least(const std::string& name, double value, double limit) {
  checks.push_back({name, value, ">=", limit, "", "", value >= limit});
}

void Report::above(const std::string& name, double value, double limit) {
  checks.push_back({name, value, ">", limit, "", "", value > limit});
}

void Report::equals(const std::string& name, const std::string& value, const std::string& expected) {
  checks.push_back({name, 0.0, "==", 0.0, value, expected, value == expected});
}

void Report::holds(const std::string& name, bool value) { equals(name, value ? "true" : "false", "true"); }

bool Report::passed() const { return error.empty() && failing().empty(); }

std::vector<std::string> Report::failing() const {
  std::vector<std::string> out;
  for (const Check& c : checks)
    if (!c.pass) out.push_back(c.name);
  return out;
}

namespace {

std::string value_text(const nlohmann::ordered_json& v) {
  if (v.is_number_float()) return fmt(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + value_text(v[i]);
    return s + "]";
  }
  return v.dump();
}

void write_results(std::ostringstream& out, const nlohmann::ordered_json& r, const std::string& indent) {
  for (const auto& [k, v] : r.items()) {
    if (v.is_object()) {
      out << indent << k << ":\n";
      write_results(out, v, indent + "  ");
    } else if (v.is_array() && !v.empty() && v[0].is_object()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        out << indent << k << "[" << i << "]:\n";
        write_results(out, v[i], indent + "  ");
      }
    } else {
      out << indent << k << " = " << value_text(v) << "\n";
    }
  }
}

}  // namespace

std::string Report::text() const {
  std::ostringstream out;
  out << "command: " << command << "\n";
  out << "manifold: " << manifold << "\n";
  out << "inputs: " << digest << "\n";
  out << "results:\n";
  write_results(out, results, "  ");
  if (!checks.empty()) out << "checks:\n";
  for (const Check& c : checks) {
    out << "  " << (c.pass ? "PASS " : "FAIL ") << c.name << ": ";
    if (c.relation == "==")
      out << c.text_value << " == " << c.text_limit << "\n";
    else
      out << fmt(c.value) << " " << c.relation << " " << fmt(c.limit) << "\n";
  }
  if (!error.empty()) out << "error: " << error << "\n";
  out << "verdict: " << (passed() ? "PASS" : "FAIL") << "\n";
  return out.str();
}

nlohmann::ordered_json Report::json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["manifold"] = manifold;
  j["inputs_digest"] = digest;
  j["results"] = results;
  j["checks"] = nlohmann::ordered_json::array();
  for (const Check& c : checks) {
    nlohmann::ordered_json cj;
    cj["name"] = c.name;
    if (c.relation == "==") {
      cj["value"] = c.text_value;
      cj["expected"] = c.text_limit;
    } else {
      cj["value"] = c.value;
      cj["limit"] = c.limit;
    }
    cj["relation"] = c.relation;
    cj["pass"] = c.pass;
    j["checks"].push_back(cj);
  }
  if (!error.empty()) j["error"] = error;
  j["pass"] = passed();
  return j;
}

}  // namespace logsymp::cli
