#include "logsymp/cli/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "logsymp/error.hpp"
#include "logsymp/locus.hpp"

namespace logsymp::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorKind::Parse, "scenario: " + what); }

void only_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) fail("unknown key '" + k + "' in " + where);
}

std::string get_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where + " must be a string");
  return j.get<std::string>();
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where + " must be a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where + " must be an integer");
  return j.get<int>();
}

std::vector<double> get_numbers(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(get_number(v, where));
  return out;
}

std::vector<int> get_ints(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where + " must be an array of integers");
  std::vector<int> out;
  for (const auto& v : j) out.push_back(get_int(v, where));
  return out;
}

Frame get_frame(const json& j, const std::string& where) {
  const std::string f = get_string(j, where);
  if (f == "b") return Frame::B;
  if (f == "coordinate") return Frame::Coordinate;
  fail(where + " must be \"b\" or \"coordinate\"");
}

std::map<std::string, std::string> get_coefficients(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where + " must be an object of expressions");
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : j.items()) out[k] = get_string(v, where + "." + k);
  return out;
}

FormInput get_form(const json& j, const std::string& where) {
  only_keys(j, where, {"degree", "frame", "coefficients"});
  FormInput f;
  f.degree = -1;
  if (j.contains("degree")) f.degree = get_int(j["degree"], where + ".degree");
  if (j.contains("frame")) f.frame = get_frame(j["frame"], where + ".frame");
  if (j.contains("coefficients")) f.coefficients = get_coefficients(j["coefficients"], where + ".coefficients");
  if (f.degree < 0 && f.coefficients.empty()) fail(where + " needs a degree or coefficients");
  return f;
}

BivectorInput get_bivector(const json& j, const std::string& where) {
  only_keys(j, where, {"frame", "coefficients"});
  BivectorInput b;
  if (j.contains("frame")) b.frame = get_frame(j["frame"], where + ".frame");
  if (j.contains("coefficients")) b.coefficients = get_coefficients(j["coefficients"], where + ".coefficients");
  return b;
}

json form_json(const FormInput& f) {
  return {{"degree", f.degree}, {"frame", f.frame == Frame::B ? "b" : "coordinate"}, {"coefficients", f.coefficients}};
}

json bivector_json(const BivectorInput& b) {
  return {{"frame", b.frame == Frame::B ? "b" : "coordinate"}, {"coefficients", b.coefficients}};
}

const std::set<std::string> kTolerances = {"jacobi",   "split",  "class",   "volume", "params",  "normal_form",
                                           "pullback", "reverse", "drift",  "order",  "mismatch", "route",
                                           "tangency", "spread", "expect",  "quadrature"};

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("not valid JSON: ") + e.what());
  }
  only_keys(j, "scenario",
            {"command", "manifold", "pi", "omega", "epsilon", "delta", "exact", "perturbation", "locus_shift", "form",
             "primitive", "mu0", "mu1", "rescale", "sigma", "example3", "sweep", "steps", "grid", "convergence",
             "trials", "seed", "tolerances", "expect", "output"});
  Scenario s;
  if (j.contains("command")) s.command = get_string(j["command"], "command");
  if (j.contains("manifold")) {
    s.manifold = get_string(j["manifold"], "manifold");
    s.manifold_given = true;
  }
  if (j.contains("pi")) s.pi = get_bivector(j["pi"], "pi");
  if (j.contains("omega")) s.omega = get_form(j["omega"], "omega");
  if (s.pi && s.omega) fail("give either pi or omega, not both");
  if (j.contains("epsilon")) s.epsilon = get_numbers(j["epsilon"], "epsilon");
  if (j.contains("delta")) s.delta = get_numbers(j["delta"], "delta");
  if (j.contains("exact")) s.exact = get_form(j["exact"], "exact");
  if (j.contains("perturbation")) s.perturbation = get_bivector(j["perturbation"], "perturbation");
  if (j.contains("locus_shift")) s.locus_shift = get_string(j["locus_shift"], "locus_shift");
  if (j.contains("form")) s.form = get_form(j["form"], "form");
  if (j.contains("primitive")) s.primitive = get_form(j["primitive"], "primitive");
  if (j.contains("mu0")) s.mu0 = get_form(j["mu0"], "mu0");
  if (j.contains("mu1")) s.mu1 = get_form(j["mu1"], "mu1");
  if (j.contains("rescale")) s.rescale = get_string(j["rescale"], "rescale");
  if (s.mu1 && !s.rescale.empty()) fail("give either mu1 or rescale, not both");
  if (j.contains("sigma")) s.sigma = get_bivector(j["sigma"], "sigma");
  if (j.contains("example3")) {
    const json& e = j["example3"];
    only_keys(e, "example3", {"kind", "eps"});
    if (!e.contains("kind")) fail("example3 needs a kind");
    s.example3 = get_string(e["kind"], "example3.kind");
    if (s.example3 != "plateau" && s.example3 != "three-circles")
      fail("example3.kind must be \"plateau\" or \"three-circles\"");
    if (e.contains("eps")) s.example3_eps = get_number(e["eps"], "example3.eps");
    if (!(s.example3_eps > 0.0)) fail("example3.eps must be positive");
  }
  if (j.contains("sweep")) {
    const json& e = j["sweep"];
    only_keys(e, "sweep", {"direction", "scales"});
    if (!e.contains("direction") || !e.contains("scales")) fail("sweep needs direction and scales");
    s.sweep_direction = get_bivector(e["direction"], "sweep.direction");
    s.sweep_scales = get_numbers(e["scales"], "sweep.scales");
  }
  if (j.contains("steps")) s.steps = get_int(j["steps"], "steps");
  if (s.steps < 1) fail("steps must be positive");
  if (j.contains("grid")) s.grid = get_ints(j["grid"], "grid");
  if (!s.grid.empty() && (s.grid.size() != 2 || s.grid[0] < 6 || s.grid[1] < 6))
    fail("grid must be [t points, periodic points], each at least 6");
  if (j.contains("convergence")) s.convergence = get_ints(j["convergence"], "convergence");
  if (j.contains("trials")) s.trials = get_int(j["trials"], "trials");
  if (s.trials < 0) fail("trials must be non-negative");
  if (j.contains("seed")) s.seed = static_cast<unsigned>(get_int(j["seed"], "seed"));
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    only_keys(t, "tolerances", kTolerances);
    for (const auto& [k, v] : t.items()) {
      s.tolerances[k] = get_number(v, "tolerances." + k);
      if (!(s.tolerances[k] > 0.0)) fail("tolerances." + k + " must be positive");
    }
  }
  if (j.contains("expect")) {
    const json& e = j["expect"];
    if (!e.is_object()) fail("expect must be an object");
    for (const auto& [k, v] : e.items()) {
      if (v.is_number()) s.expect_numbers[k] = v.get<double>();
      else if (v.is_string()) s.expect_strings[k] = v.get<std::string>();
      else if (v.is_boolean()) s.expect_strings[k] = v.get<bool>() ? "true" : "false";
      else fail("expect." + k + " must be a number, string or boolean");
    }
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    only_keys(o, "output", {"dir", "csv"});
    if (o.contains("dir")) s.out_dir = get_string(o["dir"], "output.dir");
    if (o.contains("csv")) {
      if (!o["csv"].is_boolean()) fail("output.csv must be a boolean");
      s.csv = o["csv"].get<bool>();
    }
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot read scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string canonical(const Scenario& s) {
  json j;  // std::map-backed, so keys come out sorted
  j["command"] = s.command;
  j["manifold"] = s.manifold;
  if (s.pi) j["pi"] = bivector_json(*s.pi);
  if (s.omega) j["omega"] = form_json(*s.omega);
  j["epsilon"] = s.epsilon;
  j["delta"] = s.delta;
  if (s.exact) j["exact"] = form_json(*s.exact);
  if (s.perturbation) j["perturbation"] = bivector_json(*s.perturbation);
  j["locus_shift"] = s.locus_shift;
  if (s.form) j["form"] = form_json(*s.form);
  if (s.primitive) j["primitive"] = form_json(*s.primitive);
  if (s.mu0) j["mu0"] = form_json(*s.mu0);
  if (s.mu1) j["mu1"] = form_json(*s.mu1);
  j["rescale"] = s.rescale;
  if (s.sigma) j["sigma"] = bivector_json(*s.sigma);
  if (!s.example3.empty()) j["example3"] = {{"kind", s.example3}, {"eps", s.example3_eps}};
  if (s.sweep_direction) j["sweep"] = {{"direction", bivector_json(*s.sweep_direction)}, {"scales", s.sweep_scales}};
  j["steps"] = s.steps;
  j["grid"] = s.grid;
  j["convergence"] = s.convergence;
  j["trials"] = s.trials;
  j["seed"] = s.seed;
  j["tolerances"] = s.tolerances;
  json expect = json::object();
  for (const auto& [k, v] : s.expect_numbers) expect[k] = v;
  for (const auto& [k, v] : s.expect_strings) expect[k] = v;
  j["expect"] = expect;
  return j.dump();
}

Mask parse_mask(const std::string& key, const BManifoldSpec& spec) {
  std::vector<int> idx;
  const bool digits = !key.empty() && std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; });
  if (digits) {
    for (char c : key) idx.push_back(c - '0');
  } else {
    const auto names = spec.coordinate_names();
    std::stringstream ss(key);
    std::string name;
    while (std::getline(ss, name, ',')) {
      const auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) fail("unknown coordinate '" + name + "' in coefficient key '" + key + "'");
      idx.push_back(static_cast<int>(it - names.begin()));
    }
  }
  Mask m = 0;
  for (int i : idx) {
    if (i < 0 || i >= spec.dim) fail("index out of range in coefficient key '" + key + "'");
    if (m & (1u << i)) fail("repeated index in coefficient key '" + key + "'");
    m |= 1u << i;
  }
  return m;
}

namespace {

/// Sign of the permutation sorting the indices of a coefficient key.
int key_sign(const std::string& key, const BManifoldSpec& spec) {
  std::vector<int> idx;
  const auto names = spec.coordinate_names();
  const bool digits = std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; });
  if (digits) {
    for (char c : key) idx.push_back(c - '0');
  } else {
    std::stringstream ss(key);
    std::string name;
    while (std::getline(ss, name, ','))
      idx.push_back(static_cast<int>(std::find(names.begin(), names.end(), name) - names.begin()));
  }
  int sign = 1;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b)
      if (idx[a] > idx[b]) sign = -sign;
  return sign;
}

template <class T>
void fill(T& out, const std::map<std::string, std::string>& coefficients, int degree, const BManifoldSpec& spec,
          const std::string& what) {
  for (const auto& [key, text] : coefficients) {
    const Mask m = parse_mask(key, spec);
    if (mask_degree(m) != degree)
      fail(what + " coefficient '" + key + "' has degree " + std::to_string(mask_degree(m)) + ", expected " +
           std::to_string(degree));
    const ScalarField f = build_scalar(text, spec);
    out[m] = out[m] + (key_sign(key, spec) > 0 ? f : -f);
  }
}

}  // namespace

ScalarField build_scalar(const std::string& text, const BManifoldSpec& spec) {
  try {
    return ScalarField::from_expr(Expr::parse(text, spec.coordinate_names()));
  } catch (const Error& e) {
    fail("expression '" + text + "': " + e.what());
  }
}

BForm build_form(const FormInput& f, const BManifoldSpec& spec) {
  int degree = f.degree;
  if (degree < 0) degree = mask_degree(parse_mask(f.coefficients.begin()->first, spec));
  if (degree > spec.dim) fail("form degree " + std::to_string(degree) + " exceeds the dimension");
  BForm out(spec.dim, degree, f.frame);
  fill(out, f.coefficients, degree, spec, "form");
  return out;
}

BMultiVector build_bivector(const BivectorInput& b, const BManifoldSpec& spec) {
  BMultiVector out(spec.dim, 2, b.frame);
  fill(out, b.coefficients, 2, spec, "bivector");
  return out;
}

namespace {

DeformationParams scenario_params(const Scenario& s, const BManifoldSpec& spec) {
  DeformationParams p;
  p.epsilon = s.epsilon;
  p.delta = s.delta;
  if (p.epsilon.empty()) p.epsilon.assign(spec.betti_M.size() > 2 ? spec.betti_M[2] : 0, 0.0);
  if (p.delta.empty()) p.delta.assign(spec.betti_Z.size() > 1 ? spec.betti_Z[1] : 0, 0.0);
  require_params(spec, p);
  return p;
}

}  // namespace

LogSymplecticStructure scenario_structure(const Scenario& s, const BManifoldSpec& spec) {
  LogSymplecticStructure base = LogSymplecticStructure::catalog(spec);
  if (s.omega) base = LogSymplecticStructure::make(spec, build_form(*s.omega, spec));
  if (s.pi) base = LogSymplecticStructure::make(spec, invert(to_frame(build_bivector(*s.pi, spec), Frame::B, spec), spec));
  if (!s.epsilon.empty() || !s.delta.empty()) {
    const DeformationParams p = scenario_params(s, spec);
    base = deform(base, varpi(spec, p.epsilon), gamma(spec, p.delta));
  }
  if (!s.exact) return base;
  const BForm d = exterior_derivative(build_form(*s.exact, spec), spec);
  return LogSymplecticStructure::make(spec, base.omega + to_frame(d, base.omega.frame(), spec));
}

BMultiVector scenario_bivector(const Scenario& s, const BManifoldSpec& spec) {
  BMultiVector w = to_frame(scenario_structure(s, spec).pi, Frame::Coordinate, spec);
  if (s.perturbation) w = w + to_frame(build_bivector(*s.perturbation, spec), Frame::Coordinate, spec);
  if (!s.locus_shift.empty()) w = shift_locus(w, build_scalar(s.locus_shift, spec), spec);
  return w;
}

double tolerance(const Scenario& s, const std::string& name, double fallback) {
  const auto it = s.tolerances.find(name);
  return it == s.tolerances.end() ? fallback : it->second;
}

}  // namespace logsymp::cli
