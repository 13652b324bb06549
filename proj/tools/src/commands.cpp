#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "logsymp/cli/pipeline.hpp"
#include "logsymp/cli/run.hpp"
#include "logsymp/error.hpp"
#include "logsymp/locus.hpp"
#include "logsymp/moser.hpp"

namespace logsymp::cli {

using ojson = nlohmann::ordered_json;

namespace {

struct Context {
  const Scenario& s;
  BManifoldSpec spec;
  Report& r;
  int threads = 1;

  double tol(const std::string& name, double fallback) const { return tolerance(s, name, fallback); }
  GridSpec seeds(const GridSpec& fallback) const {
    return s.grid.empty() ? fallback : GridSpec{s.grid[0], s.grid[1]};
  }
};

ojson numbers(const std::vector<double>& v) {
  ojson a = ojson::array();
  for (double x : v) a.push_back(x);
  return a;
}

ojson params_json(const DeformationParams& p) {
  ojson j;
  j["epsilon"] = numbers(p.epsilon);
  j["delta"] = numbers(p.delta);
  return j;
}

double params_error(const DeformationParams& a, const DeformationParams& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.epsilon.size() && i < b.epsilon.size(); ++i)
    e = std::max(e, std::fabs(a.epsilon[i] - b.epsilon[i]));
  for (std::size_t i = 0; i < a.delta.size() && i < b.delta.size(); ++i)
    e = std::max(e, std::fabs(a.delta[i] - b.delta[i]));
  return e;
}

bool has_params(const Scenario& s) { return !s.epsilon.empty() || !s.delta.empty(); }

DeformationParams declared_params(const Scenario& s, const BManifoldSpec& spec) {
  DeformationParams p{s.epsilon, s.delta};
  if (p.epsilon.empty()) p.epsilon.assign(spec.betti_M[2], 0.0);
  if (p.delta.empty()) p.delta.assign(spec.betti_Z.size() > 1 ? spec.betti_Z[1] : 0, 0.0);
  return p;
}

/// omega^n / n! for the top-degree volume of a b-symplectic form.
BForm top_power(const BForm& omega) {
  if (omega.dim() == 2) return omega;
  return 0.5 * wedge(omega, omega);
}

BForm operand_form(const Context& c) {
  if (c.s.form) return build_form(*c.s.form, c.spec);
  return scenario_structure(c.s, c.spec).omega;
}

std::vector<Point> check_grid(const BManifoldSpec& spec) {
  return chart_grid(spec, spec.dim > 2 ? GridSpec{9, 6} : GridSpec{33, 16});
}

BMultiVector example3(const Context& c) {
  return example3_bivector(c.spec, c.s.example3_eps, c.s.example3 == "plateau" ? Example3::Plateau : Example3::ThreeCircles);
}

BMultiVector input_bivector(const Context& c) {
  if (!c.s.example3.empty()) return example3(c);
  return scenario_bivector(c.s, c.spec);
}

// ---------------------------------------------------------------------------

void cmd_catalog(Context& c) {
  const BManifoldSpec& spec = c.spec;
  const auto base = LogSymplecticStructure::catalog(spec);
  c.r.results["dimension"] = spec.dim;
  c.r.results["coordinates"] = spec.coordinate_names();
  c.r.results["z_components"] = static_cast<int>(spec.z_components.size());
  c.r.results["orientable"] = !spec.involution.has_value();
  c.r.results["betti_M"] = spec.betti_M;
  c.r.results["betti_Z"] = spec.betti_Z;
  std::vector<int> b, p;
  for (int k = 0; k <= spec.dim; ++k) {
    b.push_back(bcohomology_dim(spec, k));
    p.push_back(poisson_cohomology_dim(spec, k));
  }
  c.r.results["b_cohomology"] = b;
  c.r.results["poisson_cohomology"] = p;
  c.r.results["collar_radius"] = spec.collar_radius;
  c.r.results["chi_scale"] = spec.chi_scale;
  const double jac = schouten_jacobi_residual(base.pi, spec);
  c.r.results["jacobi_residual"] = jac;
  c.r.at_most("jacobi", jac, c.tol("jacobi", 1e-9));
  const NondegeneracyReport nd = nondegenerate_check(base.omega, spec);
  c.r.results["min_measure"] = nd.min_measure;
  c.r.holds("nondegenerate", nd.nondegenerate);
}

void cmd_check_jacobi(Context& c) {
  const BMultiVector w = input_bivector(c);
  const double jac = schouten_jacobi_residual(w, c.spec);
  c.r.results["jacobi_residual"] = jac;
  c.r.at_most("jacobi", jac, c.tol("jacobi", 1e-9));
}

void cmd_nondegenerate(Context& c) {
  const BForm a = operand_form(c);
  const NondegeneracyReport nd = nondegenerate_check(a, c.spec);
  c.r.results["degree"] = a.degree();
  c.r.results["nondegenerate"] = nd.nondegenerate;
  c.r.results["min_measure"] = nd.min_measure;
  if (!nd.nondegenerate) {
    c.r.results["chart"] = nd.chart;
    c.r.results["witness"] = point_str(nd.witness, c.spec.dim);
  }
  c.r.holds("nondegenerate", nd.nondegenerate);
}

void cmd_split(Context& c) {
  const BForm omega = operand_form(c);
  const MazzeoMelroseSplit sp = split(omega, c.spec);
  BForm rebuilt = sp.alpha;
  if (!sp.theta.parts.empty()) rebuilt = rebuilt + sigma(sp.theta, c.spec);
  const auto grid = check_grid(c.spec);
  const double err = sup_distance(to_frame(rebuilt, Frame::B, c.spec), to_frame(omega, Frame::B, c.spec), grid);
  c.r.results["degree"] = omega.degree();
  c.r.results["alpha_periods"] = numbers(periods_M(c.spec, sp.alpha));
  if (!sp.theta.parts.empty()) c.r.results["theta_periods"] = numbers(periods_Z(c.spec, sp.theta));
  c.r.results["reassembly_error"] = err;
  c.r.results["alpha_closedness"] = closedness_residual(sp.alpha, c.spec);
  c.r.at_most("reassembly", err, c.tol("split", 1e-10));
  c.r.holds("alpha_smooth", is_smooth_form(sp.alpha, c.spec));
}

void cmd_classcoords(Context& c) {
  const BForm omega = operand_form(c);
  const double q = c.tol("quadrature", 1e-12);
  const ClassCoordinates cc = class_coordinates(omega, c.spec, q);
  c.r.results["m_part"] = numbers(cc.m_part);
  c.r.results["z_part"] = numbers(cc.z_part);
  if (c.s.form && c.s.exact) {
    // adding an exact term must not move the class
    const BForm d = exterior_derivative(build_form(*c.s.exact, c.spec), c.spec);
    const ClassCoordinates shifted = class_coordinates(omega + to_frame(d, omega.frame(), c.spec), c.spec, q);
    double gap = 0.0;
    for (std::size_t i = 0; i < cc.m_part.size(); ++i) gap = std::max(gap, std::fabs(cc.m_part[i] - shifted.m_part[i]));
    for (std::size_t i = 0; i < cc.z_part.size(); ++i) gap = std::max(gap, std::fabs(cc.z_part[i] - shifted.z_part[i]));
    c.r.results["exact_shift_gap"] = gap;
    c.r.at_most("class_invariance", gap, c.tol("class", 1e-8));
  }
}

void cmd_regvol(Context& c) {
  const BForm mu = c.s.form ? build_form(*c.s.form, c.spec) : top_power(scenario_structure(c.s, c.spec).omega);
  const VolumeReport v = regularized_volume(mu, c.spec);
  c.r.results["volume"] = v.volume;
  c.r.results["log_slope"] = v.log_slope;
  c.r.results["profile_shift"] = v.profile_shift;
  const double t = c.tol("volume", 1e-6);
  c.r.at_most("log_slope", std::fabs(v.log_slope), t);
  c.r.at_most("profile_independence", v.profile_shift, t);
  c.r.csv["regvol.csv"] = volume_csv(v);
}

void cmd_deform(Context& c) {
  const BManifoldSpec& spec = c.spec;
  const DeformationParams p = declared_params(c.s, spec);
  const auto base = LogSymplecticStructure::catalog(spec);
  const auto d = deform(base, varpi(spec, p.epsilon), gamma(spec, p.delta));
  const double jac = schouten_jacobi_residual(d.pi, spec);
  c.r.results["parameters"] = params_json(p);
  c.r.results["jacobi_residual"] = jac;
  c.r.results["pi_sup"] = sup_norm(to_frame(d.pi, Frame::Coordinate, spec), spec);
  const DeformationParams back = classify(d.omega, base);
  c.r.results["classified"] = params_json(back);
  c.r.at_most("jacobi", jac, c.tol("jacobi", 1e-9));
  c.r.at_most("class_round_trip", params_error(p, back), c.tol("params", 1e-8));
  if (c.s.csv) {
    std::ostringstream out;
    const auto names = spec.coordinate_names();
    for (const auto& n : names) out << n << ",";
    const BMultiVector pc = to_frame(d.pi, Frame::Coordinate, spec);
    const auto masks = pc.masks();
    for (std::size_t i = 0; i < masks.size(); ++i) {
      std::string key;
      for (int k : mask_indices(masks[i])) key += std::to_string(k);
      out << "P" << key << (i + 1 < masks.size() ? "," : "\n");
    }
    for (const Point& x : check_grid(spec)) {
      for (int k = 0; k < spec.dim; ++k) out << fmt(x[k]) << ",";
      for (std::size_t i = 0; i < masks.size(); ++i)
        out << fmt(pc[masks[i]].value(x)) << (i + 1 < masks.size() ? "," : "\n");
    }
    c.r.csv["deform.csv"] = out.str();
  }
}

void cmd_classify(Context& c) {
  const auto base = LogSymplecticStructure::catalog(c.spec);
  const BForm omega = c.s.form ? build_form(*c.s.form, c.spec) : scenario_structure(c.s, c.spec).omega;
  const DeformationParams p = classify(omega, base, c.tol("quadrature", 1e-12));
  c.r.results["parameters"] = params_json(p);
  if (has_params(c.s) && !c.s.form && !c.s.pi && !c.s.omega)
    c.r.at_most("parameters", params_error(p, declared_params(c.s, c.spec)), c.tol("params", 1e-8));
}

void cmd_cosymplectic(Context& c) {
  const auto st = scenario_structure(c.s, c.spec);
  const CosymplecticStructure cs = cosymplectic_extract(st);
  ojson comps = ojson::array();
  for (std::size_t k = 0; k < c.spec.z_components.size(); ++k) {
    const Point x = z_grid(c.spec, static_cast<int>(k)).front();
    ojson j;
    j["component"] = c.spec.z_components[k].name;
    ojson eta, theta;
    for (Mask m : cs.eta.parts[k].masks()) {
      const double v = cs.eta.parts[k][m].value(x);
      if (v != 0.0) eta[std::to_string(m)] = v;
    }
    for (Mask m : cs.theta.parts[k].masks()) {
      const double v = cs.theta.parts[k][m].value(x);
      if (v != 0.0) theta[std::to_string(m)] = v;
    }
    j["eta_at"] = point_str(x, c.spec.dim);
    j["eta"] = eta.is_null() ? ojson::object() : eta;
    j["theta"] = theta.is_null() ? ojson::object() : theta;
    comps.push_back(j);
  }
  c.r.results["components"] = comps;
  c.r.results["eta_periods"] = numbers(periods_Z(c.spec, cs.eta));
  c.r.results["theta_periods"] = numbers(periods_Z(c.spec, cs.theta));
  c.r.results["min_volume"] = cs.min_volume;
  c.r.results["h2_dimension"] = bcohomology_dim(c.spec, 2);
  const double mm = modular_mismatch(st, cs);
  c.r.results["modular_mismatch"] = mm;
  c.r.above("volume_form", cs.min_volume, 0.0);
  c.r.at_most("modular_vs_reeb", mm, c.tol("mismatch", 1e-8));
}

void cmd_modular(Context& c) {
  const auto st = scenario_structure(c.s, c.spec);
  const BMultiVector X = modular_vector_field(st);
  const double mm = modular_mismatch(st, cosymplectic_extract(st));
  c.r.results["sup_norm"] = sup_norm(X, c.spec);
  c.r.results["tangent"] = is_tangent(X, c.spec);
  c.r.results["modular_mismatch"] = mm;
  c.r.holds("tangent", is_tangent(X, c.spec));
  c.r.at_most("modular_vs_reeb", mm, c.tol("mismatch", 1e-8));
}

void cmd_foliation(Context& c) {
  if (!c.s.form) throw Error(ErrorKind::Parse, "scenario: foliation needs a closed b-one-form in 'form'");
  const BForm vartheta = build_form(*c.s.form, c.spec);
  ojson comps = ojson::array();
  for (const FoliationComponent& f : b_one_form_foliation(vartheta, c.spec)) {
    ojson j;
    j["component"] = f.component;
    j["c"] = f.c;
    j["leaf"] = f.leaf;
    j["min_tangential"] = f.min_tangential;
    j["slope"] = numbers(f.slope);
    comps.push_back(j);
  }
  c.r.results["components"] = comps;
}

void moser_checks(Context& c, const FlowMap& flow, const MoserProblem& p) {
  const PullbackReport pb = verify_pullback(flow, p);
  const double rev = reverse_moser_check(flow, p);
  const double gap = class_gap(p.omega0, p.omega1, c.spec, c.tol("quadrature", 1e-12));
  c.r.results["pullback_residual"] = pb.residual;
  c.r.results["z_residual"] = pb.z_residual;
  c.r.results["checked_seeds"] = pb.checked;
  c.r.results["excluded_seeds"] = pb.excluded;
  c.r.results["reverse_residual"] = rev;
  c.r.results["class_gap"] = gap;
  c.r.results["z_drift"] = flow.z_drift();
  c.r.results["preserves_sides"] = flow.preserves_sides();
  c.r.at_most("pullback", pb.residual, c.tol("pullback", 1e-4));
  c.r.at_most("reverse", rev, c.tol("reverse", 1e-3));
  c.r.at_most("class_gap", gap, c.tol("class", 1e-6));
  c.r.at_most("z_drift", flow.z_drift(), c.tol("drift", 1e-8));
  c.r.holds("preserves_sides", flow.preserves_sides());
}

void cmd_moser(Context& c) {
  const BManifoldSpec& spec = c.spec;
  MoserProblem problem;
  if (c.s.form) {
    const BForm omega0 = scenario_structure(c.s, spec).omega;
    const BForm omega1 = build_form(*c.s.form, spec);
    std::optional<BForm> carried;
    if (c.s.primitive) carried = build_form(*c.s.primitive, spec);
    problem = make_moser_problem(spec, omega0, omega1, build_primitive(omega0, omega1, spec, carried));
    c.r.results["problem"] = "form";
  } else if (c.s.exact) {
    Scenario without = c.s;
    without.exact.reset();
    const BForm omega0 = scenario_structure(without, spec).omega;
    const BForm eta = build_form(*c.s.exact, spec);
    const BForm omega1 = omega0 + to_frame(exterior_derivative(eta, spec), omega0.frame(), spec);
    problem = make_moser_problem(spec, omega0, omega1, build_primitive(omega0, omega1, spec, eta));
    c.r.results["problem"] = "exact";
  } else {
    if (spec.name != "s2") throw Error(ErrorKind::Parse, "scenario: moser without form or exact runs the s2 golden problem");
    problem = golden_problem(spec);
    c.r.results["problem"] = "golden";
  }
  const GridSpec seeds = c.seeds({65, 64});
  c.r.results["steps"] = c.s.steps;
  c.r.results["seeds"] = std::vector<int>{seeds.t_points, seeds.periodic_points};
  const FlowMap flow = integrate_flow(problem, c.s.steps, seeds);
  moser_checks(c, flow, problem);
  if (!c.s.convergence.empty()) {
    const ConvergenceStudy st = convergence_study(problem, c.s.convergence, seeds);
    c.r.results["convergence_steps"] = st.steps;
    c.r.results["convergence_increments"] = numbers(st.increments);
    c.r.results["order"] = st.order;
    c.r.at_most("order", std::fabs(st.order - 4.0), c.tol("order", 0.3));
    std::ostringstream out;
    out << "steps,residual,increment\n";
    for (std::size_t i = 0; i < st.steps.size(); ++i)
      out << st.steps[i] << "," << fmt(st.residuals[i]) << ","
          << (i < st.increments.size() ? fmt(st.increments[i]) : std::string()) << "\n";
    c.r.csv["convergence.csv"] = out.str();
  }
}

void cmd_nambu(Context& c) {
  const BManifoldSpec& spec = c.spec;
  const BForm mu0 = c.s.mu0 ? build_form(*c.s.mu0, spec) : top_power(scenario_structure(c.s, spec).omega);
  BForm mu1 = mu0;
  if (c.s.mu1) mu1 = build_form(*c.s.mu1, spec);
  else if (!c.s.rescale.empty()) mu1 = build_scalar(c.s.rescale, spec) * mu0;
  const NambuResult n = nambu_equivalence(mu0, mu1, spec, c.s.steps);
  c.r.results["accepted"] = n.accepted;
  if (!n.reason.empty()) c.r.results["reason"] = n.reason;
  c.r.results["volume_gap"] = n.volume_gap;
  c.r.results["z_volume_gap"] = n.z_volume_gap;
  c.r.results["min_ratio"] = n.min_ratio;
  if (n.accepted) {
    c.r.results["pullback_residual"] = n.residual;
    c.r.at_most("pullback", n.residual, c.tol("pullback", 1e-4));
  }
}

ojson locus_json(const LocusReport& l) {
  ojson j;
  j["component"] = l.component;
  j["classification"] = to_string(l.classification);
  j["components"] = l.components;
  j["min_roots"] = l.min_roots;
  j["max_roots"] = l.max_roots;
  j["transverse"] = l.transverse;
  j["min_slope"] = l.min_slope;
  j["g_min"] = l.g_min;
  j["g_max"] = l.g_max;
  j["g_mean"] = l.g_mean;
  j["scale"] = l.scale;
  return j;
}

void cmd_normalize(Context& c) {
  const BManifoldSpec& spec = c.spec;
  const auto base = LogSymplecticStructure::catalog(spec);
  const BMultiVector w = input_bivector(c);
  const auto all = normalize(w, base);
  ojson comps = ojson::array();
  double route = 0.0, tangency = 0.0;
  for (const auto& r : all) {
    ojson j = locus_json(r.locus);
    j["tangency_defect"] = r.tangency_defect;
    j["route_gap"] = r.route_gap;
    j["a_sup"] = r.a_sup;
    j["min_dphi_dt"] = r.min_dphi_dt;
    comps.push_back(j);
    route = std::max(route, r.route_gap);
    tangency = std::max(tangency, r.tangency_defect);
  }
  c.r.results["components"] = comps;
  const double jac = schouten_jacobi_residual(all.back().w_norm, spec, chart_grid(spec, {9, 6}));
  c.r.results["normalized_jacobi"] = jac;
  c.r.results["normalized_tangent"] = is_tangent(all.back().w_norm, spec);
  c.r.at_most("route_gap", route, c.tol("route", 1e-8));
  c.r.at_most("tangency", tangency, c.tol("tangency", 1e-8));
  c.r.at_most("normalized_jacobi", jac, 1e-8);
  if (c.s.csv) c.r.csv["fibers.csv"] = fiber_trace_csv(all.front().data);
}

void cmd_locus(Context& c) {
  const auto base = LogSymplecticStructure::catalog(c.spec);
  const BMultiVector w = input_bivector(c);
  ojson comps = ojson::array();
  for (int k = 0; k < static_cast<int>(c.spec.z_components.size()); ++k) {
    ojson j = locus_json(detect_singular_locus(w, base, k));
    const PfaffianData d = pfaffian_ratio(w, base, k);
    j["monotone"] = d.monotone;
    j["min_dh_dt"] = d.min_dh_dt;
    j["close"] = d.close;
    j["max_gap"] = d.max_gap;
    j["admissible"] = d.admissible();
    comps.push_back(j);
    if (c.s.csv) c.r.csv["fibers_" + std::to_string(k) + ".csv"] = fiber_trace_csv(d);
  }
  c.r.results["classification"] = comps[0]["classification"];
  c.r.results["components"] = comps;
}

void cmd_norms(Context& c) {
  const BManifoldSpec& spec = c.spec;
  BMultiVector sigma_in;
  if (c.s.sigma) sigma_in = build_bivector(*c.s.sigma, spec);
  else if (!c.s.example3.empty())
    sigma_in = example3(c) - to_frame(LogSymplecticStructure::catalog(spec).pi, Frame::Coordinate, spec);
  if (c.s.sigma || !c.s.example3.empty()) {
    BNorms n;
    try {
      n = b_norms(sigma_in, spec);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Rejected) throw;
      n = b_norms(sigma_in, spec, false);
      c.r.results["b_norm"] = "undefined: not tangent to Z";
    }
    if (n.c0_b) c.r.results["c0_b"] = *n.c0_b;
    c.r.results["c0_smooth"] = n.c0_smooth;
    c.r.results["c1_smooth"] = n.c1_smooth;
  }
  if (c.s.sweep_direction) {
    const auto base = LogSymplecticStructure::catalog(spec);
    const ContinuitySweep sw = continuity_sweep(scenario_bivector(c.s, spec), build_bivector(*c.s.sweep_direction, spec),
                                                c.s.sweep_scales, base);
    ojson rows = ojson::array();
    std::ostringstream out;
    out << "scale,delta_a,delta_g,delta_w,ratio\n";
    for (const auto& row : sw.rows) {
      rows.push_back({{"scale", row.scale}, {"delta_a", row.delta_a}, {"delta_g", row.delta_g},
                      {"delta_w", row.delta_w}, {"ratio", row.ratio}});
      out << fmt(row.scale) << "," << fmt(row.delta_a) << "," << fmt(row.delta_g) << "," << fmt(row.delta_w) << ","
          << fmt(row.ratio) << "\n";
    }
    c.r.results["sweep"] = rows;
    c.r.results["constant"] = sw.constant;
    c.r.results["spread"] = sw.spread;
    c.r.at_most("spread", sw.spread, c.tol("spread", 2.0));
    c.r.csv["continuity.csv"] = out.str();
  }
  if (!c.s.sigma && c.s.example3.empty() && !c.s.sweep_direction)
    throw Error(ErrorKind::Parse, "scenario: norms needs sigma, example3 or sweep");
}

void pipeline_one(Context& c, const BMultiVector& w, const std::optional<DeformationParams>& expected, ojson& row,
                  const std::string& prefix) {
  const auto base = LogSymplecticStructure::catalog(c.spec);
  PipelineOptions o;
  o.steps = c.s.steps;
  o.seeds = c.seeds(o.seeds);
  o.class_tol = c.tol("quadrature", o.class_tol);
  o.jacobi_tol = c.tol("jacobi", o.jacobi_tol);
  const PipelineResult res = pipeline(w, base, o);
  row["parameters"] = params_json(res.params);
  row["max_abs_g"] = res.max_abs_g;
  row["route_gap"] = res.route_gap;
  row["pullback_residual"] = res.pullback.residual;
  row["reverse_residual"] = res.reverse;
  row["class_gap"] = res.class_gap;
  row["z_drift"] = res.z_drift;
  c.r.at_most(prefix + "pullback", res.pullback.residual, c.tol("pullback", 1e-4));
  c.r.at_most(prefix + "class_gap", res.class_gap, c.tol("class", 1e-6));
  if (expected) {
    const double e = params_error(res.params, *expected);
    row["parameter_error"] = e;
    c.r.at_most(prefix + "parameters", e, c.tol("params", 1e-6));
  }
}

void cmd_pipeline(Context& c) {
  if (c.s.trials == 0) {
    ojson row;
    std::optional<DeformationParams> expected;
    if (has_params(c.s) && !c.s.pi && !c.s.omega && !c.s.perturbation) expected = declared_params(c.s, c.spec);
    if (!c.s.pi && !c.s.omega && !has_params(c.s) && !c.s.perturbation && !c.s.exact) expected = declared_params(c.s, c.spec);
    try {
      pipeline_one(c, input_bivector(c), expected, row, "");
    } catch (const StageError& e) {
      c.r.results["stage"] = e.stage();
      if (e.stage() == "locus") {
        const auto base = LogSymplecticStructure::catalog(c.spec);
        c.r.results["classification"] = to_string(detect_singular_locus(input_bivector(c), base).classification);
      }
      throw;
    }
    for (const auto& [k, v] : row.items()) c.r.results[k] = v;
    return;
  }
  if (c.spec.name != "s2") throw Error(ErrorKind::Parse, "scenario: randomized round trips run on s2");
  std::mt19937 rng(c.s.seed);
  std::vector<RoundTripCase> cases;
  for (int i = 0; i < c.s.trials; ++i) cases.push_back(random_round_trip(rng));
  const auto base = LogSymplecticStructure::catalog(c.spec);
  std::vector<ojson> rows(cases.size());
  std::vector<Report> partial(cases.size());
  auto work = [&](std::size_t i) {
    Context sub{c.s, c.spec, partial[i], 1};
    rows[i]["exact"] = cases[i].exact;
    rows[i]["shift"] = cases[i].shift;
    rows[i]["input"] = params_json(cases[i].params);
    try {
      pipeline_one(sub, round_trip_input(base, cases[i]), cases[i].params, rows[i], "trial" + std::to_string(i) + ".");
    } catch (const Error& e) {
      rows[i]["error"] = e.what();
      partial[i].holds("trial" + std::to_string(i) + ".completed", false);
    }
  };
  const std::size_t workers = std::max(1, std::min<int>(c.threads, static_cast<int>(cases.size())));
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w)
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < cases.size(); i += workers) work(i);
    }));
  for (auto& j : jobs) j.get();
  ojson out = ojson::array();
  double worst_params = 0.0, worst_pullback = 0.0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    out.push_back(rows[i]);
    for (const Check& ch : partial[i].checks) c.r.checks.push_back(ch);
    if (rows[i].contains("parameter_error"))
      worst_params = std::max(worst_params, rows[i]["parameter_error"].get<double>());
    if (rows[i].contains("pullback_residual"))
      worst_pullback = std::max(worst_pullback, rows[i]["pullback_residual"].get<double>());
  }
  c.r.results["trials"] = out;
  c.r.results["worst_parameter_error"] = worst_params;
  c.r.results["worst_pullback_residual"] = worst_pullback;
}

// ---------------------------------------------------------------------------

void golden_s2(Context& c) {
  const BManifoldSpec s2 = catalog_lookup("s2");
  const auto base = LogSymplecticStructure::catalog(s2);
  const double eps = 0.1, delta = 0.05;
  const auto d = deform(base, varpi(s2, {eps}), gamma(s2, {delta}));
  const BMultiVector pc = to_frame(d.pi, Frame::Coordinate, s2);
  double err = 0.0;
  for (const Point& x : chart_grid(s2)) {
    // z/(1 + eps z + delta) d_th ^ d_z, stored on d_z ^ d_th
    const double expected = -x[0] / (1.0 + eps * x[0] + delta);
    err = std::max(err, std::fabs(pc[3u].value(x) - expected));
  }
  c.r.results["s2_normal_form_error"] = err;
  c.r.at_most("s2.normal_form", err, c.tol("normal_form", 1e-10));
  const DeformationParams back = classify(d.omega, base);
  c.r.results["s2_classified"] = params_json(back);
  c.r.at_most("s2.class_round_trip", params_error(back, {{eps}, {delta}}), c.tol("params", 1e-8));

  const MoserProblem p = golden_problem(s2);
  const FlowMap flow = integrate_flow(p, c.s.steps, c.seeds({65, 64}));
  const PullbackReport pb = verify_pullback(flow, p);
  c.r.results["s2_moser_pullback"] = pb.residual;
  c.r.at_most("s2.moser_pullback", pb.residual, c.tol("pullback", 1e-4));

  const auto norm = normalize(BMultiVector::basis(2, {0, 1}, build_scalar("-(z - 0.1)", s2), Frame::Coordinate), base).back();
  double g_err = 0.0;
  for (const Point& x : z_grid(s2, 0)) g_err = std::max(g_err, std::fabs(norm.g.value(x) - 0.1));
  c.r.results["s2_locus_height_error"] = g_err;
  c.r.at_most("s2.locus_height", g_err, c.tol("route", 1e-8));
  for (auto [kind, name, expected] : {std::tuple{Example3::Plateau, "plateau", LocusClass::NonTransverse},
                                      std::tuple{Example3::ThreeCircles, "three_circles", LocusClass::MultiComponent}}) {
    const LocusReport l = detect_singular_locus(example3_bivector(s2, 0.1, kind), base);
    c.r.results[std::string("s2_example3_") + name] = to_string(l.classification);
    c.r.equals(std::string("s2.example3_") + name, to_string(l.classification), to_string(expected));
  }
}

void golden_rp2(Context& c) {
  const BManifoldSpec rp2 = catalog_lookup("rp2");
  const auto base = LogSymplecticStructure::catalog(rp2);
  const double delta = 0.05;
  const auto d = deform(base, BForm::zero(2, 2), gamma(rp2, {delta}));
  double err = 0.0;
  for (const Point& x : chart_grid(rp2)) err = std::max(err, std::fabs(d.pi[3u].value(x) - base.pi[3u].value(x) / (1 + delta)));
  c.r.results["rp2_quotient_error"] = err;
  c.r.at_most("rp2.quotient", err, c.tol("normal_form", 1e-10));
  c.r.results["rp2_h2_dimension"] = bcohomology_dim(rp2, 2);
  c.r.equals("rp2.h2_dimension", std::to_string(bcohomology_dim(rp2, 2)), "1");
}

void golden_s2xt2(Context& c) {
  const BManifoldSpec p = catalog_lookup("s2xt2");
  const auto base = LogSymplecticStructure::catalog(p);
  const double e2 = 0.1, d1 = 0.05, d2 = -0.04, d3 = 0.03;
  const auto d = deform(base, varpi(p, {0.0, e2}), gamma(p, {d1, d2, d3}));
  const CosymplecticStructure cs = cosymplectic_extract(d);
  double err = 0.0;
  for (const Point& x : z_grid(p, 0, {9, 6})) {
    const BForm& eta = cs.eta.parts[0];
    const BForm& th = cs.theta.parts[0];
    err = std::max({err, std::fabs(eta[0b1100u].value(x) - (1 + e2)), std::fabs(eta[0b0110u].value(x)),
                    std::fabs(eta[0b1010u].value(x)), std::fabs(th[0b0010u].value(x) - (1 + d1)),
                    std::fabs(th[0b0100u].value(x) - d2), std::fabs(th[0b1000u].value(x) - d3)});
  }
  c.r.results["s2xt2_cosymplectic_error"] = err;
  c.r.at_most("s2xt2.cosymplectic", err, 1e-9);
  c.r.results["s2xt2_h2_dimension"] = bcohomology_dim(p, 2);
  c.r.equals("s2xt2.h2_dimension", std::to_string(bcohomology_dim(p, 2)), "5");
}

void golden_regvol(Context& c) {
  const BManifoldSpec s2 = catalog_lookup("s2");
  const VolumeReport singular = regularized_volume(BForm::basis(2, {0, 1}, ScalarField::constant(1.0)), s2);
  const VolumeReport smooth =
      regularized_volume(BForm::basis(2, {0, 1}, ScalarField::constant(1.0), Frame::Coordinate), s2);
  c.r.results["s2_volume_dlog"] = singular.volume;
  c.r.results["s2_volume_area"] = smooth.volume;
  c.r.at_most("s2.volume_dlog", std::fabs(singular.volume), c.tol("volume", 1e-6));
  c.r.at_most("s2.volume_area", std::fabs(smooth.volume - 4 * std::numbers::pi), c.tol("volume", 1e-6));
}

void cmd_golden(Context& c) {
  const std::string m = c.s.manifold_given ? c.s.manifold : "all";
  if (m == "all" || m == "s2") {
    golden_s2(c);
    golden_regvol(c);
  }
  if (m == "all" || m == "rp2") golden_rp2(c);
  if (m == "all" || m == "s2xt2") golden_s2xt2(c);
  if (m == "t2") {
    const auto t2 = catalog_lookup("t2");
    const double jac = schouten_jacobi_residual(LogSymplecticStructure::catalog(t2).pi, t2);
    c.r.results["t2_jacobi"] = jac;
    c.r.at_most("t2.jacobi", jac, c.tol("jacobi", 1e-9));
  }
}

using Command = std::function<void(Context&)>;

const std::map<std::string, std::pair<Command, std::string>>& table() {
  static const std::map<std::string, std::pair<Command, std::string>> t = {
      {"catalog", {cmd_catalog, "jacobi"}},
      {"check-jacobi", {cmd_check_jacobi, "jacobi"}},
      {"nondegenerate", {cmd_nondegenerate, "expect"}},
      {"split", {cmd_split, "split"}},
      {"classcoords", {cmd_classcoords, "class"}},
      {"regvol", {cmd_regvol, "volume"}},
      {"deform", {cmd_deform, "params"}},
      {"classify", {cmd_classify, "params"}},
      {"cosymplectic", {cmd_cosymplectic, "mismatch"}},
      {"modular", {cmd_modular, "mismatch"}},
      {"foliation", {cmd_foliation, "expect"}},
      {"moser", {cmd_moser, "pullback"}},
      {"nambu", {cmd_nambu, "pullback"}},
      {"normalize", {cmd_normalize, "route"}},
      {"locus", {cmd_locus, "expect"}},
      {"norms", {cmd_norms, "spread"}},
      {"golden", {cmd_golden, "normal_form"}},
      {"pipeline", {cmd_pipeline, "pullback"}},
  };
  return t;
}

// An expectation on a result supersedes the built-in check of the same name.
void expectations(Context& c) {
  const double t = c.tol("expect", 1e-6);
  std::erase_if(c.r.checks, [&](const Check& ch) {
    return c.s.expect_numbers.count(ch.name) > 0 || c.s.expect_strings.count(ch.name) > 0;
  });
  for (const auto& [k, v] : c.s.expect_numbers) {
    const auto it = c.r.results.find(k);
    if (it == c.r.results.end() || !(it->is_number() || it->is_boolean())) {
      c.r.equals("expect." + k, "missing", fmt(v));
      continue;
    }
    const double got = it->is_boolean() ? (it->get<bool>() ? 1.0 : 0.0) : it->get<double>();
    c.r.at_most("expect." + k, std::fabs(got - v), t);
  }
  for (const auto& [k, v] : c.s.expect_strings) {
    const auto it = c.r.results.find(k);
    std::string got = "missing";
    if (it != c.r.results.end()) got = it->is_string() ? it->get<std::string>() : it->dump();
    c.r.equals("expect." + k, got, v);
  }
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, v] : table()) n.push_back(k);
    return n;
  }();
  return names;
}

std::string primary_tolerance(const std::string& command) {
  const auto it = table().find(command);
  if (it == table().end()) throw Error(ErrorKind::Parse, "unknown command '" + command + "'");
  return it->second.second;
}

Report run(const std::string& command, const Scenario& scenario, int threads) {
  const auto it = table().find(command);
  if (it == table().end()) throw Error(ErrorKind::Parse, "unknown command '" + command + "'");
  if (!scenario.command.empty() && scenario.command != command)
    throw Error(ErrorKind::Parse, "scenario is for command '" + scenario.command + "', not '" + command + "'");
  Report r;
  r.command = command;
  r.manifold = command == "golden" && !scenario.manifold_given ? "all" : scenario.manifold;
  Scenario s = scenario;
  s.command = command;
  r.digest = digest_of(canonical(s));
  const BManifoldSpec spec = catalog_lookup(command == "golden" && !scenario.manifold_given ? "s2" : scenario.manifold);
  Context c{s, spec, r, std::max(1, threads)};
  try {
    it->second.first(c);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse || e.kind() == ErrorKind::Catalog) throw;
    r.error = e.what();
  }
  expectations(c);
  return r;
}

int exit_code(const Report& report) { return report.passed() ? 0 : 1; }

void write_report(const Report& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  std::ofstream(base / (report.command + ".txt")) << report.text();
  std::ofstream(base / (report.command + ".json")) << report.json().dump(2) << "\n";
  for (const auto& [name, contents] : report.csv) std::ofstream(base / name) << contents;
}

}  // namespace logsymp::cli
