#include "logsymp/cli/pipeline.hpp"

#include <cmath>
#include <cstring>

#include "logsymp/cli/report.hpp"
#include "logsymp/expr.hpp"
#include "logsymp/interpolation.hpp"

namespace logsymp::cli {

namespace {

std::string detail_of(const Error& e) {
  const std::string what = e.what();
  const std::size_t prefix = std::strlen(to_string(e.kind())) + 2;
  return what.size() > prefix ? what.substr(prefix) : what;
}

template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

}  // namespace

StageError::StageError(std::string stage, const Error& cause)
    : Error(cause.kind(), stage + ": " + detail_of(cause)), stage_(std::move(stage)) {}

PipelineResult pipeline(const BMultiVector& w, const LogSymplecticStructure& base, const PipelineOptions& options) {
  const BManifoldSpec& spec = base.spec;
  PipelineResult out;
  const BMultiVector wc = to_frame(w, Frame::Coordinate, spec);
  stage("jacobi", [&] {
    const double r = schouten_jacobi_residual(wc, spec, chart_grid(spec, {9, 6}));
    if (!(r <= options.jacobi_tol))
      throw Error(ErrorKind::InvalidStructure, "Jacobi residual " + std::to_string(r) + " of the input");
    return 0;
  });

  const BMultiVector w_norm = stage("locus", [&] {
    BMultiVector current = wc;
    for (int c = 0; c < static_cast<int>(spec.z_components.size()); ++c) {
      const LocusReport locus = detect_singular_locus(current, base, c);
      out.loci.push_back(locus);
      if (locus.classification != LocusClass::Single)
        throw Error(ErrorKind::Inadmissible, std::string("Z component ") + std::to_string(c) + " is " +
                                                 to_string(locus.classification));
      const NormalizationResult r =
          pushforward_and_tangency(build_Phi(pfaffian_ratio(current, base, c), base), base);
      out.max_abs_g = std::max({out.max_abs_g, std::fabs(locus.g_min), std::fabs(locus.g_max)});
      out.tangency_defect = std::max(out.tangency_defect, r.tangency_defect);
      out.route_gap = std::max(out.route_gap, r.route_gap);
      current = r.w_norm;
    }
    return current;
  });

  // the normalized structure is a closure over root solves; tabulate it once
  const BForm omega1 = stage("invert", [&] {
    return tabulate(invert(to_frame(w_norm, Frame::B, spec), spec), spec, options.table);
  });
  out.params = stage("classify", [&] { return classify(omega1, base, options.class_tol); });
  const BForm omega0 = stage("classify", [&] { return omega_family(base, out.params); });
  const BForm primitive = stage("build_primitive", [&] { 
    return build_primitive(omega0, omega1, spec, std::nullopt, {options.table, options.class_tol});
  });

  const MoserProblem problem = stage("integrate_flow", [&] { return make_moser_problem(spec, omega0, omega1, primitive); });
  const FlowMap flow = stage("integrate_flow", [&] { return integrate_flow(problem, options.steps, options.seeds); });
  stage("verify_pullback", [&] {
    out.pullback = verify_pullback(flow, problem);
    out.reverse = reverse_moser_check(flow, problem);
    out.class_gap = class_gap(omega0, omega1, spec, options.class_tol);
    out.z_drift = flow.z_drift();
    return 0;
  });
  return out;
}

BMultiVector round_trip_input(const LogSymplecticStructure& base, const DeformationParams& params,
                              const BForm& exact_primitive, const ScalarField& locus_shift) {
  const BManifoldSpec& spec = base.spec;
  BForm omega = omega_family(base, params);
  if (!exact_primitive.is_zero())
    omega = omega + to_frame(exterior_derivative(exact_primitive, spec), omega.frame(), spec);
  const BMultiVector pi = to_frame(invert(omega, spec), Frame::Coordinate, spec);
  return locus_shift.is_zero() ? pi : shift_locus(pi, locus_shift, spec);
}

RoundTripCase random_round_trip(std::mt19937& rng) {
  std::uniform_real_distribution<double> param(-0.2, 0.2), amp(-0.03, 0.03), shift(-0.015, 0.015),
      phase(0.0, 6.283185307179586);
  RoundTripCase c;
  c.params.epsilon = {param(rng)};
  c.params.delta = {param(rng)};
  const double a = amp(rng), b = amp(rng), p = phase(rng), s1 = shift(rng), s2 = shift(rng);
  c.exact = "(1 - z^2)*(" + fmt(a) + "*cos(th + " + fmt(p) + ") + " + fmt(b) + "*sin(2*th))";
  c.shift = fmt(s1) + "*sin(th) + " + fmt(s2) + "*cos(th)";
  return c;
}

BMultiVector round_trip_input(const LogSymplecticStructure& base, const RoundTripCase& c) {
  const BManifoldSpec& spec = base.spec;
  if (spec.name != "s2") throw Error(ErrorKind::Rejected, "random round trips are defined on s2");
  const auto parse = [&](const std::string& text) {
    return ScalarField::from_expr(Expr::parse(text, spec.coordinate_names()));
  };
  BForm beta(2, 1, Frame::B);
  beta[2u] = parse(c.exact);
  return round_trip_input(base, c.params, beta, parse(c.shift));
}

}  // namespace logsymp::cli
