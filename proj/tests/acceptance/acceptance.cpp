// Acceptance suite: one line per criterion, exit status 0 iff all pass.
// Usage: logsymp_acceptance [criterion numbers...]

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "logsymp/cli/pipeline.hpp"
#include "logsymp/cohomology.hpp"
#include "logsymp/locus.hpp"
#include "logsymp/moser.hpp"
#include "../test_support.hpp"

using namespace logsymp;
using namespace testing_support;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [FAIL]");
  }
  void at_most(const std::string& name, double value, double limit) {
    std::ostringstream s;
    s << name << "=" << value << " (<= " << limit << ")";
    require(value <= limit, s.str());
  }
};

std::string g(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

// --- 1 ----------------------------------------------------------------------
void sphere_normal_form(Outcome& o) {
  const auto s2 = catalog_lookup("s2");
  const auto base = LogSymplecticStructure::catalog(s2);
  const double eps = 0.1, delta = 0.05;
  const BMultiVector pi = to_frame(deform(base, varpi(s2, {eps}), gamma(s2, {delta})).pi, Frame::Coordinate, s2);
  double err = 0.0;
  for (const Point& x : chart_grid(s2)) {
    // z/(1 + eps z + delta) d_th ^ d_z is minus that on d_z ^ d_th
    err = std::max(err, std::fabs(pi[3u].value(x) + x[0] / (1.0 + eps * x[0] + delta)));
  }
  o.at_most("normal form error", err, 1e-10);
}

// --- 2 ----------------------------------------------------------------------
void projective_quotient(Outcome& o) {
  const auto rp2 = catalog_lookup("rp2");
  const auto base = LogSymplecticStructure::catalog(rp2);
  double err = 0.0;
  for (double delta : {0.05, -0.1, 0.2}) {
    const auto d = deform(base, BForm::zero(2, 2), gamma(rp2, {delta}));
    for (const Point& x : chart_grid(rp2))
      err = std::max(err, std::fabs(d.pi[3u].value(x) - base.pi[3u].value(x) / (1.0 + delta)));
  }
  o.at_most("quotient error", err, 1e-10);
  o.require(bcohomology_dim(rp2, 2) == 1, "dim H^2 = " + std::to_string(bcohomology_dim(rp2, 2)));
}

// --- 3 ----------------------------------------------------------------------
void product_cosymplectic(Outcome& o) {
  const auto p = catalog_lookup("s2xt2");
  const auto base = LogSymplecticStructure::catalog(p);
  const double e2 = 0.1, d1 = 0.05, d2 = -0.04, d3 = 0.03;
  const auto cs = cosymplectic_extract(deform(base, varpi(p, {0.0, e2}), gamma(p, {d1, d2, d3})));
  const BForm& eta = cs.eta.parts[0];
  const BForm& theta = cs.theta.parts[0];
  double err = 0.0;
  for (const Point& x : z_grid(p, 0)) {
    // eta = (1 + e2) dth1 ^ dth2, theta = (1 + d1) dth + d2 dth1 + d3 dth2
    err = std::max({err, std::fabs(eta[0b1100u].value(x) - (1 + e2)), std::fabs(eta[0b0110u].value(x)),
                    std::fabs(eta[0b1010u].value(x)), std::fabs(theta[0b0010u].value(x) - (1 + d1)),
                    std::fabs(theta[0b0100u].value(x) - d2), std::fabs(theta[0b1000u].value(x) - d3)});
  }
  o.at_most("coefficient error", err, 1e-9);
  o.require(bcohomology_dim(p, 2) == 5, "dim H^2 = " + std::to_string(bcohomology_dim(p, 2)));
}

// --- 4 ----------------------------------------------------------------------
void regularized_volumes(Outcome& o) {
  const auto s2 = catalog_lookup("s2");
  const VolumeReport a = regularized_volume(BForm::basis(2, {0, 1}), s2);
  const VolumeReport b = regularized_volume(BForm::basis(2, {0, 1}, ScalarField::constant(1.0), Frame::Coordinate), s2);
  o.at_most("|Vol(dz/z^dth)|", std::fabs(a.volume), 1e-6);
  o.at_most("|Vol(dz^dth) - 4pi|", std::fabs(b.volume - 4 * kPi), 1e-6);
  o.at_most("|c|", std::max(std::fabs(a.log_slope), std::fabs(b.log_slope)), 1e-6);
  o.at_most("profile shift", std::max(a.profile_shift, b.profile_shift), 1e-6);
}

// --- 5 ----------------------------------------------------------------------

// Random function invariant under (z, th) -> (-z, th + pi).
ScalarField antipodal_invariant(const BManifoldSpec& rp2, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::string text = g(u(rng));
  for (const char* atom : {"z^2", "z*cos(th)", "z*sin(th)", "cos(2*th)", "sin(2*th)", "z^2*cos(2*th)"})
    text += " + (" + g(std::round(u(rng) * 100) / 100) + ")*" + atom;
  return parse(rp2, text);
}

BForm random_primitive(const BManifoldSpec& spec, std::mt19937& rng) {
  if (spec.name != "rp2") return random_global_form(spec, rng, 1, false);
  BForm eta(2, 1, Frame::B);
  eta[1u] = antipodal_invariant(spec, rng);
  eta[2u] = parse(spec, "1 - z^2") * antipodal_invariant(spec, rng);
  return eta;
}

void mazzeo_melrose(Outcome& o) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double reassembly = 0.0, invariance = 0.0;
  int forms = 0;
  for (const auto& name : catalog_names()) {
    const auto spec = catalog_lookup(name);
    const auto basis_m = cohomology_basis_M(spec, 2);
    const auto basis_z = cohomology_basis_Z(spec, 1);
    const auto grid = coarse_grid(spec);
    for (int t = 0; t < 50; ++t, ++forms) {
      BForm omega = exterior_derivative(random_primitive(spec, rng), spec);
      for (const BForm& m : basis_m) omega = omega + u(rng) * m;
      for (const ZForm& z : basis_z) omega = omega + u(rng) * sigma(z, spec);
      const MazzeoMelroseSplit s = split(omega, spec);
      reassembly = std::max(reassembly, sup_distance(s.alpha + sigma(s.theta, spec), omega, grid));

      const ClassCoordinates c0 = class_coordinates(omega, spec, 1e-10);
      const ClassCoordinates c1 =
          class_coordinates(omega + exterior_derivative(random_primitive(spec, rng), spec), spec, 1e-10);
      for (std::size_t i = 0; i < c0.m_part.size(); ++i)
        invariance = std::max(invariance, std::fabs(c0.m_part[i] - c1.m_part[i]));
      for (std::size_t i = 0; i < c0.z_part.size(); ++i)
        invariance = std::max(invariance, std::fabs(c0.z_part[i] - c1.z_part[i]));
    }
  }
  o.require(true, std::to_string(forms) + " forms");
  o.at_most("reassembly", reassembly, 1e-10);
  o.at_most("class shift under d(eta)", invariance, 1e-8);
}

// --- 6 ----------------------------------------------------------------------
void moser_golden(Outcome& o) {
  const auto s2 = catalog_lookup("s2");
  const MoserProblem p = golden_problem(s2);
  const FlowMap flow = integrate_flow(p, 200);
  o.at_most("pullback", verify_pullback(flow, p).residual, 1e-4);
  const ConvergenceStudy c = convergence_study(p, {4, 8, 16});
  o.at_most("|order - 4|", std::fabs(c.order - 4.0), 0.3);
  o.at_most("reverse", reverse_moser_check(flow, p), 1e-3);
  o.at_most("class gap", class_gap(p.omega0, p.omega1, s2), 1e-6);
}

// --- 7 ----------------------------------------------------------------------
void nambu(Outcome& o) {
  const auto s2 = catalog_lookup("s2");
  const BForm mu0 = BForm::basis(2, {0, 1});
  const NambuResult a = nambu_equivalence(mu0, parse(s2, "1 + 0.3*z^2") * mu0, s2);
  o.require(a.accepted, "(1+0.3z^2) accepted");
  o.at_most("residual", a.accepted ? a.residual : 1.0, 1e-4);
  const NambuResult b = nambu_equivalence(mu0, parse(s2, "1 + 0.3*z") * mu0, s2);
  o.require(!b.accepted, "(1+0.3z) refused");
  o.at_most("|gap - 1.2pi|", std::fabs(b.volume_gap - 1.2 * kPi), 1e-6);
}

// --- 8 ----------------------------------------------------------------------
void locus(Outcome& o) {
  const auto s2 = catalog_lookup("s2");
  const auto base = LogSymplecticStructure::catalog(s2);
  const auto w = BMultiVector::basis(2, {0, 1}, parse(s2, "-(z - 0.1)"), Frame::Coordinate);
  const NormalizationResult r = normalize(w, base).back();
  double g_err = 0.0;
  for (const Point& x : chart_grid(s2)) g_err = std::max(g_err, std::fabs(r.g.value(x) - 0.1));
  o.at_most("|g - 0.1|", g_err, 1e-8);
  o.require(is_tangent(r.w_norm, s2), "pushforward tangent");
  o.at_most("route gap", r.route_gap, 1e-8);
  bool plateau = true, circles = true;
  for (double eps : {0.2, 0.1, 0.05, 0.02}) {
    plateau &= detect_singular_locus(example3_bivector(s2, eps, Example3::Plateau), base).classification ==
               LocusClass::NonTransverse;
    const LocusReport l = detect_singular_locus(example3_bivector(s2, eps, Example3::ThreeCircles), base);
    circles &= l.components == 3;
  }
  o.require(plateau, "plateau non-transverse");
  o.require(circles, "three circles -> 3 components");
}

// --- 9 ----------------------------------------------------------------------
void pipeline_round_trip(Outcome& o) {
  const auto s2 = catalog_lookup("s2");
  const auto base = LogSymplecticStructure::catalog(s2);
  std::mt19937 rng(2024);
  double params = 0.0, pullback = 0.0;
  int completed = 0;
  for (int i = 0; i < 20; ++i) {
    const cli::RoundTripCase c = cli::random_round_trip(rng);
    try {
      const cli::PipelineResult r = cli::pipeline(cli::round_trip_input(base, c), base);
      params = std::max({params, std::fabs(r.params.epsilon[0] - c.params.epsilon[0]),
                         std::fabs(r.params.delta[0] - c.params.delta[0])});
      pullback = std::max(pullback, r.pullback.residual);
      ++completed;
    } catch (const Error& e) {
      o.require(false, "trial " + std::to_string(i) + ": " + e.what());
    }
  }
  o.require(completed == 20, std::to_string(completed) + "/20 completed");
  o.at_most("parameter error", params, 1e-6);
  o.at_most("pullback", pullback, 1e-4);
}

// --- 10 ---------------------------------------------------------------------
void properties(Outcome& o) {
  std::mt19937 rng(13);
  double dd = 0.0, cartan = 0.0, poisson_cartan = 0.0, jacobi = 0.0, lambda = 0.0;
  bool tangent = true;
  for (const auto& name : catalog_names()) {
    const auto spec = catalog_lookup(name);
    const auto grid = coarse_grid(spec);
    const BMultiVector pi = LogSymplecticStructure::catalog(spec).pi;
    for (int trial = 0; trial < 20; ++trial) {
      const BForm a = random_bform(spec, rng, trial % (spec.dim - 1));
      dd = std::max(dd, sup_norm(exterior_derivative(exterior_derivative(a, spec), spec), grid));
    }
    for (int k = 0; k <= spec.dim; ++k) {
      const BMultiVector v = random_multivector(spec, rng, 1, Frame::B);
      const BForm a = random_bform(spec, rng, k);
      BForm rhs = interior(v, exterior_derivative(a, spec));
      if (k > 0) rhs = rhs + exterior_derivative(interior(v, a), spec);
      cartan = std::max(cartan, sup_distance(lie_derivative(v, a, spec), rhs, grid));
    }
    for (const ZForm& theta : cohomology_basis_Z(spec, 1)) {
      const BForm k = theta.parts[0];
      const BMultiVector X = sharp(pi, k);
      for (int deg = 1; deg <= 2; ++deg) {
        const BMultiVector w = random_multivector(spec, rng, deg, Frame::B);
        const BMultiVector lhs =
            interior(k, poisson_differential(pi, w, spec)) + poisson_differential(pi, interior(k, w), spec);
        poisson_cartan = std::max(poisson_cartan, sup_distance(lhs, lie_derivative(X, w, spec), grid));
      }
    }
    jacobi = std::max(jacobi, schouten_jacobi_residual(pi, spec));
    for (int deg = 1; deg <= spec.dim; ++deg)
      tangent &= is_tangent(tangency_homotopy(random_multivector(spec, rng, deg, Frame::Coordinate), pi, spec), spec);

    BForm omega = LogSymplecticStructure::catalog(spec).omega;
    for (const ZForm& z : cohomology_basis_Z(spec, 1)) omega = omega + 0.1 * sigma(z, spec);
    const MazzeoMelroseSplit s1 = split(omega, spec);
    const MazzeoMelroseSplit s2 = split(omega, with_lambda_profile(spec, LambdaProfile::Septic));
    for (std::size_t c = 0; c < s1.theta.parts.size(); ++c)
      lambda = std::max(lambda, sup_distance(s1.theta.parts[c], s2.theta.parts[c], z_grid(spec, static_cast<int>(c))));
  }
  o.at_most("d^2", dd, 1e-9);
  o.at_most("Cartan", cartan, 1e-8);
  o.at_most("Poisson-Cartan", poisson_cartan, 1e-8);
  o.at_most("Schouten", jacobi, 1e-10);
  o.require(tangent, "tangency homotopy tangent");
  o.at_most("theta lambda-dependence", lambda, 1e-12);
}

struct Criterion {
  int id;
  const char* name;
  double budget;  // seconds
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "sphere normal form", 1, sphere_normal_form},
      {2, "rp2 quotient", 1, projective_quotient},
      {3, "product cosymplectic", 10, product_cosymplectic},
      {4, "regularized volume", 5, regularized_volumes},
      {5, "Mazzeo-Melrose round trip", 60, mazzeo_melrose},
      {6, "Moser golden problem", 60, moser_golden},
      {7, "Nambu suite", 60, nambu},
      {8, "locus normalization", 30, locus},
      {9, "pipeline round trip", 600, pipeline_round_trip},
      {10, "property suites", 600, properties},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s %2d %-28s %7.2f s / %4.0f s%s  %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs, c.budget,
                in_time ? "" : " [over budget]", o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
