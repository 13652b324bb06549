#include <gtest/gtest.h>

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>

#include "logsymp/catalog_forms.hpp"
#include "logsymp/interpolation.hpp"
#include "logsymp/moser.hpp"
#include "test_support.hpp"

using namespace logsymp;
using namespace testing_support;

namespace {

constexpr double kPi = std::numbers::pi;

// Golden problem by hand: omega_t = (1 - 0.2 t z^2) dz/z ^ dth and
// X_t = -0.1 (1 - z^2) / (1 - 0.2 t z^2) z d_z.
double golden_b_velocity(double t, double z) { return -0.1 * (1 - z * z) / (1 - 0.2 * t * z * z); }

double golden_endpoint(double z0) {
  using State = std::array<double, 1>;
  State z{z0};
  auto rhs = [](const State& x, State& dx, double t) { dx[0] = x[0] * golden_b_velocity(t, x[0]); };
  boost::numeric::odeint::integrate_adaptive(
      boost::numeric::odeint::make_controlled(1e-14, 1e-14, boost::numeric::odeint::runge_kutta_dopri5<State>()), rhs,
      z, 0.0, 1.0, 1e-3);
  return z[0];
}

BForm top(const BManifoldSpec& spec, const std::string& coefficient) {
  return BForm::basis(spec.dim, {0, 1}, parse(spec, coefficient));
}

}  // namespace

TEST(TensorTable, ReproducesQuinticsWithDerivatives) {
  const auto s2 = catalog_lookup("s2");
  const TensorTable table(s2, {17, 16}, parse(s2, "z^5 - 2*z^3 + 0.3*z^2 - z + 1"));
  for (double z : {-0.97, -0.41, 0.0, 0.123, 0.88, 0.99}) {
    const Jet j = table.jet({z, 1.3, 0.0, 0.0});
    EXPECT_NEAR(j.v, std::pow(z, 5) - 2 * std::pow(z, 3) + 0.3 * z * z - z + 1, 1e-12);
    EXPECT_NEAR(j.g[0], 5 * std::pow(z, 4) - 6 * z * z + 0.6 * z - 1, 1e-10);
    EXPECT_NEAR(j.h[0][0], 20 * std::pow(z, 3) - 12 * z + 0.6, 1e-8);
    EXPECT_NEAR(j.g[1], 0.0, 1e-12);
  }
}

TEST(TensorTable, PeriodicAxisWrapsSmoothly) {
  const auto s2 = catalog_lookup("s2");
  const TensorTable table(s2, {33, 64}, parse(s2, "z*sin(th) + cos(2*th)"));
  for (double th : {-0.3, 0.0, 0.05, 3.0, 6.2, 7.0}) {
    const double z = 0.37;
    const Jet j = table.jet({z, th, 0.0, 0.0});
    EXPECT_NEAR(j.v, z * std::sin(th) + std::cos(2 * th), 1e-6);
    EXPECT_NEAR(j.g[1], z * std::cos(th) - 2 * std::sin(2 * th), 1e-5);
    EXPECT_NEAR(j.g[0], std::sin(th), 1e-6);
    EXPECT_NEAR(j.h[0][1], std::cos(th), 1e-5);
  }
}

TEST(TensorTable, AxisInterpolation) {
  const auto s2 = catalog_lookup("s2");
  const auto nodes = axis_samples(s2, 0, {21, 8});
  std::vector<double> v;
  for (double z : nodes) v.push_back(z * z * z - z);
  for (double z : {-0.99, -0.5, 0.01, 0.77})
    EXPECT_NEAR(interpolate_axis(nodes, s2.principal.axes[0], v, z), z * z * z - z, 1e-13);
  EXPECT_EQ(error_of([&] { interpolate_axis({0.0, 1.0}, s2.principal.axes[0], {0.0, 1.0}, 0.5); }),
            ErrorKind::InvalidStructure);
}

TEST(Primitive, CarriedAndTrivialCases) {
  const auto s2 = catalog_lookup("s2");
  const BForm w0 = base_omega(s2);
  const BForm eta = BForm::basis(2, {1}, parse(s2, "0.1*(1 - z^2)"));
  const BForm w1 = w0 + exterior_derivative(eta, s2);
  EXPECT_EQ(sup_distance(build_primitive(w0, w1, s2, eta), eta, coarse_grid(s2)), 0.0);
  EXPECT_EQ(sup_norm(build_primitive(w0, w0, s2), coarse_grid(s2)), 0.0);
}

TEST(Primitive, ClassShiftIsReported) {
  const auto s2 = catalog_lookup("s2");
  const BForm w0 = base_omega(s2);
  const BForm shifted = w0 + BForm::basis(2, {0, 1}, 0.1 * s2.defining);
  try {
    build_primitive(w0, shifted, s2);
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoPrimitive);
    EXPECT_NE(std::string(e.what()).find("gap"), std::string::npos);
  }
  EXPECT_NEAR(class_gap(w0, shifted, s2), 0.1 * 4 * kPi, 1e-8);
  // a wrong carried primitive is not accepted silently
  const BForm eta = BForm::basis(2, {1}, parse(s2, "0.1*(1 - z^2)"));
  EXPECT_EQ(error_of([&] { build_primitive(w0, w0 + exterior_derivative(eta, s2), s2, 2.0 * eta); }),
            ErrorKind::NoPrimitive);
}

TEST(Primitive, HomotopyOnSphere) {
  const auto s2 = catalog_lookup("s2");
  const BForm diff = top(s2, "0.3*z^2");
  const BForm eta = homotopy_primitive(diff, s2);
  EXPECT_LT(sup_distance(exterior_derivative(eta, s2), diff, coarse_grid(s2)), 1e-9);
  // fiber integration from the south pole gives 0.15 (z^2 - 1) dth
  const BForm expected = BForm::basis(2, {1}, parse(s2, "0.15*(z^2 - 1)"));
  EXPECT_LT(sup_distance(eta, expected, coarse_grid(s2)), 1e-9);
}

TEST(Primitive, HomotopyOnTorusWithResidues) {
  const auto t2 = catalog_lookup("t2");
  std::mt19937 rng(11);
  for (int trial = 0; trial < 3; ++trial) {
    const BForm diff = exterior_derivative(random_bform(t2, rng, 1), t2);
    const BForm eta = homotopy_primitive(diff, t2);
    EXPECT_LT(sup_distance(exterior_derivative(eta, t2), diff, coarse_grid(t2)), 1e-7) << trial;
  }
}

TEST(Moser, GoldenVelocityMatchesClosedForm) {
  const auto s2 = catalog_lookup("s2");
  const MoserProblem p = golden_problem(s2);
  for (double t : {0.0, 0.3, 1.0})
    for (const Point& x : coarse_grid(s2)) {
      const auto X = moser_velocity(p, t, x);
      EXPECT_NEAR(X[0], golden_b_velocity(t, x[0]), 1e-13);
      EXPECT_NEAR(X[1], 0.0, 1e-13);
    }
  const BMultiVector field = moser_vector_field(p, 0.5);
  EXPECT_NEAR(field[1u].value({0.2, 0.0, 0.0, 0.0}), golden_b_velocity(0.5, 0.2), 1e-13);
}

TEST(Moser, ZeroFieldGivesIdentity) {
  const auto s2 = catalog_lookup("s2");
  const BForm w0 = base_omega(s2);
  const MoserProblem p = make_moser_problem(s2, w0, w0, BForm::zero(2, 1));
  const FlowMap f = integrate_flow(p, 10, {17, 16});
  for (std::size_t s = 0; s < f.seed_count(); ++s)
    for (int k = 0; k < 2; ++k) EXPECT_EQ(f.traj.back()[s][k], f.traj[0][s][k]);
  EXPECT_LT(verify_pullback(f, p).residual, 1e-13);
  EXPECT_LT(reverse_moser_check(f, p), 1e-13);
}

TEST(Moser, GoldenFlowMatchesIndependentIntegrator) {
  const auto s2 = catalog_lookup("s2");
  const MoserProblem p = golden_problem(s2);
  const FlowMap f = integrate_flow(p, 200, {33, 8});
  for (std::size_t s = 0; s < f.seed_count(); s += 5) {
    const Point& x = f.traj[0][s];
    EXPECT_NEAR(f.traj.back()[s][0], golden_endpoint(x[0]), 1e-10);
    EXPECT_EQ(f.traj.back()[s][1], x[1]);
  }
  // off-grid evaluation is interpolation at sample resolution
  const Point y = f.map({0.41, 2.0, 0.0, 0.0}, f.steps);
  EXPECT_NEAR(y[0], golden_endpoint(0.41), 1e-4);
  EXPECT_LT(f.z_drift(), 1e-8);
  EXPECT_TRUE(f.preserves_sides());
}

TEST(Moser, GoldenPullbackAndReverseCheck) {
  const auto s2 = catalog_lookup("s2");
  const MoserProblem p = golden_problem(s2);
  const FlowMap f = integrate_flow(p);
  const PullbackReport r = verify_pullback(f, p);
  EXPECT_LT(r.residual, 1e-4);
  EXPECT_LT(r.z_residual, 1e-4);
  EXPECT_GT(r.checked, 3000u);
  EXPECT_EQ(r.excluded, 4u * 64u);
  EXPECT_LT(reverse_moser_check(f, p), 1e-3);
  EXPECT_LT(class_gap(p.omega0, p.omega1, s2), 1e-6);
}

TEST(Moser, FourthOrderInSteps) {
  const auto s2 = catalog_lookup("s2");
  const ConvergenceStudy c = convergence_study(golden_problem(s2), {4, 8, 16});
  EXPECT_NEAR(c.order, 4.0, 0.3);
  for (std::size_t i = 1; i < c.increments.size(); ++i) EXPECT_NEAR(c.increments[i - 1] / c.increments[i], 16.0, 3.0);
  ASSERT_EQ(c.residuals.size(), 3u);
}

TEST(Moser, WrongPrimitiveIsFlagged) {
  const auto s2 = catalog_lookup("s2");
  const MoserProblem good = golden_problem(s2);
  EXPECT_EQ(error_of([&] { make_moser_problem(s2, good.omega0, good.omega1, 2.0 * good.primitive); }),
            ErrorKind::NoPrimitive);
  MoserProblem bad = good;
  bad.primitive = 2.0 * good.primitive;
  const FlowMap f = integrate_flow(bad, 50, {33, 16});
  EXPECT_GT(verify_pullback(f, bad).residual, 1e-2);
  EXPECT_GT(reverse_moser_check(f, bad), 1e-2);
}

TEST(Moser, EscapingTrajectoryThrows) {
  const auto s2 = catalog_lookup("s2");
  const BForm w0 = base_omega(s2);
  const BForm eta = BForm::basis(2, {1}, parse(s2, "-0.9*z"));
  const MoserProblem p = make_moser_problem(s2, w0, w0 + exterior_derivative(eta, s2), eta);
  EXPECT_EQ(error_of([&] { integrate_flow(p, 50, {33, 8}); }), ErrorKind::ChartEscape);
}

TEST(Moser, DegenerateSegmentRejected) {
  const auto s2 = catalog_lookup("s2");
  const BForm w0 = base_omega(s2);
  const BForm eta = BForm::basis(2, {1}, parse(s2, "-1.5*z"));
  EXPECT_EQ(error_of([&] { make_moser_problem(s2, w0, w0 + exterior_derivative(eta, s2), eta); }),
            ErrorKind::Degeneracy);
}

TEST(Moser, DegreeOneUsesMinimumNorm) {
  const auto t2 = catalog_lookup("t2");
  const BForm w0 = BForm::basis(2, {0});
  const BForm f = BForm::basis(2, {}, parse(t2, "0.05*sin(2*pi*u)"));
  const BForm w1 = w0 + exterior_derivative(f, t2);
  const MoserProblem p = make_moser_problem(t2, w0, w1, f);
  for (const Point& x : coarse_grid(t2)) {
    const auto X = moser_velocity(p, 0.5, x);
    const auto w = p.at(0.5).values(x);
    // iota_X omega_t = -f with X parallel to omega_t
    EXPECT_NEAR(X[0] * w[1] + X[1] * w[2], -f[0u].value(x), 1e-12);
    EXPECT_NEAR(X[0] * w[2] - X[1] * w[1], 0.0, 1e-12);
  }
  const FlowMap flow = integrate_flow(p, 100, {65, 64});
  EXPECT_LT(verify_pullback(flow, p).residual, 1e-4);
  EXPECT_LT(flow.z_drift(), 1e-8);
}

TEST(Nambu, MatchingVolumesAreFlowed) {
  const auto s2 = catalog_lookup("s2");
  const BForm mu0 = base_omega(s2);
  const NambuResult r = nambu_equivalence(mu0, top(s2, "1 + 0.3*z^2"), s2);
  ASSERT_TRUE(r.accepted) << r.reason;
  EXPECT_NEAR(r.volume_gap, 0.0, 1e-6);
  EXPECT_NEAR(r.z_volume_gap, 0.0, 1e-6);
  EXPECT_LT(r.residual, 1e-4);
  // the field is finite on Z and tangent to it
  for (double th : {0.0, 1.0, 4.0}) {
    const auto X = moser_velocity(*r.problem, 0.5, {0.0, th, 0.0, 0.0});
    EXPECT_TRUE(std::isfinite(X[0]));
    EXPECT_EQ(s2.defining.value({0.0, th, 0.0, 0.0}) * X[0], 0.0);
  }
  EXPECT_LT(r.flow->z_drift(), 1e-8);
}

TEST(Nambu, IdenticalFormsGiveIdentity) {
  const auto s2 = catalog_lookup("s2");
  const NambuResult r = nambu_equivalence(base_omega(s2), base_omega(s2), s2, 10);
  ASSERT_TRUE(r.accepted);
  EXPECT_LT(r.residual, 1e-13);
}

TEST(Nambu, RefusesDifferentVolumes) {
  const auto s2 = catalog_lookup("s2");
  const NambuResult r = nambu_equivalence(base_omega(s2), top(s2, "1 + 0.3*z"), s2);
  EXPECT_FALSE(r.accepted);
  EXPECT_NEAR(r.volume_gap, 1.2 * kPi, 1e-6);
  EXPECT_FALSE(r.flow);
  EXPECT_NE(r.reason.find("volume"), std::string::npos);
}

TEST(Nambu, RefusesDifferentZVolumes) {
  const auto s2 = catalog_lookup("s2");
  const NambuResult r = nambu_equivalence(base_omega(s2), top(s2, "1.5 - 0.75*z^2"), s2);
  EXPECT_FALSE(r.accepted);
  EXPECT_NEAR(r.z_volume_gap, 0.5 * 2 * kPi, 1e-6);
}

TEST(Nambu, OrientationMismatch) {
  const auto s2 = catalog_lookup("s2");
  EXPECT_EQ(error_of([&] { nambu_equivalence(base_omega(s2), top(s2, "1 - 2*z^2"), s2); }),
            ErrorKind::OrientationMismatch);
  EXPECT_EQ(error_of([&] { nambu_equivalence(base_omega(s2), top(s2, "-1"), s2); }),
            ErrorKind::OrientationMismatch);
}
