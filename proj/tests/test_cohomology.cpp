#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "logsymp/catalog_forms.hpp"
#include "logsymp/cohomology.hpp"
#include "logsymp/error.hpp"
#include "logsymp/forms.hpp"
#include "test_support.hpp"

using namespace logsymp;
using namespace testing_support;

namespace {

constexpr double kPi = std::numbers::pi;

BForm omega_eps_delta(const BManifoldSpec& s2, double eps, double delta) {
  return base_omega(s2) + eps * BForm::basis(2, {0, 1}, s2.defining) +
         delta * sigma(ZForm::uniform(s2, BForm::basis(2, {1})), s2);
}

}  // namespace

TEST(Sigma, AngleFormGivesBaseStructureNearZ) {
  const auto s2 = catalog_lookup("s2");
  const BForm s = sigma(ZForm::uniform(s2, BForm::basis(2, {1})), s2);
  for (const Point& p : coarse_grid(s2))
    if (std::fabs(p[0]) <= 0.5) EXPECT_NEAR(s[3].value(p), 1.0, 1e-15);
  const BForm one = sigma(ZForm::uniform(s2, BForm::function(2, ScalarField::constant(1.0))), s2);
  const ScalarField dlog = dlog_lambda_coefficient(s2);
  for (const Point& p : coarse_grid(s2)) EXPECT_EQ(one[1].value(p), dlog.value(p));
  EXPECT_TRUE(sigma(ZForm::zero(s2, 1), s2).is_zero());
}

TEST(Sigma, RejectsFormsThatAreNotClosedOnZ) {
  const auto p = catalog_lookup("s2xt2");
  const ZForm bad = ZForm::uniform(p, BForm::basis(4, {3}, parse(p, "sin(th1)")));
  EXPECT_EQ(error_of([&] { sigma(bad, p); }), ErrorKind::NotClosed);
}

TEST(Sigma, SequenceIsExact) {
  std::mt19937 rng(29);
  for (const auto& name : {"s2", "t2", "s2xt2"}) {
    const auto spec = catalog_lookup(name);
    for (int k = 1; k <= spec.dim; ++k) {
      // smooth forms have zero residue
      const ZForm r = residue(random_smooth_form(spec, rng, k), spec);
      for (std::size_t c = 0; c < spec.z_components.size(); ++c)
        EXPECT_LT(sup_norm(r.parts[c], z_grid(spec, static_cast<int>(c))), 1e-10) << name;
    }
    // residue inverts sigma on the Z cohomology bases
    for (int k = 0; k < spec.dim; ++k)
      for (const ZForm& theta : cohomology_basis_Z(spec, k)) {
        const ZForm back = residue(sigma(theta, spec), spec);
        for (std::size_t c = 0; c < spec.z_components.size(); ++c) {
          const auto grid = z_grid(spec, static_cast<int>(c));
          EXPECT_LT(sup_distance(back.parts[c], theta.parts[c], grid), 1e-10) << name << " k=" << k;
        }
      }
  }
}

TEST(Split, SphereStructure) {
  const auto s2 = catalog_lookup("s2");
  const MazzeoMelroseSplit s = split(base_omega(s2), s2);
  ASSERT_EQ(s.theta.degree, 1);
  for (const Point& p : z_grid(s2, 0)) EXPECT_DOUBLE_EQ(s.theta.parts[0][2].value(p), 1.0);
  // alpha = d(log(|z| / lambda)) ^ dth vanishes wherever lambda = |z|
  for (const Point& p : coarse_grid(s2))
    if (std::fabs(p[0]) <= 0.5) EXPECT_NEAR(s.alpha[3].value(p), 0.0, 1e-15);
  const auto q = with_lambda_profile(s2, LambdaProfile::Quintic);
  const MazzeoMelroseSplit sq = split(base_omega(q), q);
  const ScalarField oracle = ScalarField::constant(1.0) - dlog_lambda_coefficient(q);
  for (const Point& p : coarse_grid(q)) EXPECT_NEAR(sq.alpha[3].value(p), oracle.value(p), 1e-14);
}

TEST(Split, ProductStructure) {
  const auto p = catalog_lookup("s2xt2");
  const MazzeoMelroseSplit s = split(base_omega(p), p);
  const BForm expected_theta = BForm::basis(4, {1});
  EXPECT_LT(sup_distance(s.theta.parts[0], expected_theta, z_grid(p, 0)), 1e-15);
  BForm alpha_z = BForm::basis(4, {2, 3});
  EXPECT_LT(sup_distance(s.alpha, alpha_z, z_grid(p, 0)), 1e-15);
}

TEST(Split, SmoothFormsHaveNoResidue) {
  const auto t2 = catalog_lookup("t2");
  const BForm w = BForm::basis(2, {0, 1}, t2.defining);
  const MazzeoMelroseSplit s = split(w, t2);
  for (int c = 0; c < 2; ++c) EXPECT_LT(sup_norm(s.theta.parts[c], z_grid(t2, c)), 1e-15);
  EXPECT_LT(sup_distance(s.alpha, w, coarse_grid(t2)), 1e-15);
}

TEST(Split, RejectsNonClosedInput) {
  const auto s2 = catalog_lookup("s2");
  const BForm a = BForm::basis(2, {1}, parse(s2, "z"));
  EXPECT_EQ(error_of([&] { split(a, s2); }), ErrorKind::NotClosed);
}

TEST(Split, RoundTrip) {
  std::mt19937 rng(31);
  for (const auto& name : {"s2", "t2"}) {
    const auto spec = catalog_lookup(name);
    const BForm alpha = base_omega(spec) - sigma(residue(base_omega(spec), spec), spec) +
                        exterior_derivative(random_smooth_form(spec, rng, 1), spec);
    const ZForm theta = cohomology_basis_Z(spec, 1)[0];
    const MazzeoMelroseSplit s = split(alpha + sigma(theta, spec), spec);
    for (std::size_t c = 0; c < spec.z_components.size(); ++c)
      EXPECT_LT(sup_distance(s.theta.parts[c], theta.parts[c], z_grid(spec, static_cast<int>(c))), 1e-12);
    EXPECT_LT(sup_distance(s.alpha, alpha, coarse_grid(spec)), 1e-10);
  }
}

TEST(ClassCoordinates, DeformedSphereFamily) {
  const auto s2 = catalog_lookup("s2");
  const ClassCoordinates c = class_coordinates(omega_eps_delta(s2, 0.1, 0.05), s2);
  ASSERT_EQ(c.m_part.size(), 1u);
  ASSERT_EQ(c.z_part.size(), 1u);
  EXPECT_NEAR(c.m_part[0], 0.1 * 4 * kPi, 1e-10);
  EXPECT_NEAR(c.z_part[0], 2 * kPi * 1.05, 1e-10);
}

TEST(ClassCoordinates, ProductHasFiveCoordinatesInDegreeTwo) {
  const auto p = catalog_lookup("s2xt2");
  const ClassCoordinates c = class_coordinates(base_omega(p), p);
  EXPECT_EQ(c.m_part.size() + c.z_part.size(), 5u);
  EXPECT_NEAR(c.m_part[1], 4 * kPi * kPi, 1e-9);
  EXPECT_NEAR(c.z_part[0], 2 * kPi, 1e-10);
}

TEST(ClassCoordinates, ExactFormsAreInvisible) {
  std::mt19937 rng(37);
  for (const auto& name : {"s2", "t2", "s2xt2"}) {
    const auto spec = catalog_lookup(name);
    const int trials = spec.dim > 2 ? 3 : 50;
    for (int k = 1; k <= spec.dim; ++k) {
      const BForm base = k == 2 ? base_omega(spec) : BForm::zero(spec.dim, k);
      const ClassCoordinates c0 = class_coordinates(base, spec);
      for (int t = 0; t < trials; ++t) {
        const BForm deta = exterior_derivative(random_global_form(spec, rng, k - 1, false), spec);
        const ClassCoordinates c = class_coordinates(base + deta, spec);
        for (std::size_t i = 0; i < c.m_part.size(); ++i) EXPECT_NEAR(c.m_part[i], c0.m_part[i], 1e-8) << name;
        for (std::size_t i = 0; i < c.z_part.size(); ++i) EXPECT_NEAR(c.z_part[i], c0.z_part[i], 1e-8) << name;
      }
    }
  }
}

TEST(Dimensions, Tables) {
  EXPECT_EQ(bcohomology_dim(catalog_lookup("s2"), 2), 2);
  EXPECT_EQ(bcohomology_dim(catalog_lookup("rp2"), 2), 1);
  EXPECT_EQ(bcohomology_dim(catalog_lookup("s2xt2"), 2), 5);
  const std::vector<std::vector<int>> expected{{1, 1, 2}, {1, 4, 3}, {1, 3, 5, 5, 2}, {1, 1, 1}};
  const auto names = std::vector<std::string>{"s2", "t2", "s2xt2", "rp2"};
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto spec = catalog_lookup(names[i]);
    for (int k = 0; k <= spec.dim; ++k) {
      EXPECT_EQ(bcohomology_dim(spec, k), expected[i][k]) << names[i] << " k=" << k;
      EXPECT_EQ(poisson_cohomology_dim(spec, k), bcohomology_dim(spec, k));
    }
    EXPECT_EQ(error_of([&] { bcohomology_dim(spec, spec.dim + 1); }), ErrorKind::UnsupportedDegree);
  }
}

TEST(RegularizedVolume, SphereExamples) {
  const auto s2 = catalog_lookup("s2");
  const VolumeReport a = regularized_volume(base_omega(s2), s2);
  EXPECT_NEAR(a.volume, 0.0, 1e-10);
  const VolumeReport b = regularized_volume(BForm::basis(2, {0, 1}, s2.defining), s2);
  EXPECT_NEAR(b.volume, 4 * kPi, 1e-9);
  const VolumeReport c = regularized_volume(BForm::basis(2, {0, 1}, parse(s2, "1 + 0.3*z")), s2);
  EXPECT_NEAR(c.volume, 1.2 * kPi, 1e-9);
  for (const auto* r : {&a, &b, &c}) {
    EXPECT_LT(std::fabs(r->log_slope), 1e-6);
    EXPECT_LT(r->profile_shift, 1e-6);
    EXPECT_EQ(r->rows.size(), 10u);
  }
  EXPECT_NE(volume_csv(c).find("epsilon,F,V,c"), std::string::npos);
}

TEST(RegularizedVolume, TorusAndProduct) {
  const auto t2 = catalog_lookup("t2");
  const VolumeReport t = regularized_volume(base_omega(t2), t2);
  EXPECT_NEAR(t.volume, 0.0, 1e-10);
  EXPECT_LT(t.profile_shift, 1e-6);
  const VolumeReport s = regularized_volume(BForm::basis(2, {0, 1}, t2.defining), t2);
  EXPECT_NEAR(s.volume, 1.0, 1e-9);
  const auto p = catalog_lookup("s2xt2");
  const BForm top = BForm::basis(4, {0, 1, 2, 3}, parse(p, "z + 2"));
  EXPECT_NEAR(regularized_volume(top, p, false).volume, 4 * kPi * kPi * 2 * kPi * 2, 1e-8);
}

TEST(RegularizedVolume, Errors) {
  const auto s2 = catalog_lookup("s2");
  EXPECT_EQ(error_of([&] { regularized_volume(BForm::basis(2, {0, 1}, parse(s2, "1/z")), s2); }),
            ErrorKind::NonConvergence);
  const auto rp2 = catalog_lookup("rp2");
  EXPECT_EQ(error_of([&] { regularized_volume(base_omega(rp2), rp2); }), ErrorKind::OrientationMismatch);
  EXPECT_EQ(error_of([&] { regularized_volume(BForm::basis(2, {1}), s2); }), ErrorKind::Rejected);
}

TEST(Functoriality, Examples) {
  const auto s2 = catalog_lookup("s2");
  const BMapSpec id = identity_map(s2);
  const BForm sig = sigma(ZForm::uniform(s2, BForm::basis(2, {1})), s2);
  EXPECT_TRUE(functoriality_check(sig, id).holds);
  const FunctorialityResult f = functoriality_check(BForm::basis(2, {0, 1}, s2.defining), id);
  EXPECT_FALSE(f.holds);
  EXPECT_NEAR(f.volume, 4 * kPi, 1e-9);

  const auto rp2 = catalog_lookup("rp2");
  const BForm sig_rp2 = sigma(ZForm::uniform(rp2, BForm::basis(2, {1})), rp2);
  EXPECT_TRUE(functoriality_check(sig_rp2, covering_map(rp2)).holds);
}

TEST(Functoriality, RejectsMapsMovingZ) {
  const auto s2 = catalog_lookup("s2");
  BMapSpec shifted = identity_map(s2);
  shifted.map = [](const Point& x) {
    std::array<Jet, kMaxDim> u{};
    u[0] = 0.5 * Jet::variable(x[0], 0) + Jet(0.1);
    u[1] = Jet::variable(x[1], 1);
    return u;
  };
  EXPECT_EQ(error_of([&] { require_bmap(shifted); }), ErrorKind::Rejected);
}

TEST(Tangency, HomotopyMakesFieldsTangent) {
  const auto s2 = catalog_lookup("s2");
  const BMultiVector pi = invert(base_omega(s2), s2);
  const BMultiVector dz = BMultiVector::basis(2, {0}, ScalarField::constant(1.0), Frame::Coordinate);
  EXPECT_FALSE(is_tangent(dz, s2));
  const BMultiVector z1 = tangency_homotopy(dz, pi, s2);
  // oracle: zeta(d/dz) = (1 - chi) d/dz
  const ScalarField chi = chi_field(s2, 0);
  for (const Point& p : coarse_grid(s2)) {
    EXPECT_NEAR(z1[1].value(p), 1.0 - chi.value(p), 1e-12);
    EXPECT_NEAR(z1[2].value(p), 0.0, 1e-12);
  }
  const BMultiVector dzdth = BMultiVector::basis(2, {0, 1}, ScalarField::constant(1.0), Frame::Coordinate);
  EXPECT_FALSE(is_tangent(dzdth, s2));
  EXPECT_NO_THROW(tangency_homotopy(dzdth, pi, s2));
  const BMultiVector dth = BMultiVector::basis(2, {1}, parse(s2, "z^2"), Frame::Coordinate);
  EXPECT_TRUE(is_tangent(tangency_homotopy(dth, pi, s2), s2));
}

TEST(Tangency, RandomFieldsOnTheProduct) {
  std::mt19937 rng(41);
  const auto p = catalog_lookup("s2xt2");
  const BMultiVector pi = invert(base_omega(p), p);
  for (int deg = 1; deg <= 3; ++deg)
    EXPECT_NO_THROW(tangency_homotopy(random_multivector(p, rng, deg, Frame::Coordinate), pi, p)) << deg;
}
