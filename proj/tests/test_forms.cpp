#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "logsymp/catalog_forms.hpp"
#include "logsymp/error.hpp"
#include "logsymp/forms.hpp"
#include "logsymp/manifold.hpp"
#include "test_support.hpp"

using namespace logsymp;
using namespace testing_support;

namespace {

constexpr double kPi = std::numbers::pi;

// Brute-force Jacobiator of a coordinate bivector given by a coefficient
// callback, with derivatives from central differences.
double fd_jacobiator_sup(const std::function<double(int, int, const Point&)>& P, int n,
                         const std::vector<Point>& grid) {
  const double h = 1e-5;
  double sup = 0.0;
  for (const Point& x : grid) {
    auto dP = [&](int l, int j, int k) {
      Point a = x, b = x;
      a[l] += h;
      b[l] -= h;
      return (P(j, k, a) - P(j, k, b)) / (2 * h);
    };
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
          double J = 0.0;
          for (int l = 0; l < n; ++l)
            J += P(i, l, x) * dP(l, j, k) + P(j, l, x) * dP(l, k, i) + P(k, l, x) * dP(l, i, j);
          sup = std::max(sup, std::fabs(J));
        }
  }
  return sup;
}

}  // namespace

TEST(ExteriorDerivative, LogOfDistanceHasUnitCoefficient) {
  const auto s2 = catalog_lookup("s2");
  const BForm d = exterior_derivative(BForm::function(2, parse(s2, "0.5*log(z^2)")), s2);
  for (double z : {-0.5, -0.31, -0.02, 0.003, 0.2, 0.5})
    for (double th : {0.0, 1.3, 4.0}) {
      EXPECT_NEAR(d[1].value({z, th, 0, 0}), 1.0, 1e-14);
      EXPECT_EQ(d[2].value({z, th, 0, 0}), 0.0);
    }
}

TEST(ExteriorDerivative, CatalogStructuresAreClosed) {
  for (const auto& name : catalog_names()) {
    const auto spec = catalog_lookup(name);
    const BForm omega = base_omega(spec);
    if (omega.degree() < spec.dim) EXPECT_LT(sup_norm(exterior_derivative(omega, spec), coarse_grid(spec)), 1e-15);
  }
}

TEST(ExteriorDerivative, FunctionTimesAngleForm) {
  const auto s2 = catalog_lookup("s2");
  const BForm a = BForm::basis(2, {1}, parse(s2, "sin(3*z) + z^3"));
  const BForm d = exterior_derivative(a, s2);
  for (const Point& p : coarse_grid(s2)) {
    const double z = p[0];
    // b-coefficient of dz/z ^ dth is z f'(z)
    EXPECT_NEAR(d[3].value(p), z * (3 * std::cos(3 * z) + 3 * z * z), 1e-13);
  }
}

TEST(ExteriorDerivative, SquaresToZero) {
  std::mt19937 rng(11);
  for (const auto& name : catalog_names()) {
    const auto spec = catalog_lookup(name);
    const auto grid = coarse_grid(spec);
    for (int trial = 0; trial < 100; ++trial) {
      const int k = trial % (spec.dim - 1);
      const BForm a = random_bform(spec, rng, k);
      EXPECT_LT(sup_norm(exterior_derivative(exterior_derivative(a, spec), spec), grid), 1e-9) << name;
    }
  }
}

TEST(Interior, EulerFieldRecoversAngleForm) {
  const auto s2 = catalog_lookup("s2");
  const BMultiVector xi = BMultiVector::basis(2, {0});
  const BForm r = interior(xi, base_omega(s2));
  EXPECT_EQ(r.degree(), 1);
  for (const Point& p : z_grid(s2, 0)) {
    EXPECT_DOUBLE_EQ(r[2].value(p), 1.0);
    EXPECT_EQ(r[1].value(p), 0.0);
  }
  std::mt19937 rng(7);
  const BMultiVector v = random_multivector(s2, rng, 1, Frame::B);
  EXPECT_TRUE(interior(v, BForm::zero(2, 1)).is_zero());
}

TEST(Wedge, TorusFactorPeriod) {
  const auto p = catalog_lookup("s2xt2");
  const BForm w = wedge(BForm::basis(4, {2}), BForm::basis(4, {3}));
  EXPECT_NEAR(cycle_integrate(p, w, "s2xt2:t2"), 4 * kPi * kPi, 1e-10);
}

TEST(Wedge, GradedCommutativityAndLeibniz) {
  std::mt19937 rng(13);
  for (const auto& name : {"t2", "s2xt2"}) {
    const auto spec = catalog_lookup(name);
    const auto grid = coarse_grid(spec);
    const BForm a = random_bform(spec, rng, 1), b = random_bform(spec, rng, 1);
    EXPECT_LT(sup_distance(wedge(a, b), -wedge(b, a), grid), 1e-13);
    const BForm lhs = exterior_derivative(wedge(a, b), spec);
    const BForm rhs = wedge(exterior_derivative(a, spec), b) - wedge(a, exterior_derivative(b, spec));
    EXPECT_LT(sup_distance(lhs, rhs, grid), 1e-11);
  }
}

TEST(Invert, SphereStructure) {
  const auto s2 = catalog_lookup("s2");
  const BMultiVector pi = invert(base_omega(s2), s2);
  const BMultiVector c = to_frame(pi, Frame::Coordinate, s2);
  for (const Point& p : coarse_grid(s2)) {
    EXPECT_DOUBLE_EQ(pi[3].value(p), -1.0);
    // z d/dth ^ d/dz has coordinate coefficient -z on d/dz ^ d/dth
    EXPECT_NEAR(c[3].value(p), -p[0], 1e-15);
  }
}

TEST(Invert, ProductStructure) {
  const auto s = catalog_lookup("s2xt2");
  const BMultiVector pi = invert(base_omega(s), s);
  const BMultiVector expected =
      BMultiVector::basis(4, {1, 0}) + BMultiVector::basis(4, {3, 2});
  EXPECT_LT(sup_distance(pi, expected, coarse_grid(s)), 1e-15);
}

TEST(Invert, ZeroRowIsDegenerate) {
  const auto s = catalog_lookup("s2xt2");
  try {
    invert(BForm::basis(4, {0, 1}), s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Degeneracy);
  }
}

TEST(Invert, IsAnInvolution) {
  std::mt19937 rng(17);
  for (const auto& name : {"s2", "t2", "s2xt2"}) {
    const auto spec = catalog_lookup(name);
    const auto grid = coarse_grid(spec);
    for (int trial = 0; trial < 5; ++trial) {
      const BForm omega = base_omega(spec) + 0.05 * random_bform(spec, rng, 2);
      if (!nondegenerate_check(omega, spec, grid).nondegenerate) continue;
      EXPECT_LT(sup_distance(invert(invert(omega, spec), spec), omega, grid), 1e-10) << name;
    }
  }
}

TEST(Nondegenerate, Examples) {
  const auto s2 = catalog_lookup("s2");
  EXPECT_TRUE(nondegenerate_check(base_omega(s2), s2).nondegenerate);
  const auto r = nondegenerate_check(BForm::basis(2, {0, 1}, s2.defining), s2);
  EXPECT_FALSE(r.nondegenerate);
  EXPECT_NEAR(r.witness[0], 0.0, 1e-15);

  const auto t2 = catalog_lookup("t2");
  const BForm one = BForm::basis(2, {1}) + 0.5 * BForm::basis(2, {0}, dlog_lambda_coefficient(t2));
  EXPECT_TRUE(nondegenerate_check(one, t2).nondegenerate);

  const auto s = catalog_lookup("s2xt2");
  try {
    nondegenerate_check(BForm::basis(4, {0, 1, 2}), s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedDegree);
  }
}

TEST(Schouten, JacobiResiduals) {
  const auto s2 = catalog_lookup("s2");
  EXPECT_EQ(schouten_jacobi_residual(invert(base_omega(s2), s2), s2), 0.0);
  const auto s = catalog_lookup("s2xt2");
  EXPECT_LT(schouten_jacobi_residual(invert(base_omega(s), s), s), 1e-10);

  // z d/dth ^ d/dz + cos(th) d/dth2 ^ d/dz
  const BMultiVector w = BMultiVector::basis(4, {1, 0}, parse(s, "z"), Frame::Coordinate) +
                         BMultiVector::basis(4, {3, 0}, parse(s, "cos(th)"), Frame::Coordinate);
  auto P = [](int i, int j, const Point& x) {
    auto upper = [&](int a, int b) {
      if (a == 0 && b == 1) return -x[0];
      if (a == 0 && b == 3) return -std::cos(x[1]);
      return 0.0;
    };
    if (i < j) return upper(i, j);
    if (i > j) return -upper(j, i);
    return 0.0;
  };
  const auto grid = coarse_grid(s);
  const double oracle = fd_jacobiator_sup(P, 4, grid);
  EXPECT_NEAR(oracle, 1.0, 1e-6);
  EXPECT_NEAR(schouten_jacobi_residual(w, s, grid), oracle, 1e-6);
}

TEST(Schouten, CatalogStructuresArePoisson) {
  for (const auto& name : catalog_names()) {
    const auto spec = catalog_lookup(name);
    EXPECT_LE(schouten_jacobi_residual(invert(base_omega(spec), spec), spec), 1e-12) << name;
  }
}

TEST(Lie, RotationPreservesSphereStructure) {
  const auto s2 = catalog_lookup("s2");
  const BForm l = lie_derivative(BMultiVector::basis(2, {1}), base_omega(s2), s2);
  EXPECT_EQ(sup_norm(l, coarse_grid(s2)), 0.0);
}

TEST(Lie, CartanFormula) {
  std::mt19937 rng(19);
  for (const auto& name : catalog_names()) {
    const auto spec = catalog_lookup(name);
    const auto grid = coarse_grid(spec);
    for (int k = 0; k <= spec.dim; ++k) {
      const BMultiVector v = random_multivector(spec, rng, 1, Frame::B);
      const BForm a = random_bform(spec, rng, k);
      BForm cartan = interior(v, exterior_derivative(a, spec));
      if (k > 0) cartan = cartan + exterior_derivative(interior(v, a), spec);
      EXPECT_LT(sup_distance(lie_derivative(v, a, spec), cartan, grid), 1e-8) << name << " k=" << k;
    }
  }
}

TEST(Lie, PoissonCartanFormula) {
  std::mt19937 rng(23);
  for (const auto& name : {"s2", "t2", "s2xt2"}) {
    const auto spec = catalog_lookup(name);
    const auto grid = coarse_grid(spec);
    const BMultiVector pi = invert(base_omega(spec), spec);
    for (const ZForm& theta : cohomology_basis_Z(spec, 1)) {
      const BForm k = theta.parts[0];
      const BMultiVector X = sharp(pi, k);
      for (int deg = 1; deg <= 2; ++deg) {
        const BMultiVector w = random_multivector(spec, rng, deg, Frame::B);
        const BMultiVector lhs =
            interior(k, poisson_differential(pi, w, spec)) + poisson_differential(pi, interior(k, w), spec);
        EXPECT_LT(sup_distance(lhs, lie_derivative(X, w, spec), grid), 1e-8) << name << " deg=" << deg;
      }
    }
  }
}

TEST(Pullback, CollarShiftChainRule) {
  const auto s2 = catalog_lookup("s2");
  const ScalarField chi = chi_field(s2, 0);
  const ChartMap shift = [&](const Point& p) {
    std::array<Jet, kMaxDim> u{};
    u[0] = Jet::variable(p[0], 0) - 0.1 * chi.jet(p);
    u[1] = Jet::variable(p[1], 1);
    return u;
  };
  const BForm dzdth = BForm::basis(2, {0, 1}, s2.defining);
  const BForm r = pullback(shift, dzdth, s2);
  for (const Point& p : coarse_grid(s2)) {
    const double dchi = chi.jet(p).g[0];
    EXPECT_NEAR(r[3].value(p), p[0] * (1 - 0.1 * dchi), 1e-12);
  }
}
