#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "logsymp/error.hpp"
#include "logsymp/expr.hpp"
#include "logsymp/field.hpp"
#include "logsymp/profiles.hpp"

using namespace logsymp;

namespace {

const std::vector<std::string> kNames{"z", "th", "th1", "th2"};

// Central difference of an expression's value in coordinate k.
double central(const Expr& e, Point p, int k, double h = 1e-5) {
  Point a = p, b = p;
  a[k] += h;
  b[k] -= h;
  return (e.value(a) - e.value(b)) / (2 * h);
}

Expr random_expr(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 9 : 1);
  std::uniform_real_distribution<double> coef(-1.5, 1.5);
  std::uniform_int_distribution<int> var(0, 3);
  switch (pick(rng)) {
    case 0: return Expr::constant(std::round(coef(rng) * 100) / 100);
    case 1: return Expr::variable(var(rng));
    case 2: return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
    case 3: return random_expr(rng, depth - 1) - random_expr(rng, depth - 1);
    case 4: return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
    case 5: return Expr::apply(Expr::Op::Sin, random_expr(rng, depth - 1));
    case 6: return Expr::apply(Expr::Op::Cos, random_expr(rng, depth - 1));
    case 7: return Expr::apply(Expr::Op::Exp, Expr::constant(0.3) * random_expr(rng, depth - 1));
    case 8: return random_expr(rng, depth - 1) / (Expr::constant(2.0) + Expr::apply(Expr::Op::Cos, random_expr(rng, depth - 1)));
    default: return pow(random_expr(rng, depth - 1), Expr::constant(2.0));
  }
}

}  // namespace

TEST(Expr, ParsesAndEvaluates) {
  const Expr e = Expr::parse("z*sin(th) + 2^3 - -z^2", kNames);
  const Point p{0.4, 1.1, 0, 0};
  EXPECT_NEAR(e.value(p), 0.4 * std::sin(1.1) + 8 + 0.16, 1e-15);
  EXPECT_NEAR(Expr::parse("-z^2", kNames).value(p), -0.16, 1e-15);
  EXPECT_NEAR(Expr::parse("2*pi", kNames).value(p), 2 * std::numbers::pi, 1e-15);
  EXPECT_NEAR(Expr::parse("smoothstep(0.5)", kNames).value(p), 0.5, 1e-15);
}

TEST(Expr, RejectsMalformedInput) {
  for (const char* bad : {"z +", "foo(z)", "(z", "z w", "1..2", ""}) {
    try {
      Expr::parse(bad, kNames);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Parse) << bad;
    }
  }
}

TEST(Expr, PrintParseRoundTrip) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int trial = 0; trial < 200; ++trial) {
    const Expr e = random_expr(rng, 4);
    const Expr back = Expr::parse(e.str(kNames), kNames);
    for (int s = 0; s < 5; ++s) {
      const Point p{u(rng), 3 * u(rng), 3 * u(rng), 3 * u(rng)};
      const double a = e.value(p), b = back.value(p);
      if (!std::isfinite(a)) continue;
      EXPECT_NEAR(a, b, 1e-13 * (1 + std::fabs(a))) << e.str(kNames);
    }
  }
}

TEST(Jet, AgreesWithCentralDifferences) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Expr e = random_expr(rng, 4);
    const Point p{u(rng), 3 * u(rng), 3 * u(rng), 3 * u(rng)};
    const Jet j = e.jet(p);
    if (!std::isfinite(j.v)) continue;
    for (int k = 0; k < 4; ++k) {
      const double fd = central(e, p, k);
      EXPECT_NEAR(j.g[k], fd, 1e-5 * std::max(1.0, std::fabs(fd))) << e.str(kNames);
      // second derivatives against differences of the AD gradient
      Point a = p, b = p;
      a[k] += 1e-5;
      b[k] -= 1e-5;
      for (int l = 0; l < 4; ++l) {
        const double fd2 = (e.jet(a).g[l] - e.jet(b).g[l]) / 2e-5;
        EXPECT_NEAR(j.h[k][l], fd2, 1e-5 * std::max(1.0, std::fabs(fd2)));
      }
    }
    ++checked;
  }
  EXPECT_GT(checked, 150);
}

TEST(Profiles, LambdaPlateausAndMonotonicity) {
  for (auto prof : {LambdaProfile::Quintic, LambdaProfile::Septic, LambdaProfile::Identity}) {
    for (double s = 0.0; s <= 0.5; s += 1.0 / 1024) EXPECT_DOUBLE_EQ(lambda_profile(prof, s).f, s);
    for (double s = 1.0; s <= 2.0; s += 1.0 / 64) EXPECT_DOUBLE_EQ(lambda_profile(prof, s).f, 1.0);
    double prev = 0.5;
    for (double s = 0.5 + 1.0 / 1024; s < 1.0; s += 1.0 / 1024) {
      const double v = lambda_profile(prof, s).f;
      EXPECT_GT(v, prev);
      EXPECT_LT(v, 1.0);
      prev = v;
    }
  }
}

TEST(Profiles, LambdaDerivativesMatchDifferences) {
  for (auto prof : {LambdaProfile::Quintic, LambdaProfile::Septic}) {
    for (double s = 0.52; s < 0.99; s += 0.031) {
      const double h = 1e-5;
      const Taylor3 t = lambda_profile(prof, s);
      const Taylor3 a = lambda_profile(prof, s + h), b = lambda_profile(prof, s - h);
      EXPECT_NEAR(t.d1, (a.f - b.f) / (2 * h), 1e-7);
      EXPECT_NEAR(t.d2, (a.d1 - b.d1) / (2 * h), 1e-6);
      EXPECT_NEAR(t.d3, (a.d2 - b.d2) / (2 * h), 1e-5);
      const Taylor3 q = dlog_profile(prof, s);
      EXPECT_NEAR(q.f, s * t.d1 / t.f, 1e-14);
    }
    // C^2 matching at both ends of the blend
    EXPECT_NEAR(lambda_profile(prof, 0.5 + 1e-9).d1, 1.0, 1e-7);
    EXPECT_NEAR(lambda_profile(prof, 1.0 - 1e-9).d1, 0.0, 1e-7);
    EXPECT_NEAR(lambda_profile(prof, 0.5 + 1e-9).d2, 0.0, 1e-6);
    EXPECT_NEAR(lambda_profile(prof, 1.0 - 1e-9).d2, 0.0, 1e-6);
  }
}

TEST(Profiles, ChiPlateauAndDerivativeBound) {
  double sup = 0.0;
  for (int i = -200000; i <= 200000; ++i) {
    const double tau = 8.0 * i / 200000.0;
    const Taylor3 c = chi_profile(tau);
    if (std::fabs(tau) <= kChiPlateau) EXPECT_EQ(c.f, 1.0);
    if (std::fabs(tau) >= kChiSupport) EXPECT_EQ(c.f, 0.0);
    EXPECT_EQ(c.f, chi_profile(-tau).f);
    sup = std::max(sup, std::fabs(c.d1));
  }
  EXPECT_LT(sup, 0.5);
  EXPECT_NEAR(sup, 15.0 / 32.0, 1e-6);
}

TEST(Profiles, SincIsSmoothThroughZero) {
  for (double t : {-1e-4, -1e-7, 0.0, 1e-7, 1e-4, 0.2}) {
    const Jet j = sinc2pi(Jet::variable(t, 0));
    const double x = 2 * std::numbers::pi * t;
    const double ref = t == 0.0 ? 1.0 : std::sin(x) / x;
    EXPECT_NEAR(j.v, ref, 1e-14);
  }
  const double h = 1e-5, t = 0.01;
  const double fd = (sinc2pi(Jet(t + h)).v - sinc2pi(Jet(t - h)).v) / (2 * h);
  EXPECT_NEAR(sinc2pi(Jet::variable(t, 0)).g[0], fd, 1e-8);
}

TEST(ScalarField, ArithmeticAndFreezing) {
  const ScalarField z = ScalarField::coordinate(0), th = ScalarField::coordinate(1);
  const ScalarField f = z * z + ScalarField::from_function([](const Point& p) { return sin(Jet::variable(p[1], 1)); });
  const Point p{0.3, 0.7, 0, 0};
  EXPECT_NEAR(f(p), 0.09 + std::sin(0.7), 1e-15);
  EXPECT_NEAR(f.jet(p).g[1], std::cos(0.7), 1e-15);
  const ScalarField g = f.frozen(0, 0.0);
  EXPECT_NEAR(g(p), std::sin(0.7), 1e-15);
  EXPECT_EQ(g.jet(p).g[0], 0.0);
  EXPECT_TRUE((z * ScalarField()).is_zero());
  EXPECT_NE((z / th).expr(), nullptr);
}

TEST(ScalarField, RemovableDivision) {
  // (sin z) z / z -> sin z across z = 0
  const ScalarField c = ScalarField::from_expr(Expr::parse("sin(z)*(z+z^2)", kNames));
  const ScalarField r = ScalarField::from_expr(Expr::parse("z + z^2", kNames));
  for (double z : {-0.3, -1e-7, 0.0, 1e-9, 0.2}) {
    const Point p{z, 0, 0, 0};
    const Jet q = divide_removable(c.jet(p), r.jet(p), 0);
    EXPECT_NEAR(q.v, std::sin(z), 1e-13);
    EXPECT_NEAR(q.g[0], std::cos(z), 1e-6);
  }
}
