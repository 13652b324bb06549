#include "logsymp/profiles.hpp"

#include <cmath>
#include <numbers>

namespace logsymp {

Taylor3 operator*(const Taylor3& a, const Taylor3& b) {
  return {a.f * b.f, a.d1 * b.f + a.f * b.d1, a.d2 * b.f + 2.0 * a.d1 * b.d1 + a.f * b.d2,
          a.d3 * b.f + 3.0 * a.d2 * b.d1 + 3.0 * a.d1 * b.d2 + a.f * b.d3};
}

Taylor3 operator/(const Taylor3& a, const Taylor3& b) {
  // r = a / b, so a = r b; solve order by order.
  Taylor3 r;
  r.f = a.f / b.f;
  r.d1 = (a.d1 - r.f * b.d1) / b.f;
  r.d2 = (a.d2 - 2.0 * r.d1 * b.d1 - r.f * b.d2) / b.f;
  r.d3 = (a.d3 - 3.0 * r.d2 * b.d1 - 3.0 * r.d1 * b.d2 - r.f * b.d3) / b.f;
  return r;
}

Taylor3 smoothstep5(double u) {
  if (u <= 0.0) return {0.0, 0.0, 0.0, 0.0};
  if (u >= 1.0) return {1.0, 0.0, 0.0, 0.0};
  const double u2 = u * u, u3 = u2 * u;
  return {u3 * (10.0 - 15.0 * u + 6.0 * u2), 30.0 * u2 * (1.0 - u) * (1.0 - u),
          60.0 * u * (1.0 - u) * (1.0 - 2.0 * u), 60.0 * (1.0 - 6.0 * u + 6.0 * u2)};
}

Taylor3 smoothstep7(double u) {
  if (u <= 0.0) return {0.0, 0.0, 0.0, 0.0};
  if (u >= 1.0) return {1.0, 0.0, 0.0, 0.0};
  const double u2 = u * u, u3 = u2 * u, u4 = u3 * u;
  const double f = u4 * (35.0 - 84.0 * u + 70.0 * u2 - 20.0 * u3);
  const double d1 = 140.0 * u3 * std::pow(1.0 - u, 3);
  const double d2 = 420.0 * u2 * std::pow(1.0 - u, 2) * (1.0 - 2.0 * u);
  const double d3 = 840.0 * u * (1.0 - u) * (1.0 - 5.0 * u + 5.0 * u2);
  return {f, d1, d2, d3};
}

const char* to_string(LambdaProfile p) {
  switch (p) {
    case LambdaProfile::Identity: return "identity";
    case LambdaProfile::Quintic: return "quintic";
    case LambdaProfile::Septic: return "septic";
  }
  return "?";
}

Taylor3 lambda_profile(LambdaProfile p, double s) {
  if (p == LambdaProfile::Identity) {
    if (s >= 1.0) return {1.0, 0.0, 0.0, 0.0};
    return {s, 1.0, 0.0, 0.0};
  }
  if (s <= 0.5) return {s, 1.0, 0.0, 0.0};
  if (s >= 1.0) return {1.0, 0.0, 0.0, 0.0};
  // L(s) = s + S(u) (1 - s), u = 2s - 1.
  const double u = 2.0 * s - 1.0;
  const Taylor3 S = p == LambdaProfile::Quintic ? smoothstep5(u) : smoothstep7(u);
  const double w = 1.0 - s;
  return {s + S.f * w, 1.0 - S.f + 2.0 * S.d1 * w, 4.0 * S.d2 * w - 4.0 * S.d1,
          8.0 * S.d3 * w - 12.0 * S.d2};
}

Taylor3 dlog_profile(LambdaProfile p, double s) {
  if (s <= 0.5) return {1.0, 0.0, 0.0, 0.0};
  if (s >= 1.0) return {0.0, 0.0, 0.0, 0.0};
  const Taylor3 L = lambda_profile(p, s);
  const Taylor3 id{s, 1.0, 0.0, 0.0};
  const Taylor3 dL{L.d1, L.d2, L.d3, 0.0};  // d3 of L' not needed beyond second order
  Taylor3 q = (id * dL) / L;
  q.d3 = 0.0;
  return q;
}

Taylor3 chi_profile(double tau) {
  const double a = std::fabs(tau);
  if (a <= kChiPlateau) return {1.0, 0.0, 0.0, 0.0};
  if (a >= kChiSupport) return {0.0, 0.0, 0.0, 0.0};
  const double width = kChiSupport - kChiPlateau;
  // chi(tau) = 1 - S(u) = S(1 - u) with u = (|tau| - 2) / 4; the second form
  // keeps chi >= 0 under rounding. Odd derivatives pick up sign(tau).
  const Taylor3 S = smoothstep5(1.0 - (a - kChiPlateau) / width);
  const double sg = tau < 0.0 ? -1.0 : 1.0;
  return {S.f, -sg * S.d1 / width, S.d2 / (width * width), -sg * S.d3 / (width * width * width)};
}

Jet smoothstep(const Jet& u) {
  const Taylor3 s = smoothstep5(u.v);
  return chain(u, s.f, s.d1, s.d2);
}

Jet sinc2pi(const Jet& t) {
  const double x = 2.0 * std::numbers::pi * t.v;
  double f, d1, d2;  // derivatives with respect to x
  if (std::fabs(x) < 1e-3) {
    const double x2 = x * x;
    f = 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    d1 = -x / 3.0 + x2 * x / 30.0;
    d2 = -1.0 / 3.0 + x2 / 10.0;
  } else {
    const double s = std::sin(x), c = std::cos(x);
    f = s / x;
    d1 = (x * c - s) / (x * x);
    d2 = -s / x - 2.0 * c / (x * x) + 2.0 * s / (x * x * x);
  }
  const double k = 2.0 * std::numbers::pi;
  return chain(t, f, k * d1, k * k * d2);
}

}  // namespace logsymp
