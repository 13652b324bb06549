#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace logsymp {

/// Largest chart dimension handled by the toolkit (S^2 x T^2).
inline constexpr int kMaxDim = 4;

using Point = std::array<double, kMaxDim>;

/// Second-order forward-mode dual number over up to kMaxDim chart coordinates.
///
/// Carries the value, the gradient and the (symmetric) Hessian. Fields whose
/// second derivatives are not available (e.g. coefficients of an exterior
/// derivative) report NaN Hessian entries, so misuse surfaces as NaN rather
/// than as a silently wrong number.
struct Jet {
  double v = 0.0;
  std::array<double, kMaxDim> g{};
  std::array<std::array<double, kMaxDim>, kMaxDim> h{};

  Jet() = default;
  explicit Jet(double value) : v(value) {}

  static Jet constant(double value) { return Jet(value); }

  static Jet variable(double value, int index) {
    Jet j(value);
    j.g[index] = 1.0;
    return j;
  }

  /// Marks the second derivatives as unavailable.
  void drop_hessian() {
    for (auto& row : h) row.fill(std::nan(""));
  }

  bool has_hessian() const { return !std::isnan(h[0][0]); }
};

/// Applies a univariate function given its value and first two derivatives at u.v.
inline Jet chain(const Jet& u, double f, double df, double d2f) {
  Jet r(f);
  for (int i = 0; i < kMaxDim; ++i) r.g[i] = df * u.g[i];
  for (int i = 0; i < kMaxDim; ++i)
    for (int j = 0; j < kMaxDim; ++j) r.h[i][j] = d2f * u.g[i] * u.g[j] + df * u.h[i][j];
  return r;
}

inline Jet operator+(const Jet& a, const Jet& b) {
  Jet r(a.v + b.v);
  for (int i = 0; i < kMaxDim; ++i) {
    r.g[i] = a.g[i] + b.g[i];
    for (int j = 0; j < kMaxDim; ++j) r.h[i][j] = a.h[i][j] + b.h[i][j];
  }
  return r;
}

inline Jet operator-(const Jet& a) {
  Jet r(-a.v);
  for (int i = 0; i < kMaxDim; ++i) {
    r.g[i] = -a.g[i];
    for (int j = 0; j < kMaxDim; ++j) r.h[i][j] = -a.h[i][j];
  }
  return r;
}

inline Jet operator-(const Jet& a, const Jet& b) { return a + (-b); }

inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r(a.v * b.v);
  for (int i = 0; i < kMaxDim; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
  for (int i = 0; i < kMaxDim; ++i)
    for (int j = 0; j < kMaxDim; ++j)
      r.h[i][j] = a.h[i][j] * b.v + a.v * b.h[i][j] + a.g[i] * b.g[j] + a.g[j] * b.g[i];
  return r;
}

inline Jet operator*(double s, const Jet& a) {
  Jet r(s * a.v);
  for (int i = 0; i < kMaxDim; ++i) {
    r.g[i] = s * a.g[i];
    for (int j = 0; j < kMaxDim; ++j) r.h[i][j] = s * a.h[i][j];
  }
  return r;
}

inline Jet operator*(const Jet& a, double s) { return s * a; }
inline Jet operator+(const Jet& a, double s) { Jet r = a; r.v += s; return r; }
inline Jet operator+(double s, const Jet& a) { return a + s; }
inline Jet operator-(const Jet& a, double s) { Jet r = a; r.v -= s; return r; }
inline Jet operator-(double s, const Jet& a) { return (-a) + s; }

inline Jet reciprocal(const Jet& a) {
  const double inv = 1.0 / a.v;
  return chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
inline Jet operator/(const Jet& a, double s) { return (1.0 / s) * a; }
inline Jet operator/(double s, const Jet& a) { return s * reciprocal(a); }

inline Jet& operator+=(Jet& a, const Jet& b) { a = a + b; return a; }
inline Jet& operator-=(Jet& a, const Jet& b) { a = a - b; return a; }
inline Jet& operator*=(Jet& a, const Jet& b) { a = a * b; return a; }

inline Jet sin(const Jet& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return chain(a, s, c, -s);
}
inline Jet cos(const Jet& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return chain(a, c, -s, -c);
}
inline Jet tan(const Jet& a) {
  const double t = std::tan(a.v), sec2 = 1.0 + t * t;
  return chain(a, t, sec2, 2.0 * t * sec2);
}
inline Jet exp(const Jet& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}
inline Jet log(const Jet& a) {
  const double inv = 1.0 / a.v;
  return chain(a, std::log(a.v), inv, -inv * inv);
}
inline Jet sqrt(const Jet& a) {
  const double s = std::sqrt(a.v);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}
inline Jet abs(const Jet& a) {
  // Derivative taken as sign(v); the kink at 0 is left to the caller.
  const double sg = a.v < 0.0 ? -1.0 : 1.0;
  return chain(a, std::fabs(a.v), sg, 0.0);
}

/// Real power with constant exponent.
inline Jet pow(const Jet& a, double p) {
  if (p == 0.0) return Jet(1.0);
  const double rounded = std::round(p);
  if (rounded == p && p > 0.0 && p <= 8.0) {
    Jet r = a;
    for (int k = 1; k < static_cast<int>(p); ++k) r = r * a;
    return r;
  }
  const double f = std::pow(a.v, p);
  const double df = p * std::pow(a.v, p - 1.0);
  const double d2f = p * (p - 1.0) * std::pow(a.v, p - 2.0);
  return chain(a, f, df, d2f);
}

}  // namespace logsymp
