#pragma once

#include "logsymp/jet.hpp"

namespace logsymp {

/// Value and first three derivatives of a univariate function.
struct Taylor3 {
  double f = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
};

Taylor3 operator*(const Taylor3& a, const Taylor3& b);
Taylor3 operator/(const Taylor3& a, const Taylor3& b);

/// Quintic smoothstep 10u^3 - 15u^4 + 6u^5, clamped to [0, 1] outside (0, 1).
Taylor3 smoothstep5(double u);
/// Septic smoothstep 35u^4 - 84u^5 + 70u^6 - 20u^7, clamped.
Taylor3 smoothstep7(double u);

/// Interpolation used by a distance function between the |t| plateau and the
/// constant plateau.
enum class LambdaProfile {
  Identity,   ///< L(s) = s up to s = 1 (admissible when the collar fills M \ Z)
  Quintic,    ///< quintic smoothstep blend on (1/2, 1)
  Septic,     ///< septic smoothstep blend on (1/2, 1)
};

const char* to_string(LambdaProfile p);

/// Normalized distance profile L(s) for s = |t| / rho >= 0: L(s) = s on
/// [0, 1/2], L(s) = 1 on [1, inf), monotone and C^2 in between.
Taylor3 lambda_profile(LambdaProfile p, double s);

/// q(s) = s L'(s) / L(s): the dt/t coefficient of d log(lambda). Equal to 1 on
/// [0, 1/2] and 0 on [1, inf).
Taylor3 dlog_profile(LambdaProfile p, double s);

/// Bump function in the normalization units of the singular-locus construction:
/// chi = 1 on [-2, 2], chi = 0 outside (-6, 6), sup |chi'| = 15/32 < 1/2, even.
Taylor3 chi_profile(double tau);

inline constexpr double kChiPlateau = 2.0;
inline constexpr double kChiSupport = 6.0;

/// Jet of the univariate function u -> smoothstep5(u).
Jet smoothstep(const Jet& u);

/// sin(2 pi t) / (2 pi t), smooth through t = 0.
Jet sinc2pi(const Jet& t);

}  // namespace logsymp
