#pragma once

#include <functional>
#include <vector>

#include "logsymp/manifold.hpp"

namespace logsymp {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);
/// Composite Gauss-Legendre: `panels` equal panels of `n` nodes each.
QuadratureRule composite_gauss_legendre(int panels, int n, double a, double b);

/// Adaptive Gauss-Kronrod (7/15) integral of f over [a, b].
double integrate_interval(const std::function<double(double)>& f, double a, double b, double tol = 1e-12,
                          double* error = nullptr);
/// Trapezoid rule refined until converged; spectrally accurate for smooth
/// periodic integrands over a full period.
double integrate_periodic(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);
/// Integral over a box. One axis: adaptive rule. Several: tensor product of
/// trapezoid (periodic axes) and composite Gauss-Legendre rules, refined
/// uniformly until two levels agree.
double integrate_box(const std::function<double(const std::vector<double>&)>& f, const std::vector<AxisSpec>& box,
                     double tol = 1e-12);

}  // namespace logsymp
