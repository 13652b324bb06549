#pragma once

#include <string>
#include <vector>

#include "logsymp/catalog_forms.hpp"
#include "logsymp/forms.hpp"
#include "logsymp/manifold.hpp"

namespace logsymp {

/// omega = alpha + sigma(theta) with alpha smooth and closed, theta closed on Z.
struct MazzeoMelroseSplit {
  BForm alpha;
  ZForm theta;
};

struct ClassCoordinates {
  std::vector<double> m_part;  ///< periods of alpha over the H_k(M) cycles
  std::vector<double> z_part;  ///< periods of theta over the H_{k-1}(Z) cycles
};

/// A map between catalog b-manifolds in principal-chart coordinates. Both
/// charts must share the same defining function (catalog maps do).
struct BMapSpec {
  std::string name;
  BManifoldSpec source;
  BManifoldSpec target;
  ChartMap map;
};

/// Identity of a catalog entry, and the double cover s2 -> rp2.
BMapSpec identity_map(const BManifoldSpec& spec);
BMapSpec covering_map(const BManifoldSpec& quotient);

/// Throws Rejected unless the preimage of Z_target is exactly Z_source on the
/// source grid.
void require_bmap(const BMapSpec& map);

/// Sup-norm of d(a) on the coarse check grid (0 for top-degree forms).
double closedness_residual(const BForm& a, const BManifoldSpec& spec);

/// iota_{xi_Z} omega restricted to each component, xi_Z the Euler field of
/// that component's local defining function.
ZForm residue(const BForm& omega, const BManifoldSpec& spec);

/// sigma(theta) = dlog(lambda) ^ p^*(theta), one collar term per component.
/// Throws NotClosed when theta is not closed on Z.
BForm sigma(const ZForm& theta, const BManifoldSpec& spec);

/// Mazzeo-Melrose decomposition of a closed b-form.
MazzeoMelroseSplit split(const BForm& omega, const BManifoldSpec& spec);

/// `tol` is the period quadrature tolerance; loosen it for tabulated or
/// piecewise smooth forms, whose quadrature converges slowly.
ClassCoordinates class_coordinates(const BForm& omega, const BManifoldSpec& spec, double tol = 1e-12);

int bcohomology_dim(const BManifoldSpec& spec, int k);
/// Equal to the b-cohomology dimension for log symplectic structures.
int poisson_cohomology_dim(const BManifoldSpec& spec, int k);

struct VolumeRow {
  double epsilon = 0.0;
  double value = 0.0;  ///< F(epsilon) = integral over {lambda >= epsilon}
};

struct VolumeReport {
  double volume = 0.0;       ///< fitted V
  double log_slope = 0.0;    ///< fitted c in F(eps) = V + c log(eps)
  double profile_shift = 0.0;  ///< |V - V'| for a second admissible lambda
  std::vector<VolumeRow> rows;
};

/// Regularized volume of a top-degree b-form on an oriented catalog entry.
/// Throws NonConvergence when the fitted log slope exceeds 1e-6 and
/// OrientationMismatch on non-orientable entries.
VolumeReport regularized_volume(const BForm& omega, const BManifoldSpec& spec, bool check_profile = true);
/// Regularized volume of the pullback of omega along a b-map.
VolumeReport regularized_volume(const BForm& omega, const BMapSpec& map, bool check_profile = true);

/// Rows "epsilon,F,V,c" with a header line.
std::string volume_csv(const VolumeReport& report);

struct FunctorialityResult {
  bool holds = false;
  double volume = 0.0;
};

/// Tests that the regularized volume of i^*(omega) vanishes.
FunctorialityResult functoriality_check(const BForm& omega, const BMapSpec& map);

/// zeta(w) = w + d_pi(h(w)) + h(d_pi(w)) with h(w) = iota_{p^* theta}(chi w),
/// all in the coordinate frame. Throws TangencyFailure when the result is not
/// tangent to Z.
BMultiVector tangency_homotopy(const BMultiVector& w, const BMultiVector& pi, const BManifoldSpec& spec);

}  // namespace logsymp
