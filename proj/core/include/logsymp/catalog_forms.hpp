#pragma once

#include <string>
#include <vector>

#include "logsymp/forms.hpp"
#include "logsymp/manifold.hpp"

namespace logsymp {

/// A differential form on Z, one part per component. Each part is stored as a
/// form on M with no e^0 legs and no dependence on x0, i.e. as its pullback
/// along the collar projection p restricted to that component's collar.
struct ZForm {
  int dim = 0;  ///< dimension of M
  int degree = 0;
  std::vector<BForm> parts;

  static ZForm zero(const BManifoldSpec& spec, int degree);
  /// The same form on every component.
  static ZForm uniform(const BManifoldSpec& spec, const BForm& part);

  ZForm operator-() const;
  friend ZForm operator+(const ZForm& a, const ZForm& b);
  friend ZForm operator*(double s, const ZForm& a);
};

/// Closed smooth forms representing a basis of H^k(M; R).
std::vector<BForm> cohomology_basis_M(const BManifoldSpec& spec, int k);
/// Closed forms representing a basis of H^k(Z; R).
std::vector<ZForm> cohomology_basis_Z(const BManifoldSpec& spec, int k);

/// The catalog log symplectic form omega (b-frame):
///   s2, rp2: dz/z ^ dth;  t2: inverse of sin(2 pi s) ds ^ du;
///   s2xt2: dz/z ^ dth + dth1 ^ dth2.
BForm base_omega(const BManifoldSpec& spec);

/// Period of a k-form over a k-cycle of M. Cycles crossing Z transversally
/// accept only forms that are smooth there (Rejected otherwise).
double cycle_integrate(const BManifoldSpec& spec, const BForm& form, const std::string& cycle_id,
                       double tol = 1e-12);
/// Period of a form on Z over a cycle inside Z.
double cycle_integrate(const BManifoldSpec& spec, const ZForm& form, const std::string& cycle_id,
                       double tol = 1e-12);

std::vector<double> periods_M(const BManifoldSpec& spec, const BForm& form, double tol = 1e-12);
std::vector<double> periods_Z(const BManifoldSpec& spec, const ZForm& form, double tol = 1e-12);

/// For quotient entries: every coefficient must be invariant under the deck
/// involution (in the b-frame the antipodal map preserves e^0 and e^1).
/// Throws NotInvariant with the offending point; no-op without involution.
void require_invariant(const BManifoldSpec& spec, const Coefficients& c, double tol = 1e-10);

}  // namespace logsymp
