#pragma once

#include <string>
#include <vector>

#include "logsymp/cohomology.hpp"

namespace logsymp {

/// A closed nondegenerate b-two-form together with its Poisson bivector.
/// Only constructed through make(), which validates everything.
struct LogSymplecticStructure {
  BManifoldSpec spec;
  BForm omega;
  BMultiVector pi;
  MazzeoMelroseSplit split;

  /// Throws NotClosed, Degeneracy, NotInvariant or InvalidStructure.
  static LogSymplecticStructure make(const BManifoldSpec& spec, const BForm& omega);
  /// The catalog structure of an entry.
  static LogSymplecticStructure catalog(const BManifoldSpec& spec);
};

struct ZVectorSample {
  int component = 0;
  Point x{};
  std::array<double, kMaxDim> v{};  ///< b-frame components, v[0] = 0
};

struct CosymplecticStructure {
  ZForm eta;
  ZForm theta;
  std::vector<ZVectorSample> V;
  double min_volume = 0.0;  ///< smallest |theta ^ eta^{n-1}| on the Z grid
};

/// epsilon pairs with cohomology_basis_M(spec, 2), delta with
/// cohomology_basis_Z(spec, 1).
struct DeformationParams {
  std::vector<double> epsilon;
  std::vector<double> delta;
};

/// Throws Inadmissible when the lengths do not match the Betti numbers.
void require_params(const BManifoldSpec& spec, const DeformationParams& params);
BForm varpi(const BManifoldSpec& spec, const std::vector<double>& epsilon);
ZForm gamma(const BManifoldSpec& spec, const std::vector<double>& delta);

/// Pullback of a form on M to each Z component (legs along Z only, x0 frozen).
ZForm restrict_to_Z(const BForm& a, const BManifoldSpec& spec);

/// omega + varpi + dlog(lambda) ^ p^*(gamma). Throws Degeneracy ("deformation
/// too large") with the witness point when the result is degenerate.
LogSymplecticStructure deform(const LogSymplecticStructure& base, const BForm& varpi, const ZForm& gamma);

BForm omega_family(const LogSymplecticStructure& base, const DeformationParams& params);

CosymplecticStructure cosymplectic_extract(const LogSymplecticStructure& base);

/// X = -pi^sharp(dlog(lambda) + df); f shifts lambda to e^f lambda.
BMultiVector modular_vector_field(const LogSymplecticStructure& base,
                                  const ScalarField& log_factor = ScalarField());

/// Largest |X|_Z - V| over the Z-grid samples of the cosymplectic structure.
double modular_mismatch(const LogSymplecticStructure& base, const CosymplecticStructure& cs);

/// (epsilon, delta) with [omega'] = [omega_{epsilon, delta}].
/// `tol` is passed to class_coordinates for omega_prime.
DeformationParams classify(const BForm& omega_prime, const LogSymplecticStructure& base, double tol = 1e-12);

/// Grid sup over unit b-vectors of |pi^sharp(omega'^flat(V)) - V|, with the
/// diagonal metric in the b-frame.
double convexity_norm(const BForm& omega_prime, const LogSymplecticStructure& base);
/// Norms along (1 - t) omega + t omega' at `samples` evenly spaced interior t.
std::vector<double> segment_norms(const BForm& omega_prime, const LogSymplecticStructure& base, int samples = 11);

struct FoliationComponent {
  std::string component;
  double c = 0.0;     ///< iota_{xi_Z} vartheta, constant on the component
  bool leaf = false;  ///< c != 0: the component is a leaf
  double min_tangential = 0.0;
  /// Coefficients of vartheta restricted to Z when constant there.
  std::vector<double> slope;
};

/// Throws NotClosed when c is not constant on a component.
std::vector<FoliationComponent> b_one_form_foliation(const BForm& vartheta, const BManifoldSpec& spec);

}  // namespace logsymp
