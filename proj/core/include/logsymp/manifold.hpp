#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "logsymp/field.hpp"
#include "logsymp/profiles.hpp"

namespace logsymp {

struct AxisSpec {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  bool periodic = false;

  double period() const { return hi - lo; }
};

/// A coordinate chart. Adapted charts carry Z as slices {x0 = const} of the
/// first coordinate.
struct ChartSpec {
  std::string name;
  int dim = 0;
  std::vector<AxisSpec> axes;
  bool adapted = false;
};

/// One connected component of the singular locus, the slice {x0 = t0} of the
/// principal chart. In the b-frame e_0 = rho_def * d/dx0 the restricted Euler
/// field is xi_Z = sign * e_0.
struct ZComponent {
  std::string name;
  double t0 = 0.0;
  double sign = 1.0;
  /// rho_def / (x0 - t0): smooth, nonvanishing near this component.
  ScalarField defining_ratio;
};

/// A coordinate sub-box of the principal chart used as a homology cycle.
struct Cycle {
  std::string id;
  int degree = 0;
  /// Free coordinates (in orientation order) and their parameter ranges.
  std::vector<int> free_axes;
  std::vector<AxisSpec> ranges;
  /// Values of the non-free coordinates.
  Point anchor{};
  double orientation = 1.0;
  /// Index into BManifoldSpec::z_components when the cycle lies inside Z.
  int z_component = -1;
};

/// Map from a cap chart into the principal chart, with jets for the Jacobian.
struct CapChart {
  ChartSpec chart;
  std::function<std::array<Jet, kMaxDim>(const Point&)> to_principal;
  double r_max = 0.3;
};

struct GridSpec {
  int t_points = 129;
  int periodic_points = 64;
};

struct Involution {
  std::function<Point(const Point&)> map;
  /// Orientation of the deck map on the b-frame index 0 (t -> -t gives -1 on
  /// x0 while e^0 = dt/t is preserved).
  std::string description;
};

/// A catalog b-manifold (M, Z) with all the data the constructions need.
struct BManifoldSpec {
  std::string name;
  int dim = 0;
  ChartSpec principal;
  std::vector<CapChart> caps;
  std::vector<ZComponent> z_components;

  /// Defining function of Z in the principal chart (function of x0 only).
  ScalarField defining;
  /// Collar radius in x0 units: lambda = L(|x0 - t0| / collar_radius).
  double collar_radius = 1.0;
  LambdaProfile lambda_profile = LambdaProfile::Quintic;
  /// Catalog-units length of one normalization unit of the bump chi:
  /// chi_catalog(t) = chi_profile(t / chi_scale).
  double chi_scale = 0.15;

  std::vector<int> betti_M;
  std::vector<int> betti_Z;
  bool orientable = true;

  std::vector<Cycle> cycles;
  /// Cycle ids generating H_k(M; R) and H_k(Z; R), indexed by k.
  std::vector<std::vector<std::string>> homology_M;
  std::vector<std::vector<std::string>> homology_Z;

  /// Present for quotient entries represented on a double cover.
  std::optional<Involution> involution;
  int covering_degree = 1;

  GridSpec grid;

  std::vector<std::string> coordinate_names() const;
  const Cycle& cycle(const std::string& id) const;
  /// Index of the Z component whose collar contains x0, or -1.
  int collar_component(double x0) const;
};

/// Names: "s2", "t2", "s2xt2", "rp2".
BManifoldSpec catalog_lookup(const std::string& name);
std::vector<std::string> catalog_names();

/// Same manifold with a different admissible distance-function profile.
BManifoldSpec with_lambda_profile(BManifoldSpec spec, LambdaProfile profile);

struct LambdaValue {
  double value = 0.0;
  double derivative = 0.0;  ///< d lambda / d x0
  /// dt/t coefficient of d log(lambda) in the b-coframe (finite on Z).
  double dlog_coefficient = 0.0;
};

/// Distance function at a chart point. On Z the value is 0 and the b-form
/// coefficient is still finite.
LambdaValue lambda_eval(const BManifoldSpec& spec, const Point& p);
/// log(lambda); throws SingularPoint on Z.
double log_lambda(const BManifoldSpec& spec, const Point& p);

/// The dt/t coefficient of d log(lambda) as a field, optionally restricted to
/// one Z component (the component-wise decomposition of sigma).
ScalarField dlog_lambda_coefficient(const BManifoldSpec& spec, int component = -1);

/// chi rescaled to the collar of the given component, as a field of x0.
ScalarField chi_field(const BManifoldSpec& spec, int component);
/// chi in catalog units and its derivatives with respect to x0.
Taylor3 chi_catalog(const BManifoldSpec& spec, double t);

/// Regular sample grid of the principal chart. Open axes exclude their end
/// points; each Z slice is hit exactly.
std::vector<Point> chart_grid(const BManifoldSpec& spec, const GridSpec& grid);
std::vector<Point> chart_grid(const BManifoldSpec& spec);
/// Samples of a Z component (x0 fixed).
std::vector<Point> z_grid(const BManifoldSpec& spec, int component, const GridSpec& grid);
std::vector<Point> z_grid(const BManifoldSpec& spec, int component);
/// Axis sample values used by chart_grid.
std::vector<double> axis_samples(const BManifoldSpec& spec, int axis, const GridSpec& grid);

}  // namespace logsymp
