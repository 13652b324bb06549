#pragma once

#include <optional>
#include <string>
#include <vector>

#include "logsymp/deformations.hpp"

namespace logsymp {

/// wedge^n w = h_w mu near one Z component, where mu = (1/t) wedge^n pi and
/// t = x0 - t0 is the collar coordinate. Normalization units: one unit is
/// `scale` catalog units, so the box [-2, 2] x Z is |t| <= 2 scale.
struct PfaffianData {
  BManifoldSpec spec;
  int component = 0;
  BMultiVector w;  ///< coordinate frame
  ScalarField h;
  double scale = 0.0;
  double box = 0.0;

  bool monotone = true;  ///< dh/dt > 0 on the box
  double min_dh_dt = 0.0;
  Point monotone_witness{};
  bool close = true;  ///< |h - t| < scale on the box
  double max_gap = 0.0;
  Point close_witness{};

  bool admissible() const { return monotone && close; }
};

/// Throws InvalidStructure when mu vanishes on the sample grid.
PfaffianData pfaffian_ratio(const BMultiVector& w, const LogSymplecticStructure& base, int component = 0);

enum class LocusClass { Single, MultiComponent, NonTransverse, Empty };
const char* to_string(LocusClass c);

struct FiberRoots {
  Point x{};                   ///< fiber base point (x0 = t0)
  std::vector<double> t;       ///< roots in collar coordinates, increasing
  std::vector<double> slope;   ///< dh/dt at each root
};

struct LocusReport {
  int component = 0;
  double scale = 0.0;
  std::vector<FiberRoots> fibers;
  int min_roots = 0;
  int max_roots = 0;
  int components = 0;
  bool transverse = true;
  double min_slope = 0.0;
  Point witness{};  ///< point of the smallest |dh/dt| among roots
  double g_min = 0.0, g_max = 0.0, g_mean = 0.0;
  LocusClass classification = LocusClass::Empty;
};

/// Roots of h(., x) on |t| < collar_radius: sign scan on `samples` points,
/// bisection to 1e-12, two Newton steps.
std::vector<double> fiber_roots(const ScalarField& h, const Point& x, double t0, double radius, int samples = 129);

LocusReport detect_singular_locus(const BMultiVector& w, const LogSymplecticStructure& base, int component = 0);

struct NormalizationResult {
  PfaffianData data;
  ScalarField g;     ///< height of Z_w over Z (independent of x0)
  ChartMap phi;      ///< (t, x) -> (t - chi(t) g(x), x)
  std::function<Point(const Point&)> phi_inverse;
  double min_dphi_dt = 0.0;
  Point monotone_witness{};

  BMultiVector w_norm;           ///< phi_* w, coordinate frame (after pushforward)
  std::vector<ScalarField> a;    ///< a_i (i = 1..n-1 at index i-1), division route
  double tangency_defect = 0.0;  ///< scaled sup of d/dt-leg coefficients on Z
  double route_gap = 0.0;        ///< division route versus s-integral route
  double a_sup = 0.0;
  LocusReport locus;
};

/// Solves h(g(x), x) = 0 and assembles phi. Throws Inadmissible when the data
/// is not admissible or no root lies in the box.
NormalizationResult build_Phi(const PfaffianData& data, const LogSymplecticStructure& base);

/// Adds w_norm, the a-coefficients and the two consistency measures. Throws
/// InvalidStructure for a non-Poisson w and TangencyFailure when phi_* w is
/// not tangent to Z.
NormalizationResult pushforward_and_tangency(NormalizationResult r, const LogSymplecticStructure& base);

/// a_i at a point of the collar by the s-integral (33-point Gauss-Legendre).
double a_integral(const NormalizationResult& r, int i, const Point& y);

/// Every step for each Z component in turn; `result.back().w_norm` is the
/// normalized structure.
std::vector<NormalizationResult> normalize(const BMultiVector& w, const LogSymplecticStructure& base);

/// Pushforward of w along (t, x) -> (t + chi(t) shift(x), x), which moves Z
/// to the graph t = shift(x). First derivatives only. Throws Rejected when
/// shift depends on t or the map is not monotone in t.
BMultiVector shift_locus(const BMultiVector& w, const ScalarField& shift, const BManifoldSpec& spec, int component = 0);

struct BNorms {
  std::optional<double> c0_b;  ///< sup of b-frame coefficients (tangent input only)
  double c0_smooth = 0.0;
  double c1_smooth = 0.0;
};

/// Grid sups over the principal chart. With `b_norm`, throws Rejected for a
/// sigma that is not tangent to Z.
BNorms b_norms(const BMultiVector& sigma, const BManifoldSpec& spec, bool b_norm = true);

struct ContinuityReport {
  double scale = 0.0;    ///< perturbation size (for sweeps)
  double delta_a = 0.0;  ///< sup |a~ - a| on |t| <= scale unit
  double delta_g = 0.0;
  double delta_w = 0.0;  ///< C1 norm of w~ - w
  double ratio = 0.0;    ///< delta_a / (delta_g + delta_w); 0 for no perturbation
};

ContinuityReport continuity_experiment(const BMultiVector& w, const BMultiVector& w_perturbed,
                                       const LogSymplecticStructure& base);

struct ContinuitySweep {
  std::vector<ContinuityReport> rows;
  double constant = 0.0;  ///< largest ratio
  /// largest / smallest ratio over rows where a actually moved (delta_a above
  /// rounding); 1 when a is unchanged in every row
  double spread = 0.0;
};

/// w + s * direction for each s in `scales`.
ContinuitySweep continuity_sweep(const BMultiVector& w, const BMultiVector& direction, const std::vector<double>& scales,
                                 const LogSymplecticStructure& base);

/// For entries given on a double cover: sup |g(gamma x) + g(x)| over Z and
/// sup |phi(gamma x) - gamma(phi(x))| over the collar box.
std::pair<double, double> equivariance_defect(const NormalizationResult& r);

enum class Example3 { Plateau, ThreeCircles };

/// h_eps(z) z d_th ^ d_z on s2 with h_eps = 1 for |z| >= eps. Plateau: h_eps
/// vanishes on [-eps/2, eps/2]. ThreeCircles: h_eps vanishes linearly at
/// +-eps/2 only.
BMultiVector example3_bivector(const BManifoldSpec& s2, double eps, Example3 kind);

/// CSV rows "x1,...,t,h" along sampled fibers.
std::string fiber_trace_csv(const PfaffianData& d, int fibers = 4, int samples = 129);

}  // namespace logsymp
