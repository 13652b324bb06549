#pragma once

#include <optional>
#include <string>
#include <vector>

#include "logsymp/cohomology.hpp"

namespace logsymp {

/// Path omega_t = (1 - t) omega0 + t omega1 with d(primitive) = omega1 - omega0.
struct MoserProblem {
  BManifoldSpec spec;
  BForm omega0;
  BForm omega1;
  BForm primitive;

  BForm at(double t) const;
};

/// Checks the primitive identity (< 1e-7) and nondegeneracy of the path at
/// t = 0, 0.1, ..., 1. Throws NoPrimitive or Degeneracy.
MoserProblem make_moser_problem(const BManifoldSpec& spec, const BForm& omega0, const BForm& omega1,
                                const BForm& primitive);

struct PrimitiveOptions {
  GridSpec table{257, 256};  ///< homotopy operator tabulation
  double class_tol = 1e-12;  ///< period quadrature tolerance for the class check
};

/// Primitive of omega1 - omega0. A carried primitive (one known symbolically
/// from the construction of omega1) is checked and returned as is; otherwise a
/// homotopy primitive is computed for top-degree forms on two-dimensional
/// entries. Throws NoPrimitive when the classes differ.
BForm build_primitive(const BForm& omega0, const BForm& omega1, const BManifoldSpec& spec,
                      const std::optional<BForm>& carried = std::nullopt, const PrimitiveOptions& options = {});

/// Homotopy primitive of an exact top-degree b-form on a two-dimensional entry.
BForm homotopy_primitive(const BForm& exact, const BManifoldSpec& spec, const GridSpec& table = {257, 256});

/// b-frame components of X_t at x, from iota_X omega_t = -primitive (minimum
/// norm for non-square systems). Throws Degeneracy with t and x.
std::array<double, kMaxDim> moser_velocity(const MoserProblem& p, double t, const Point& x);
/// X_t as a field (values only; no derivatives).
BMultiVector moser_vector_field(const MoserProblem& p, double t);

struct FlowMap {
  BManifoldSpec spec;
  GridSpec seeds;
  int steps = 0;
  std::vector<std::vector<double>> axes;   ///< seed coordinates per axis
  std::vector<double> times;               ///< 0, 1/steps, ..., 1
  std::vector<std::vector<Point>> traj;    ///< traj[step][seed], periodic axes unwrapped

  std::size_t seed_count() const { return traj.empty() ? 0 : traj[0].size(); }
  std::size_t seed_index(const std::array<int, kMaxDim>& idx) const;
  std::array<int, kMaxDim> seed_multi_index(std::size_t s) const;
  /// Multilinear interpolation of phi_{times[step]} at an arbitrary point.
  Point map(const Point& x, int step) const;
  /// d phi^i / d x_j at a seed by fourth-order central differences; empty
  /// when the stencil leaves an open axis.
  std::optional<Matrix4> jacobian(std::size_t seed, int step) const;
  /// Largest |phi_t(x0) - t0| over seeds starting on Z.
  double z_drift() const;
  /// True when no seed off Z changes side of Z.
  bool preserves_sides() const;
};

/// Classical RK4 with `steps` fixed steps from t = 0 to 1. Throws ChartEscape
/// when a trajectory leaves an open axis and Stiffness on non-finite states.
FlowMap integrate_flow(const MoserProblem& p, int steps = 200, const GridSpec& seeds = {65, 64});

struct PullbackReport {
  double residual = 0.0;      ///< sup over interior seeds of |phi^* omega1 - omega0|, b-frame
  double z_residual = 0.0;    ///< same on seeds lying on Z (interpolated along x0)
  std::size_t checked = 0;
  std::size_t excluded = 0;   ///< seeds within the differencing margin
};

PullbackReport verify_pullback(const FlowMap& flow, const MoserProblem& p);
/// Sup over interior seeds of omega0 - omega1 - d(int_0^1 phi_t^*(iota_{X_t} omega1) dt),
/// with Simpson's rule over the stored steps.
double reverse_moser_check(const FlowMap& flow, const MoserProblem& p);

struct ConvergenceStudy {
  std::vector<int> steps;
  std::vector<double> residuals;   ///< verify_pullback residual at each step count
  /// sup |phi_N^* omega1 - phi_2N^* omega1| over seeds: the time-stepping part
  /// of the residual, free of the spatial differencing floor
  std::vector<double> increments;
  double order = 0.0;  ///< least-squares slope of -log(increment) against log(steps)
};

ConvergenceStudy convergence_study(const MoserProblem& p, const std::vector<int>& steps, const GridSpec& seeds = {65, 64});

/// Largest difference of class coordinates between omega0 and omega1.
double class_gap(const BForm& omega0, const BForm& omega1, const BManifoldSpec& spec, double tol = 1e-12);

/// The s2 problem omega0 = dz/z ^ dth, primitive 0.1 (1 - z^2) dth.
MoserProblem golden_problem(const BManifoldSpec& s2);

struct NambuResult {
  bool accepted = false;
  std::string reason;
  double volume_gap = 0.0;    ///< Vol(mu1) - Vol(mu0)
  double z_volume_gap = 0.0;  ///< largest gap of Z-volumes of iota_xi mu
  double min_ratio = 0.0;
  std::optional<MoserProblem> problem;
  std::optional<FlowMap> flow;
  double residual = 0.0;
};

/// Moser for nowhere vanishing top b-forms. Refuses (accepted = false) when
/// the classes differ; throws OrientationMismatch when mu1 / mu0 changes sign.
NambuResult nambu_equivalence(const BForm& mu0, const BForm& mu1, const BManifoldSpec& spec, int steps = 200);

}  // namespace logsymp
