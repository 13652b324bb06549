#include "logsymp/moser.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "logsymp/catalog_forms.hpp"
#include "logsymp/error.hpp"
#include "logsymp/interpolation.hpp"
#include "logsymp/quadrature.hpp"

namespace logsymp {

namespace {

// numerical (tabulated) primitives meet d(eta) = omega1 - omega0 to this level;
// symbolic ones to 1e-9
constexpr double kNumericalPrimitiveTol = 1e-7;

GridSpec check_grid_spec(const BManifoldSpec& spec) { return spec.dim > 2 ? GridSpec{9, 6} : GridSpec{33, 16}; }

using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 4>;
using SmallVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 6, 1>;

/// Coefficients of iota_X a for a b-frame form given by its values.
std::array<double, 16> contract(const std::array<double, kMaxDim>& X, const std::array<double, 16>& a, int n, int k) {
  std::array<double, 16> out{};
  if (k == 0) return out;
  for (Mask J : masks_of_degree(n, k - 1))
    for (int i = 0; i < n; ++i)
      if (!(J & (1u << i))) out[J] += X[i] * insert_sign(i, J) * a[J | (1u << i)];
  return out;
}

double det_small(const Matrix4& B, const std::vector<int>& rows, const std::vector<int>& cols) {
  const int k = static_cast<int>(rows.size());
  if (k == 0) return 1.0;
  SmallMatrix M(k, k);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) M(r, c) = B[rows[r]][cols[c]];
  return M.determinant();
}

/// b-frame coefficients of phi^* beta at x, given the b-frame values of beta
/// at y = phi(x) and the b-frame Jacobian B[i][j] = e^i(phi_* e_j).
std::array<double, 16> pull_values(const std::array<double, 16>& beta, const Matrix4& B, int n, int k) {
  std::array<double, 16> out{};
  const auto masks = masks_of_degree(n, k);
  for (Mask J : masks) {
    const auto jc = mask_indices(J);
    double s = 0.0;
    for (Mask I : masks)
      if (beta[I] != 0.0) s += beta[I] * det_small(B, mask_indices(I), jc);
    out[J] = s;
  }
  return out;
}

Matrix4 b_jacobian(const Matrix4& J, double rho_x, double rho_y, int n) {
  Matrix4 B{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = J[i][j];
      if (j == 0) v *= rho_x;
      if (i == 0) v /= rho_y;
      B[i][j] = v;
    }
  return B;
}

int z_component_of(const BManifoldSpec& spec, double x0) {
  for (std::size_t c = 0; c < spec.z_components.size(); ++c)
    if (std::fabs(x0 - spec.z_components[c].t0) < 1e-14) return static_cast<int>(c);
  return -1;
}

/// Values of a per-seed quantity at seeds on Z, interpolated from the four
/// nearest seeds along x0 (weights of the centred cubic through them).
template <class T>
bool fill_from_x0_neighbours(const FlowMap& flow, std::size_t s, std::vector<std::optional<T>>& data) {
  const auto idx = flow.seed_multi_index(s);
  const int n0 = static_cast<int>(flow.axes[0].size());
  const bool periodic = flow.spec.principal.axes[0].periodic;
  const double w[4] = {-1.0 / 6.0, 2.0 / 3.0, 2.0 / 3.0, -1.0 / 6.0};
  const int off[4] = {-2, -1, 1, 2};
  T acc{};
  for (int q = 0; q < 4; ++q) {
    auto nb = idx;
    int i0 = idx[0] + off[q];
    if (periodic)
      i0 = ((i0 % n0) + n0) % n0;
    else if (i0 < 0 || i0 >= n0)
      return false;
    nb[0] = i0;
    const auto& v = data[flow.seed_index(nb)];
    if (!v) return false;
    for (std::size_t m = 0; m < acc.size(); ++m) acc[m] += w[q] * (*v)[m];
  }
  data[s] = acc;
  return true;
}

/// Fourth-order central difference of per-seed values along an axis;
/// nullopt when a stencil point is missing.
std::optional<std::array<double, 16>> seed_derivative(const FlowMap& flow, std::size_t s, int axis,
                                                      const std::vector<std::optional<std::array<double, 16>>>& data) {
  const auto idx = flow.seed_multi_index(s);
  const int na = static_cast<int>(flow.axes[axis].size());
  const bool periodic = flow.spec.principal.axes[axis].periodic;
  const double h = flow.axes[axis][1] - flow.axes[axis][0];
  const double w[4] = {1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0};
  const int off[4] = {-2, -1, 1, 2};
  std::array<double, 16> acc{};
  for (int q = 0; q < 4; ++q) {
    auto nb = idx;
    int i = idx[axis] + off[q];
    if (periodic)
      i = ((i % na) + na) % na;
    else if (i < 0 || i >= na)
      return std::nullopt;
    nb[axis] = i;
    const auto& v = data[flow.seed_index(nb)];
    if (!v) return std::nullopt;
    for (int m = 0; m < 16; ++m) acc[m] += w[q] * (*v)[m] / h;
  }
  return acc;
}

/// Spectral antiderivative of periodic samples f_j at lo + j P / N:
/// returns the mean and F_j = int_lo^{x_j} (f - mean).
std::pair<double, std::vector<double>> periodic_antiderivative(const std::vector<double>& f, double period) {
  const int N = static_cast<int>(f.size());
  double mean = 0.0;
  for (double v : f) mean += v;
  mean /= N;
  std::vector<double> F(N, 0.0);
  const double w = 2.0 * std::numbers::pi / period;
  for (int k = 1; 2 * k < N; ++k) {
    double a = 0.0, b = 0.0;
    for (int j = 0; j < N; ++j) {
      const double ang = 2.0 * std::numbers::pi * k * j / N;
      a += f[j] * std::cos(ang);
      b += f[j] * std::sin(ang);
    }
    a *= 2.0 / N;
    b *= 2.0 / N;
    for (int j = 0; j < N; ++j) {
      const double ang = 2.0 * std::numbers::pi * k * j / N;
      F[j] += (a * std::sin(ang) + b * (1.0 - std::cos(ang))) / (k * w);
    }
  }
  return {mean, F};
}

/// F at the nodes of an open axis with F(lo) = 0, integrating the degree-5
/// interpolant of f; also returns F(hi).
std::pair<std::vector<double>, double> open_antiderivative(const std::vector<double>& nodes, const AxisSpec& axis,
                                                           const std::vector<double>& f) {
  std::vector<double> F(nodes.size());
  double acc = 0.0, left = axis.lo;
  for (std::size_t i = 0; i <= nodes.size(); ++i) {
    const double right = i < nodes.size() ? nodes[i] : axis.hi;
    const QuadratureRule q = gauss_legendre(10, left, right);
    for (std::size_t m = 0; m < q.nodes.size(); ++m) acc += q.weights[m] * interpolate_axis(nodes, axis, f, q.nodes[m]);
    if (i < nodes.size()) F[i] = acc;
    left = right;
  }
  return {F, acc};
}

std::string vec_str(const std::vector<double>& v) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}

double primitive_residual(const BForm& eta, const BForm& diff, const BManifoldSpec& spec) {
  return sup_distance(exterior_derivative(eta, spec), diff, chart_grid(spec, check_grid_spec(spec)));
}

}  // namespace

BForm MoserProblem::at(double t) const { return (1.0 - t) * omega0 + t * omega1; }

MoserProblem make_moser_problem(const BManifoldSpec& spec, const BForm& omega0, const BForm& omega1,
                                const BForm& primitive) {
  MoserProblem p;
  p.spec = spec;
  p.omega0 = to_frame(omega0, Frame::B, spec);
  p.omega1 = to_frame(omega1, Frame::B, spec);
  p.primitive = to_frame(primitive, Frame::B, spec);
  const int k = p.omega0.degree();
  if (p.omega1.degree() != k || p.primitive.degree() != k - 1)
    throw Error(ErrorKind::InvalidStructure, "Moser problem needs equal degrees and a primitive of one degree less");
  if (k != 1 && k != 2 && k != spec.dim)
    throw Error(ErrorKind::UnsupportedDegree, "Moser paths exist only in degrees 1, 2 and dim(M)");
  const double res = primitive_residual(p.primitive, p.omega1 - p.omega0, spec);
  if (res > kNumericalPrimitiveTol)
    throw Error(ErrorKind::NoPrimitive, "d(primitive) misses omega1 - omega0 by " + std::to_string(res));
  for (int i = 0; i <= 10; ++i) {
    const double t = 0.1 * i;
    const NondegeneracyReport nd = nondegenerate_check(p.at(t), spec);
    if (!nd.nondegenerate)
      throw Error(ErrorKind::Degeneracy, "path degenerates at t = " + std::to_string(t) + " in chart " + nd.chart +
                                             " at " + point_str(nd.witness, spec.dim));
  }
  return p;
}

double class_gap(const BForm& omega0, const BForm& omega1, const BManifoldSpec& spec, double tol) {
  const ClassCoordinates a = class_coordinates(omega0, spec, tol), b = class_coordinates(omega1, spec, tol);
  double gap = 0.0;
  for (std::size_t i = 0; i < a.m_part.size(); ++i) gap = std::max(gap, std::fabs(a.m_part[i] - b.m_part[i]));
  for (std::size_t i = 0; i < a.z_part.size(); ++i) gap = std::max(gap, std::fabs(a.z_part[i] - b.z_part[i]));
  return gap;
}

BForm homotopy_primitive(const BForm& exact, const BManifoldSpec& spec, const GridSpec& table) {
  if (spec.dim != 2 || exact.degree() != 2)
    throw Error(ErrorKind::NoPrimitive, "homotopy primitives are implemented for top forms on surfaces");
  const AxisSpec ax0 = spec.principal.axes[0], ax1 = spec.principal.axes[1];
  if (!ax1.periodic) throw Error(ErrorKind::NoPrimitive, "homotopy primitive needs a periodic second axis");

  const BForm beta = tabulate(to_frame(exact, Frame::B, spec), spec, table);
  const MazzeoMelroseSplit s = split(beta, spec);
  const ScalarField a = to_frame(s.alpha, Frame::Coordinate, spec)[3];
  const auto x0 = axis_samples(spec, 0, table), x1 = axis_samples(spec, 1, table);
  const std::size_t n0 = x0.size(), n1 = x1.size();

  // a = abar(x0) + atilde: F(x0) dx1 takes abar, G(x0, x1) dx0 takes atilde
  std::vector<double> abar(n0), G(n0 * n1);
  for (std::size_t i = 0; i < n0; ++i) {
    std::vector<double> row(n1);
    for (std::size_t j = 0; j < n1; ++j) row[j] = a.value(Point{x0[i], x1[j], 0.0, 0.0});
    auto [mean, prim] = periodic_antiderivative(row, ax1.period());
    abar[i] = mean;
    for (std::size_t j = 0; j < n1; ++j) G[i * n1 + j] = -prim[j];
  }
  std::vector<double> F(n0);
  double total = 0.0;
  if (ax0.periodic) {
    auto [mean, prim] = periodic_antiderivative(abar, ax0.period());
    F = prim;
    total = mean * ax0.period();
  } else {
    std::tie(F, total) = open_antiderivative(x0, ax0, abar);
  }
  if (std::fabs(total) > 1e-8)
    throw Error(ErrorKind::NoPrimitive, "smooth part has nonzero integral " + std::to_string(total * ax1.period()));

  std::vector<double> Fgrid(n0 * n1);
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j) Fgrid[i * n1 + j] = F[i];
  BForm coord(2, 1, Frame::Coordinate);
  coord[1u] = tabulated_field(std::make_shared<const TensorTable>(spec, table, G));
  coord[2u] = tabulated_field(std::make_shared<const TensorTable>(spec, table, Fgrid));
  BForm eta = to_frame(coord, Frame::B, spec);

  // sigma(d nu) = d(-nu dlog(lambda)) on each component
  for (std::size_t c = 0; c < spec.z_components.size(); ++c) {
    const ScalarField th = s.theta.parts[c][2u];
    if (th.is_zero()) continue;
    std::vector<double> row(n1);
    for (std::size_t j = 0; j < n1; ++j) row[j] = th.value(Point{spec.z_components[c].t0, x1[j], 0.0, 0.0});
    auto [mean, nu] = periodic_antiderivative(row, ax1.period());
    if (std::fabs(mean) > 1e-8)
      throw Error(ErrorKind::NoPrimitive, "residue on " + spec.z_components[c].name + " has nonzero period");
    std::vector<double> nugrid(n0 * n1);
    for (std::size_t i = 0; i < n0; ++i)
      for (std::size_t j = 0; j < n1; ++j) nugrid[i * n1 + j] = nu[j];
    const ScalarField nuf = tabulated_field(std::make_shared<const TensorTable>(spec, table, nugrid));
    eta[1u] = eta[1u] - nuf * dlog_lambda_coefficient(spec, static_cast<int>(c));
  }
  return eta;
}

BForm build_primitive(const BForm& omega0, const BForm& omega1, const BManifoldSpec& spec,
                      const std::optional<BForm>& carried, const PrimitiveOptions& options) {
  const BForm diff = to_frame(omega1, Frame::B, spec) - to_frame(omega0, Frame::B, spec);
  const int k = diff.degree();
  if (carried) {
    const BForm eta = to_frame(*carried, Frame::B, spec);
    if (primitive_residual(eta, diff, spec) <= 1e-9) return eta;
  }
  const ClassCoordinates c0 = class_coordinates(omega0, spec, options.class_tol),
                         c1 = class_coordinates(omega1, spec, options.class_tol);
  std::vector<double> gap;
  double worst = 0.0;
  for (std::size_t i = 0; i < c0.m_part.size(); ++i) gap.push_back(c1.m_part[i] - c0.m_part[i]);
  for (std::size_t i = 0; i < c0.z_part.size(); ++i) gap.push_back(c1.z_part[i] - c0.z_part[i]);
  for (double g : gap) worst = std::max(worst, std::fabs(g));
  if (worst > 1e-8) throw Error(ErrorKind::NoPrimitive, "classes differ; coordinate gap " + vec_str(gap));
  if (carried) throw Error(ErrorKind::NoPrimitive, "carried primitive does not integrate to omega1 - omega0");
  if (sup_norm(diff, chart_grid(spec, check_grid_spec(spec))) == 0.0) return BForm::zero(spec.dim, k - 1);
  if (spec.dim == 2 && k == 2) {
    const BForm eta = homotopy_primitive(diff, spec, options.table);
    const double res = primitive_residual(eta, diff, spec);
    if (res > kNumericalPrimitiveTol)
      throw Error(ErrorKind::NoPrimitive, "homotopy primitive residual " + std::to_string(res));
    return eta;
  }
  throw Error(ErrorKind::NoPrimitive, "no homotopy operator for degree " + std::to_string(k) + " on " + spec.name);
}

std::array<double, kMaxDim> moser_velocity(const MoserProblem& p, double t, const Point& x) {
  const int n = p.spec.dim, k = p.omega0.degree();
  const auto w0 = p.omega0.values(x), w1 = p.omega1.values(x), eta = p.primitive.values(x);
  const auto rows = masks_of_degree(n, k - 1);
  SmallMatrix A(rows.size(), n);
  SmallVector b(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Mask J = rows[r];
    for (int i = 0; i < n; ++i) {
      const Mask I = J | (1u << i);
      A(r, i) = (J & (1u << i)) ? 0.0 : insert_sign(i, J) * ((1.0 - t) * w0[I] + t * w1[I]);
    }
    b(r) = -eta[J];
  }
  std::array<double, kMaxDim> X{};
  if (static_cast<int>(rows.size()) == n) {
    Eigen::PartialPivLU<SmallMatrix> lu(A);
    const double scale = std::pow(std::max(A.cwiseAbs().maxCoeff(), 1e-300), n);
    if (!(std::fabs(lu.determinant()) > 1e-13 * scale))
      throw Error(ErrorKind::Degeneracy, "Moser system singular at t = " + std::to_string(t) + ", x = " + point_str(x, n));
    const SmallVector v = lu.solve(b);
    for (int i = 0; i < n; ++i) X[i] = v(i);
  } else {
    Eigen::CompleteOrthogonalDecomposition<SmallMatrix> cod(A);
    const SmallVector v = cod.solve(b);
    if ((A * v - b).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, b.cwiseAbs().maxCoeff()))
      throw Error(ErrorKind::Degeneracy, "Moser system inconsistent at t = " + std::to_string(t) + ", x = " + point_str(x, n));
    for (int i = 0; i < n; ++i) X[i] = v(i);
  }
  return X;
}

BMultiVector moser_vector_field(const MoserProblem& p, double t) {
  const int n = p.spec.dim;
  auto shared = std::make_shared<const MoserProblem>(p);
  BMultiVector X(n, 1, Frame::B);
  for (int i = 0; i < n; ++i)
    X[1u << i] = ScalarField::from_function([shared, t, i](const Point& x) {
      Jet j(moser_velocity(*shared, t, x)[i]);
      j.drop_hessian();
      return j;
    });
  return X;
}

std::size_t FlowMap::seed_index(const std::array<int, kMaxDim>& idx) const {
  std::size_t s = 0;
  for (std::size_t k = 0; k < axes.size(); ++k) s = s * axes[k].size() + idx[k];
  return s;
}

std::array<int, kMaxDim> FlowMap::seed_multi_index(std::size_t s) const {
  std::array<int, kMaxDim> idx{};
  for (int k = static_cast<int>(axes.size()) - 1; k >= 0; --k) {
    idx[k] = static_cast<int>(s % axes[k].size());
    s /= axes[k].size();
  }
  return idx;
}

Point FlowMap::map(const Point& x, int step) const {
  const int n = static_cast<int>(axes.size());
  std::array<int, kMaxDim> base{};
  std::array<double, kMaxDim> frac{};
  for (int k = 0; k < n; ++k) {
    const auto& a = axes[k];
    const int na = static_cast<int>(a.size());
    const double h = a[1] - a[0];
    const double u = (x[k] - a[0]) / h;
    int i = static_cast<int>(std::floor(u));
    if (!spec.principal.axes[k].periodic) i = std::clamp(i, 0, na - 2);
    base[k] = i;
    frac[k] = u - i;
  }
  Point out = x;
  for (int corner = 0; corner < (1 << n); ++corner) {
    double w = 1.0;
    std::array<int, kMaxDim> idx{};
    for (int k = 0; k < n; ++k) {
      const int bit = (corner >> k) & 1;
      w *= bit ? frac[k] : 1.0 - frac[k];
      const int na = static_cast<int>(axes[k].size());
      idx[k] = spec.principal.axes[k].periodic ? (((base[k] + bit) % na) + na) % na : base[k] + bit;
    }
    const std::size_t s = seed_index(idx);
    for (int k = 0; k < n; ++k) out[k] += w * (traj[step][s][k] - traj[0][s][k]);
  }
  return out;
}

std::optional<Matrix4> FlowMap::jacobian(std::size_t seed, int step) const {
  const int n = static_cast<int>(axes.size());
  const auto idx = seed_multi_index(seed);
  const double w[4] = {1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0};
  const int off[4] = {-2, -1, 1, 2};
  Matrix4 J{};
  for (int j = 0; j < n; ++j) {
    const AxisSpec& ax = spec.principal.axes[j];
    const int na = static_cast<int>(axes[j].size());
    const double h = axes[j][1] - axes[j][0];
    for (int q = 0; q < 4; ++q) {
      auto nb = idx;
      int i = idx[j] + off[q];
      double shift = 0.0;
      if (ax.periodic) {
        if (i < 0) shift = -ax.period();
        if (i >= na) shift = ax.period();
        i = ((i % na) + na) % na;
      } else if (i < 0 || i >= na) {
        return std::nullopt;
      }
      nb[j] = i;
      const Point& y = traj[step][seed_index(nb)];
      for (int r = 0; r < n; ++r) J[r][j] += w[q] * (y[r] + (r == j ? shift : 0.0)) / h;
    }
  }
  return J;
}

double FlowMap::z_drift() const {
  double drift = 0.0;
  for (std::size_t s = 0; s < seed_count(); ++s) {
    const int c = z_component_of(spec, traj[0][s][0]);
    if (c < 0) continue;
    for (const auto& row : traj) drift = std::max(drift, std::fabs(row[s][0] - spec.z_components[c].t0));
  }
  return drift;
}

bool FlowMap::preserves_sides() const {
  for (std::size_t s = 0; s < seed_count(); ++s) {
    if (z_component_of(spec, traj[0][s][0]) >= 0) continue;
    const double r0 = spec.defining.value(traj[0][s]);
    for (const auto& row : traj)
      if (spec.defining.value(row[s]) * r0 <= 0.0) return false;
  }
  return true;
}

FlowMap integrate_flow(const MoserProblem& p, int steps, const GridSpec& seeds) {
  if (steps < 1) throw Error(ErrorKind::InvalidStructure, "flow needs at least one step");
  const BManifoldSpec& spec = p.spec;
  const int n = spec.dim;
  FlowMap f;
  f.spec = spec;
  f.seeds = seeds;
  f.steps = steps;
  for (int k = 0; k < n; ++k) f.axes.push_back(axis_samples(spec, k, seeds));
  for (int j = 0; j <= steps; ++j) f.times.push_back(static_cast<double>(j) / steps);
  f.traj.assign(steps + 1, {});
  f.traj[0] = chart_grid(spec, seeds);

  auto velocity = [&](double t, const Point& x) {
    for (int k = 0; k < n; ++k) {
      const AxisSpec& a = spec.principal.axes[k];
      if (!std::isfinite(x[k])) throw Error(ErrorKind::Stiffness, "non-finite state in the flow");
      if (!a.periodic && (x[k] <= a.lo || x[k] >= a.hi))
        throw Error(ErrorKind::ChartEscape, "trajectory leaves the principal chart at " + point_str(x, n));
    }
    const auto X = moser_velocity(p, t, x);
    Point v{};
    v[0] = spec.defining.value(x) * X[0];
    for (int k = 1; k < n; ++k) v[k] = X[k];
    return v;
  };
  auto axpy = [n](const Point& x, double h, const Point& v) {
    Point y = x;
    for (int k = 0; k < n; ++k) y[k] += h * v[k];
    return y;
  };

  const double dt = 1.0 / steps;
  for (int j = 0; j < steps; ++j) {
    const double t = f.times[j];
    auto& next = f.traj[j + 1];
    next.resize(f.traj[j].size());
    for (std::size_t s = 0; s < f.traj[j].size(); ++s) {
      const Point& x = f.traj[j][s];
      const Point k1 = velocity(t, x);
      const Point k2 = velocity(t + 0.5 * dt, axpy(x, 0.5 * dt, k1));
      const Point k3 = velocity(t + 0.5 * dt, axpy(x, 0.5 * dt, k2));
      const Point k4 = velocity(t + dt, axpy(x, dt, k3));
      Point y = x;
      for (int k = 0; k < n; ++k) y[k] += dt / 6.0 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
      next[s] = y;
    }
  }
  return f;
}

namespace {

/// b-frame values of phi_step^* beta at every seed; seeds on Z are filled by
/// interpolation along x0, seeds in the differencing margin stay empty.
std::vector<std::optional<std::array<double, 16>>> pulled_at_seeds(
    const FlowMap& flow, int step, int degree, const std::function<std::array<double, 16>(const Point&)>& beta) {
  const BManifoldSpec& spec = flow.spec;
  const int n = spec.dim;
  const std::size_t count = flow.seed_count();
  std::vector<std::optional<std::array<double, 16>>> out(count);
  std::vector<std::size_t> on_z;
  for (std::size_t s = 0; s < count; ++s) {
    const Point& x = flow.traj[0][s];
    if (z_component_of(spec, x[0]) >= 0) {
      on_z.push_back(s);
      continue;
    }
    const auto J = flow.jacobian(s, step);
    if (!J) continue;
    const Point& y = flow.traj[step][s];
    const Matrix4 B = b_jacobian(*J, spec.defining.value(x), spec.defining.value(y), n);
    out[s] = pull_values(beta(y), B, n, degree);
  }
  for (std::size_t s : on_z) fill_from_x0_neighbours(flow, s, out);
  return out;
}

}  // namespace

PullbackReport verify_pullback(const FlowMap& flow, const MoserProblem& p) {
  const int k = p.omega1.degree();
  const auto pulled = pulled_at_seeds(flow, flow.steps, k, [&](const Point& y) { return p.omega1.values(y); });
  PullbackReport rep;
  for (std::size_t s = 0; s < pulled.size(); ++s) {
    if (!pulled[s]) {
      ++rep.excluded;
      continue;
    }
    ++rep.checked;
    const Point& x = flow.traj[0][s];
    const auto target = p.omega0.values(x);
    double r = 0.0;
    for (Mask m : masks_of_degree(flow.spec.dim, k)) r = std::max(r, std::fabs((*pulled[s])[m] - target[m]));
    if (z_component_of(flow.spec, x[0]) >= 0)
      rep.z_residual = std::max(rep.z_residual, r);
    else
      rep.residual = std::max(rep.residual, r);
  }
  return rep;
}

double reverse_moser_check(const FlowMap& flow, const MoserProblem& p) {
  const BManifoldSpec& spec = flow.spec;
  const int n = spec.dim, k = p.omega1.degree();
  const int N = flow.steps;
  const std::size_t count = flow.seed_count();
  std::vector<std::optional<std::array<double, 16>>> theta(count);
  std::vector<bool> valid(count, true);
  for (int j = 0; j <= N; ++j) {
    double w = 1.0 / N;
    if (N % 2 == 0)
      w *= (j == 0 || j == N) ? 1.0 / 3.0 : (j % 2 ? 4.0 / 3.0 : 2.0 / 3.0);
    else if (j == 0 || j == N)
      w *= 0.5;
    const double t = flow.times[j];
    const auto pulled = pulled_at_seeds(flow, j, k - 1, [&](const Point& y) {
      return contract(moser_velocity(p, t, y), p.omega1.values(y), n, k);
    });
    for (std::size_t s = 0; s < count; ++s) {
      if (!pulled[s]) {
        valid[s] = false;
        continue;
      }
      if (!theta[s]) theta[s] = std::array<double, 16>{};
      for (int m = 0; m < 16; ++m) (*theta[s])[m] += w * (*pulled[s])[m];
    }
  }
  for (std::size_t s = 0; s < count; ++s)
    if (!valid[s]) theta[s].reset();

  double sup = 0.0;
  for (std::size_t s = 0; s < count; ++s) {
    if (!theta[s]) continue;
    const Point& x = flow.traj[0][s];
    std::array<std::array<double, 16>, kMaxDim> D{};
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      const auto d = seed_derivative(flow, s, i, theta);
      if (!d) ok = false;
      else D[i] = *d;
    }
    if (!ok) continue;
    const double rho = spec.defining.value(x);
    const auto w0 = p.omega0.values(x), w1 = p.omega1.values(x);
    for (Mask I : masks_of_degree(n, k)) {
      double dtheta = 0.0;
      for (int i : mask_indices(I)) {
        const Mask rest = I & ~(1u << i);
        dtheta += insert_sign(i, rest) * (i == 0 ? rho : 1.0) * D[i][rest];
      }
      sup = std::max(sup, std::fabs(w0[I] - w1[I] - dtheta));
    }
  }
  return sup;
}

ConvergenceStudy convergence_study(const MoserProblem& p, const std::vector<int>& steps, const GridSpec& seeds) {
  ConvergenceStudy c;
  c.steps = steps;
  const int k = p.omega1.degree();
  const auto beta = [&](const Point& y) { return p.omega1.values(y); };
  std::map<int, std::vector<std::optional<std::array<double, 16>>>> pulled;
  std::map<int, double> residual;
  const auto pulled_for = [&](int N) -> const auto& {
    auto it = pulled.find(N);
    if (it == pulled.end()) {
      const FlowMap f = integrate_flow(p, N, seeds);
      residual[N] = verify_pullback(f, p).residual;
      it = pulled.emplace(N, pulled_at_seeds(f, N, k, beta)).first;
    }
    return it->second;
  };
  for (int N : steps) {
    const auto& a = pulled_for(N);
    const auto& b = pulled_for(2 * N);
    double d = 0.0;
    for (std::size_t s = 0; s < a.size(); ++s)
      if (a[s] && b[s])
        for (int m = 0; m < 16; ++m) d = std::max(d, std::fabs((*a[s])[m] - (*b[s])[m]));
    c.increments.push_back(d);
  }
  for (int N : steps) c.residuals.push_back(residual[N]);
  if (steps.size() >= 2) {
    Eigen::MatrixXd A(steps.size(), 2);
    Eigen::VectorXd b(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
      A(i, 0) = 1.0;
      A(i, 1) = std::log(static_cast<double>(steps[i]));
      b(i) = -std::log(std::max(c.increments[i], 1e-300));
    }
    c.order = A.colPivHouseholderQr().solve(b)(1);
  }
  return c;
}

MoserProblem golden_problem(const BManifoldSpec& s2) {
  const BForm omega0 = base_omega(s2);
  const BForm eta = BForm::basis(2, {1}, ScalarField::from_expr(Expr::parse("0.1*(1 - z^2)", s2.coordinate_names())));
  const BForm omega1 = omega0 + exterior_derivative(eta, s2);
  return make_moser_problem(s2, omega0, omega1, build_primitive(omega0, omega1, s2, eta));
}

NambuResult nambu_equivalence(const BForm& mu0, const BForm& mu1, const BManifoldSpec& spec, int steps) {
  const int n = spec.dim;
  if (mu0.degree() != n || mu1.degree() != n) throw Error(ErrorKind::UnsupportedDegree, "Nambu forms are top forms");
  const BForm b0 = to_frame(mu0, Frame::B, spec), b1 = to_frame(mu1, Frame::B, spec);
  const Mask top = (1u << n) - 1u;
  NambuResult r;
  r.min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = -r.min_ratio;
  for (const Point& x : chart_grid(spec, check_grid_spec(spec))) {
    const double d0 = b0[top].value(x);
    if (d0 == 0.0) throw Error(ErrorKind::Degeneracy, "mu0 vanishes at " + point_str(x, n));
    const double f = b1[top].value(x) / d0;
    r.min_ratio = std::min(r.min_ratio, f);
    max_ratio = std::max(max_ratio, f);
  }
  if (!(r.min_ratio > 0.0))
    throw Error(ErrorKind::OrientationMismatch, "mu1 / mu0 is not positive (min " + std::to_string(r.min_ratio) +
                                                    ", max " + std::to_string(max_ratio) + ")");

  r.volume_gap = regularized_volume(b1, spec, false).volume - regularized_volume(b0, spec, false).volume;
  const auto z0 = periods_Z(spec, residue(b0, spec)), z1 = periods_Z(spec, residue(b1, spec));
  for (std::size_t i = 0; i < z0.size(); ++i) r.z_volume_gap = std::max(r.z_volume_gap, std::fabs(z1[i] - z0[i]));
  if (std::fabs(r.volume_gap) > 1e-6 || r.z_volume_gap > 1e-6) {
    std::ostringstream os;
    os << "classes differ: regularized volume gap " << r.volume_gap << ", Z-volume gap " << r.z_volume_gap;
    r.reason = os.str();
    return r;
  }
  r.accepted = true;
  r.problem = make_moser_problem(spec, b0, b1, build_primitive(b0, b1, spec));
  r.flow = integrate_flow(*r.problem, steps);
  r.residual = verify_pullback(*r.flow, *r.problem).residual;
  return r;
}

}  // namespace logsymp
