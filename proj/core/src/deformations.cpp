#include "logsymp/deformations.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "logsymp/error.hpp"

namespace logsymp {

namespace {

GridSpec check_grid_spec(const BManifoldSpec& spec) { return spec.dim > 2 ? GridSpec{9, 6} : GridSpec{33, 16}; }

double zform_distance(const ZForm& a, const ZForm& b, const BManifoldSpec& spec) {
  double d = 0.0;
  for (std::size_t c = 0; c < a.parts.size(); ++c)
    d = std::max(d, sup_distance(a.parts[c], b.parts[c], z_grid(spec, static_cast<int>(c), check_grid_spec(spec))));
  return d;
}

Eigen::MatrixXd b_matrix(const Coefficients& c, const Point& x) {
  const int n = c.dim();
  const Matrix4 m = matrix_at(c, x);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = m[i][j];
  return A;
}

}  // namespace

LogSymplecticStructure LogSymplecticStructure::make(const BManifoldSpec& spec, const BForm& omega) {
  if (omega.degree() != 2 || omega.dim() != spec.dim)
    throw Error(ErrorKind::InvalidStructure, "a log symplectic structure needs a b-two-form on " + spec.name);
  LogSymplecticStructure s;
  s.spec = spec;
  s.omega = to_frame(omega, Frame::B, spec);
  require_invariant(spec, s.omega);
  const NondegeneracyReport nd = nondegenerate_check(s.omega, spec);
  if (!nd.nondegenerate)
    throw Error(ErrorKind::Degeneracy, "b-two-form degenerates in chart " + nd.chart + " at " + point_str(nd.witness, spec.dim));
  s.split = logsymp::split(s.omega, spec);  // throws NotClosed
  s.pi = invert(s.omega, spec);
  const double jac = schouten_jacobi_residual(s.pi, spec, chart_grid(spec, check_grid_spec(spec)));
  if (jac > 1e-9) throw Error(ErrorKind::InvalidStructure, "inverse bivector fails Jacobi; residual " + std::to_string(jac));
  return s;
}

LogSymplecticStructure LogSymplecticStructure::catalog(const BManifoldSpec& spec) { return make(spec, base_omega(spec)); }

void require_params(const BManifoldSpec& spec, const DeformationParams& params) {
  const std::size_t l = spec.betti_M[2], k = spec.betti_Z[1];
  if (params.epsilon.size() != l || params.delta.size() != k)
    throw Error(ErrorKind::Inadmissible, spec.name + " takes " + std::to_string(l) + " epsilon and " + std::to_string(k) +
                                             " delta parameters");
}

BForm varpi(const BManifoldSpec& spec, const std::vector<double>& epsilon) {
  const auto basis = cohomology_basis_M(spec, 2);
  if (epsilon.size() != basis.size()) throw Error(ErrorKind::Inadmissible, "wrong number of epsilon parameters");
  BForm out = BForm::zero(spec.dim, 2);
  for (std::size_t i = 0; i < basis.size(); ++i)
    if (epsilon[i] != 0.0) out = out + epsilon[i] * basis[i];
  return out;
}

ZForm gamma(const BManifoldSpec& spec, const std::vector<double>& delta) {
  const auto basis = cohomology_basis_Z(spec, 1);
  if (delta.size() != basis.size()) throw Error(ErrorKind::Inadmissible, "wrong number of delta parameters");
  ZForm out = ZForm::zero(spec, 1);
  for (std::size_t i = 0; i < basis.size(); ++i)
    if (delta[i] != 0.0) out = out + delta[i] * basis[i];
  return out;
}

ZForm restrict_to_Z(const BForm& a, const BManifoldSpec& spec) {
  const BForm b = to_frame(a, Frame::B, spec);
  ZForm z = ZForm::zero(spec, b.degree());
  for (std::size_t c = 0; c < spec.z_components.size(); ++c)
    for (Mask m : b.masks())
      if (!(m & 1u) && !b[m].is_zero()) z.parts[c][m] = b[m].frozen(0, spec.z_components[c].t0);
  return z;
}

LogSymplecticStructure deform(const LogSymplecticStructure& base, const BForm& varpi, const ZForm& gamma) {
  const BManifoldSpec& spec = base.spec;
  const BForm candidate = base.omega + to_frame(varpi, Frame::B, spec) + sigma(gamma, spec);
  const NondegeneracyReport nd = nondegenerate_check(candidate, spec);
  if (!nd.nondegenerate)
    throw Error(ErrorKind::Degeneracy, "deformation too large: degenerate in chart " + nd.chart + " at " +
                                           point_str(nd.witness, spec.dim));
  LogSymplecticStructure out = LogSymplecticStructure::make(spec, candidate);

  const CosymplecticStructure before = cosymplectic_extract(base);
  const CosymplecticStructure after = cosymplectic_extract(out);
  const double eta_gap = zform_distance(after.eta, before.eta + restrict_to_Z(varpi, spec), spec);
  const double theta_gap = zform_distance(after.theta, before.theta + gamma, spec);
  if (eta_gap > 1e-9 || theta_gap > 1e-9)
    throw Error(ErrorKind::InvalidStructure, "re-extracted cosymplectic pair does not match (gaps " +
                                                 std::to_string(eta_gap) + ", " + std::to_string(theta_gap) + ")");
  return out;
}

BForm omega_family(const LogSymplecticStructure& base, const DeformationParams& params) {
  require_params(base.spec, params);
  return base.omega + varpi(base.spec, params.epsilon) + sigma(gamma(base.spec, params.delta), base.spec);
}

CosymplecticStructure cosymplectic_extract(const LogSymplecticStructure& base) {
  const BManifoldSpec& spec = base.spec;
  const int n = spec.dim;
  CosymplecticStructure cs;
  cs.eta = restrict_to_Z(base.split.alpha, spec);
  cs.theta = base.split.theta;
  cs.min_volume = std::numeric_limits<double>::infinity();

  const Mask top = ((1u << n) - 1u) & ~1u;
  for (std::size_t c = 0; c < spec.z_components.size(); ++c) {
    BForm vol = cs.theta.parts[c];
    for (int k = 1; k < n / 2; ++k) vol = wedge(vol, cs.eta.parts[c]);
    for (const Point& x : z_grid(spec, static_cast<int>(c))) {
      const double v = std::fabs(vol[top](x));
      cs.min_volume = std::min(cs.min_volume, v);
      if (!(v > 1e-12))
        throw Error(ErrorKind::InvalidStructure, "theta ^ eta^(n-1) vanishes on Z at " + point_str(x, n));

      // iota_V eta = 0 and theta(V) = 1 in the tangential frame e_1..e_{n-1}
      const Eigen::MatrixXd E = b_matrix(cs.eta.parts[c], x);
      const auto th = cs.theta.parts[c].values(x);
      Eigen::MatrixXd A(n, n - 1);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
      for (int j = 1; j < n; ++j)
        for (int i = 1; i < n; ++i) A(j - 1, i - 1) = E(i, j);
      for (int i = 1; i < n; ++i) A(n - 1, i - 1) = th[1u << i];
      rhs(n - 1) = 1.0;
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
      qr.setThreshold(1e-12);
      if (qr.rank() < n - 1) throw Error(ErrorKind::InvalidStructure, "Reeb system is rank deficient at " + point_str(x, n));
      const Eigen::VectorXd V = qr.solve(rhs);
      const double res = (A * V - rhs).cwiseAbs().maxCoeff();
      if (res > 1e-9) throw Error(ErrorKind::InvalidStructure, "Reeb system has no solution at " + point_str(x, n));
      ZVectorSample s;
      s.component = static_cast<int>(c);
      s.x = x;
      for (int i = 1; i < n; ++i) s.v[i] = V(i - 1);
      cs.V.push_back(s);
    }
  }
  return cs;
}

BMultiVector modular_vector_field(const LogSymplecticStructure& base, const ScalarField& log_factor) {
  const BManifoldSpec& spec = base.spec;
  BForm k = BForm::basis(spec.dim, {0}, dlog_lambda_coefficient(spec));
  if (!log_factor.is_zero()) {
    BForm df = BForm::zero(spec.dim, 1);
    for (int i = 0; i < spec.dim; ++i) df[1u << i] = frame_derivative(log_factor, i, Frame::B, spec);
    k = k + df;
  }
  return -sharp(base.pi, k);
}

double modular_mismatch(const LogSymplecticStructure& base, const CosymplecticStructure& cs) {
  const BMultiVector X = modular_vector_field(base);
  double gap = 0.0;
  for (const ZVectorSample& s : cs.V) {
    const auto xv = X.values(s.x);
    for (int i = 0; i < base.spec.dim; ++i) gap = std::max(gap, std::fabs(xv[1u << i] - s.v[i]));
  }
  return gap;
}

DeformationParams classify(const BForm& omega_prime, const LogSymplecticStructure& base, double tol) {
  const BManifoldSpec& spec = base.spec;
  auto flatten = [](const ClassCoordinates& c) {
    std::vector<double> v = c.m_part;
    v.insert(v.end(), c.z_part.begin(), c.z_part.end());
    return v;
  };
  const std::vector<double> c0 = flatten(class_coordinates(base.omega, spec));
  const std::vector<double> c1 = flatten(class_coordinates(omega_prime, spec, tol));
  const auto bm = cohomology_basis_M(spec, 2);
  const auto bz = cohomology_basis_Z(spec, 1);
  const int l = static_cast<int>(bm.size()), k = static_cast<int>(bz.size());
  const int rows = static_cast<int>(c0.size());

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, l + k);
  for (int i = 0; i < l; ++i) {
    const auto p = periods_M(spec, bm[i]);
    for (std::size_t r = 0; r < p.size(); ++r) A(r, i) = p[r];
  }
  for (int j = 0; j < k; ++j) {
    const auto p = periods_Z(spec, bz[j]);
    for (std::size_t r = 0; r < p.size(); ++r) A(l + r, l + j) = p[r];
  }
  Eigen::VectorXd b(rows);
  for (int r = 0; r < rows; ++r) b(r) = c1[r] - c0[r];

  DeformationParams out;
  if (l + k == 0) return out;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < l + k) throw Error(ErrorKind::InvalidStructure, "period matrix of the deformation basis is singular");
  const Eigen::VectorXd x = qr.solve(b);
  out.epsilon.assign(x.data(), x.data() + l);
  out.delta.assign(x.data() + l, x.data() + l + k);
  return out;
}

double convexity_norm(const BForm& omega_prime, const LogSymplecticStructure& base) {
  const BManifoldSpec& spec = base.spec;
  const BForm w = to_frame(omega_prime, Frame::B, spec);
  const int n = spec.dim;
  double sup = 0.0;
  for (const Point& x : chart_grid(spec, check_grid_spec(spec))) {
    // pi^sharp(omega'^flat(V))^j = V^i Omega'_il P^lj
    const Eigen::MatrixXd M = b_matrix(w, x) * b_matrix(base.pi, x) - Eigen::MatrixXd::Identity(n, n);
    sup = std::max(sup, Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0));
  }
  return sup;
}

std::vector<double> segment_norms(const BForm& omega_prime, const LogSymplecticStructure& base, int samples) {
  const BForm w = to_frame(omega_prime, Frame::B, base.spec);
  std::vector<double> out;
  for (int i = 1; i <= samples; ++i) {
    const double t = static_cast<double>(i) / (samples + 1);
    out.push_back(convexity_norm((1.0 - t) * base.omega + t * w, base));
  }
  return out;
}

std::vector<FoliationComponent> b_one_form_foliation(const BForm& vartheta, const BManifoldSpec& spec) {
  if (vartheta.degree() != 1) throw Error(ErrorKind::UnsupportedDegree, "foliations come from b-one-forms");
  const NondegeneracyReport nd = nondegenerate_check(vartheta, spec);
  if (!nd.nondegenerate)
    throw Error(ErrorKind::Degeneracy, "b-one-form vanishes in chart " + nd.chart + " at " + point_str(nd.witness, spec.dim));
  const BForm b = to_frame(vartheta, Frame::B, spec);
  const int n = spec.dim;
  std::vector<FoliationComponent> out;
  for (std::size_t c = 0; c < spec.z_components.size(); ++c) {
    const ZComponent& zc = spec.z_components[c];
    FoliationComponent f;
    f.component = zc.name;
    f.min_tangential = std::numeric_limits<double>::infinity();
    double cmin = std::numeric_limits<double>::infinity(), cmax = -cmin;
    std::vector<double> first;
    bool constant_slope = true;
    for (const Point& x : z_grid(spec, static_cast<int>(c))) {
      const auto v = b.values(x);
      const double ci = zc.sign * v[1u];
      cmin = std::min(cmin, ci);
      cmax = std::max(cmax, ci);
      std::vector<double> tang;
      double norm = 0.0;
      for (int i = 1; i < n; ++i) {
        tang.push_back(v[1u << i]);
        norm += v[1u << i] * v[1u << i];
      }
      f.min_tangential = std::min(f.min_tangential, std::sqrt(norm));
      if (first.empty())
        first = tang;
      else
        for (std::size_t i = 0; i < tang.size(); ++i) constant_slope = constant_slope && std::fabs(tang[i] - first[i]) < 1e-9;
    }
    if (cmax - cmin > 1e-9)
      throw Error(ErrorKind::NotClosed, "iota_xi vartheta is not constant on " + zc.name + " (spread " +
                                            std::to_string(cmax - cmin) + ")");
    f.c = 0.5 * (cmin + cmax);
    f.leaf = std::fabs(f.c) > 1e-9;
    if (constant_slope) f.slope = first;
    out.push_back(f);
  }
  return out;
}

}  // namespace logsymp
