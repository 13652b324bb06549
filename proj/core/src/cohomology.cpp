#include "logsymp/cohomology.hpp"

#include <algorithm>
#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <sstream>

#include "logsymp/error.hpp"
#include "logsymp/quadrature.hpp"

namespace logsymp {

namespace {

std::vector<Point> check_grid(const BManifoldSpec& spec) {
  return chart_grid(spec, spec.dim > 2 ? GridSpec{9, 6} : GridSpec{33, 16});
}

BForm in_frame(const BForm& a, Frame frame) {
  BForm r(a.dim(), a.degree(), frame);
  for (Mask m : a.masks()) r[m] = a[m];
  return r;
}

}  // namespace

BMapSpec identity_map(const BManifoldSpec& spec) {
  BMapSpec m;
  m.name = spec.name + ":id";
  m.source = spec;
  m.target = spec;
  const int n = spec.dim;
  m.map = [n](const Point& x) {
    std::array<Jet, kMaxDim> u{};
    for (int i = 0; i < n; ++i) u[i] = Jet::variable(x[i], i);
    return u;
  };
  return m;
}

BMapSpec covering_map(const BManifoldSpec& quotient) {
  if (!quotient.involution || quotient.name != "rp2")
    throw Error(ErrorKind::Catalog, quotient.name + " is not a quotient entry");
  BMapSpec m = identity_map(catalog_lookup("s2"));
  m.name = "s2->rp2";
  m.target = quotient;
  return m;
}

void require_bmap(const BMapSpec& map) {
  const int n = map.source.dim;
  if (map.target.dim != n) throw Error(ErrorKind::Rejected, "b-map " + map.name + " changes dimension");
  for (const Point& x : check_grid(map.source)) {
    const auto phi = map.map(x);
    Point y{};
    for (int i = 0; i < n; ++i) y[i] = phi[i].v;
    const bool on_source = std::fabs(map.source.defining.value(x)) < 1e-12;
    const bool on_target = std::fabs(map.target.defining.value(y)) < 1e-12;
    if (on_source != on_target)
      throw Error(ErrorKind::Rejected, "b-map " + map.name + ": preimage of Z is not Z near x0 = " +
                                           std::to_string(x[0]));
  }
}

double closedness_residual(const BForm& a, const BManifoldSpec& spec) {
  if (a.degree() >= spec.dim) return 0.0;
  return sup_norm(exterior_derivative(a, spec), check_grid(spec));
}

ZForm residue(const BForm& omega, const BManifoldSpec& spec) {
  ZForm z;
  z.dim = spec.dim;
  z.degree = omega.degree() - 1;
  if (z.degree < 0) return z;
  const BForm b = to_frame(omega, Frame::B, spec);
  for (const ZComponent& c : spec.z_components) {
    BForm part(spec.dim, z.degree, Frame::B);
    for (Mask J : part.masks()) {
      if ((J & 1u) || b[J | 1u].is_zero()) continue;
      // e^0 comes first, so iota_{e_0} (f e^0 ^ e^J) = f e^J
      part[J] = c.sign * b[J | 1u].frozen(0, c.t0);
    }
    z.parts.push_back(part);
  }
  return z;
}

BForm sigma(const ZForm& theta, const BManifoldSpec& spec) {
  const int n = spec.dim;
  if (theta.degree < 0) return BForm::zero(n, 0);
  if (theta.parts.size() != spec.z_components.size())
    throw Error(ErrorKind::InvalidStructure, "Z-form has the wrong number of components");
  BForm out = BForm::zero(n, theta.degree + 1);
  for (std::size_t c = 0; c < theta.parts.size(); ++c) {
    const double t0 = spec.z_components[c].t0;
    BForm part(n, theta.degree, Frame::B);
    for (Mask m : part.masks()) {
      if (theta.parts[c][m].is_zero()) continue;
      if (m & 1u) throw Error(ErrorKind::InvalidStructure, "Z-form with a leg normal to Z");
      part[m] = theta.parts[c][m].frozen(0, t0);
    }
    if (theta.degree < n - 1) {
      double res = 0.0;
      const BForm d = exterior_derivative(part, spec);
      const auto grid = z_grid(spec, static_cast<int>(c), spec.dim > 2 ? GridSpec{9, 6} : GridSpec{33, 16});
      res = sup_norm(d, grid);
      if (res > 1e-9)
        throw Error(ErrorKind::NotClosed, "sigma needs a closed form on Z; residual " + std::to_string(res));
    }
    out = out + wedge(BForm::basis(n, {0}, dlog_lambda_coefficient(spec, static_cast<int>(c))), part);
  }
  return out;
}

MazzeoMelroseSplit split(const BForm& omega, const BManifoldSpec& spec) {
  const double res = closedness_residual(omega, spec);
  if (res > 1e-9) throw Error(ErrorKind::NotClosed, "split needs a closed form; d-residual " + std::to_string(res));
  const BForm b = to_frame(omega, Frame::B, spec);
  MazzeoMelroseSplit s;
  s.theta = residue(b, spec);
  s.alpha = s.theta.degree < 0 ? b : b - sigma(s.theta, spec);
  if (!is_smooth_form(s.alpha, spec))
    throw Error(ErrorKind::InvalidStructure, "smooth part of the split has a singular leg on Z");
  return s;
}

ClassCoordinates class_coordinates(const BForm& omega, const BManifoldSpec& spec, double tol) {
  const MazzeoMelroseSplit s = split(omega, spec);
  ClassCoordinates c;
  c.m_part = periods_M(spec, s.alpha, tol);
  if (s.theta.degree >= 0) c.z_part = periods_Z(spec, s.theta, tol);
  return c;
}

int bcohomology_dim(const BManifoldSpec& spec, int k) {
  if (k < 0 || k > spec.dim) throw Error(ErrorKind::UnsupportedDegree, "degree " + std::to_string(k) + " out of range");
  return spec.betti_M[k] + (k >= 1 ? spec.betti_Z[k - 1] : 0);
}

int poisson_cohomology_dim(const BManifoldSpec& spec, int k) { return bcohomology_dim(spec, k); }

namespace {

constexpr int kPanelNodes = 16;

/// Distance from Z at which lambda reaches eps.
double cut_distance(const BManifoldSpec& spec, double eps) {
  auto f = [&](double u) { return lambda_profile(spec.lambda_profile, u).f - eps; };
  if (f(1.0) <= 0.0) return spec.collar_radius;
  boost::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(f, 0.0, 1.0, boost::math::tools::eps_tolerance<double>(50), iters);
  return spec.collar_radius * 0.5 * (r.first + r.second);
}

struct Integrand {
  const BManifoldSpec& spec;
  ScalarField coef;
  std::vector<AxisSpec> others;

  /// Integral over all non-x0 axes at fixed x0, of coef / rho.
  double slice(double x0) const {
    const double rho = spec.defining.value({x0, 0, 0, 0});
    auto f = [&](const std::vector<double>& u) {
      Point p{x0, 0, 0, 0};
      for (std::size_t k = 0; k < u.size(); ++k) p[k + 1] = u[k];
      return coef.value(p);
    };
    return integrate_box(f, others, 1e-13) / rho;
  }

  double panel(double a, double b) const {
    double s = 0.0;
    const QuadratureRule r = gauss_legendre(kPanelNodes, a, b);
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * slice(r.nodes[i]);
    return s;
  }

  /// Integral over [a, b] with panels graded geometrically away from the
  /// singular end(s).
  double graded(double a, double b, bool sing_a, bool sing_b) const {
    if (sing_a && sing_b) {
      const double m = 0.5 * (a + b);
      return graded(a, m, true, false) + graded(m, b, false, true);
    }
    const double cap = 0.05 * spec.principal.axes[0].period();
    double s = 0.0;
    if (sing_a || sing_b) {
      // width of the first panel: distance to the excluded point
      double pos = sing_a ? a : b;
      double w = std::min(cap, std::max(1e-300, distance_to_z(pos)));
      while (sing_a ? pos < b : pos > a) {
        const double next = sing_a ? std::min(b, pos + w) : std::max(a, pos - w);
        s += sing_a ? panel(pos, next) : panel(next, pos);
        pos = next;
        w = std::min(cap, 2 * w);
      }
      return s;
    }
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / cap)));
    for (int i = 0; i < n; ++i) s += panel(a + (b - a) * i / n, a + (b - a) * (i + 1) / n);
    return s;
  }

  double distance_to_z(double x0) const {
    double d = 1e300;
    for (const auto& z : spec.z_components) d = std::min(d, std::fabs(x0 - z.t0));
    return d;
  }
};

/// Integral of the top form over {lambda >= eps} (all components cut at the same distance).
double volume_outside(const Integrand& f, const BManifoldSpec& spec, double cut) {
  const AxisSpec& ax = spec.principal.axes[0];
  std::vector<double> t0s;
  for (const auto& z : spec.z_components) t0s.push_back(z.t0);
  std::sort(t0s.begin(), t0s.end());
  double total = 0.0;
  double lo = ax.lo;
  bool sing_lo = false;
  for (double t0 : t0s) {
    total += f.graded(lo, t0 - cut, sing_lo, true);
    lo = t0 + cut;
    sing_lo = true;
  }
  total += f.graded(lo, ax.hi, sing_lo, false);
  return total;
}

VolumeReport volume_fit(const BForm& omega, const BManifoldSpec& spec) {
  const BForm b = to_frame(omega, Frame::B, spec);
  Integrand f{spec, b[(1u << spec.dim) - 1u], {}};
  f.others.assign(spec.principal.axes.begin() + 1, spec.principal.axes.end());
  VolumeReport rep;
  double prev_cut = cut_distance(spec, std::ldexp(1.0, -3));
  double F = volume_outside(f, spec, prev_cut);
  rep.rows.push_back({std::ldexp(1.0, -3), F});
  for (int k = 4; k <= 12; ++k) {
    const double eps = std::ldexp(1.0, -k);
    const double cut = cut_distance(spec, eps);
    // add the two bands prev_cut > |x0 - t0| >= cut around every component
    for (const auto& z : spec.z_components)
      F += f.panel(z.t0 - prev_cut, z.t0 - cut) + f.panel(z.t0 + cut, z.t0 + prev_cut);
    prev_cut = cut;
    rep.rows.push_back({eps, F});
  }
  // least squares F = V + c log(eps) + b1 eps + b2 eps^2 on the last six
  // values; the polynomial terms absorb the truncation error of smooth parts
  const std::size_t n = 6, first = rep.rows.size() - n;
  Eigen::MatrixXd A(n, 4);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = rep.rows[first + i].epsilon;
    A.row(i) << 1.0, std::log(e), e, e * e;
    y(i) = rep.rows[first + i].value;
  }
  const Eigen::VectorXd x = A.colPivHouseholderQr().solve(y);
  rep.volume = x(0);
  rep.log_slope = x(1);
  return rep;
}

}  // namespace

VolumeReport regularized_volume(const BForm& omega, const BManifoldSpec& spec, bool check_profile) {
  if (omega.degree() != spec.dim)
    throw Error(ErrorKind::Rejected, "regularized volume needs a top-degree b-form");
  if (!spec.orientable)
    throw Error(ErrorKind::OrientationMismatch, spec.name + " is not orientable; integrate on its double cover");
  VolumeReport rep = volume_fit(omega, spec);
  if (!(std::fabs(rep.log_slope) < 1e-6)) {
    std::ostringstream os;
    os << "regularized volume does not converge: fitted log slope " << rep.log_slope;
    throw Error(ErrorKind::NonConvergence, os.str());
  }
  if (check_profile) {
    const LambdaProfile other =
        spec.lambda_profile == LambdaProfile::Septic ? LambdaProfile::Quintic : LambdaProfile::Septic;
    rep.profile_shift = std::fabs(volume_fit(omega, with_lambda_profile(spec, other)).volume - rep.volume);
  }
  return rep;
}

VolumeReport regularized_volume(const BForm& omega, const BMapSpec& map, bool check_profile) {
  require_bmap(map);
  require_invariant(map.target, omega);
  const BForm pulled = pullback(map.map, to_frame(omega, Frame::B, map.target), map.target);
  return regularized_volume(pulled, map.source, check_profile);
}

std::string volume_csv(const VolumeReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "epsilon,F,V,c\n";
  for (const auto& r : report.rows)
    os << r.epsilon << ',' << r.value << ',' << report.volume << ',' << report.log_slope << '\n';
  return os.str();
}

FunctorialityResult functoriality_check(const BForm& omega, const BMapSpec& map) {
  if (omega.degree() != map.source.dim)
    throw Error(ErrorKind::Rejected, "functoriality needs a form of the source dimension");
  FunctorialityResult r;
  r.volume = regularized_volume(omega, map, false).volume;
  r.holds = std::fabs(r.volume) < 1e-6;
  return r;
}

BMultiVector tangency_homotopy(const BMultiVector& w, const BMultiVector& pi, const BManifoldSpec& spec) {
  const BMultiVector pc = to_frame(pi, Frame::Coordinate, spec);
  const BMultiVector wc = to_frame(w, Frame::Coordinate, spec);
  const MazzeoMelroseSplit s = split(invert(to_frame(pi, Frame::B, spec), spec), spec);
  if (s.theta.degree != 1) throw Error(ErrorKind::InvalidStructure, "tangency homotopy needs a bivector structure");

  auto h = [&](const BMultiVector& v) {
    BMultiVector out = BMultiVector::zero(spec.dim, std::max(0, v.degree() - 1), Frame::Coordinate);
    if (v.degree() == 0) return out;
    for (std::size_t c = 0; c < spec.z_components.size(); ++c) {
      const BForm theta = in_frame(s.theta.parts[c], Frame::Coordinate);
      out = out + interior(theta, chi_field(spec, static_cast<int>(c)) * v);
    }
    return out;
  };

  BMultiVector zeta = wc + h(poisson_differential(pc, wc, spec));
  if (wc.degree() > 0) zeta = zeta + poisson_differential(pc, h(wc), spec);
  if (!is_tangent(zeta, spec)) throw Error(ErrorKind::TangencyFailure, "homotopy image is not tangent to Z");
  return zeta;
}

}  // namespace logsymp
