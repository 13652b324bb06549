#include "logsymp/catalog_forms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "logsymp/error.hpp"
#include "logsymp/quadrature.hpp"

namespace logsymp {

ZForm ZForm::zero(const BManifoldSpec& spec, int degree) {
  ZForm z;
  z.dim = spec.dim;
  z.degree = degree;
  z.parts.assign(spec.z_components.size(), BForm::zero(spec.dim, degree));
  return z;
}

ZForm ZForm::uniform(const BManifoldSpec& spec, const BForm& part) {
  ZForm z;
  z.dim = spec.dim;
  z.degree = part.degree();
  z.parts.assign(spec.z_components.size(), part);
  return z;
}

ZForm ZForm::operator-() const {
  ZForm r = *this;
  for (auto& p : r.parts) p = -p;
  return r;
}

ZForm operator+(const ZForm& a, const ZForm& b) {
  if (a.parts.size() != b.parts.size() || a.degree != b.degree)
    throw Error(ErrorKind::InvalidStructure, "Z-form shape mismatch");
  ZForm r = a;
  for (std::size_t i = 0; i < a.parts.size(); ++i) r.parts[i] = a.parts[i] + b.parts[i];
  return r;
}

ZForm operator*(double s, const ZForm& a) {
  ZForm r = a;
  for (auto& p : r.parts) p = s * p;
  return r;
}

namespace {

BForm e(int dim, std::vector<int> idx, ScalarField f = ScalarField::constant(1.0)) {
  return BForm::basis(dim, idx, std::move(f));
}

ZForm on_component(const BManifoldSpec& spec, int comp, const BForm& part) {
  ZForm z = ZForm::zero(spec, part.degree());
  z.parts[comp] = part;
  return z;
}

}  // namespace

std::vector<BForm> cohomology_basis_M(const BManifoldSpec& spec, int k) {
  if (k < 0 || k > spec.dim) throw Error(ErrorKind::UnsupportedDegree, "degree out of range");
  const int n = spec.dim;
  const ScalarField rho = spec.defining;
  if (k == 0) return {BForm::function(n, ScalarField::constant(1.0))};
  if (spec.name == "s2") {
    if (k == 2) return {e(n, {0, 1}, rho)};  // dz ^ dth
    return {};
  }
  if (spec.name == "rp2") return {};
  if (spec.name == "t2") {
    if (k == 1) return {e(n, {0}, rho), e(n, {1})};  // ds, du
    return {e(n, {0, 1}, rho)};                      // ds ^ du
  }
  if (spec.name == "s2xt2") {
    if (k == 1) return {e(n, {2}), e(n, {3})};
    if (k == 2) return {e(n, {0, 1}, rho), e(n, {2, 3})};
    if (k == 3) return {e(n, {0, 1, 2}, rho), e(n, {0, 1, 3}, rho)};
    return {e(n, {0, 1, 2, 3}, rho)};
  }
  throw Error(ErrorKind::Catalog, "no cohomology basis for " + spec.name);
}

std::vector<ZForm> cohomology_basis_Z(const BManifoldSpec& spec, int k) {
  const int n = spec.dim;
  if (k < 0 || k > n - 1) throw Error(ErrorKind::UnsupportedDegree, "degree out of range on Z");
  std::vector<ZForm> out;
  if (spec.name == "t2") {
    for (int comp = 0; comp < 2; ++comp)
      out.push_back(on_component(spec, comp, k == 0 ? BForm::function(n, ScalarField::constant(1.0)) : e(n, {1})));
    return out;
  }
  if (k == 0) return {ZForm::uniform(spec, BForm::function(n, ScalarField::constant(1.0)))};
  if (spec.name == "s2" || spec.name == "rp2") return {ZForm::uniform(spec, e(n, {1}))};
  if (spec.name == "s2xt2") {
    if (k == 1)
      for (int i : {1, 2, 3}) out.push_back(ZForm::uniform(spec, e(n, {i})));
    if (k == 2)
      for (auto idx : {std::vector<int>{1, 2}, {1, 3}, {2, 3}}) out.push_back(ZForm::uniform(spec, e(n, idx)));
    if (k == 3) out.push_back(ZForm::uniform(spec, e(n, {1, 2, 3})));
    return out;
  }
  throw Error(ErrorKind::Catalog, "no Z cohomology basis for " + spec.name);
}

BForm base_omega(const BManifoldSpec& spec) {
  const int n = spec.dim;
  if (spec.name == "s2" || spec.name == "rp2") return e(n, {0, 1});
  if (spec.name == "t2") return e(n, {0, 1}, ScalarField::constant(-0.5 / std::numbers::pi));
  if (spec.name == "s2xt2") return e(n, {0, 1}) + e(n, {2, 3});
  throw Error(ErrorKind::Catalog, "no base structure for " + spec.name);
}

namespace {

/// Sorted mask of the cycle's free axes and the sign of their ordering.
std::pair<Mask, double> cycle_mask(const Cycle& c) {
  std::vector<int> idx = c.free_axes;
  int sign = 1;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b)
      if (idx[a] > idx[b]) {
        std::swap(idx[a], idx[b]);
        sign = -sign;
      }
  Mask m = 0;
  for (int i : idx) m |= 1u << i;
  return {m, sign * c.orientation};
}

double integrate_over(const Cycle& c, const std::function<double(const Point&)>& f, double tol) {
  if (c.degree == 0) return f(c.anchor);
  return integrate_box(
      [&](const std::vector<double>& u) {
        Point p = c.anchor;
        for (std::size_t k = 0; k < u.size(); ++k) p[c.free_axes[k]] = u[k];
        return f(p);
      },
      c.ranges, tol);
}

}  // namespace

double cycle_integrate(const BManifoldSpec& spec, const BForm& form, const std::string& cycle_id, double tol) {
  const Cycle& c = spec.cycle(cycle_id);
  if (form.degree() != c.degree)
    throw Error(ErrorKind::Rejected, "degree " + std::to_string(form.degree()) + " form on a " +
                                         std::to_string(c.degree) + "-cycle");
  require_invariant(spec, form);
  const BForm b = to_frame(form, Frame::B, spec);
  const auto [m, sign] = cycle_mask(c);
  const ScalarField coef = b[m];
  if (coef.is_zero()) return 0.0;
  if (!(m & 1u)) return sign * integrate_over(c, [&](const Point& p) { return coef.value(p); }, tol);

  // The cycle runs along x0: the dx0 coefficient is coef / rho, which must be
  // smooth wherever the cycle meets Z.
  const std::size_t t_slot = std::find(c.free_axes.begin(), c.free_axes.end(), 0) - c.free_axes.begin();
  const AxisSpec& tr = c.ranges[t_slot];
  for (const ZComponent& z : spec.z_components) {
    if (z.t0 < tr.lo || z.t0 >= tr.hi) continue;
    Cycle slice = c;
    slice.anchor[0] = z.t0;
    slice.free_axes.erase(slice.free_axes.begin() + t_slot);
    slice.ranges.erase(slice.ranges.begin() + t_slot);
    for (int s = 0; s < 16; ++s) {
      Point p = slice.anchor;
      for (std::size_t k = 0; k < slice.free_axes.size(); ++k) {
        const AxisSpec& r = slice.ranges[k];
        p[slice.free_axes[k]] = r.lo + (r.hi - r.lo) * (s + 0.5) / 16;
      }
      if (std::fabs(coef.value(p)) > 1e-9)
        throw Error(ErrorKind::Rejected, "form has a singular leg along cycle " + cycle_id +
                                             " where it meets Z; use the regularized volume instead");
    }
  }
  const ScalarField rho = spec.defining;
  return sign * integrate_over(
                    c,
                    [&](const Point& p) {
                      const double r = rho.value(p);
                      if (std::fabs(r) > 1e-6) return coef.value(p) / r;
                      return divide_removable(coef.jet(p), rho.jet(p), 0).v;
                    },
                    tol);
}

double cycle_integrate(const BManifoldSpec& spec, const ZForm& form, const std::string& cycle_id, double tol) {
  const Cycle& c = spec.cycle(cycle_id);
  if (c.z_component < 0) throw Error(ErrorKind::Rejected, "cycle " + cycle_id + " does not lie in Z");
  if (form.degree != c.degree) throw Error(ErrorKind::Rejected, "degree mismatch on cycle " + cycle_id);
  const BForm& part = form.parts.at(c.z_component);
  require_invariant(spec, part);
  const auto [m, sign] = cycle_mask(c);
  const ScalarField coef = part[m];
  if (coef.is_zero()) return 0.0;
  return sign * integrate_over(c, [&](const Point& p) { return coef.value(p); }, tol);
}

std::vector<double> periods_M(const BManifoldSpec& spec, const BForm& form, double tol) {
  std::vector<double> out;
  for (const auto& id : spec.homology_M.at(form.degree())) out.push_back(cycle_integrate(spec, form, id, tol));
  return out;
}

std::vector<double> periods_Z(const BManifoldSpec& spec, const ZForm& form, double tol) {
  std::vector<double> out;
  if (form.degree < 0 || form.degree >= static_cast<int>(spec.homology_Z.size())) return out;
  for (const auto& id : spec.homology_Z.at(form.degree)) out.push_back(cycle_integrate(spec, form, id, tol));
  return out;
}

void require_invariant(const BManifoldSpec& spec, const Coefficients& c, double tol) {
  if (!spec.involution) return;
  for (const Point& p : chart_grid(spec, GridSpec{33, 16})) {
    const Point q = spec.involution->map(p);
    const auto a = c.values(p), b = c.values(q);
    for (Mask m : c.masks()) {
      // z -> -z flips dz and d/dz but preserves the b-frame elements dz/z and z d/dz.
      const double flip = (c.frame() == Frame::Coordinate && (m & 1u)) ? -1.0 : 1.0;
      if (std::fabs(a[m] - flip * b[m]) > tol * std::max(1.0, std::fabs(a[m])))
        throw Error(ErrorKind::NotInvariant, "input is not invariant under the " + spec.involution->description +
                                                 " at z = " + std::to_string(p[0]) + ", th = " + std::to_string(p[1]));
    }
  }
}

}  // namespace logsymp
