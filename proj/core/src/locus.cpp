#include "logsymp/locus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include "logsymp/error.hpp"
#include "logsymp/quadrature.hpp"

namespace logsymp {

namespace {

constexpr double kTransverseSlope = 1e-8;
constexpr double kTangencyTol = 1e-8;
// a-differences below this are rounding noise
constexpr double kRoundoffA = 1e-12;
constexpr std::size_t kHeightCacheSize = 1 << 16;
// samples per fiber when scanning for roots; sign changes closer than the
// spacing 2 * collar_radius / (kRootScan + 1) can be missed
constexpr int kRootScan = 513;

double collar_t(const BManifoldSpec& spec, int comp, double x0) {
  double d = x0 - spec.z_components[comp].t0;
  const AxisSpec& a = spec.principal.axes[0];
  if (a.periodic) d -= a.period() * std::floor(d / a.period() + 0.5);
  return d;
}

GridSpec fiber_grid(const BManifoldSpec& spec) { return {129, spec.dim > 2 ? 8 : 64}; }

std::vector<Point> fibers_of(const BManifoldSpec& spec, int comp) { return z_grid(spec, comp, fiber_grid(spec)); }

std::vector<double> uniform(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int j = 0; j < n; ++j) out[j] = lo + (hi - lo) * j / (n - 1);
  return out;
}

/// Coefficient of the top multivector in wedge^n of a bivector (up to the
/// common factor n!), any frame.
ScalarField pfaffian(const BMultiVector& v) {
  if (v.dim() == 2) return v[3u];
  return v[3u] * v[12u] - v[5u] * v[10u] + v[9u] * v[6u];
}

Point at_x0(Point x, double x0) {
  x[0] = x0;
  return x;
}

double bisect_newton(const ScalarField& h, const Point& x, double lo, double hi, double hlo) {
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double hm = h.value(at_x0(x, mid));
    if (hm == 0.0) return mid;
    if ((hm < 0.0) == (hlo < 0.0)) {
      lo = mid;
      hlo = hm;
    } else {
      hi = mid;
    }
  }
  double r = 0.5 * (lo + hi);
  for (int k = 0; k < 2; ++k) {
    const Jet j = h.jet(at_x0(x, r));
    if (j.g[0] == 0.0) break;
    const double next = r - j.v / j.g[0];
    if (!std::isfinite(next) || std::fabs(next - r) > 1e-9) break;
    r = next;
  }
  return r;
}

/// Jet of the implicit height g(x') solving h(g, x') = 0 from the jet of h there.
Jet implicit_height(double root, const Jet& h, int n) {
  Jet g(root);
  const double ht = h.g[0];
  for (int j = 1; j < n; ++j) g.g[j] = -h.g[j] / ht;
  for (int j = 1; j < n; ++j)
    for (int k = 1; k < n; ++k)
      g.h[j][k] = -(h.h[j][k] + h.h[0][j] * g.g[k] + h.h[0][k] * g.g[j] + h.h[0][0] * g.g[j] * g.g[k]) / ht;
  return g;
}

/// Inverse of (t, x) -> (t - chi(t) g(x), x) by Newton in t.
std::function<Point(const Point&)> chi_shift_inverse(const ScalarField& g, const BManifoldSpec& s, int comp) {
  return [g, s, comp](const Point& y) {
    const double gv = g.value(y);
    Point x = y;
    x[0] = y[0] + chi_catalog(s, collar_t(s, comp, y[0])).f * gv;
    for (int it = 0; it < 60; ++it) {
      const Taylor3 c = chi_catalog(s, collar_t(s, comp, x[0]));
      const double f = x[0] - c.f * gv - y[0];
      const double step = f / (1.0 - c.d1 * gv);
      x[0] -= step;
      if (std::fabs(step) < 1e-15 * std::max(1.0, std::fabs(x[0]))) break;
    }
    return x;
  };
}

struct Pushforward {
  BManifoldSpec spec;
  int comp = 0;
  BMultiVector w;
  ScalarField g;
  std::function<Point(const Point&)> inverse;

  /// Coordinate coefficients of phi_* w at y, with first derivatives.
  std::array<Jet, 16> at(const Point& y) const {
    const int n = spec.dim;
    const Point x = inverse(y);
    const Jet gj = g.jet(y);
    const Taylor3 c = chi_catalog(spec, collar_t(spec, comp, x[0]));
    const double D = 1.0 - c.d1 * gj.v;
    Jet tau(x[0]);
    tau.g[0] = 1.0 / D;
    for (int j = 1; j < n; ++j) tau.g[j] = c.f * gj.g[j] / D;
    tau.drop_hessian();
    std::array<Jet, kMaxDim> X{};
    X[0] = tau;
    for (int k = 1; k < n; ++k) X[k] = Jet::variable(y[k], k);

    std::array<Jet, 16> wc{};
    for (Mask m : masks_of_degree(n, 2)) wc[m] = compose(w[m], X, n);
    const auto coef = [&](int i, int j) -> Jet {
      if (i == j) return Jet();
      return i < j ? wc[(1u << i) | (1u << j)] : -wc[(1u << i) | (1u << j)];
    };
    const Jet chi = chain(tau, c.f, c.d1, c.d2);
    const Jet dchi = chain(tau, c.d1, c.d2, c.d3);
    Jet gval = gj;
    gval.drop_hessian();
    std::array<Jet, kMaxDim> D0{};
    D0[0] = 1.0 - dchi * gval;
    for (int k = 1; k < n; ++k) {
      Jet gk(gj.g[k]);
      for (int l = 0; l < n; ++l) gk.g[l] = gj.h[k][l];
      gk.drop_hessian();
      D0[k] = -(chi * gk);
    }
    std::array<Jet, 16> out{};
    for (Mask m : masks_of_degree(n, 2)) {
      const auto idx = mask_indices(m);
      if (idx[0] != 0) {
        out[m] = wc[m];
        continue;
      }
      const int j = idx[1];
      Jet s;
      for (int k = 0; k < n; ++k)
        if (k != j) s = s + D0[k] * coef(k, j);
      out[m] = s;
    }
    return out;
  }
};

double sup_abs_coefficients(const BMultiVector& v, const Point& x) {
  double s = 0.0;
  for (Mask m : v.masks()) s = std::max(s, std::fabs(v[m].value(x)));
  return s;
}

}  // namespace

const char* to_string(LocusClass c) {
  switch (c) {
    case LocusClass::Single: return "log symplectic, single locus";
    case LocusClass::MultiComponent: return "multi-component locus";
    case LocusClass::NonTransverse: return "non-transverse";
    case LocusClass::Empty: return "no singular locus";
  }
  return "?";
}

PfaffianData pfaffian_ratio(const BMultiVector& w, const LogSymplecticStructure& base, int component) {
  const BManifoldSpec& spec = base.spec;
  if (w.degree() != 2) throw Error(ErrorKind::UnsupportedDegree, "pfaffian_ratio expects a bivector");
  if (component < 0 || component >= static_cast<int>(spec.z_components.size()))
    throw Error(ErrorKind::Catalog, "no Z component " + std::to_string(component));
  PfaffianData d;
  d.spec = spec;
  d.component = component;
  d.w = to_frame(w, Frame::Coordinate, spec);
  d.scale = spec.chi_scale;
  d.box = kChiPlateau * spec.chi_scale;

  // wedge^n pi = rho Pf_b(pi) vol and rho = ratio * t, so mu = ratio Pf_b(pi) vol
  const ScalarField mu = spec.z_components[component].defining_ratio * pfaffian(to_frame(base.pi, Frame::B, spec));
  const std::vector<Point> fibers = fibers_of(spec, component);
  const double t0 = spec.z_components[component].t0;
  for (const Point& f : fibers)
    for (double t : uniform(-spec.collar_radius, spec.collar_radius, 33)) {
      if (std::fabs(t) >= spec.collar_radius) continue;
      const Point x = at_x0(f, t0 + t);
      if (std::fabs(mu.value(x)) < 1e-12)
        throw Error(ErrorKind::InvalidStructure, "mu vanishes at " + point_str(x, spec.dim) + "; corrupt base structure");
    }
  d.h = pfaffian(d.w) / mu;

  d.min_dh_dt = std::numeric_limits<double>::infinity();
  for (const Point& f : fibers)
    for (double t : uniform(-d.box, d.box, 33)) {
      const Point x = at_x0(f, t0 + t);
      const Jet j = d.h.jet(x);
      if (j.g[0] < d.min_dh_dt) {
        d.min_dh_dt = j.g[0];
        d.monotone_witness = x;
      }
      const double gap = std::fabs(j.v - t);
      if (gap > d.max_gap) {
        d.max_gap = gap;
        d.close_witness = x;
      }
    }
  d.monotone = d.min_dh_dt > 0.0;
  d.close = d.max_gap < d.scale;
  return d;
}

std::vector<double> fiber_roots(const ScalarField& h, const Point& x, double t0, double radius, int samples) {
  std::vector<double> ts(samples), hs(samples);
  for (int j = 0; j < samples; ++j) {
    ts[j] = -radius + 2.0 * radius * (j + 1) / (samples + 1);
    hs[j] = h.value(at_x0(x, t0 + ts[j]));
  }
  std::vector<double> roots;
  for (int j = 0; j < samples; ++j) {
    if (hs[j] == 0.0) {
      roots.push_back(ts[j]);
      continue;
    }
    if (j + 1 < samples && hs[j + 1] != 0.0 && (hs[j] < 0.0) != (hs[j + 1] < 0.0))
      roots.push_back(bisect_newton(h, x, t0 + ts[j], t0 + ts[j + 1], hs[j]) - t0);
  }
  return roots;
}

LocusReport detect_singular_locus(const BMultiVector& w, const LogSymplecticStructure& base, int component) {
  const PfaffianData d = pfaffian_ratio(w, base, component);
  const BManifoldSpec& spec = base.spec;
  const double t0 = spec.z_components[component].t0;
  LocusReport r;
  r.component = component;
  r.scale = d.scale;
  r.min_roots = std::numeric_limits<int>::max();
  r.min_slope = std::numeric_limits<double>::infinity();
  double gsum = 0.0;
  int gcount = 0;
  r.g_min = std::numeric_limits<double>::infinity();
  r.g_max = -r.g_min;
  for (const Point& f : fibers_of(spec, component)) {
    FiberRoots fr;
    fr.x = f;
    fr.t = fiber_roots(d.h, f, t0, spec.collar_radius, kRootScan);
    for (double t : fr.t) {
      const double s = d.h.jet(at_x0(f, t0 + t)).g[0];
      fr.slope.push_back(s);
      if (std::fabs(s) < r.min_slope) {
        r.min_slope = std::fabs(s);
        r.witness = at_x0(f, t0 + t);
      }
      r.g_min = std::min(r.g_min, t);
      r.g_max = std::max(r.g_max, t);
      gsum += t;
      ++gcount;
    }
    r.min_roots = std::min(r.min_roots, static_cast<int>(fr.t.size()));
    r.max_roots = std::max(r.max_roots, static_cast<int>(fr.t.size()));
    r.fibers.push_back(std::move(fr));
  }
  if (gcount == 0) {
    r.g_min = r.g_max = 0.0;
    r.min_slope = 0.0;
  } else {
    r.g_mean = gsum / gcount;
  }
  r.transverse = gcount == 0 || r.min_slope > kTransverseSlope;
  r.components = r.transverse ? r.max_roots : 0;
  if (r.max_roots == 0)
    r.classification = LocusClass::Empty;
  else if (!r.transverse || r.min_roots != r.max_roots)
    r.classification = LocusClass::NonTransverse;
  else
    r.classification = r.max_roots == 1 ? LocusClass::Single : LocusClass::MultiComponent;
  return r;
}

NormalizationResult build_Phi(const PfaffianData& data, const LogSymplecticStructure& base) {
  const BManifoldSpec& spec = data.spec;
  const int n = spec.dim, comp = data.component;
  if (!data.monotone)
    throw Error(ErrorKind::Inadmissible, "dh/dt = " + std::to_string(data.min_dh_dt) + " <= 0 at " +
                                             point_str(data.monotone_witness, n));
  if (!data.close)
    throw Error(ErrorKind::Inadmissible, "|h - t| = " + std::to_string(data.max_gap) + " exceeds one unit (" +
                                             std::to_string(data.scale) + ") at " + point_str(data.close_witness, n));
  NormalizationResult r;
  r.data = data;
  const double t0 = spec.z_components[comp].t0, box = data.box;
  const ScalarField h = data.h;
  // heights depend only on the Z coordinates; memoize them per base point
  struct Cache {
    std::mutex lock;
    std::map<Point, Jet> values;
  };
  auto cache = std::make_shared<Cache>();
  r.g = ScalarField::from_function([h, t0, box, n, cache](const Point& y) {
    Point key = y;
    key[0] = 0.0;
    {
      std::lock_guard<std::mutex> guard(cache->lock);
      if (auto it = cache->values.find(key); it != cache->values.end()) return it->second;
    }
    const double lo = h.value(at_x0(y, t0 - box)), hi = h.value(at_x0(y, t0 + box));
    if (!(lo < 0.0 && hi > 0.0))
      throw Error(ErrorKind::Inadmissible, "no root of h in the normalization box at " + point_str(y, n));
    const double root = bisect_newton(h, y, t0 - box, t0 + box, lo);
    const Jet g = implicit_height(root - t0, h.jet(at_x0(y, root)), n);
    std::lock_guard<std::mutex> guard(cache->lock);
    if (cache->values.size() >= kHeightCacheSize) cache->values.clear();
    cache->values.emplace(key, g);
    return g;
  });

  const ScalarField g = r.g;
  const BManifoldSpec s = spec;
  r.phi = [g, s, comp, n](const Point& x) {
    std::array<Jet, kMaxDim> out{};
    const Taylor3 c = chi_catalog(s, collar_t(s, comp, x[0]));
    const Jet chi = chain(Jet::variable(x[0], 0), c.f, c.d1, c.d2);
    out[0] = Jet::variable(x[0], 0) - chi * g.jet(x);
    for (int k = 1; k < n; ++k) out[k] = Jet::variable(x[k], k);
    return out;
  };
  r.phi_inverse = chi_shift_inverse(g, spec, comp);

  r.min_dphi_dt = std::numeric_limits<double>::infinity();
  const double support = std::min(kChiSupport * spec.chi_scale, spec.collar_radius);
  for (const Point& f : fibers_of(spec, comp)) {
    const double gv = r.g.value(f);
    for (double t : uniform(-support, support, 65)) {
      const double m = 1.0 - chi_catalog(spec, t).d1 * gv;
      if (m < r.min_dphi_dt) {
        r.min_dphi_dt = m;
        r.monotone_witness = at_x0(f, t0 + t);
      }
    }
  }
  if (!(r.min_dphi_dt > 0.0))
    throw Error(ErrorKind::Inadmissible, "phi is not monotone in t at " + point_str(r.monotone_witness, n));
  (void)base;
  return r;
}

NormalizationResult pushforward_and_tangency(NormalizationResult r, const LogSymplecticStructure& base) {
  const BManifoldSpec& spec = base.spec;
  const int n = spec.dim, comp = r.data.component;
  const double t0 = spec.z_components[comp].t0;
  const double jac = schouten_jacobi_residual(r.data.w, spec, chart_grid(spec, {9, 6}));
  if (jac > 1e-9) throw Error(ErrorKind::InvalidStructure, "input is not Poisson: Jacobi residual " + std::to_string(jac));

  auto pf = std::make_shared<const Pushforward>(Pushforward{spec, comp, r.data.w, r.g, r.phi_inverse});
  BMultiVector out(n, 2, Frame::Coordinate);
  for (Mask m : out.masks())
    out[m] = ScalarField::from_function([pf, m](const Point& y) { return pf->at(y)[m]; });
  r.w_norm = out;

  r.tangency_defect = 0.0;
  for (const Point& y : fibers_of(spec, comp)) {
    const auto c = pf->at(y);
    const double scale = std::max(1.0, sup_abs_coefficients(r.data.w, r.phi_inverse(y)));
    for (int j = 1; j < n; ++j) r.tangency_defect = std::max(r.tangency_defect, std::fabs(c[1u | (1u << j)].v) / scale);
  }
  if (r.tangency_defect > kTangencyTol)
    throw Error(ErrorKind::TangencyFailure,
                "pushforward not tangent to Z: scaled defect " + std::to_string(r.tangency_defect));

  r.a.clear();
  for (int i = 1; i < n; ++i) {
    const Mask m = 1u | (1u << i);
    r.a.push_back(ScalarField::from_function([pf, m, spec, comp](const Point& y) {
      const double t = collar_t(spec, comp, y[0]);
      const Jet c = pf->at(y)[m];
      Jet q(std::fabs(t) > 1e-9 ? c.v / t : c.g[0]);
      q.g.fill(std::nan(""));
      q.drop_hessian();
      return q;
    }));
  }

  r.route_gap = 0.0;
  r.a_sup = 0.0;
  for (const Point& f : fibers_of(spec, comp))
    for (double t : uniform(-r.data.scale, r.data.scale, 17)) {
      const Point y = at_x0(f, t0 + t);
      for (int i = 1; i < n; ++i) {
        const double a = r.a[i - 1].value(y);
        r.a_sup = std::max(r.a_sup, std::fabs(a));
        r.route_gap = std::max(r.route_gap, std::fabs(a - a_integral(r, i, y)));
      }
    }
  return r;
}

double a_integral(const NormalizationResult& r, int i, const Point& y) {
  const BManifoldSpec& spec = r.data.spec;
  const int n = spec.dim, comp = r.data.component;
  const double t0 = spec.z_components[comp].t0;
  const double t = collar_t(spec, comp, y[0]);
  const Jet g = r.g.jet(y);
  static const QuadratureRule q = gauss_legendre(33, 0.0, 1.0);
  const BMultiVector& w = r.data.w;
  double sum = 0.0;
  for (std::size_t k = 0; k < q.nodes.size(); ++k) {
    const Point x = at_x0(y, t0 + q.nodes[k] * t + g.v);
    double integrand = w[1u | (1u << i)].jet(x).g[0];
    for (int j = 1; j < n; ++j) {
      if (j == i) continue;
      const Mask m = (1u << i) | (1u << j);
      const double dB = w[m].jet(x).g[0];
      integrand += (i < j ? dB : -dB) * g.g[j];
    }
    sum += q.weights[k] * integrand;
  }
  return sum;
}

BMultiVector shift_locus(const BMultiVector& w, const ScalarField& shift, const BManifoldSpec& spec, int component) {
  const int n = spec.dim;
  const double support = std::min(kChiSupport * spec.chi_scale, spec.collar_radius);
  for (const Point& f : fibers_of(spec, component)) {
    const Jet s = shift.jet(f);
    if (std::fabs(s.g[0]) > 1e-14)
      throw Error(ErrorKind::Rejected, "locus shift depends on the collar coordinate at " + point_str(f, n));
    for (double t : uniform(-support, support, 65))
      if (!(1.0 + chi_catalog(spec, t).d1 * s.v > 0.0))
        throw Error(ErrorKind::Rejected, "locus shift is not a diffeomorphism at " + point_str(f, n));
  }
  const ScalarField g = -shift;
  auto pf = std::make_shared<const Pushforward>(
      Pushforward{spec, component, to_frame(w, Frame::Coordinate, spec), g, chi_shift_inverse(g, spec, component)});
  BMultiVector out(n, 2, Frame::Coordinate);
  for (Mask m : out.masks())
    out[m] = ScalarField::from_function([pf, m](const Point& y) { return pf->at(y)[m]; });
  return out;
}

std::vector<NormalizationResult> normalize(const BMultiVector& w, const LogSymplecticStructure& base) {
  std::vector<NormalizationResult> out;
  BMultiVector current = to_frame(w, Frame::Coordinate, base.spec);
  for (int c = 0; c < static_cast<int>(base.spec.z_components.size()); ++c) {
    const LocusReport locus = detect_singular_locus(current, base, c);
    NormalizationResult r = pushforward_and_tangency(build_Phi(pfaffian_ratio(current, base, c), base), base);
    r.locus = locus;
    current = r.w_norm;
    out.push_back(std::move(r));
  }
  return out;
}

BNorms b_norms(const BMultiVector& sigma, const BManifoldSpec& spec, bool b_norm) {
  const BMultiVector s = to_frame(sigma, Frame::Coordinate, spec);
  const std::vector<Point> grid = chart_grid(spec);
  BNorms out;
  for (const Point& x : grid)
    for (Mask m : s.masks()) {
      const Jet j = s[m].jet(x);
      out.c0_smooth = std::max(out.c0_smooth, std::fabs(j.v));
      out.c1_smooth = std::max(out.c1_smooth, std::fabs(j.v));
      for (int k = 0; k < spec.dim; ++k) out.c1_smooth = std::max(out.c1_smooth, std::fabs(j.g[k]));
    }
  if (b_norm) {
    if (!is_tangent(s, spec)) throw Error(ErrorKind::Rejected, "b-norm of a bivector that is not tangent to Z");
    out.c0_b = sup_norm(to_frame(s, Frame::B, spec), grid);
  }
  return out;
}

ContinuityReport continuity_experiment(const BMultiVector& w, const BMultiVector& w_perturbed,
                                       const LogSymplecticStructure& base) {
  const BManifoldSpec& spec = base.spec;
  const NormalizationResult a = pushforward_and_tangency(build_Phi(pfaffian_ratio(w, base, 0), base), base);
  const NormalizationResult b = pushforward_and_tangency(build_Phi(pfaffian_ratio(w_perturbed, base, 0), base), base);
  const double t0 = spec.z_components[0].t0;
  ContinuityReport r;
  for (const Point& f : fibers_of(spec, 0)) {
    r.delta_g = std::max(r.delta_g, std::fabs(a.g.value(f) - b.g.value(f)));
    for (double t : uniform(-a.data.scale, a.data.scale, 17)) {
      const Point y = at_x0(f, t0 + t);
      for (std::size_t i = 0; i < a.a.size(); ++i)
        r.delta_a = std::max(r.delta_a, std::fabs(a.a[i].value(y) - b.a[i].value(y)));
    }
  }
  r.delta_w = b_norms(to_frame(w_perturbed, Frame::Coordinate, spec) - to_frame(w, Frame::Coordinate, spec), spec, false)
                  .c1_smooth;
  const double denom = r.delta_g + r.delta_w;
  r.ratio = denom > 0.0 ? r.delta_a / denom : 0.0;
  return r;
}

ContinuitySweep continuity_sweep(const BMultiVector& w, const BMultiVector& direction, const std::vector<double>& scales,
                                 const LogSymplecticStructure& base) {
  ContinuitySweep s;
  double lo = std::numeric_limits<double>::infinity();
  for (double e : scales) {
    ContinuityReport r = continuity_experiment(w, w + e * direction, base);
    r.scale = e;
    s.constant = std::max(s.constant, r.ratio);
    if (r.delta_a > kRoundoffA) lo = std::min(lo, r.ratio);
    s.rows.push_back(r);
  }
  s.spread = std::isfinite(lo) ? s.constant / lo : 1.0;
  return s;
}

std::pair<double, double> equivariance_defect(const NormalizationResult& r) {
  const BManifoldSpec& spec = r.data.spec;
  if (!spec.involution) throw Error(ErrorKind::Catalog, spec.name + " is not given on a double cover");
  const auto& gamma = spec.involution->map;
  const int n = spec.dim, comp = r.data.component;
  const double t0 = spec.z_components[comp].t0;
  double dg = 0.0, dphi = 0.0;
  const auto chart_gap = [&](const Point& a, const Point& b) {
    double m = 0.0;
    for (int k = 0; k < n; ++k) {
      double d = a[k] - b[k];
      const AxisSpec& ax = spec.principal.axes[k];
      if (ax.periodic) d -= ax.period() * std::round(d / ax.period());
      m = std::max(m, std::fabs(d));
    }
    return m;
  };
  const auto apply_phi = [&](const Point& x) {
    const auto j = r.phi(x);
    Point y{};
    for (int k = 0; k < n; ++k) y[k] = j[k].v;
    return y;
  };
  for (const Point& f : fibers_of(spec, comp)) {
    dg = std::max(dg, std::fabs(r.g.value(gamma(f)) + r.g.value(f)));
    for (double t : uniform(-r.data.box, r.data.box, 9)) {
      const Point x = at_x0(f, t0 + t);
      dphi = std::max(dphi, chart_gap(apply_phi(gamma(x)), gamma(apply_phi(x))));
    }
  }
  return {dg, dphi};
}

BMultiVector example3_bivector(const BManifoldSpec& s2, double eps, Example3 kind) {
  if (!(eps > 0.0)) throw Error(ErrorKind::Inadmissible, "plateau and three-circle families need eps > 0");
  const ScalarField coefficient = ScalarField::from_function([eps, kind](const Point& p) {
    const Jet z = Jet::variable(p[0], 0);
    const Jet a = abs(z);
    Jet h;
    if (kind == Example3::Plateau) {
      h = smoothstep((a - 0.5 * eps) / (0.5 * eps));
    } else {
      h = 2.0 * smoothstep((a - 0.25 * eps) / (0.5 * eps)) - 1.0;
    }
    // h z d_th ^ d_z = -h z d_z ^ d_th
    return -(h * z);
  });
  return BMultiVector::basis(s2.dim, {0, 1}, coefficient, Frame::Coordinate);
}

std::string fiber_trace_csv(const PfaffianData& d, int fibers, int samples) {
  const BManifoldSpec& spec = d.spec;
  const auto all = fibers_of(spec, d.component);
  const double t0 = spec.z_components[d.component].t0, r = spec.collar_radius;
  std::ostringstream os;
  os.precision(12);
  const auto names = spec.coordinate_names();
  for (int k = 1; k < spec.dim; ++k) os << names[k] << ",";
  os << "t,h\n";
  const std::size_t stride = std::max<std::size_t>(1, all.size() / std::max(1, fibers));
  for (std::size_t i = 0, used = 0; i < all.size() && used < static_cast<std::size_t>(fibers); i += stride, ++used)
    for (int j = 0; j < samples; ++j) {
      const double t = -r + 2.0 * r * (j + 1) / (samples + 1);
      for (int k = 1; k < spec.dim; ++k) os << all[i][k] << ",";
      os << t << "," << d.h.value(at_x0(all[i], t0 + t)) << "\n";
    }
  return os.str();
}

}  // namespace logsymp
