#include "logsymp/manifold.hpp"

#include <cmath>
#include <numbers>

#include "logsymp/error.hpp"

namespace logsymp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

AxisSpec open_axis(std::string name, double lo, double hi) { return {std::move(name), lo, hi, false}; }
AxisSpec periodic_axis(std::string name, double lo, double hi) { return {std::move(name), lo, hi, true}; }

Cycle make_cycle(std::string id, std::vector<int> free_axes, std::vector<AxisSpec> ranges, Point anchor,
                 int z_component = -1) {
  Cycle c;
  c.id = std::move(id);
  c.degree = static_cast<int>(free_axes.size());
  c.free_axes = std::move(free_axes);
  c.ranges = std::move(ranges);
  c.anchor = anchor;
  c.z_component = z_component;
  return c;
}

/// Polar cap charts of the S^2 factor; the remaining coordinates pass through.
std::vector<CapChart> sphere_caps(int dim, const std::vector<AxisSpec>& rest) {
  std::vector<CapChart> caps;
  for (int pole = 0; pole < 2; ++pole) {
    const double sgn = pole == 0 ? 1.0 : -1.0;
    CapChart cap;
    cap.chart.name = pole == 0 ? "north" : "south";
    cap.chart.dim = dim;
    cap.chart.axes = {open_axis("u", -1.0, 1.0), open_axis("v", -1.0, 1.0)};
    for (const auto& a : rest) cap.chart.axes.push_back(a);
    cap.to_principal = [sgn, dim](const Point& q) {
      std::array<Jet, kMaxDim> out;
      const Jet u = Jet::variable(q[0], 0);
      const Jet v = Jet::variable(q[1], 1);
      const Jet r2 = u * u + v * v;
      out[0] = sgn * (1.0 - r2) / (1.0 + r2);
      // theta = atan2(v, u) with its jet built from d theta = (u dv - v du) / r^2.
      const double r2v = r2.v;
      Jet th(std::atan2(q[1], q[0]));
      if (th.v < 0.0) th.v += kTwoPi;
      th.g[0] = -q[1] / r2v;
      th.g[1] = q[0] / r2v;
      const double r4 = r2v * r2v;
      th.h[0][0] = 2.0 * q[0] * q[1] / r4;
      th.h[1][1] = -2.0 * q[0] * q[1] / r4;
      th.h[0][1] = th.h[1][0] = (q[1] * q[1] - q[0] * q[0]) / r4;
      out[1] = th;
      for (int k = 2; k < dim; ++k) out[k] = Jet::variable(q[k], k);
      return out;
    };
    caps.push_back(std::move(cap));
  }
  return caps;
}

BManifoldSpec make_s2() {
  BManifoldSpec s;
  s.name = "s2";
  s.dim = 2;
  s.principal = {"cylinder", 2, {open_axis("z", -1.0, 1.0), periodic_axis("th", 0.0, kTwoPi)}, true};
  s.caps = sphere_caps(2, {});
  s.z_components = {{"equator", 0.0, 1.0, ScalarField::constant(1.0)}};
  s.defining = ScalarField::coordinate(0);
  s.collar_radius = 1.0;
  s.lambda_profile = LambdaProfile::Identity;
  s.chi_scale = 0.15;
  s.betti_M = {1, 0, 1};
  s.betti_Z = {1, 1};
  const AxisSpec z = open_axis("z", -1.0, 1.0), th = periodic_axis("th", 0.0, kTwoPi);
  s.cycles = {
      make_cycle("s2:point", {}, {}, {0.5, 0.0, 0.0, 0.0}),
      make_cycle("s2:fund2", {0, 1}, {z, th}, {}),
      make_cycle("s2:zpoint", {}, {}, {0.0, 0.0, 0.0, 0.0}, 0),
      make_cycle("s2:equator", {1}, {th}, {0.0, 0.0, 0.0, 0.0}, 0),
  };
  s.homology_M = {{"s2:point"}, {}, {"s2:fund2"}};
  s.homology_Z = {{"s2:zpoint"}, {"s2:equator"}};
  s.grid = {129, 64};
  return s;
}

BManifoldSpec make_t2() {
  BManifoldSpec s;
  s.name = "t2";
  s.dim = 2;
  const AxisSpec sa = periodic_axis("s", -0.25, 0.75), ua = periodic_axis("u", 0.0, 1.0);
  s.principal = {"torus", 2, {sa, ua}, true};
  s.z_components = {
      {"s0", 0.0, 1.0, ScalarField::from_function([](const Point& p) { return sinc2pi(Jet::variable(p[0], 0)); })},
      {"s1", 0.5, -1.0,
       ScalarField::from_function([](const Point& p) { return -sinc2pi(Jet::variable(p[0], 0) - 0.5); })},
  };
  const std::vector<std::string> names{"s", "u"};
  s.defining = ScalarField::from_expr(Expr::parse("sin(2*pi*s)/(2*pi)", names));
  s.collar_radius = 0.2;
  s.lambda_profile = LambdaProfile::Quintic;
  s.chi_scale = 0.15 * 0.2;
  s.betti_M = {1, 2, 1};
  s.betti_Z = {2, 2};
  s.cycles = {
      make_cycle("t2:point", {}, {}, {0.25, 0.0, 0.0, 0.0}),
      make_cycle("t2:sloop", {0}, {sa}, {0.0, 0.5, 0.0, 0.0}),
      make_cycle("t2:uloop", {1}, {ua}, {0.25, 0.0, 0.0, 0.0}),
      make_cycle("t2:fund2", {0, 1}, {sa, ua}, {}),
      make_cycle("t2:zpoint0", {}, {}, {0.0, 0.0, 0.0, 0.0}, 0),
      make_cycle("t2:zpoint1", {}, {}, {0.5, 0.0, 0.0, 0.0}, 1),
      make_cycle("t2:z0", {1}, {ua}, {0.0, 0.0, 0.0, 0.0}, 0),
      make_cycle("t2:z1", {1}, {ua}, {0.5, 0.0, 0.0, 0.0}, 1),
  };
  s.homology_M = {{"t2:point"}, {"t2:sloop", "t2:uloop"}, {"t2:fund2"}};
  s.homology_Z = {{"t2:zpoint0", "t2:zpoint1"}, {"t2:z0", "t2:z1"}};
  s.grid = {128, 64};
  return s;
}

BManifoldSpec make_s2xt2() {
  BManifoldSpec s;
  s.name = "s2xt2";
  s.dim = 4;
  const AxisSpec z = open_axis("z", -1.0, 1.0), th = periodic_axis("th", 0.0, kTwoPi),
                 t1 = periodic_axis("th1", 0.0, kTwoPi), t2 = periodic_axis("th2", 0.0, kTwoPi);
  s.principal = {"cylinder_x_torus", 4, {z, th, t1, t2}, true};
  s.caps = sphere_caps(4, {t1, t2});
  s.z_components = {{"s1xt2", 0.0, 1.0, ScalarField::constant(1.0)}};
  s.defining = ScalarField::coordinate(0);
  s.collar_radius = 1.0;
  s.lambda_profile = LambdaProfile::Identity;
  s.chi_scale = 0.15;
  s.betti_M = {1, 2, 2, 2, 1};
  s.betti_Z = {1, 3, 3, 1};
  const Point off{0.5, 0.0, 0.0, 0.0};
  const Point on{0.0, 0.0, 0.0, 0.0};
  s.cycles = {
      make_cycle("s2xt2:point", {}, {}, off),
      make_cycle("s2xt2:th1", {2}, {t1}, off),
      make_cycle("s2xt2:th2", {3}, {t2}, off),
      make_cycle("s2xt2:s2", {0, 1}, {z, th}, on),
      make_cycle("s2xt2:t2", {2, 3}, {t1, t2}, off),
      make_cycle("s2xt2:s2xth1", {0, 1, 2}, {z, th, t1}, on),
      make_cycle("s2xt2:s2xth2", {0, 1, 3}, {z, th, t2}, on),
      make_cycle("s2xt2:fund4", {0, 1, 2, 3}, {z, th, t1, t2}, on),
      make_cycle("s2xt2:zpoint", {}, {}, on, 0),
      make_cycle("s2xt2:z:th", {1}, {th}, on, 0),
      make_cycle("s2xt2:z:th1", {2}, {t1}, on, 0),
      make_cycle("s2xt2:z:th2", {3}, {t2}, on, 0),
      make_cycle("s2xt2:z:th_th1", {1, 2}, {th, t1}, on, 0),
      make_cycle("s2xt2:z:th_th2", {1, 3}, {th, t2}, on, 0),
      make_cycle("s2xt2:z:th1_th2", {2, 3}, {t1, t2}, on, 0),
      make_cycle("s2xt2:z:fund3", {1, 2, 3}, {th, t1, t2}, on, 0),
  };
  s.homology_M = {{"s2xt2:point"},
                  {"s2xt2:th1", "s2xt2:th2"},
                  {"s2xt2:s2", "s2xt2:t2"},
                  {"s2xt2:s2xth1", "s2xt2:s2xth2"},
                  {"s2xt2:fund4"}};
  s.homology_Z = {{"s2xt2:zpoint"},
                  {"s2xt2:z:th", "s2xt2:z:th1", "s2xt2:z:th2"},
                  {"s2xt2:z:th_th1", "s2xt2:z:th_th2", "s2xt2:z:th1_th2"},
                  {"s2xt2:z:fund3"}};
  s.grid = {33, 16};
  return s;
}

BManifoldSpec make_rp2() {
  BManifoldSpec s = make_s2();
  s.name = "rp2";
  s.betti_M = {1, 0, 0};
  s.betti_Z = {1, 1};
  s.orientable = false;
  const AxisSpec half = periodic_axis("th", 0.0, kPi);
  s.cycles = {
      make_cycle("rp2:point", {}, {}, {0.5, 0.0, 0.0, 0.0}),
      make_cycle("rp2:zpoint", {}, {}, {0.0, 0.0, 0.0, 0.0}, 0),
      make_cycle("rp2:equator", {1}, {half}, {0.0, 0.0, 0.0, 0.0}, 0),
  };
  s.homology_M = {{"rp2:point"}, {}, {}};
  s.homology_Z = {{"rp2:zpoint"}, {"rp2:equator"}};
  s.involution = Involution{[](const Point& p) {
                              Point q = p;
                              q[0] = -p[0];
                              q[1] = std::fmod(p[1] + kPi, kTwoPi);
                              return q;
                            },
                            "antipodal map (z, th) -> (-z, th + pi) on the double cover"};
  s.covering_degree = 2;
  return s;
}

/// x0 - t0, reduced to the fundamental period when the first axis is periodic.
double offset(const BManifoldSpec& spec, double x0, int comp) {
  double d = x0 - spec.z_components[comp].t0;
  const AxisSpec& a = spec.principal.axes[0];
  if (a.periodic) {
    const double P = a.period();
    d -= P * std::floor(d / P + 0.5);
  }
  return d;
}

Jet dlog_term(const BManifoldSpec& spec, int comp, const Point& p) {
  const double d = offset(spec, p[0], comp);
  if (std::fabs(d) >= spec.collar_radius) return Jet();
  const Jet u = (Jet::variable(p[0], 0) + (d - p[0])) / spec.collar_radius;
  const double s = std::fabs(u.v);
  const Taylor3 q = dlog_profile(spec.lambda_profile, s);
  const double sg = u.v < 0.0 ? -1.0 : 1.0;
  return spec.z_components[comp].defining_ratio.jet(p) * chain(u, q.f, sg * q.d1, q.d2);
}

}  // namespace

std::vector<std::string> BManifoldSpec::coordinate_names() const {
  std::vector<std::string> names;
  for (const auto& a : principal.axes) names.push_back(a.name);
  return names;
}

const Cycle& BManifoldSpec::cycle(const std::string& id) const {
  for (const auto& c : cycles)
    if (c.id == id) return c;
  throw Error(ErrorKind::Catalog, "unknown cycle '" + id + "' on " + name);
}

int BManifoldSpec::collar_component(double x0) const {
  for (int i = 0; i < static_cast<int>(z_components.size()); ++i)
    if (std::fabs(offset(*this, x0, i)) < collar_radius) return i;
  return -1;
}

BManifoldSpec catalog_lookup(const std::string& name) {
  if (name == "s2") return make_s2();
  if (name == "t2") return make_t2();
  if (name == "s2xt2") return make_s2xt2();
  if (name == "rp2") return make_rp2();
  throw Error(ErrorKind::Catalog, "unknown catalog manifold '" + name + "'");
}

std::vector<std::string> catalog_names() { return {"s2", "t2", "s2xt2", "rp2"}; }

BManifoldSpec with_lambda_profile(BManifoldSpec spec, LambdaProfile profile) {
  spec.lambda_profile = profile;
  return spec;
}

LambdaValue lambda_eval(const BManifoldSpec& spec, const Point& p) {
  LambdaValue out;
  const int comp = spec.collar_component(p[0]);
  if (comp < 0) {
    out.value = 1.0;
    return out;
  }
  const double d = offset(spec, p[0], comp);
  const double s = std::fabs(d) / spec.collar_radius;
  const Taylor3 L = lambda_profile(spec.lambda_profile, s);
  out.value = L.f;
  out.derivative = (d < 0.0 ? -1.0 : 1.0) * L.d1 / spec.collar_radius;
  out.dlog_coefficient = dlog_term(spec, comp, p).v;
  return out;
}

double log_lambda(const BManifoldSpec& spec, const Point& p) {
  const LambdaValue l = lambda_eval(spec, p);
  if (l.value <= 0.0) throw Error(ErrorKind::SingularPoint, "log(lambda) evaluated on Z");
  return std::log(l.value);
}

ScalarField dlog_lambda_coefficient(const BManifoldSpec& spec, int component) {
  const int n = static_cast<int>(spec.z_components.size());
  if (component >= n) throw Error(ErrorKind::Catalog, "no Z component " + std::to_string(component));
  BManifoldSpec copy = spec;
  return ScalarField::from_function([copy, component, n](const Point& p) {
    Jet sum;
    for (int i = 0; i < n; ++i)
      if (component < 0 || component == i) sum += dlog_term(copy, i, p);
    return sum;
  });
}

Taylor3 chi_catalog(const BManifoldSpec& spec, double t) {
  const double k = spec.chi_scale;
  const Taylor3 c = chi_profile(t / k);
  return {c.f, c.d1 / k, c.d2 / (k * k), c.d3 / (k * k * k)};
}

ScalarField chi_field(const BManifoldSpec& spec, int component) {
  if (component < 0 || component >= static_cast<int>(spec.z_components.size()))
    throw Error(ErrorKind::Catalog, "no Z component " + std::to_string(component));
  BManifoldSpec copy = spec;
  return ScalarField::from_function([copy, component](const Point& p) {
    const double d = offset(copy, p[0], component);
    const Jet tau = (Jet::variable(p[0], 0) + (d - p[0])) / copy.chi_scale;
    const Taylor3 c = chi_profile(tau.v);
    return chain(tau, c.f, c.d1, c.d2);
  });
}

std::vector<double> axis_samples(const BManifoldSpec& spec, int axis, const GridSpec& grid) {
  const AxisSpec& a = spec.principal.axes[axis];
  int n = axis == 0 ? grid.t_points : grid.periodic_points;
  std::vector<double> out;
  if (a.periodic) {
    if (axis == 0) n = std::max(4, (n / 4) * 4);  // keeps every Z slice on the grid
    for (int j = 0; j < n; ++j) out.push_back(a.lo + a.period() * j / n);
  } else {
    if (n % 2 == 0) ++n;  // keeps t = 0 on the grid
    for (int j = 0; j < n; ++j) out.push_back(a.lo + (a.hi - a.lo) * (j + 1) / (n + 1));
  }
  return out;
}

std::vector<Point> chart_grid(const BManifoldSpec& spec, const GridSpec& grid) {
  std::vector<std::vector<double>> axes;
  for (int k = 0; k < spec.dim; ++k) axes.push_back(axis_samples(spec, k, grid));
  std::vector<Point> pts{Point{}};
  for (int k = 0; k < spec.dim; ++k) {
    std::vector<Point> next;
    next.reserve(pts.size() * axes[k].size());
    for (const auto& p : pts)
      for (double x : axes[k]) {
        Point q = p;
        q[k] = x;
        next.push_back(q);
      }
    pts = std::move(next);
  }
  return pts;
}

std::vector<Point> chart_grid(const BManifoldSpec& spec) { return chart_grid(spec, spec.grid); }

std::vector<Point> z_grid(const BManifoldSpec& spec, int component, const GridSpec& grid) {
  std::vector<Point> pts{Point{}};
  pts[0][0] = spec.z_components.at(component).t0;
  for (int k = 1; k < spec.dim; ++k) {
    const auto xs = axis_samples(spec, k, grid);
    std::vector<Point> next;
    for (const auto& p : pts)
      for (double x : xs) {
        Point q = p;
        q[k] = x;
        next.push_back(q);
      }
    pts = std::move(next);
  }
  return pts;
}

std::vector<Point> z_grid(const BManifoldSpec& spec, int component) { return z_grid(spec, component, spec.grid); }

}  // namespace logsymp
