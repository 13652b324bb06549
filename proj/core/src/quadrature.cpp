#include "logsymp/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/trapezoidal.hpp>
#include <boost/math/special_functions/legendre.hpp>
#include <cmath>
#include <map>
#include <mutex>

#include "logsymp/error.hpp"

namespace logsymp {

namespace {

QuadratureRule reference_rule(int n) {
  static std::mutex mu;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  QuadratureRule r;
  for (double x : boost::math::legendre_p_zeros<double>(n)) {
    const double dp = boost::math::legendre_p_prime<double>(n, x);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes.push_back(x);
    r.weights.push_back(w);
    if (x != 0.0) {
      r.nodes.push_back(-x);
      r.weights.push_back(w);
    }
  }
  cache.emplace(n, r);
  return r;
}

}  // namespace

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw Error(ErrorKind::InvalidStructure, "quadrature rule needs at least one node");
  QuadratureRule r = reference_rule(n);
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    r.nodes[i] = m + h * r.nodes[i];
    r.weights[i] *= h;
  }
  return r;
}

QuadratureRule composite_gauss_legendre(int panels, int n, double a, double b) {
  QuadratureRule out;
  const double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const QuadratureRule r = gauss_legendre(n, a + p * w, a + (p + 1) * w);
    out.nodes.insert(out.nodes.end(), r.nodes.begin(), r.nodes.end());
    out.weights.insert(out.weights.end(), r.weights.begin(), r.weights.end());
  }
  return out;
}

double integrate_interval(const std::function<double(double)>& f, double a, double b, double tol, double* error) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 20, tol, &err);
  if (error) *error = err;
  return v;
}

double integrate_periodic(const std::function<double(double)>& f, double a, double b, double tol) {
  return boost::math::quadrature::trapezoidal(f, a, b, tol, 14);
}

namespace {

// Tensor rule at refinement level L: 8 * 2^L trapezoid nodes on periodic axes,
// 2^L Gauss-Legendre panels of 8 nodes on the others.
double tensor_box(const std::function<double(const std::vector<double>&)>& f, const std::vector<AxisSpec>& box,
                  int level) {
  std::vector<QuadratureRule> rules;
  for (const AxisSpec& a : box) {
    if (a.periodic) {
      const int n = 8 << level;
      QuadratureRule r;
      for (int j = 0; j < n; ++j) {
        r.nodes.push_back(a.lo + (a.hi - a.lo) * j / n);
        r.weights.push_back((a.hi - a.lo) / n);
      }
      rules.push_back(std::move(r));
    } else {
      rules.push_back(composite_gauss_legendre(1 << level, 8, a.lo, a.hi));
    }
  }
  std::vector<double> x(box.size());
  std::function<double(std::size_t)> sum = [&](std::size_t k) -> double {
    if (k == box.size()) return f(x);
    double s = 0.0;
    for (std::size_t j = 0; j < rules[k].nodes.size(); ++j) {
      x[k] = rules[k].nodes[j];
      s += rules[k].weights[j] * sum(k + 1);
    }
    return s;
  };
  return sum(0);
}

}  // namespace

double integrate_box(const std::function<double(const std::vector<double>&)>& f, const std::vector<AxisSpec>& box,
                     double tol) {
  if (box.empty()) return f({});
  if (box.size() == 1) {
    auto g = [&](double t) { return f({t}); };
    const AxisSpec& a = box[0];
    return a.periodic ? integrate_periodic(g, a.lo, a.hi, tol) : integrate_interval(g, a.lo, a.hi, tol);
  }
  // Nested adaptive rules stall on the noise of their inner integrals, so
  // multi-dimensional boxes refine a tensor rule uniformly instead.
  const double budget = 2e7;
  double prev = tensor_box(f, box, 0);
  for (int level = 1;; ++level) {
    if (std::pow(16.0 * (1 << (level - 1)), static_cast<double>(box.size())) > budget) return prev;
    const double cur = tensor_box(f, box, level);
    if (std::fabs(cur - prev) <= tol * std::max(1.0, std::fabs(cur))) return cur;
    prev = cur;
  }
}

}  // namespace logsymp
