#include "logsymp/field.hpp"

#include <cmath>

#include "logsymp/error.hpp"

namespace logsymp {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Catalog: return "catalog error";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::SingularPoint: return "singular point";
    case ErrorKind::Degeneracy: return "degenerate form";
    case ErrorKind::UnsupportedDegree: return "unsupported degree";
    case ErrorKind::NotClosed: return "form not closed";
    case ErrorKind::NotSmooth: return "form not smooth";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::ChartEscape: return "chart escape";
    case ErrorKind::Stiffness: return "stiffness";
    case ErrorKind::NoPrimitive: return "no primitive";
    case ErrorKind::OrientationMismatch: return "orientation mismatch";
    case ErrorKind::Inadmissible: return "inadmissible input";
    case ErrorKind::TangencyFailure: return "tangency failure";
    case ErrorKind::InvalidStructure: return "invalid structure";
    case ErrorKind::NotInvariant: return "not invariant";
    case ErrorKind::Rejected: return "rejected";
  }
  return "error";
}

ScalarField::ScalarField() = default;

ScalarField ScalarField::constant(double c) {
  ScalarField f;
  if (c == 0.0) return f;
  f.expr_ = std::make_shared<const Expr>(Expr::constant(c));
  f.zero_ = false;
  return f;
}

ScalarField ScalarField::coordinate(int index) { return from_expr(Expr::variable(index)); }

ScalarField ScalarField::from_expr(Expr e) {
  ScalarField f;
  if (e.is_zero()) return f;
  f.expr_ = std::make_shared<const Expr>(std::move(e));
  f.zero_ = false;
  return f;
}

ScalarField ScalarField::from_function(JetFn fn) {
  ScalarField f;
  f.fn_ = std::make_shared<const JetFn>(std::move(fn));
  f.zero_ = false;
  return f;
}

ScalarField ScalarField::from_function(JetFn fn, ValueFn value) {
  ScalarField f = from_function(std::move(fn));
  f.value_fn_ = std::make_shared<const ValueFn>(std::move(value));
  return f;
}

Jet ScalarField::jet(const Point& p) const {
  if (zero_) return Jet();
  if (expr_) return expr_->jet(p);
  return (*fn_)(p);
}

double ScalarField::value(const Point& p) const {
  if (zero_) return 0.0;
  if (expr_) return expr_->value(p);
  if (value_fn_) return (*value_fn_)(p);
  return (*fn_)(p).v;
}

bool ScalarField::is_zero() const { return zero_; }
const Expr* ScalarField::expr() const { return expr_.get(); }

ScalarField ScalarField::frozen(int index, double at) const {
  if (zero_) return *this;
  ScalarField self = *this;
  return from_function([self, index, at](const Point& p) {
    Point q = p;
    q[index] = at;
    Jet j = self.jet(q);
    j.g[index] = 0.0;
    for (int k = 0; k < kMaxDim; ++k) j.h[index][k] = j.h[k][index] = 0.0;
    return j;
  });
}

ScalarField ScalarField::operator-() const {
  if (zero_) return *this;
  if (expr_) return from_expr(-*expr_);
  ScalarField self = *this;
  return from_function([self](const Point& p) { return -self.jet(p); },
                       [self](const Point& p) { return -self.value(p); });
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  if (a.zero_) return b;
  if (b.zero_) return a;
  if (a.expr_ && b.expr_) return ScalarField::from_expr(*a.expr_ + *b.expr_);
  return ScalarField::from_function([a, b](const Point& p) { return a.jet(p) + b.jet(p); },
                                    [a, b](const Point& p) { return a.value(p) + b.value(p); });
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) { return a + (-b); }

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  if (a.zero_ || b.zero_) return ScalarField();
  if (a.expr_ && b.expr_) return ScalarField::from_expr(*a.expr_ * *b.expr_);
  return ScalarField::from_function([a, b](const Point& p) { return a.jet(p) * b.jet(p); },
                                    [a, b](const Point& p) { return a.value(p) * b.value(p); });
}

ScalarField operator/(const ScalarField& a, const ScalarField& b) {
  if (a.zero_) return ScalarField();
  if (a.expr_ && b.expr_) return ScalarField::from_expr(*a.expr_ / *b.expr_);
  return ScalarField::from_function([a, b](const Point& p) { return a.jet(p) / b.jet(p); },
                                    [a, b](const Point& p) { return a.value(p) / b.value(p); });
}

ScalarField operator*(double s, const ScalarField& a) {
  if (s == 0.0 || a.zero_) return ScalarField();
  return ScalarField::constant(s) * a;
}

Jet compose(const Jet& f, const std::array<Jet, kMaxDim>& u, int dim) {
  Jet r(f.v);
  for (int i = 0; i < kMaxDim; ++i) {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += f.g[k] * u[k].g[i];
    r.g[i] = s;
  }
  for (int i = 0; i < kMaxDim; ++i)
    for (int j = 0; j < kMaxDim; ++j) {
      double s = 0.0;
      for (int k = 0; k < dim; ++k) {
        s += f.g[k] * u[k].h[i][j];
        for (int l = 0; l < dim; ++l) s += f.h[k][l] * u[k].g[i] * u[l].g[j];
      }
      r.h[i][j] = s;
    }
  return r;
}

Jet compose(const ScalarField& f, const std::array<Jet, kMaxDim>& u, int dim) {
  Point q{};
  for (int k = 0; k < dim; ++k) q[k] = u[k].v;
  return compose(f.jet(q), u, dim);
}

Jet divide_removable(const Jet& c, const Jet& r, int axis, double threshold) {
  if (std::fabs(r.v) > threshold) return c / r;
  // c(t)/r(t) = (c'(t) - t c''(t)/2) / (r'(t) - t r''(t)/2) + O(t^2) when c, r vanish at t = 0,
  // with t measured by r / r'.
  const double t = r.v / r.g[axis];
  if (!c.has_hessian() || !r.has_hessian()) {
    // Only the leading term is available; exact on the slice itself.
    Jet q(c.g[axis] / r.g[axis]);
    q.g.fill(std::nan(""));
    q.drop_hessian();
    return q;
  }
  Jet num, den;
  num.v = c.g[axis] - 0.5 * t * c.h[axis][axis];
  den.v = r.g[axis] - 0.5 * t * r.h[axis][axis];
  // c = t a, r = t b: a_t = c_tt / 2 along the axis, a_i = c_ti across it.
  for (int i = 0; i < kMaxDim; ++i) {
    const double w = i == axis ? 0.5 : 1.0;
    num.g[i] = w * c.h[axis][i];
    den.g[i] = w * r.h[axis][i];
  }
  Jet q = num / den;
  q.drop_hessian();
  return q;
}

}  // namespace logsymp
