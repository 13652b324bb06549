#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "logsymp/expr.hpp"
#include "logsymp/jet.hpp"

namespace logsymp {

/// A smooth function on a chart, evaluable with derivatives.
///
/// Backed either by an expression tree (serializable, exact second
/// derivatives) or by a closure over other fields. Arithmetic between two
/// expression-backed fields stays expression-backed. Cheap to copy.
class ScalarField {
 public:
  using JetFn = std::function<Jet(const Point&)>;
  using ValueFn = std::function<double(const Point&)>;

  ScalarField();  // identically zero
  static ScalarField constant(double c);
  static ScalarField coordinate(int index);
  static ScalarField from_expr(Expr e);
  static ScalarField from_function(JetFn fn);
  /// With a cheaper value-only path, used by value().
  static ScalarField from_function(JetFn fn, ValueFn value);

  Jet jet(const Point& p) const;
  double value(const Point& p) const;
  double operator()(const Point& p) const { return value(p); }

  bool is_zero() const;
  /// Non-null when the field is expression-backed.
  const Expr* expr() const;

  /// Restricts coordinate `index` to `at` (the pullback of a function on the
  /// slice {x_index = at} along the projection forgetting that coordinate).
  ScalarField frozen(int index, double at) const;

  ScalarField operator-() const;
  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator/(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(double s, const ScalarField& a);
  ScalarField& operator+=(const ScalarField& b) { return *this = *this + b; }

 private:
  std::shared_ptr<const Expr> expr_;
  std::shared_ptr<const JetFn> fn_;
  std::shared_ptr<const ValueFn> value_fn_;
  bool zero_ = true;
};

/// Chain rule: given the jet of f at u (derivatives with respect to u) and the
/// jets of the map components u_k(y), returns the jet of f(u(y)).
Jet compose(const Jet& f_at_u, const std::array<Jet, kMaxDim>& u, int dim);

/// Evaluates f at the point u(y) where u is given by component jets.
Jet compose(const ScalarField& f, const std::array<Jet, kMaxDim>& u, int dim);

/// Removable-singularity quotient c / r for jets where c and r both vanish on
/// the same slice: exact jet division away from it, first-order corrected
/// L'Hopital (in coordinate `axis`) within `threshold` of it. The Hessian is
/// dropped in the corrected branch.
Jet divide_removable(const Jet& c, const Jet& r, int axis, double threshold = 1e-6);

}  // namespace logsymp
