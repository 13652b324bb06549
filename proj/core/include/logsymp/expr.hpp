#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "logsymp/jet.hpp"

namespace logsymp {

/// Immutable expression tree over chart coordinates.
///
/// The textual form is a small math language: numbers, coordinate names,
/// `pi`, the binary operators `+ - * / ^`, unary minus, parentheses and the
/// functions sin, cos, tan, exp, log, sqrt, abs and smoothstep (quintic,
/// clamped to [0, 1]). `^` is right associative and binds tighter than unary
/// minus, so `-z^2` is `-(z^2)`.
class Expr {
 public:
  enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Smoothstep };

  Expr();  // the constant 0
  static Expr constant(double c);
  static Expr variable(int index);

  /// Parses `text`; identifiers resolve against `coordinate_names`.
  /// Throws Error(ErrorKind::Parse) on malformed input.
  static Expr parse(std::string_view text, const std::vector<std::string>& coordinate_names);

  /// Renders in the same language; parse(str()) reproduces the tree's values.
  std::string str(const std::vector<std::string>& coordinate_names) const;

  double value(const Point& p) const;
  Jet jet(const Point& p) const;

  Op op() const;
  bool is_constant() const;
  bool is_zero() const;
  double constant_value() const;

  Expr operator-() const;
  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr pow(const Expr& a, const Expr& b);
  static Expr apply(Op fn, const Expr& arg);

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

}  // namespace logsymp
