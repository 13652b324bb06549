#include "logsymp/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "logsymp/error.hpp"
#include "logsymp/profiles.hpp"

namespace logsymp {

struct Expr::Node {
  Op op = Op::Const;
  double c = 0.0;
  int var = -1;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make_node(Expr::Op op, double c, int var, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->c = c;
  n->var = var;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

bool is_const(const NodePtr& n) { return n->op == Expr::Op::Const; }

double eval_value(const Expr::Node& n, const Point& p) {
  using Op = Expr::Op;
  switch (n.op) {
    case Op::Const: return n.c;
    case Op::Var: return p[n.var];
    case Op::Add: return eval_value(*n.a, p) + eval_value(*n.b, p);
    case Op::Sub: return eval_value(*n.a, p) - eval_value(*n.b, p);
    case Op::Mul: return eval_value(*n.a, p) * eval_value(*n.b, p);
    case Op::Div: return eval_value(*n.a, p) / eval_value(*n.b, p);
    case Op::Neg: return -eval_value(*n.a, p);
    case Op::Pow: return std::pow(eval_value(*n.a, p), eval_value(*n.b, p));
    case Op::Sin: return std::sin(eval_value(*n.a, p));
    case Op::Cos: return std::cos(eval_value(*n.a, p));
    case Op::Tan: return std::tan(eval_value(*n.a, p));
    case Op::Exp: return std::exp(eval_value(*n.a, p));
    case Op::Log: return std::log(eval_value(*n.a, p));
    case Op::Sqrt: return std::sqrt(eval_value(*n.a, p));
    case Op::Abs: return std::fabs(eval_value(*n.a, p));
    case Op::Smoothstep: return smoothstep5(eval_value(*n.a, p)).f;
  }
  return 0.0;
}

Jet eval_jet(const Expr::Node& n, const Point& p) {
  using Op = Expr::Op;
  switch (n.op) {
    case Op::Const: return Jet(n.c);
    case Op::Var: return Jet::variable(p[n.var], n.var);
    case Op::Add: return eval_jet(*n.a, p) + eval_jet(*n.b, p);
    case Op::Sub: return eval_jet(*n.a, p) - eval_jet(*n.b, p);
    case Op::Mul: return eval_jet(*n.a, p) * eval_jet(*n.b, p);
    case Op::Div: return eval_jet(*n.a, p) / eval_jet(*n.b, p);
    case Op::Neg: return -eval_jet(*n.a, p);
    case Op::Pow:
      if (is_const(n.b)) return pow(eval_jet(*n.a, p), n.b->c);
      return exp(eval_jet(*n.b, p) * log(eval_jet(*n.a, p)));
    case Op::Sin: return sin(eval_jet(*n.a, p));
    case Op::Cos: return cos(eval_jet(*n.a, p));
    case Op::Tan: return tan(eval_jet(*n.a, p));
    case Op::Exp: return exp(eval_jet(*n.a, p));
    case Op::Log: return log(eval_jet(*n.a, p));
    case Op::Sqrt: return sqrt(eval_jet(*n.a, p));
    case Op::Abs: return abs(eval_jet(*n.a, p));
    case Op::Smoothstep: return smoothstep(eval_jet(*n.a, p));
  }
  return Jet();
}

int precedence(Expr::Op op) {
  using Op = Expr::Op;
  switch (op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Const: return 5;  // negative constants are parenthesized separately
    default: return 5;
  }
}

const char* function_name(Expr::Op op) {
  using Op = Expr::Op;
  switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Tan: return "tan";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Abs: return "abs";
    case Op::Smoothstep: return "smoothstep";
    default: return nullptr;
  }
}

std::string format_number(double c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", c);
  std::string s(buf);
  if (c < 0.0) s = "(" + s + ")";
  return s;
}

void print(const Expr::Node& n, const std::vector<std::string>& names, std::string& out);

void print_child(const Expr::Node& child, int parent_prec, bool parenthesize_equal,
                 const std::vector<std::string>& names, std::string& out) {
  const int p = precedence(child.op);
  const bool paren = p < parent_prec || (parenthesize_equal && p == parent_prec);
  if (paren) out += '(';
  print(child, names, out);
  if (paren) out += ')';
}

void print(const Expr::Node& n, const std::vector<std::string>& names, std::string& out) {
  using Op = Expr::Op;
  switch (n.op) {
    case Op::Const: out += format_number(n.c); return;
    case Op::Var:
      out += n.var < static_cast<int>(names.size()) ? names[n.var] : "x" + std::to_string(n.var);
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const int p = precedence(n.op);
      print_child(*n.a, p, false, names, out);
      out += n.op == Op::Add ? " + " : n.op == Op::Sub ? " - " : n.op == Op::Mul ? "*" : "/";
      print_child(*n.b, p, true, names, out);
      return;
    }
    case Op::Neg:
      out += '-';
      print_child(*n.a, precedence(Op::Neg) + 1, false, names, out);
      return;
    case Op::Pow:
      print_child(*n.a, precedence(Op::Pow), true, names, out);
      out += '^';
      print_child(*n.b, precedence(Op::Pow), false, names, out);
      return;
    default:
      out += function_name(n.op);
      out += '(';
      print(*n.a, names, out);
      out += ')';
      return;
  }
}

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& names) : s_(text), names_(names) {}

  Expr parse_all() {
    Expr e = parse_sum();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::Parse, msg + " at offset " + std::to_string(pos_) + " in '" + std::string(s_) + "'");
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      if (accept('+')) lhs = lhs + parse_product();
      else if (accept('-')) lhs = lhs - parse_product();
      else return lhs;
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) lhs = lhs * parse_unary();
      else if (accept('/')) lhs = lhs / parse_unary();
      else return lhs;
    }
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (accept('^')) return pow(base, parse_unary());
    return base;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      const std::string id(s_.substr(start, pos_ - start));
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == '(') {
        ++pos_;
        Expr arg = parse_sum();
        if (!accept(')')) fail("expected ')' after function argument");
        return Expr::apply(function_op(id), arg);
      }
      if (id == "pi") return Expr::constant(std::numbers::pi);
      for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == id) return Expr::variable(static_cast<int>(i));
      pos_ = start;
      fail("unknown identifier '" + id + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  Expr::Op function_op(const std::string& id) {
    using Op = Expr::Op;
    if (id == "sin") return Op::Sin;
    if (id == "cos") return Op::Cos;
    if (id == "tan") return Op::Tan;
    if (id == "exp") return Op::Exp;
    if (id == "log") return Op::Log;
    if (id == "sqrt") return Op::Sqrt;
    if (id == "abs") return Op::Abs;
    if (id == "smoothstep") return Op::Smoothstep;
    fail("unknown function '" + id + "'");
  }

  Expr parse_number() {
    const std::string rest(s_.substr(pos_));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(rest, &used);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    pos_ += used;
    return Expr::constant(v);
  }

  std::string_view s_;
  const std::vector<std::string>& names_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr::Expr() : node_(make_node(Op::Const, 0.0, -1, nullptr, nullptr)) {}
Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::constant(double c) { return Expr(make_node(Op::Const, c, -1, nullptr, nullptr)); }
Expr Expr::variable(int index) { return Expr(make_node(Op::Var, 0.0, index, nullptr, nullptr)); }

Expr Expr::parse(std::string_view text, const std::vector<std::string>& coordinate_names) {
  return Parser(text, coordinate_names).parse_all();
}

std::string Expr::str(const std::vector<std::string>& coordinate_names) const {
  std::string out;
  print(*node_, coordinate_names, out);
  return out;
}

double Expr::value(const Point& p) const { return eval_value(*node_, p); }
Jet Expr::jet(const Point& p) const { return eval_jet(*node_, p); }

Expr::Op Expr::op() const { return node_->op; }
bool Expr::is_constant() const { return node_->op == Op::Const; }
bool Expr::is_zero() const { return is_constant() && node_->c == 0.0; }
double Expr::constant_value() const { return node_->c; }

Expr Expr::operator-() const {
  if (is_constant()) return constant(-node_->c);
  if (node_->op == Op::Neg) return Expr(node_->a);
  return Expr(make_node(Op::Neg, 0.0, -1, node_, nullptr));
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() + b.constant_value());
  return Expr(make_node(Expr::Op::Add, 0.0, -1, a.node_, b.node_));
}

Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() - b.constant_value());
  return Expr(make_node(Expr::Op::Sub, 0.0, -1, a.node_, b.node_));
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr();
  if (a.is_constant() && a.constant_value() == 1.0) return b;
  if (b.is_constant() && b.constant_value() == 1.0) return a;
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() * b.constant_value());
  return Expr(make_node(Expr::Op::Mul, 0.0, -1, a.node_, b.node_));
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_zero()) return Expr();
  if (b.is_constant() && b.constant_value() == 1.0) return a;
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() / b.constant_value());
  return Expr(make_node(Expr::Op::Div, 0.0, -1, a.node_, b.node_));
}

Expr pow(const Expr& a, const Expr& b) {
  if (b.is_zero()) return Expr::constant(1.0);
  if (b.is_constant() && b.constant_value() == 1.0) return a;
  return Expr(make_node(Expr::Op::Pow, 0.0, -1, a.node_, b.node_));
}

Expr Expr::apply(Op fn, const Expr& arg) { return Expr(make_node(fn, 0.0, -1, arg.node_, nullptr)); }

}  // namespace logsymp
