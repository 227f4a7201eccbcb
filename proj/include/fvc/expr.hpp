#pragma once

// Expression language for Lagrangians L(t, x, y) and terminants l(a, b).
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | variable | function '(' args ')' | '(' expr ')'
//
// Variables are t, x1..xn, y1..yn, a1..an, b1..bn. Functions are sin, cos,
// exp, log, sqrt, abs, gamma (one argument) and pow (two arguments).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fvc/errors.hpp"
#include "fvc/jet.hpp"
#include "fvc/linalg.hpp"
#include "fvc/special.hpp"

namespace fvc {

enum class Op { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
enum class VarKind { T, X, Y, A, B };
enum class Fn { Sin, Cos, Exp, Log, Sqrt, Abs, Pow, Gamma };

struct Node {
  Op op = Op::Num;
  double num = 0.0;
  VarKind var = VarKind::T;
  std::size_t index = 0;  // zero-based component for x/y/a/b
  Fn fn = Fn::Sin;
  int lhs = -1;
  int rhs = -1;
  std::size_t offset = 0;
};

class Expr {
 public:
  Expr() = default;
  Expr(std::shared_ptr<const std::vector<Node>> nodes, int root, std::size_t dim, std::string source)
      : nodes_(std::move(nodes)), root_(root), dim_(dim), source_(std::move(source)) {}

  bool empty() const noexcept { return !nodes_; }
  const Node& node(int i) const { return (*nodes_)[static_cast<std::size_t>(i)]; }
  int root() const noexcept { return root_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::string& source() const noexcept { return source_; }

  bool uses(VarKind kind) const {
    if (!nodes_) return false;
    return std::any_of(nodes_->begin(), nodes_->end(), [&](const Node& n) { return n.op == Op::Var && n.var == kind; });
  }

 private:
  std::shared_ptr<const std::vector<Node>> nodes_;
  int root_ = -1;
  std::size_t dim_ = 0;
  std::string source_;
};

namespace detail {

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct FnInfo {
  const char* name;
  Fn fn;
  int arity;
};

inline constexpr FnInfo kFunctions[] = {{"sin", Fn::Sin, 1},  {"cos", Fn::Cos, 1},   {"exp", Fn::Exp, 1},
                                        {"log", Fn::Log, 1},  {"sqrt", Fn::Sqrt, 1}, {"abs", Fn::Abs, 1},
                                        {"pow", Fn::Pow, 2},  {"gamma", Fn::Gamma, 1}};

inline const char* fn_name(Fn f) {
  for (const auto& info : kFunctions)
    if (info.fn == f) return info.name;
  return "?";
}

class Parser {
 public:
  Parser(std::string_view text, std::size_t dim) : text_(text), dim_(dim) {}

  Expr run() {
    skip_ws();
    if (pos_ >= text_.size()) fail({"number", "variable", "function", "(", "-"}, "empty expression");
    const int root = parse_expr();
    skip_ws();
    if (pos_ < text_.size()) fail({"+", "-", "*", "/", "^", "end of input"}, "unexpected character");
    return Expr(std::make_shared<const std::vector<Node>>(std::move(nodes_)), root, dim_, std::string(text_));
  }

 private:
  std::string_view text_;
  std::size_t dim_;
  std::size_t pos_ = 0;
  std::vector<Node> nodes_;

  [[noreturn]] void fail(std::vector<std::string> expected, const std::string& what) const {
    throw ParseError(pos_, std::move(expected), what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  int add(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int binary(Op op, int l, int r, std::size_t off) {
    Node n;
    n.op = op;
    n.lhs = l;
    n.rhs = r;
    n.offset = off;
    return add(n);
  }

  int parse_expr() {
    int l = parse_term();
    for (;;) {
      skip_ws();
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
        const std::size_t off = pos_;
        const Op op = text_[pos_] == '+' ? Op::Add : Op::Sub;
        ++pos_;
        const int r = parse_term();
        l = binary(op, l, r, off);
      } else {
        return l;
      }
    }
  }

  int parse_term() {
    int l = parse_unary();
    for (;;) {
      skip_ws();
      if (pos_ < text_.size() && (text_[pos_] == '*' || text_[pos_] == '/')) {
        const std::size_t off = pos_;
        const Op op = text_[pos_] == '*' ? Op::Mul : Op::Div;
        ++pos_;
        const int r = parse_unary();
        l = binary(op, l, r, off);
      } else {
        return l;
      }
    }
  }

  int parse_unary() {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '-') {
      const std::size_t off = pos_++;
      const int u = parse_unary();
      Node n;
      n.op = Op::Neg;
      n.lhs = u;
      n.offset = off;
      return add(n);
    }
    return parse_power();
  }

  int parse_power() {
    const int base = parse_primary();
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '^') {
      const std::size_t off = pos_++;
      const int ex = parse_unary();
      return binary(Op::Pow, base, ex, off);
    }
    return base;
  }

  int parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ == start + 1 && text_[start] == '.') {
      pos_ = start;
      fail({"digit"}, "malformed number");
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) ++p;
        pos_ = p;
      } else {
        pos_ = p;
        fail({"digit"}, "malformed exponent");
      }
    }
    const std::string lit(text_.substr(start, pos_ - start));
    Node n;
    n.op = Op::Num;
    n.num = std::strtod(lit.c_str(), nullptr);
    n.offset = start;
    return add(n);
  }

  int parse_primary() {
    skip_ws();
    const std::vector<std::string> expected{"number", "variable", "function", "(", "-"};
    if (pos_ >= text_.size()) fail(expected, "unexpected end of input");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (c == '(') {
      ++pos_;
      const int e = parse_expr();
      if (!peek(')')) fail({")"}, "missing closing parenthesis");
      ++pos_;
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      const std::string id(text_.substr(start, pos_ - start));
      for (const auto& info : kFunctions) {
        if (id != info.name) continue;
        if (!peek('(')) fail({"("}, "function call needs parentheses");
        ++pos_;
        Node n;
        n.op = Op::Call;
        n.fn = info.fn;
        n.offset = start;
        n.lhs = parse_expr();
        if (info.arity == 2) {
          if (!peek(',')) fail({","}, std::string(info.name) + " takes two arguments");
          ++pos_;
          n.rhs = parse_expr();
        }
        if (!peek(')')) fail(info.arity == 2 ? std::vector<std::string>{")"} : std::vector<std::string>{")"},
                             std::string(info.name) + ": unexpected argument list");
        ++pos_;
        return add(n);
      }
      return variable(id, start);
    }
    fail(expected, std::string("unexpected character '") + c + "'");
  }

  int variable(const std::string& id, std::size_t start) {
    Node n;
    n.op = Op::Var;
    n.offset = start;
    if (id == "t") {
      n.var = VarKind::T;
      return add(n);
    }
    const char k = id[0];
    const bool digits = id.size() > 1 && std::all_of(id.begin() + 1, id.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); });
    if (digits && (k == 'x' || k == 'y' || k == 'a' || k == 'b')) {
      const unsigned long idx = std::strtoul(id.c_str() + 1, nullptr, 10);
      if (idx == 0 || idx > dim_)
        throw DimensionError("variable '" + id + "' at offset " + std::to_string(start) +
                             " outside state dimension " + std::to_string(dim_));
      n.var = k == 'x' ? VarKind::X : k == 'y' ? VarKind::Y : k == 'a' ? VarKind::A : VarKind::B;
      n.index = idx - 1;
      return add(n);
    }
    pos_ = start;
    fail({"t", "x<i>", "y<i>", "a<i>", "b<i>", "function"}, "unknown identifier '" + id + "'");
  }
};

inline int precedence(const Node& n) {
  switch (n.op) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    case Op::Num:
      return n.num < 0 ? 0 : 5;
    default:
      return 5;
  }
}

inline std::string var_name(const Node& n) {
  switch (n.var) {
    case VarKind::T:
      return "t";
    case VarKind::X:
      return "x" + std::to_string(n.index + 1);
    case VarKind::Y:
      return "y" + std::to_string(n.index + 1);
    case VarKind::A:
      return "a" + std::to_string(n.index + 1);
    case VarKind::B:
      return "b" + std::to_string(n.index + 1);
  }
  return "?";
}

inline std::string print_node(const Expr& e, int i) {
  const Node& n = e.node(i);
  auto wrap = [&](int child, bool parens) {
    const std::string s = print_node(e, child);
    return parens ? "(" + s + ")" : s;
  };
  switch (n.op) {
    case Op::Num:
      return format_number(n.num);
    case Op::Var:
      return var_name(n);
    case Op::Neg:
      return "-" + wrap(n.lhs, precedence(e.node(n.lhs)) < 3);
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const int p = precedence(n);
      const char* sym = n.op == Op::Add ? " + " : n.op == Op::Sub ? " - " : n.op == Op::Mul ? " * " : " / ";
      return wrap(n.lhs, precedence(e.node(n.lhs)) < p) + sym + wrap(n.rhs, precedence(e.node(n.rhs)) <= p);
    }
    case Op::Pow:
      return wrap(n.lhs, precedence(e.node(n.lhs)) < 5) + "^" + wrap(n.rhs, precedence(e.node(n.rhs)) < 3);
    case Op::Call: {
      std::string s = std::string(fn_name(n.fn)) + "(" + print_node(e, n.lhs);
      if (n.rhs >= 0) s += ", " + print_node(e, n.rhs);
      return s + ")";
    }
  }
  return "?";
}

inline std::string tree_node(const Expr& e, int i) {
  const Node& n = e.node(i);
  static const char* names[] = {"Num", "Var", "Neg", "Add", "Sub", "Mul", "Div", "Pow", "Call"};
  switch (n.op) {
    case Op::Num:
      return format_number(n.num);
    case Op::Var:
      return "Var " + var_name(n);
    case Op::Neg:
      return "Neg(" + tree_node(e, n.lhs) + ")";
    case Op::Call: {
      std::string s = std::string(fn_name(n.fn)) + "(" + tree_node(e, n.lhs);
      if (n.rhs >= 0) s += ", " + tree_node(e, n.rhs);
      return s + ")";
    }
    default:
      return std::string(names[static_cast<int>(n.op)]) + "(" + tree_node(e, n.lhs) + ", " + tree_node(e, n.rhs) + ")";
  }
}

// Value kernels shared by the plain and the jet evaluator so both produce
// bit-identical values.
inline double checked(double v, std::size_t off, const char* what) {
  if (!std::isfinite(v)) throw EvalError(off, what);
  return v;
}

inline double value_div(double a, double b, std::size_t off) {
  if (b == 0.0) throw EvalError(off, "division by zero");
  return checked(a / b, off, "non-finite quotient");
}

inline bool is_integer(double v) { return std::isfinite(v) && v == std::floor(v); }

inline double value_pow(double b, double e, std::size_t off) {
  if (b < 0.0 && !is_integer(e)) throw EvalError(off, "negative base with non-integer exponent");
  if (b == 0.0 && e < 0.0) throw EvalError(off, "pole: zero to a negative power");
  return checked(std::pow(b, e), off, "non-finite power");
}

inline double value_call(Fn f, double u, std::size_t off) {
  switch (f) {
    case Fn::Sin:
      return checked(std::sin(u), off, "non-finite sin");
    case Fn::Cos:
      return checked(std::cos(u), off, "non-finite cos");
    case Fn::Exp:
      return checked(std::exp(u), off, "exp overflow");
    case Fn::Log:
      if (!(u > 0.0)) throw EvalError(off, "log of a non-positive argument");
      return std::log(u);
    case Fn::Sqrt:
      if (u < 0.0) throw EvalError(off, "sqrt of a negative argument");
      return std::sqrt(u);
    case Fn::Abs:
      return std::abs(u);
    case Fn::Gamma:
      if (!(u > 0.0)) throw EvalError(off, "gamma of a non-positive argument");
      return checked(gamma(u), off, "gamma overflow");
    case Fn::Pow:
      break;
  }
  throw EvalError(off, "bad call");
}

struct Bindings {
  double t = 0.0;
  std::span<const double> x, y, a, b;
};

inline double bound_value(const Node& n, const Bindings& env) {
  auto pick = [&](std::span<const double> v) {
    if (n.index >= v.size()) throw DimensionError("missing value for " + var_name(n));
    return v[n.index];
  };
  switch (n.var) {
    case VarKind::T:
      return env.t;
    case VarKind::X:
      return pick(env.x);
    case VarKind::Y:
      return pick(env.y);
    case VarKind::A:
      return pick(env.a);
    case VarKind::B:
      return pick(env.b);
  }
  return 0.0;
}

inline double eval_node(const Expr& e, int i, const Bindings& env) {
  const Node& n = e.node(i);
  switch (n.op) {
    case Op::Num:
      return n.num;
    case Op::Var:
      return bound_value(n, env);
    case Op::Neg:
      return -eval_node(e, n.lhs, env);
    case Op::Add:
      return checked(eval_node(e, n.lhs, env) + eval_node(e, n.rhs, env), n.offset, "non-finite sum");
    case Op::Sub:
      return checked(eval_node(e, n.lhs, env) - eval_node(e, n.rhs, env), n.offset, "non-finite difference");
    case Op::Mul:
      return checked(eval_node(e, n.lhs, env) * eval_node(e, n.rhs, env), n.offset, "non-finite product");
    case Op::Div: {
      const double a = eval_node(e, n.lhs, env);
      return value_div(a, eval_node(e, n.rhs, env), n.offset);
    }
    case Op::Pow: {
      const double b = eval_node(e, n.lhs, env);
      return value_pow(b, eval_node(e, n.rhs, env), n.offset);
    }
    case Op::Call: {
      const double u = eval_node(e, n.lhs, env);
      if (n.fn == Fn::Pow) return value_pow(u, eval_node(e, n.rhs, env), n.offset);
      return value_call(n.fn, u, n.offset);
    }
  }
  return 0.0;
}

// Jet evaluation: `first` and `second` select which variable kinds occupy
// slots [0, dim) and [dim, 2 dim).
struct JetContext {
  const Expr& e;
  const Bindings& env;
  VarKind first;
  VarKind second;
  std::size_t k;
};

inline Jet2 checked_jet(Jet2 j, std::size_t off) {
  if (!j.finite()) throw EvalError(off, "non-finite derivative");
  return j;
}

inline Jet2 jet_pow(const Jet2& b, const Jet2& ex, std::size_t off, std::size_t k) {
  const double val = value_pow(b.v, ex.v, off);
  if (ex.is_constant()) {
    const double e = ex.v;
    if (e == 0.0) return Jet2::constant(val);
    const double f1 = e * std::pow(b.v, e - 1.0);
    const double c2 = e * (e - 1.0);
    const double f2 = c2 == 0.0 ? 0.0 : c2 * std::pow(b.v, e - 2.0);
    return checked_jet(jet::unary(b, val, f1, f2, k), off);
  }
  if (!(b.v > 0.0)) throw EvalError(off, "variable exponent needs a positive base");
  const double lb = std::log(b.v);
  const Jet2 logb = jet::unary(b, lb, 1.0 / b.v, -1.0 / (b.v * b.v), k);
  const Jet2 m = jet::mul(ex.v * lb, ex, logb, k);
  return checked_jet(jet::unary(m, val, val, val, k), off);
}

inline Jet2 jet_node(const JetContext& c, int i) {
  const Node& n = c.e.node(i);
  const std::size_t k = c.k;
  switch (n.op) {
    case Op::Num:
      return Jet2::constant(n.num);
    case Op::Var: {
      const double v = bound_value(n, c.env);
      if (n.var == c.first) return Jet2::variable(v, n.index, k);
      if (n.var == c.second) return Jet2::variable(v, c.e.dim() + n.index, k);
      return Jet2::constant(v);
    }
    case Op::Neg: {
      const Jet2 u = jet_node(c, n.lhs);
      return jet::linear(-u.v, u, -1.0, u, 0.0, k);
    }
    case Op::Add:
    case Op::Sub: {
      const Jet2 a = jet_node(c, n.lhs);
      const Jet2 b = jet_node(c, n.rhs);
      const double v = n.op == Op::Add ? a.v + b.v : a.v - b.v;
      return checked_jet(jet::linear(checked(v, n.offset, "non-finite sum"), a, 1.0, b, n.op == Op::Add ? 1.0 : -1.0, k),
                         n.offset);
    }
    case Op::Mul: {
      const Jet2 a = jet_node(c, n.lhs);
      const Jet2 b = jet_node(c, n.rhs);
      return checked_jet(jet::mul(checked(a.v * b.v, n.offset, "non-finite product"), a, b, k), n.offset);
    }
    case Op::Div: {
      const Jet2 a = jet_node(c, n.lhs);
      const Jet2 b = jet_node(c, n.rhs);
      return checked_jet(jet::div(value_div(a.v, b.v, n.offset), a, b, k), n.offset);
    }
    case Op::Pow: {
      const Jet2 a = jet_node(c, n.lhs);
      return jet_pow(a, jet_node(c, n.rhs), n.offset, k);
    }
    case Op::Call: {
      const Jet2 u = jet_node(c, n.lhs);
      if (n.fn == Fn::Pow) return jet_pow(u, jet_node(c, n.rhs), n.offset, k);
      const double f0 = value_call(n.fn, u.v, n.offset);
      double f1 = 0.0, f2 = 0.0;
      switch (n.fn) {
        case Fn::Sin:
          f1 = std::cos(u.v);
          f2 = -f0;
          break;
        case Fn::Cos:
          f1 = -std::sin(u.v);
          f2 = -f0;
          break;
        case Fn::Exp:
          f1 = f0;
          f2 = f0;
          break;
        case Fn::Log:
          f1 = 1.0 / u.v;
          f2 = -1.0 / (u.v * u.v);
          break;
        case Fn::Sqrt:
          f1 = 0.5 / f0;
          f2 = -0.25 / (f0 * u.v);
          break;
        case Fn::Abs:
          f1 = u.v > 0.0 ? 1.0 : (u.v < 0.0 ? -1.0 : 0.0);
          f2 = 0.0;
          break;
        case Fn::Gamma: {
          const double psi = digamma(u.v);
          f1 = f0 * psi;
          f2 = f0 * (psi * psi + trigamma(u.v));
          break;
        }
        case Fn::Pow:
          break;
      }
      return checked_jet(jet::unary(u, f0, f1, f2, k), n.offset);
    }
  }
  return Jet2::constant(0.0);
}

}  // namespace detail

/// Parses `text` for state dimension `n`.
inline Expr parse(std::string_view text, std::size_t n) { return detail::Parser(text, n).run(); }

/// Canonical form: minimal parentheses, binary operators spaced, "^" tight.
inline std::string print(const Expr& e) { return e.empty() ? std::string() : detail::print_node(e, e.root()); }

/// Constructor-style dump, e.g. Add(Var x1, Mul(Var t, 2)).
inline std::string tree_string(const Expr& e) { return e.empty() ? std::string() : detail::tree_node(e, e.root()); }

inline double eval(const Expr& e, double t, std::span<const double> x, std::span<const double> y,
                   std::span<const double> a = {}, std::span<const double> b = {}) {
  const detail::Bindings env{t, x, y, a, b};
  return detail::eval_node(e, e.root(), env);
}

/// Value with first and second partials. For a Lagrangian the blocks are
/// (x, y); for a terminant (see eval_terminant_jet) they are (a, b).
struct Jet2Result {
  double value = 0.0;
  Vec grad_x, grad_y;
  Matrix H_xx, H_xy, H_yy;  // H_xy(i,j) = d2/dx_i dy_j
};

namespace detail {

inline Jet2Result unpack(const Jet2& j, std::size_t n) {
  const std::size_t k = 2 * n;
  Jet2Result r{j.v, Vec(n), Vec(n), Matrix(n, n), Matrix(n, n), Matrix(n, n)};
  for (std::size_t i = 0; i < n; ++i) {
    r.grad_x[i] = j.grad(i);
    r.grad_y[i] = j.grad(n + i);
    for (std::size_t l = 0; l < n; ++l) {
      r.H_xx(i, l) = j.hess(i, l, k);
      r.H_xy(i, l) = j.hess(i, n + l, k);
      r.H_yy(i, l) = j.hess(n + i, n + l, k);
    }
  }
  return r;
}

}  // namespace detail

inline Jet2Result eval_jet2(const Expr& e, double t, std::span<const double> x, std::span<const double> y) {
  if (e.uses(VarKind::A) || e.uses(VarKind::B)) throw DimensionError("eval_jet2: expression uses terminant variables");
  const detail::Bindings env{t, x, y, {}, {}};
  const detail::JetContext ctx{e, env, VarKind::X, VarKind::Y, 2 * e.dim()};
  return detail::unpack(detail::jet_node(ctx, e.root()), e.dim());
}

/// Partials of a terminant l(a, b): grad_x is l_a, grad_y is l_b, H_xx is l_aa,
/// H_xy is l_ab and H_yy is l_bb.
inline Jet2Result eval_terminant_jet(const Expr& e, std::span<const double> a, std::span<const double> b) {
  if (e.uses(VarKind::X) || e.uses(VarKind::Y)) throw DimensionError("terminant may only use a and b variables");
  const detail::Bindings env{0.0, {}, {}, a, b};
  const detail::JetContext ctx{e, env, VarKind::A, VarKind::B, 2 * e.dim()};
  return detail::unpack(detail::jet_node(ctx, e.root()), e.dim());
}

// ---------------------------------------------------------------------------
// Polynomial shape analysis

/// Monomials in the 4n variables (x, y, a, b), each tagged with whether its
/// coefficient may depend on t. Absent means "not a polynomial".
struct Shape {
  std::map<std::vector<int>, bool> terms;
};

namespace detail {

inline constexpr std::size_t kMaxTerms = 256;

struct ShapeAnalyzer {
  const Expr& e;
  std::size_t n;

  std::vector<int> zero() const { return std::vector<int>(4 * n, 0); }

  static bool free_of_state(const Shape& s) {
    for (const auto& [mono, tdep] : s.terms)
      for (int d : mono)
        if (d != 0) return false;
    return true;
  }

  static bool depends_on_t(const Shape& s) {
    for (const auto& [mono, tdep] : s.terms)
      if (tdep) return true;
    return false;
  }

  Shape scalar(bool tdep) const {
    Shape s;
    s.terms[zero()] = tdep;
    return s;
  }

  static void merge(Shape& into, const Shape& other) {
    for (const auto& [mono, tdep] : other.terms) {
      auto [it, inserted] = into.terms.emplace(mono, tdep);
      if (!inserted) it->second = it->second || tdep;
    }
  }

  std::optional<Shape> product(const Shape& a, const Shape& b) const {
    Shape r;
    for (const auto& [ma, ta] : a.terms)
      for (const auto& [mb, tb] : b.terms) {
        std::vector<int> m(ma.size());
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
        auto [it, inserted] = r.terms.emplace(m, ta || tb);
        if (!inserted) it->second = it->second || ta || tb;
        if (r.terms.size() > kMaxTerms) return std::nullopt;
      }
    return r;
  }

  // Constant numeric value of a state- and t-free subtree.
  std::optional<double> constant_value(int i) const {
    try {
      const Bindings env{};
      const auto s = analyze(i);
      if (!s || !free_of_state(*s) || depends_on_t(*s)) return std::nullopt;
      return eval_node(e, i, env);
    } catch (const Error&) {
      return std::nullopt;
    }
  }

  std::optional<Shape> analyze(int i) const {
    const Node& nd = e.node(i);
    switch (nd.op) {
      case Op::Num:
        return scalar(false);
      case Op::Var: {
        if (nd.var == VarKind::T) return scalar(true);
        Shape s;
        std::vector<int> m = zero();
        const std::size_t block = nd.var == VarKind::X ? 0 : nd.var == VarKind::Y ? 1 : nd.var == VarKind::A ? 2 : 3;
        m[block * n + nd.index] = 1;
        s.terms[m] = false;
        return s;
      }
      case Op::Neg:
        return analyze(nd.lhs);
      case Op::Add:
      case Op::Sub: {
        auto a = analyze(nd.lhs);
        auto b = analyze(nd.rhs);
        if (!a || !b) return std::nullopt;
        merge(*a, *b);
        return a;
      }
      case Op::Mul: {
        auto a = analyze(nd.lhs);
        auto b = analyze(nd.rhs);
        if (!a || !b) return std::nullopt;
        return product(*a, *b);
      }
      case Op::Div: {
        auto a = analyze(nd.lhs);
        auto b = analyze(nd.rhs);
        if (!a || !b || !free_of_state(*b)) return std::nullopt;
        if (depends_on_t(*b))
          for (auto& [mono, tdep] : a->terms) tdep = true;
        return a;
      }
      case Op::Pow:
        return power(nd.lhs, nd.rhs);
      case Op::Call: {
        if (nd.fn == Fn::Pow) return power(nd.lhs, nd.rhs);
        auto a = analyze(nd.lhs);
        if (!a || !free_of_state(*a)) return std::nullopt;
        return scalar(depends_on_t(*a));
      }
    }
    return std::nullopt;
  }

  std::optional<Shape> power(int base, int exponent) const {
    auto b = analyze(base);
    auto x = analyze(exponent);
    if (!b || !x) return std::nullopt;
    if (free_of_state(*b) && free_of_state(*x)) return scalar(depends_on_t(*b) || depends_on_t(*x));
    const auto k = constant_value(exponent);
    if (!k || !is_integer(*k) || *k < 0.0 || *k > 16.0) return std::nullopt;
    Shape r = scalar(false);
    for (int j = 0; j < static_cast<int>(*k); ++j) {
      auto p = product(r, *b);
      if (!p) return std::nullopt;
      r = std::move(*p);
    }
    return r;
  }
};

}  // namespace detail

inline std::optional<Shape> analyze_shape(const Expr& e) {
  if (e.empty()) return std::nullopt;
  return detail::ShapeAnalyzer{e, e.dim()}.analyze(e.root());
}

/// True when every monomial of L is free of y, linear in a single x component
/// (with any t-dependence), or quadratic in y with a constant coefficient.
inline bool is_separable_lagrangian(const Expr& e) {
  const auto s = analyze_shape(e);
  if (!s) return false;
  const std::size_t n = e.dim();
  for (const auto& [mono, tdep] : s->terms) {
    int dx = 0, dy = 0, dab = 0;
    for (std::size_t i = 0; i < n; ++i) {
      dx += mono[i];
      dy += mono[n + i];
      dab += mono[2 * n + i] + mono[3 * n + i];
    }
    if (dab != 0) return false;
    if (dx == 0 && dy == 0) continue;
    if (dx == 1 && dy == 0) continue;
    if (dx == 0 && dy == 2 && !tdep) continue;
    return false;
  }
  return true;
}

/// True when the terminant is a polynomial of degree at most two with constant coefficients.
inline bool is_quadratic_terminant(const Expr& e) {
  const auto s = analyze_shape(e);
  if (!s) return false;
  for (const auto& [mono, tdep] : s->terms) {
    if (tdep) return false;
    int deg = 0;
    for (int d : mono) deg += d;
    if (deg > 2) return false;
  }
  return true;
}

/// True when L_x and L_y can be evaluated without knowing x(t).
inline bool partials_free_of_x(const Expr& e) {
  const auto s = analyze_shape(e);
  if (!s) return false;
  const std::size_t n = e.dim();
  for (const auto& [mono, tdep] : s->terms) {
    int dx = 0, dy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      dx += mono[i];
      dy += mono[n + i];
    }
    if (dx >= 2 || (dx == 1 && dy >= 1)) return false;
  }
  return true;
}

}  // namespace fvc
