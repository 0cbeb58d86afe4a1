#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "harmap/grid.hpp"

namespace harmap {

/// Parse failure with the byte offset of the offending token and the set of
/// tokens that would have been accepted there.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int offset, std::string expected)
      : Error(msg + " at offset " + std::to_string(offset) +
              (expected.empty() ? "" : " (expected " + expected + ")")),
        offset_(offset),
        expected_(std::move(expected)) {}
  int offset() const { return offset_; }
  const std::string& expected() const { return expected_; }

 private:
  int offset_;
  std::string expected_;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

/// Arithmetic expression over x1..x3: literals, pi, + - * / ^, unary minus,
/// sin cos exp log sqrt. `^` is right-associative and binds tighter than
/// unary minus. Evaluation is total on its domain; log/sqrt of non-positive
/// arguments and division by zero raise EvalError.
class Expression {
 public:
  Expression() = default;

  static Expression parse(const std::string& text);
  static Expression constant(double v) {
    Expression e;
    e.root_ = std::make_shared<Node>(Node{Kind::Number, v, -1, {}, {}});
    e.text_ = format_double(v);
    return e;
  }
  static Expression variable(int axis) {
    Expression e;
    e.root_ = std::make_shared<Node>(Node{Kind::Var, 0.0, axis, {}, {}});
    e.text_ = "x" + std::to_string(axis + 1);
    return e;
  }

  bool empty() const { return root_ == nullptr; }
  const std::string& text() const { return text_; }

  double eval(const std::array<double, 3>& x) const {
    if (!root_) throw EvalError("eval of empty expression");
    return eval_node(*root_, x);
  }

  /// Symbolic partial derivative with respect to x{axis+1}.
  Expression derivative(int axis) const {
    Expression e;
    e.root_ = diff_node(root_, axis);
    e.text_ = "d/dx" + std::to_string(axis + 1) + "(" + text_ + ")";
    return e;
  }

  /// Checks |expr(x) - expr(x + 2pi e_a)| <= tol on a 5^dim probe lattice for
  /// every axis.
  bool is_periodic(int dim, double tol = 1e-9) const {
    const int probes = 5;
    std::array<int, 3> idx{0, 0, 0};
    const int total = static_cast<int>(std::pow(probes, dim));
    for (int t = 0; t < total; ++t) {
      int rem = t;
      std::array<double, 3> x{0.0, 0.0, 0.0};
      for (int a = 0; a < dim; ++a) {
        idx[a] = rem % probes;
        rem /= probes;
        x[a] = kPeriod * idx[a] / probes + 0.37;  // avoid symmetric nodes
      }
      double base;
      try {
        base = eval(x);
      } catch (const EvalError&) {
        return false;
      }
      for (int a = 0; a < dim; ++a) {
        auto shifted = x;
        shifted[a] += kPeriod;
        double v;
        try {
          v = eval(shifted);
        } catch (const EvalError&) {
          return false;
        }
        if (std::abs(v - base) > tol) return false;
      }
    }
    return true;
  }

 private:
  enum class Kind : unsigned char {
    Number,
    Var,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt
  };

  struct Node {
    Kind kind;
    double value = 0.0;
    int axis = -1;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };
  using NodePtr = std::shared_ptr<const Node>;

  static std::string format_double(double v) {
    std::string s = std::to_string(v);
    return s;
  }

  static double eval_node(const Node& n, const std::array<double, 3>& x) {
    switch (n.kind) {
      case Kind::Number:
        return n.value;
      case Kind::Var:
        return x[n.axis];
      case Kind::Add:
        return eval_node(*n.lhs, x) + eval_node(*n.rhs, x);
      case Kind::Sub:
        return eval_node(*n.lhs, x) - eval_node(*n.rhs, x);
      case Kind::Mul:
        return eval_node(*n.lhs, x) * eval_node(*n.rhs, x);
      case Kind::Div: {
        const double d = eval_node(*n.rhs, x);
        if (d == 0.0) throw EvalError("division by zero");
        return eval_node(*n.lhs, x) / d;
      }
      case Kind::Pow: {
        const double b = eval_node(*n.lhs, x);
        const double e = eval_node(*n.rhs, x);
        const double r = std::pow(b, e);
        if (!std::isfinite(r)) throw EvalError("pow out of domain");
        return r;
      }
      case Kind::Neg:
        return -eval_node(*n.lhs, x);
      case Kind::Sin:
        return std::sin(eval_node(*n.lhs, x));
      case Kind::Cos:
        return std::cos(eval_node(*n.lhs, x));
      case Kind::Exp:
        return std::exp(eval_node(*n.lhs, x));
      case Kind::Log: {
        const double v = eval_node(*n.lhs, x);
        if (!(v > 0.0)) throw EvalError("log of non-positive argument");
        return std::log(v);
      }
      case Kind::Sqrt: {
        const double v = eval_node(*n.lhs, x);
        if (v < 0.0) throw EvalError("sqrt of negative argument");
        return std::sqrt(v);
      }
    }
    throw EvalError("corrupt expression node");
  }

  static NodePtr make(Kind k, NodePtr l, NodePtr r = nullptr) {
    return std::make_shared<Node>(Node{k, 0.0, -1, std::move(l), std::move(r)});
  }
  static NodePtr num(double v) {
    return std::make_shared<Node>(Node{Kind::Number, v, -1, {}, {}});
  }

  static NodePtr diff_node(const NodePtr& n, int axis) {
    if (!n) throw Error("derivative of empty expression");
    switch (n->kind) {
      case Kind::Number:
        return num(0.0);
      case Kind::Var:
        return num(n->axis == axis ? 1.0 : 0.0);
      case Kind::Add:
        return make(Kind::Add, diff_node(n->lhs, axis), diff_node(n->rhs, axis));
      case Kind::Sub:
        return make(Kind::Sub, diff_node(n->lhs, axis), diff_node(n->rhs, axis));
      case Kind::Mul:
        return make(Kind::Add,
                    make(Kind::Mul, diff_node(n->lhs, axis), n->rhs),
                    make(Kind::Mul, n->lhs, diff_node(n->rhs, axis)));
      case Kind::Div:
        // (u/v)' = u'/v - u v'/v^2
        return make(
            Kind::Sub, make(Kind::Div, diff_node(n->lhs, axis), n->rhs),
            make(Kind::Div, make(Kind::Mul, n->lhs, diff_node(n->rhs, axis)),
                 make(Kind::Mul, n->rhs, n->rhs)));
      case Kind::Pow: {
        // General case via u^v = exp(v log u); constant exponents get the
        // power rule to keep the domain (u may be negative).
        if (n->rhs->kind == Kind::Number) {
          const double p = n->rhs->value;
          return make(Kind::Mul, num(p),
                      make(Kind::Mul, make(Kind::Pow, n->lhs, num(p - 1.0)),
                           diff_node(n->lhs, axis)));
        }
        NodePtr as_exp = make(Kind::Exp, make(Kind::Mul, n->rhs,
                                              make(Kind::Log, n->lhs)));
        return diff_node(as_exp, axis);
      }
      case Kind::Neg:
        return make(Kind::Neg, diff_node(n->lhs, axis));
      case Kind::Sin:
        return make(Kind::Mul, make(Kind::Cos, n->lhs), diff_node(n->lhs, axis));
      case Kind::Cos:
        return make(Kind::Neg, make(Kind::Mul, make(Kind::Sin, n->lhs),
                                    diff_node(n->lhs, axis)));
      case Kind::Exp:
        return make(Kind::Mul, make(Kind::Exp, n->lhs), diff_node(n->lhs, axis));
      case Kind::Log:
        return make(Kind::Div, diff_node(n->lhs, axis), n->lhs);
      case Kind::Sqrt:
        return make(Kind::Div, diff_node(n->lhs, axis),
                    make(Kind::Mul, num(2.0), make(Kind::Sqrt, n->lhs)));
    }
    throw Error("corrupt expression node");
  }

  class Parser;

  NodePtr root_;
  std::string text_;
};

class Expression::Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  NodePtr run() {
    NodePtr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError("unexpected trailing input", static_cast<int>(pos_),
                       "end of input or operator");
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_product();
    for (;;) {
      if (accept('+'))
        lhs = make(Kind::Add, lhs, parse_product());
      else if (accept('-'))
        lhs = make(Kind::Sub, lhs, parse_product());
      else
        return lhs;
    }
  }

  NodePtr parse_product() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*'))
        lhs = make(Kind::Mul, lhs, parse_unary());
      else if (accept('/'))
        lhs = make(Kind::Div, lhs, parse_unary());
      else
        return lhs;
    }
  }

  // Unary minus sits above exponentiation: -2^2 == -(2^2).
  NodePtr parse_unary() {
    if (accept('-')) return make(Kind::Neg, parse_unary());
    return parse_power();
  }

  // Right-associative; the exponent re-enters at the unary level so 2^-3
  // parses.
  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return make(Kind::Pow, base, parse_unary());
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size())
      throw ParseError("unexpected end of input", static_cast<int>(pos_),
                       "number, identifier, '(', or '-'");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_sum();
      if (!accept(')'))
        throw ParseError("unbalanced parenthesis", static_cast<int>(pos_), ")");
      return inner;
    }
    throw ParseError(std::string("unexpected character '") + c + "'",
                     static_cast<int>(pos_), "number, identifier, '(', or '-'");
  }

  NodePtr parse_number() {
    const size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'))
        ++pos_;
      if (pos_ < text_.size() &&
          std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_])))
          ++pos_;
      } else {
        pos_ = mark;  // 'e' belongs to something else
      }
    }
    const std::string tok = text_.substr(start, pos_ - start);
    try {
      return num(std::stod(tok));
    } catch (const std::exception&) {
      throw ParseError("malformed number '" + tok + "'",
                       static_cast<int>(start), "numeric literal");
    }
  }

  NodePtr parse_identifier() {
    const size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_]))))
      ++pos_;
    const std::string name = text_.substr(start, pos_ - start);
    if (name == "pi") return num(std::numbers::pi);
    if (name == "x1" || name == "x2" || name == "x3") {
      const int axis = name[1] - '1';
      return std::make_shared<Node>(Node{Kind::Var, 0.0, axis, {}, {}});
    }
    Kind k;
    if (name == "sin")
      k = Kind::Sin;
    else if (name == "cos")
      k = Kind::Cos;
    else if (name == "exp")
      k = Kind::Exp;
    else if (name == "log")
      k = Kind::Log;
    else if (name == "sqrt")
      k = Kind::Sqrt;
    else
      throw ParseError("unknown identifier '" + name + "'",
                       static_cast<int>(start),
                       "x1, x2, x3, pi, or a function name");
    if (!accept('('))
      throw ParseError("function '" + name + "' needs an argument list",
                       static_cast<int>(pos_), "(");
    NodePtr arg = parse_sum();
    if (!accept(')'))
      throw ParseError("unbalanced parenthesis", static_cast<int>(pos_), ")");
    return make(k, arg);
  }

  const std::string& text_;
  size_t pos_ = 0;
};

inline Expression Expression::parse(const std::string& text) {
  Expression e;
  e.root_ = Parser(text).run();
  e.text_ = text;
  return e;
}

}  // namespace harmap
