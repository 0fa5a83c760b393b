#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace slb {

// Raised by the parser; offset is the byte position of the offending token.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " (byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

// Raised when evaluation hits a pole or leaves the finite reals.
class EvalError : public std::runtime_error {
public:
  EvalError(const std::string& msg, double x)
      : std::runtime_error(msg + " at x=" + std::to_string(x)), x_(x) {}
  double x() const { return x_; }

private:
  double x_;
};

enum class NodeKind {
  Constant,
  Var,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Neg,
  Exp,
  Abs,
  Tanh,
  Sech,
  Min,
  Max,
  Piecewise,
  Indicator,
};

// Immutable expression tree over a single real variable x.
// Evaluation is a pure function of (tree, x); identical calls give
// identical doubles.
class Expr {
public:
  using Ptr = std::shared_ptr<const Expr>;

  struct Piece {
    double lo;  // -inf allowed
    double hi;  // +inf allowed; interval is [lo, hi)
    Ptr value;
  };

  static Ptr constant(double v);
  static Ptr var();
  static Ptr unary(NodeKind k, Ptr a);
  static Ptr binary(NodeKind k, Ptr a, Ptr b);
  // 1 on [lo, hi), 0 elsewhere.
  static Ptr indicator(double lo, double hi);
  // Pieces must be pairwise disjoint; gaps evaluate to 0.
  static Ptr piecewise(std::vector<Piece> pieces);

  NodeKind kind() const { return kind_; }
  double constant_value() const { return value_; }
  const Ptr& child_a() const { return a_; }
  const Ptr& child_b() const { return b_; }
  double interval_lo() const { return lo_; }
  double interval_hi() const { return hi_; }
  const std::vector<Piece>& pieces() const { return pieces_; }

  // Throws EvalError on division by zero or a non-finite result.
  double evaluate(double x) const;

  // Minimal-paren form; parse(to_string()) reproduces the tree and
  // printing is idempotent on the printed form.
  std::string to_string() const;

  // Interval endpoints baked into the tree (indicator and piecewise
  // edges), restricted to (lo, hi).
  void collect_static_breakpoints(double lo, double hi,
                                  std::vector<double>& out) const;

  // Static breakpoints plus numerically located kinks of abs/min/max
  // arguments and zeros of denominators inside (lo, hi).
  std::vector<double> breakpoints(double lo, double hi) const;

private:
  Expr() = default;
  NodeKind kind_ = NodeKind::Constant;
  double value_ = 0.0;       // Constant
  double lo_ = 0, hi_ = 0;   // Indicator
  Ptr a_, b_;
  std::vector<Piece> pieces_;
};

// Grammar: literals, x, + - * / ^, exp, abs, tanh, sech, min, max,
// piecewise((lo,hi,expr),...), indicator(lo,hi).  Throws ParseError.
Expr::Ptr parse_expression(std::string_view text);

// max(q, 0) and max(-q, 0) as trees; difference reproduces q pointwise.
Expr::Ptr positive_part(const Expr::Ptr& q);
Expr::Ptr negative_part(const Expr::Ptr& q);

// True when e samples to the constant 1 everywhere on [-window, window]
// (within 1e-12) including at its breakpoints.
bool expr_is_one(const Expr& e, double window);

}  // namespace slb
