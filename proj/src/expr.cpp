#include "slb/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>

namespace slb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double checked(double v, double x, const char* what) {
  if (!std::isfinite(v)) throw EvalError(what, x);
  return v;
}

}  // namespace

Expr::Ptr Expr::constant(double v) {
  auto e = std::shared_ptr<Expr>(new Expr);
  e->kind_ = NodeKind::Constant;
  e->value_ = v;
  return e;
}

Expr::Ptr Expr::var() {
  auto e = std::shared_ptr<Expr>(new Expr);
  e->kind_ = NodeKind::Var;
  return e;
}

Expr::Ptr Expr::unary(NodeKind k, Ptr a) {
  auto e = std::shared_ptr<Expr>(new Expr);
  e->kind_ = k;
  e->a_ = std::move(a);
  return e;
}

Expr::Ptr Expr::binary(NodeKind k, Ptr a, Ptr b) {
  auto e = std::shared_ptr<Expr>(new Expr);
  e->kind_ = k;
  e->a_ = std::move(a);
  e->b_ = std::move(b);
  return e;
}

Expr::Ptr Expr::indicator(double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("indicator needs lo < hi");
  auto e = std::shared_ptr<Expr>(new Expr);
  e->kind_ = NodeKind::Indicator;
  e->lo_ = lo;
  e->hi_ = hi;
  return e;
}

Expr::Ptr Expr::piecewise(std::vector<Piece> pieces) {
  if (pieces.empty()) throw std::invalid_argument("piecewise needs pieces");
  std::sort(pieces.begin(), pieces.end(),
            [](const Piece& a, const Piece& b) { return a.lo < b.lo; });
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (!(pieces[i].lo < pieces[i].hi))
      throw std::invalid_argument("piecewise piece needs lo < hi");
    if (i + 1 < pieces.size() && pieces[i].hi > pieces[i + 1].lo)
      throw std::invalid_argument("piecewise pieces overlap");
  }
  auto e = std::shared_ptr<Expr>(new Expr);
  e->kind_ = NodeKind::Piecewise;
  e->pieces_ = std::move(pieces);
  return e;
}

double Expr::evaluate(double x) const {
  switch (kind_) {
    case NodeKind::Constant:
      return value_;
    case NodeKind::Var:
      return x;
    case NodeKind::Add:
      return checked(a_->evaluate(x) + b_->evaluate(x), x, "overflow in +");
    case NodeKind::Sub:
      return checked(a_->evaluate(x) - b_->evaluate(x), x, "overflow in -");
    case NodeKind::Mul:
      return checked(a_->evaluate(x) * b_->evaluate(x), x, "overflow in *");
    case NodeKind::Div: {
      double den = b_->evaluate(x);
      if (den == 0.0) throw EvalError("division by zero", x);
      return checked(a_->evaluate(x) / den, x, "overflow in /");
    }
    case NodeKind::Pow: {
      double v = std::pow(a_->evaluate(x), b_->evaluate(x));
      if (std::isnan(v)) throw EvalError("power outside the reals", x);
      return checked(v, x, "power overflow");
    }
    case NodeKind::Neg:
      return -a_->evaluate(x);
    case NodeKind::Exp:
      return checked(std::exp(a_->evaluate(x)), x, "exp overflow");
    case NodeKind::Abs:
      return std::fabs(a_->evaluate(x));
    case NodeKind::Tanh:
      return std::tanh(a_->evaluate(x));
    case NodeKind::Sech:
      return 1.0 / std::cosh(a_->evaluate(x));  // cosh >= 1, never inf here
    case NodeKind::Min:
      return std::min(a_->evaluate(x), b_->evaluate(x));
    case NodeKind::Max:
      return std::max(a_->evaluate(x), b_->evaluate(x));
    case NodeKind::Indicator:
      return (x >= lo_ && x < hi_) ? 1.0 : 0.0;
    case NodeKind::Piecewise: {
      for (const auto& pc : pieces_)
        if (x >= pc.lo && x < pc.hi) return pc.value->evaluate(x);
      return 0.0;
    }
  }
  return 0.0;
}

namespace {

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Parenthesization levels: +,- are 1; *,/ are 2; unary minus 3; ^ is 4;
// atoms and calls 5.  Negative literals print with a leading '-', so
// they bind like unary minus.
int node_prec(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Add:
    case NodeKind::Sub:
      return 1;
    case NodeKind::Mul:
    case NodeKind::Div:
      return 2;
    case NodeKind::Neg:
      return 3;
    case NodeKind::Pow:
      return 4;
    case NodeKind::Constant:
      return std::signbit(e.constant_value()) ? 3 : 5;
    default:
      return 5;
  }
}

void emit(const Expr& e, std::string& out);

void emit_child(const Expr& e, int min_prec, std::string& out) {
  if (node_prec(e) < min_prec) {
    out += '(';
    emit(e, out);
    out += ')';
  } else {
    emit(e, out);
  }
}

void emit_call(const char* name, const Expr& a, std::string& out) {
  out += name;
  out += '(';
  emit(a, out);
  out += ')';
}

void emit(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case NodeKind::Constant:
      out += fmt_double(e.constant_value());
      return;
    case NodeKind::Var:
      out += 'x';
      return;
    case NodeKind::Add:
      emit_child(*e.child_a(), 1, out);
      out += '+';
      emit_child(*e.child_b(), 2, out);
      return;
    case NodeKind::Sub:
      emit_child(*e.child_a(), 1, out);
      out += '-';
      emit_child(*e.child_b(), 2, out);
      return;
    case NodeKind::Mul:
      emit_child(*e.child_a(), 2, out);
      out += '*';
      emit_child(*e.child_b(), 3, out);
      return;
    case NodeKind::Div:
      emit_child(*e.child_a(), 2, out);
      out += '/';
      emit_child(*e.child_b(), 3, out);
      return;
    case NodeKind::Neg:
      out += '-';
      emit_child(*e.child_a(), 3, out);
      return;
    case NodeKind::Pow:
      emit_child(*e.child_a(), 5, out);
      out += '^';
      emit_child(*e.child_b(), 3, out);
      return;
    case NodeKind::Exp:
      emit_call("exp", *e.child_a(), out);
      return;
    case NodeKind::Abs:
      emit_call("abs", *e.child_a(), out);
      return;
    case NodeKind::Tanh:
      emit_call("tanh", *e.child_a(), out);
      return;
    case NodeKind::Sech:
      emit_call("sech", *e.child_a(), out);
      return;
    case NodeKind::Min:
    case NodeKind::Max:
      out += e.kind() == NodeKind::Min ? "min(" : "max(";
      emit(*e.child_a(), out);
      out += ',';
      emit(*e.child_b(), out);
      out += ')';
      return;
    case NodeKind::Indicator:
      out += "indicator(";
      out += fmt_double(e.interval_lo());
      out += ',';
      out += fmt_double(e.interval_hi());
      out += ')';
      return;
    case NodeKind::Piecewise: {
      out += "piecewise(";
      bool first = true;
      for (const auto& pc : e.pieces()) {
        if (!first) out += ',';
        first = false;
        out += '(';
        out += fmt_double(pc.lo);
        out += ',';
        out += fmt_double(pc.hi);
        out += ',';
        emit(*pc.value, out);
        out += ')';
      }
      out += ')';
      return;
    }
  }
}

}  // namespace

std::string Expr::to_string() const {
  std::string out;
  emit(*this, out);
  return out;
}

void Expr::collect_static_breakpoints(double lo, double hi,
                                      std::vector<double>& out) const {
  auto add = [&](double v) {
    if (std::isfinite(v) && v > lo && v < hi) out.push_back(v);
  };
  switch (kind_) {
    case NodeKind::Indicator:
      add(lo_);
      add(hi_);
      return;
    case NodeKind::Piecewise:
      for (const auto& pc : pieces_) {
        add(pc.lo);
        add(pc.hi);
        pc.value->collect_static_breakpoints(lo, hi, out);
      }
      return;
    default:
      if (a_) a_->collect_static_breakpoints(lo, hi, out);
      if (b_) b_->collect_static_breakpoints(lo, hi, out);
      return;
  }
}

namespace {

// Locates sign changes of g on [lo, hi] by a uniform scan plus
// bisection.  Touching zeros without a sign change are not kinks that
// matter for integration accuracy, so they may be missed.
void scan_zeros(const std::function<double(double)>& g, double lo, double hi,
                std::vector<double>& out) {
  constexpr int kSamples = 512;
  double prev_x = lo, prev_v = 0;
  bool prev_ok = false;
  for (int i = 0; i <= kSamples; ++i) {
    double x = lo + (hi - lo) * i / kSamples;
    double v = 0;
    bool ok = true;
    try {
      v = g(x);
      ok = std::isfinite(v);
    } catch (const EvalError&) {
      ok = false;
    }
    if (ok && v == 0.0) out.push_back(x);
    if (ok && prev_ok && ((prev_v < 0) != (v < 0)) && prev_v != 0 && v != 0) {
      double a = prev_x, b = x, fa = prev_v;
      for (int it = 0; it < 80 && (b - a) > 1e-14 * (1 + std::fabs(a)); ++it) {
        double m = 0.5 * (a + b);
        double fm;
        try {
          fm = g(m);
        } catch (const EvalError&) {
          break;
        }
        if (fm == 0.0) {
          a = b = m;
          break;
        }
        if ((fa < 0) != (fm < 0))
          b = m;
        else
          a = m, fa = fm;
      }
      out.push_back(0.5 * (a + b));
    }
    prev_x = x;
    prev_v = v;
    prev_ok = ok;
  }
}

void collect_kinks(const Expr& e, double lo, double hi,
                   std::vector<double>& out) {
  switch (e.kind()) {
    case NodeKind::Abs: {
      const Expr& a = *e.child_a();
      scan_zeros([&](double t) { return a.evaluate(t); }, lo, hi, out);
      collect_kinks(a, lo, hi, out);
      return;
    }
    case NodeKind::Min:
    case NodeKind::Max: {
      const Expr& a = *e.child_a();
      const Expr& b = *e.child_b();
      scan_zeros([&](double t) { return a.evaluate(t) - b.evaluate(t); }, lo,
                 hi, out);
      collect_kinks(a, lo, hi, out);
      collect_kinks(b, lo, hi, out);
      return;
    }
    case NodeKind::Div: {
      const Expr& den = *e.child_b();
      scan_zeros([&](double t) { return den.evaluate(t); }, lo, hi, out);
      collect_kinks(*e.child_a(), lo, hi, out);
      collect_kinks(den, lo, hi, out);
      return;
    }
    case NodeKind::Pow: {
      // Negative constant exponents turn zeros of the base into poles.
      const Expr& b = *e.child_b();
      if (b.kind() == NodeKind::Constant && b.constant_value() < 0) {
        const Expr& a = *e.child_a();
        scan_zeros([&](double t) { return a.evaluate(t); }, lo, hi, out);
      }
      collect_kinks(*e.child_a(), lo, hi, out);
      collect_kinks(b, lo, hi, out);
      return;
    }
    case NodeKind::Piecewise:
      for (const auto& pc : e.pieces()) collect_kinks(*pc.value, lo, hi, out);
      return;
    default:
      if (e.child_a()) collect_kinks(*e.child_a(), lo, hi, out);
      if (e.child_b()) collect_kinks(*e.child_b(), lo, hi, out);
      return;
  }
}

}  // namespace

std::vector<double> Expr::breakpoints(double lo, double hi) const {
  std::vector<double> out;
  collect_static_breakpoints(lo, hi, out);
  collect_kinks(*this, lo, hi, out);
  std::sort(out.begin(), out.end());
  std::vector<double> merged;
  for (double v : out) {
    if (v <= lo || v >= hi) continue;
    if (merged.empty() || v - merged.back() > 1e-12 * (1 + std::fabs(v)))
      merged.push_back(v);
  }
  if (merged.size() > 4096) merged.resize(4096);
  return merged;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Parser {
public:
  explicit Parser(std::string_view s) : s_(s) {}

  Expr::Ptr parse() {
    Expr::Ptr e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input", pos_);
    return e;
  }

private:
  std::string_view s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& m, std::size_t at) {
    throw ParseError(m, at);
  }

  void skip_ws() {
    while (pos_ < s_.size() &&
           std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  bool eat(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'", pos_);
  }

  double number() {
    skip_ws();
    double v = 0;
    auto res = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (res.ec != std::errc() || !std::isfinite(v))
      fail("malformed number", pos_);
    pos_ = static_cast<std::size_t>(res.ptr - s_.data());
    return v;
  }

  std::string_view ident() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
    return s_.substr(start, pos_ - start);
  }

  // Signed numeric literal or +-inf; used for interval bounds only.
  double bound() {
    bool neg = false;
    if (eat('-'))
      neg = true;
    else
      eat('+');
    skip_ws();
    double v;
    if (pos_ < s_.size() &&
        std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
      std::size_t at = pos_;
      auto name = ident();
      if (name != "inf") fail("expected a number or inf", at);
      v = kInf;
    } else {
      v = number();
    }
    return neg ? -v : v;
  }

  Expr::Ptr expr() {
    Expr::Ptr a = term();
    for (;;) {
      if (eat('+'))
        a = Expr::binary(NodeKind::Add, a, term());
      else if (eat('-'))
        a = Expr::binary(NodeKind::Sub, a, term());
      else
        return a;
    }
  }

  Expr::Ptr term() {
    Expr::Ptr a = unary();
    for (;;) {
      if (eat('*'))
        a = Expr::binary(NodeKind::Mul, a, unary());
      else if (eat('/'))
        a = Expr::binary(NodeKind::Div, a, unary());
      else
        return a;
    }
  }

  Expr::Ptr unary() {
    if (eat('-')) return Expr::unary(NodeKind::Neg, unary());
    return power();
  }

  Expr::Ptr power() {
    Expr::Ptr a = primary();
    if (eat('^')) return Expr::binary(NodeKind::Pow, a, unary());
    return a;
  }

  Expr::Ptr call1(NodeKind k) {
    expect('(');
    Expr::Ptr a = expr();
    expect(')');
    return Expr::unary(k, a);
  }

  Expr::Ptr call2(NodeKind k) {
    expect('(');
    Expr::Ptr a = expr();
    expect(',');
    Expr::Ptr b = expr();
    expect(')');
    return Expr::binary(k, a, b);
  }

  Expr::Ptr primary() {
    char c = peek();
    std::size_t at = pos_;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return Expr::constant(number());
    if (c == '(') {
      ++pos_;
      Expr::Ptr e = expr();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      auto name = ident();
      if (name == "x") return Expr::var();
      if (name == "exp") return call1(NodeKind::Exp);
      if (name == "abs") return call1(NodeKind::Abs);
      if (name == "tanh") return call1(NodeKind::Tanh);
      if (name == "sech") return call1(NodeKind::Sech);
      if (name == "min") return call2(NodeKind::Min);
      if (name == "max") return call2(NodeKind::Max);
      if (name == "indicator") {
        expect('(');
        double lo = bound();
        expect(',');
        double hi = bound();
        expect(')');
        if (!(lo < hi)) fail("indicator needs lo < hi", at);
        return Expr::indicator(lo, hi);
      }
      if (name == "piecewise") {
        expect('(');
        std::vector<Expr::Piece> pieces;
        do {
          expect('(');
          Expr::Piece pc;
          pc.lo = bound();
          expect(',');
          pc.hi = bound();
          expect(',');
          pc.value = expr();
          expect(')');
          pieces.push_back(std::move(pc));
        } while (eat(','));
        expect(')');
        try {
          return Expr::piecewise(std::move(pieces));
        } catch (const std::invalid_argument& err) {
          fail(err.what(), at);
        }
      }
      fail("unknown identifier '" + std::string(name) + "'", at);
    }
    fail("expected a value", pos_);
  }
};

}  // namespace

Expr::Ptr parse_expression(std::string_view text) {
  return Parser(text).parse();
}

Expr::Ptr positive_part(const Expr::Ptr& q) {
  return Expr::binary(NodeKind::Max, q, Expr::constant(0.0));
}

Expr::Ptr negative_part(const Expr::Ptr& q) {
  return Expr::binary(NodeKind::Max, Expr::unary(NodeKind::Neg, q),
                      Expr::constant(0.0));
}

bool expr_is_one(const Expr& e, double window) {
  std::vector<double> pts;
  for (int i = 0; i <= 256; ++i)
    pts.push_back(-window + 2.0 * window * i / 256.0);
  std::vector<double> bps;
  e.collect_static_breakpoints(-window, window, bps);
  for (double b : bps) {
    pts.push_back(b);
    pts.push_back(b - 1e-7);
    pts.push_back(b + 1e-7);
  }
  for (double x : pts) {
    if (x < -window || x > window) continue;
    double v;
    try {
      v = e.evaluate(x);
    } catch (const EvalError&) {
      return false;
    }
    if (std::fabs(v - 1.0) > 1e-12) return false;
  }
  return true;
}

}  // namespace slb
