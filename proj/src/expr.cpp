#include "vekua/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

namespace vekua::expr {

namespace {

std::shared_ptr<const Node> make(Op op, Expr lhs = {}, Expr rhs = {}, int power = 0) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  n->power = power;
  return n;
}

bool finite(Complex c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }

Complex ipow(Complex x, int n) {
  Complex r{1, 0};
  Complex b = x;
  while (n > 0) {
    if (n & 1) r *= b;
    b *= b;
    n >>= 1;
  }
  return r;
}

bool is_unary_fn(Op op) {
  return op == Op::Conj || op == Op::Exp || op == Op::Log || op == Op::Re || op == Op::Im;
}

const char* fn_name(Op op) {
  switch (op) {
    case Op::Conj: return "conj";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Re: return "re";
    case Op::Im: return "im";
    default: return "?";
  }
}

const char* var_name(Op op) {
  switch (op) {
    case Op::Z: return "z";
    case Op::Zbar: return "zbar";
    case Op::AbsZ: return "absz";
    case Op::W: return "w";
    case Op::AbsW: return "absw";
    case Op::Phi: return "phi";
    default: return "?";
  }
}

}  // namespace

Expr::Expr() = default;

const Node& Expr::node() const {
  static const Node zero{};
  return node_ ? *node_ : zero;
}

Op Expr::op() const { return node().op; }

bool Expr::is_const(Complex c) const { return is_const() && node().value == c; }

bool operator==(const Expr& x, const Expr& y) {
  if (x.node_ == y.node_) return true;
  const Node& a = x.node();
  const Node& b = y.node();
  if (a.op != b.op) return false;
  switch (a.op) {
    case Op::Const: return a.value == b.value;
    case Op::Pow: return a.power == b.power && a.lhs == b.lhs;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: return a.lhs == b.lhs && a.rhs == b.rhs;
    case Op::Neg:
    case Op::Conj:
    case Op::Exp:
    case Op::Log:
    case Op::Re:
    case Op::Im: return a.lhs == b.lhs;
    default: return true;
  }
}

ParseError::ParseError(const std::string& what, std::size_t position)
    : std::runtime_error(what + " at position " + std::to_string(position)),
      position_(position) {}

// ---------------------------------------------------------------- builders

Expr constant(Complex c) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = c;
  return Expr(n);
}

Expr variable(Op v) {
  switch (v) {
    case Op::Z:
    case Op::Zbar:
    case Op::AbsZ:
    case Op::W:
    case Op::AbsW:
    case Op::Phi: return Expr(make(v));
    default: throw std::invalid_argument("variable: not a variable op");
  }
}

Expr neg(const Expr& x) {
  if (x.is_const()) return constant(-x.node().value);
  if (x.op() == Op::Neg) return x.node().lhs;
  return Expr(make(Op::Neg, x));
}

Expr add(const Expr& x, const Expr& y) {
  if (x.is_const(0)) return y;
  if (y.is_const(0)) return x;
  if (x.is_const() && y.is_const()) return constant(x.node().value + y.node().value);
  return Expr(make(Op::Add, x, y));
}

Expr sub(const Expr& x, const Expr& y) {
  if (y.is_const(0)) return x;
  if (x.is_const(0)) return neg(y);
  if (x.is_const() && y.is_const()) return constant(x.node().value - y.node().value);
  return Expr(make(Op::Sub, x, y));
}

Expr mul(const Expr& x, const Expr& y) {
  if (x.is_const(0) || y.is_const(0)) return constant(0);
  if (x.is_const(1)) return y;
  if (y.is_const(1)) return x;
  if (x.is_const(-1)) return neg(y);
  if (y.is_const(-1)) return neg(x);
  if (x.is_const() && y.is_const()) return constant(x.node().value * y.node().value);
  return Expr(make(Op::Mul, x, y));
}

Expr div(const Expr& x, const Expr& y) {
  if (y.is_const(1)) return x;
  if (x.is_const(0) && !y.is_const(0)) return constant(0);
  if (x.is_const() && y.is_const() && !y.is_const(0)) {
    Complex q = x.node().value / y.node().value;
    if (finite(q)) return constant(q);
  }
  return Expr(make(Op::Div, x, y));
}

Expr pow(const Expr& x, int n) {
  if (n < 0) throw std::invalid_argument("pow: negative exponent");
  if (n == 0) return constant(1);
  if (n == 1) return x;
  if (x.is_const()) {
    Complex v = ipow(x.node().value, n);
    if (finite(v)) return constant(v);
  }
  return Expr(make(Op::Pow, x, {}, n));
}

Expr call(Op fn, const Expr& x) {
  if (!is_unary_fn(fn)) throw std::invalid_argument("call: not a function op");
  if (x.is_const()) {
    const Complex v = x.node().value;
    switch (fn) {
      case Op::Conj: return constant(std::conj(v));
      case Op::Re: return constant(v.real());
      case Op::Im: return constant(v.imag());
      case Op::Exp: {
        Complex e = std::exp(v);
        if (finite(e)) return constant(e);
        break;
      }
      case Op::Log:
        if (v != Complex(0)) return constant(std::log(v));
        break;
      default: break;
    }
  }
  if (fn == Op::Conj && x.op() == Op::Conj) return x.node().lhs;
  return Expr(make(fn, x));
}

// ------------------------------------------------------------------ parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  Expr run() {
    skip();
    if (pos_ == s_.size()) throw ParseError("empty expression", pos_);
    Expr e = expression();
    skip();
    if (pos_ != s_.size()) throw ParseError(std::string("unexpected '") + s_[pos_] + "'", pos_);
    return e;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) throw ParseError(std::string("expected '") + c + "'", pos_);
  }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  Expr expression() {
    Expr e = term();
    for (;;) {
      if (accept('+'))
        e = add(e, term());
      else if (accept('-'))
        e = sub(e, term());
      else
        return e;
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept('*')) {
        e = mul(e, unary());
      } else if (accept('/')) {
        e = div(e, unary());
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return neg(unary());
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (!accept('^')) return base;
    skip();
    const std::size_t at = pos_;
    if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
      throw ParseError("exponent must be a non-negative integer literal", at);
    int n = 0;
    auto [end, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), n);
    if (ec != std::errc()) throw ParseError("exponent out of range", at);
    pos_ = static_cast<std::size_t>(end - s_.data());
    if (pos_ < s_.size() && (s_[pos_] == '.' || ident_char(s_[pos_])))
      throw ParseError("exponent must be a non-negative integer literal", at);
    return pow(base, n);
  }

  Expr number() {
    const std::size_t start = pos_;
    std::size_t p = pos_;
    auto digits = [&] {
      std::size_t q = p;
      while (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) ++p;
      return p > q;
    };
    bool any = digits();
    if (p < s_.size() && s_[p] == '.') {
      ++p;
      any = digits() || any;
    }
    if (!any) throw ParseError("malformed number", start);
    if (p < s_.size() && (s_[p] == 'e' || s_[p] == 'E')) {
      std::size_t q = p + 1;
      if (q < s_.size() && (s_[q] == '+' || s_[q] == '-')) ++q;
      if (q < s_.size() && std::isdigit(static_cast<unsigned char>(s_[q]))) {
        p = q;
        digits();
      }
    }
    double v = 0;
    auto [end, ec] = std::from_chars(s_.data() + start, s_.data() + p, v);
    if (ec != std::errc() || end != s_.data() + p) throw ParseError("malformed number", start);
    pos_ = p;
    if (pos_ < s_.size() && s_[pos_] == 'i' &&
        (pos_ + 1 == s_.size() || !ident_char(s_[pos_ + 1]))) {
      ++pos_;
      return constant({0, v});
    }
    if (pos_ < s_.size() && ident_char(s_[pos_]))
      throw ParseError("unexpected character after number", pos_);
    return constant({v, 0});
  }

  Expr primary() {
    skip();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
      const std::string_view id = s_.substr(start, pos_ - start);
      static const struct {
        const char* name;
        Op op;
      } fns[] = {{"conj", Op::Conj}, {"exp", Op::Exp}, {"log", Op::Log},
                 {"re", Op::Re},     {"im", Op::Im}};
      for (const auto& f : fns) {
        if (id == f.name) {
          expect('(');
          Expr arg = expression();
          expect(')');
          return call(f.op, arg);
        }
      }
      if (id == "i") return constant({0, 1});
      if (id == "pi") return constant({std::numbers::pi, 0});
      static const struct {
        const char* name;
        Op op;
      } vars[] = {{"z", Op::Z},   {"zbar", Op::Zbar}, {"absz", Op::AbsZ},
                  {"w", Op::W},   {"absw", Op::AbsW}, {"phi", Op::Phi}};
      for (const auto& v : vars)
        if (id == v.name) return variable(v.op);
      throw ParseError("unknown identifier '" + std::string(id) + "'", start);
    }
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }
};

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_const(Complex c) {
  const double re = c.real(), im = c.imag();
  if (im == 0 && !std::signbit(im)) {
    if (re < 0 || std::signbit(re)) return "(" + format_real(re) + ")";
    return format_real(re);
  }
  if (re == 0 && !std::signbit(re)) {
    if (im < 0) return "(-" + format_real(-im) + "i)";
    return "(" + format_real(im) + "i)";
  }
  std::string out = "(" + format_real(re);
  out += im < 0 ? "-" + format_real(-im) : "+" + format_real(im);
  return out + "i)";
}

}  // namespace

Expr parse(std::string_view text) { return Parser(text).run(); }

std::string print(const Expr& e) {
  const Node& n = e.node();
  switch (n.op) {
    case Op::Const: return format_const(n.value);
    case Op::Z:
    case Op::Zbar:
    case Op::AbsZ:
    case Op::W:
    case Op::AbsW:
    case Op::Phi: return var_name(n.op);
    case Op::Neg: return "(-" + print(n.lhs) + ")";
    case Op::Add: return "(" + print(n.lhs) + " + " + print(n.rhs) + ")";
    case Op::Sub: return "(" + print(n.lhs) + " - " + print(n.rhs) + ")";
    case Op::Mul: return "(" + print(n.lhs) + " * " + print(n.rhs) + ")";
    case Op::Div: return "(" + print(n.lhs) + " / " + print(n.rhs) + ")";
    case Op::Pow: return "(" + print(n.lhs) + "^" + std::to_string(n.power) + ")";
    default: return std::string(fn_name(n.op)) + "(" + print(n.lhs) + ")";
  }
}

// -------------------------------------------------------------- evaluation

Complex eval(const Expr& e, Complex z, Complex a) {
  const Node& n = e.node();
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Z: return z;
    case Op::Zbar: return std::conj(z);
    case Op::AbsZ: return std::abs(z);
    case Op::W: return z - a;
    case Op::AbsW: return std::abs(z - a);
    case Op::Phi: {
      const Complex d = z - a;
      if (d == Complex(0)) throw EvalError("phi is undefined at the singular point");
      double t = std::arg(d);
      if (t == -std::numbers::pi) t = std::numbers::pi;
      return t;
    }
    case Op::Neg: return -eval(n.lhs, z, a);
    case Op::Add: return eval(n.lhs, z, a) + eval(n.rhs, z, a);
    case Op::Sub: return eval(n.lhs, z, a) - eval(n.rhs, z, a);
    case Op::Mul: return eval(n.lhs, z, a) * eval(n.rhs, z, a);
    case Op::Div: {
      const Complex num = eval(n.lhs, z, a);
      const Complex den = eval(n.rhs, z, a);
      if (den == Complex(0)) throw EvalError("division by zero");
      return num / den;
    }
    case Op::Pow: return ipow(eval(n.lhs, z, a), n.power);
    case Op::Conj: return std::conj(eval(n.lhs, z, a));
    case Op::Exp: return std::exp(eval(n.lhs, z, a));
    case Op::Log: {
      const Complex v = eval(n.lhs, z, a);
      if (v == Complex(0)) throw EvalError("log of zero");
      return std::log(v);
    }
    case Op::Re: return eval(n.lhs, z, a).real();
    case Op::Im: return eval(n.lhs, z, a).imag();
  }
  throw EvalError("corrupt expression");
}

// ------------------------------------------------------------- derivatives

namespace {

struct Pair {
  Expr dz;
  Expr dzb;
};

Pair derive(const Expr& e) {
  const Node& n = e.node();
  const Expr zero = constant(0);
  const Expr half = constant(0.5);
  switch (n.op) {
    case Op::Const: return {zero, zero};
    case Op::Z:
    case Op::W: return {constant(1), zero};
    case Op::Zbar: return {zero, constant(1)};
    case Op::AbsZ: {
      const Expr r2 = mul(constant(2), variable(Op::AbsZ));
      return {div(variable(Op::Zbar), r2), div(variable(Op::Z), r2)};
    }
    case Op::AbsW: {
      const Expr r2 = mul(constant(2), variable(Op::AbsW));
      return {div(call(Op::Conj, variable(Op::W)), r2), div(variable(Op::W), r2)};
    }
    case Op::Phi: {
      // phi = (log w - log conj w) / 2i
      const Expr w = variable(Op::W);
      return {div(constant({0, -0.5}), w), div(constant({0, 0.5}), call(Op::Conj, w))};
    }
    case Op::Neg: {
      Pair p = derive(n.lhs);
      return {neg(p.dz), neg(p.dzb)};
    }
    case Op::Add:
    case Op::Sub: {
      Pair p = derive(n.lhs), q = derive(n.rhs);
      if (n.op == Op::Add) return {add(p.dz, q.dz), add(p.dzb, q.dzb)};
      return {sub(p.dz, q.dz), sub(p.dzb, q.dzb)};
    }
    case Op::Mul: {
      Pair p = derive(n.lhs), q = derive(n.rhs);
      return {add(mul(p.dz, n.rhs), mul(n.lhs, q.dz)),
              add(mul(p.dzb, n.rhs), mul(n.lhs, q.dzb))};
    }
    case Op::Div: {
      Pair p = derive(n.lhs), q = derive(n.rhs);
      const Expr den = pow(n.rhs, 2);
      return {div(sub(mul(p.dz, n.rhs), mul(n.lhs, q.dz)), den),
              div(sub(mul(p.dzb, n.rhs), mul(n.lhs, q.dzb)), den)};
    }
    case Op::Pow: {
      Pair p = derive(n.lhs);
      const Expr f = mul(constant(double(n.power)), pow(n.lhs, n.power - 1));
      return {mul(f, p.dz), mul(f, p.dzb)};
    }
    case Op::Conj: {
      Pair p = derive(n.lhs);
      return {call(Op::Conj, p.dzb), call(Op::Conj, p.dz)};
    }
    case Op::Exp: {
      Pair p = derive(n.lhs);
      return {mul(e, p.dz), mul(e, p.dzb)};
    }
    case Op::Log: {
      Pair p = derive(n.lhs);
      return {div(p.dz, n.lhs), div(p.dzb, n.lhs)};
    }
    case Op::Re: {
      Pair p = derive(n.lhs);
      return {mul(half, add(p.dz, call(Op::Conj, p.dzb))),
              mul(half, add(p.dzb, call(Op::Conj, p.dz)))};
    }
    case Op::Im: {
      Pair p = derive(n.lhs);
      const Expr k = constant({0, -0.5});
      return {mul(k, sub(p.dz, call(Op::Conj, p.dzb))),
              mul(k, sub(p.dzb, call(Op::Conj, p.dz)))};
    }
  }
  throw UnsupportedError("derivative not available for this node");
}

}  // namespace

Expr dbar(const Expr& e) { return derive(e).dzb; }
Expr dz(const Expr& e) { return derive(e).dz; }

}  // namespace vekua::expr
