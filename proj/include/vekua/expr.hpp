#pragma once

// Small complex expression language over z with a symbolic Wirtinger
// derivative.
//
// Grammar (whitespace is ignored):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | '+' unary | power
//   power   := primary ('^' INTEGER)?
//   primary := NUMBER ['i'] | IDENT | IDENT '(' expr ')' | '(' expr ')'
//
// Variables: z, zbar, absz = |z|, w = z - a, absw = |z - a|,
// phi = arg(z - a) in (-pi, pi]. Constants: i, pi.
// Functions: conj, exp, log, re, im.
// Exponents are non-negative integer literals; negative powers are written
// with division.

#include <complex>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vekua::expr {

using Complex = std::complex<double>;

enum class Op {
  Const,
  Z,
  Zbar,
  AbsZ,
  W,
  AbsW,
  Phi,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Conj,
  Exp,
  Log,
  Re,
  Im,
};

struct Node;

/// Immutable expression handle. Copies share the tree.
class Expr {
 public:
  Expr();  // the constant 0
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  const Node& node() const;
  Op op() const;
  bool is_const() const { return op() == Op::Const; }
  bool is_const(Complex c) const;

  friend bool operator==(const Expr& x, const Expr& y);

 private:
  std::shared_ptr<const Node> node_;
};

struct Node {
  Op op = Op::Const;
  Complex value{};  // Const
  int power = 0;    // Pow
  Expr lhs;         // unary operand or left operand
  Expr rhs;         // right operand
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class EvalError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

Expr parse(std::string_view text);
std::string print(const Expr& e);
Complex eval(const Expr& e, Complex z, Complex a = {0, 0});

/// Wirtinger derivatives d/dzbar and d/dz. The singular point a is symbolic
/// (through w, absw, phi), so the result is valid for every a.
Expr dbar(const Expr& e);
Expr dz(const Expr& e);

// Simplifying constructors (constant folding and unit/zero elimination).
Expr constant(Complex c);
Expr variable(Op v);
Expr neg(const Expr& x);
Expr add(const Expr& x, const Expr& y);
Expr sub(const Expr& x, const Expr& y);
Expr mul(const Expr& x, const Expr& y);
Expr div(const Expr& x, const Expr& y);
Expr pow(const Expr& x, int n);
Expr call(Op fn, const Expr& x);

inline Expr operator+(const Expr& x, const Expr& y) { return add(x, y); }
inline Expr operator-(const Expr& x, const Expr& y) { return sub(x, y); }
inline Expr operator*(const Expr& x, const Expr& y) { return mul(x, y); }
inline Expr operator/(const Expr& x, const Expr& y) { return div(x, y); }
inline Expr operator-(const Expr& x) { return neg(x); }

}  // namespace vekua::expr
