#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace stackel {

// Immutable expression tree in a single variable with symbolic differentiation.
class Expr {
 public:
  enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Exp, Log, Sqrt };

  Expr();  // the constant 0
  static Expr constant(double v);
  static Expr var();

  double eval(double x) const;
  Expr derivative() const;
  bool is_constant() const;  // no dependence on the variable
  std::string str() const;
  Op op() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& a, const Expr& b);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);
  friend Expr exp(const Expr& a);
  friend Expr log(const Expr& a);
  friend Expr sqrt(const Expr& a);

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Expr make(Op op, const Expr& a, const Expr& b = Expr());
  std::shared_ptr<const Node> node_;
};

// Grammar: literals, the variable (any of `names`, comma separated, default "x"),
// pi, + - * / ^, unary minus, parentheses and sin cos exp log sqrt calls.
Expr parse_expr(std::string_view text, std::string_view names = "x");

}  // namespace stackel
