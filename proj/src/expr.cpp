#include "stackel/expr.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "stackel/errors.hpp"

namespace stackel {

struct Expr::Node {
  Op op;
  double value = 0.0;
  std::shared_ptr<const Node> a, b;
};

namespace {

bool is_const_node(const std::shared_ptr<const Expr::Node>& n) { return n && n->op == Expr::Op::Const; }

bool depends(const Expr::Node* n) {
  if (!n) return false;
  if (n->op == Expr::Op::Var) return true;
  if (n->op == Expr::Op::Const) return false;
  return depends(n->a.get()) || depends(n->b.get());
}

double eval_node(const Expr::Node* n, double x) {
  using Op = Expr::Op;
  switch (n->op) {
    case Op::Const: return n->value;
    case Op::Var: return x;
    case Op::Add: return eval_node(n->a.get(), x) + eval_node(n->b.get(), x);
    case Op::Sub: return eval_node(n->a.get(), x) - eval_node(n->b.get(), x);
    case Op::Mul: return eval_node(n->a.get(), x) * eval_node(n->b.get(), x);
    case Op::Div: return eval_node(n->a.get(), x) / eval_node(n->b.get(), x);
    case Op::Neg: return -eval_node(n->a.get(), x);
    case Op::Pow: {
      const double base = eval_node(n->a.get(), x);
      if (is_const_node(n->b)) {
        const double e = n->b->value;
        if (e == 2.0) return base * base;
        if (e == 3.0) return base * base * base;
        if (e == 4.0) { const double b2 = base * base; return b2 * b2; }
      }
      return std::pow(base, eval_node(n->b.get(), x));
    }
    case Op::Sin: return std::sin(eval_node(n->a.get(), x));
    case Op::Cos: return std::cos(eval_node(n->a.get(), x));
    case Op::Exp: return std::exp(eval_node(n->a.get(), x));
    case Op::Log: return std::log(eval_node(n->a.get(), x));
    case Op::Sqrt: return std::sqrt(eval_node(n->a.get(), x));
  }
  return 0.0;
}

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

Expr::Expr() : node_(std::make_shared<Node>(Node{Op::Const, 0.0, nullptr, nullptr})) {}

Expr Expr::constant(double v) { return Expr(std::make_shared<Node>(Node{Op::Const, v, nullptr, nullptr})); }
Expr Expr::var() { return Expr(std::make_shared<Node>(Node{Op::Var, 0.0, nullptr, nullptr})); }

Expr::Op Expr::op() const { return node_->op; }

Expr Expr::make(Op op, const Expr& a, const Expr& b) {
  auto n = std::make_shared<Node>(Node{op, 0.0, a.node_, nullptr});
  const bool binary = op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div || op == Op::Pow;
  if (binary) n->b = b.node_;
  // fold constants
  if (is_const_node(n->a) && (!binary || is_const_node(n->b))) return constant(eval_node(n.get(), 0.0));
  return Expr(n);
}

double Expr::eval(double x) const { return eval_node(node_.get(), x); }
bool Expr::is_constant() const { return !depends(node_.get()); }

Expr operator+(const Expr& a, const Expr& b) {
  if (is_const_node(a.node_) && a.node_->value == 0.0) return b;
  if (is_const_node(b.node_) && b.node_->value == 0.0) return a;
  return Expr::make(Expr::Op::Add, a, b);
}
Expr operator-(const Expr& a, const Expr& b) {
  if (is_const_node(b.node_) && b.node_->value == 0.0) return a;
  if (is_const_node(a.node_) && a.node_->value == 0.0) return -b;
  return Expr::make(Expr::Op::Sub, a, b);
}
Expr operator*(const Expr& a, const Expr& b) {
  if (is_const_node(a.node_)) {
    if (a.node_->value == 0.0) return Expr::constant(0.0);
    if (a.node_->value == 1.0) return b;
  }
  if (is_const_node(b.node_)) {
    if (b.node_->value == 0.0) return Expr::constant(0.0);
    if (b.node_->value == 1.0) return a;
  }
  return Expr::make(Expr::Op::Mul, a, b);
}
Expr operator/(const Expr& a, const Expr& b) {
  if (is_const_node(a.node_) && a.node_->value == 0.0) return Expr::constant(0.0);
  if (is_const_node(b.node_) && b.node_->value == 1.0) return a;
  return Expr::make(Expr::Op::Div, a, b);
}
Expr operator-(const Expr& a) {
  if (a.node_->op == Expr::Op::Neg) return Expr(a.node_->a);
  return Expr::make(Expr::Op::Neg, a);
}
Expr pow(const Expr& a, const Expr& b) {
  if (is_const_node(b.node_)) {
    if (b.node_->value == 0.0) return Expr::constant(1.0);
    if (b.node_->value == 1.0) return a;
  }
  return Expr::make(Expr::Op::Pow, a, b);
}
Expr sin(const Expr& a) { return Expr::make(Expr::Op::Sin, a); }
Expr cos(const Expr& a) { return Expr::make(Expr::Op::Cos, a); }
Expr exp(const Expr& a) { return Expr::make(Expr::Op::Exp, a); }
Expr log(const Expr& a) { return Expr::make(Expr::Op::Log, a); }
Expr sqrt(const Expr& a) { return Expr::make(Expr::Op::Sqrt, a); }

Expr Expr::derivative() const {
  const Node* n = node_.get();
  auto A = [&] { return Expr(n->a); };
  auto B = [&] { return Expr(n->b); };
  switch (n->op) {
    case Op::Const: return constant(0.0);
    case Op::Var: return constant(1.0);
    case Op::Add: return A().derivative() + B().derivative();
    case Op::Sub: return A().derivative() - B().derivative();
    case Op::Mul: return A().derivative() * B() + A() * B().derivative();
    case Op::Div: return (A().derivative() * B() - A() * B().derivative()) / (B() * B());
    case Op::Neg: return -A().derivative();
    case Op::Pow: {
      if (B().is_constant()) {
        const double e = B().eval(0.0);
        return constant(e) * pow(A(), constant(e - 1.0)) * A().derivative();
      }
      // d(a^b) = a^b (b' log a + b a'/a)
      return *this * (B().derivative() * log(A()) + B() * A().derivative() / A());
    }
    case Op::Sin: return cos(A()) * A().derivative();
    case Op::Cos: return -(sin(A()) * A().derivative());
    case Op::Exp: return *this * A().derivative();
    case Op::Log: return A().derivative() / A();
    case Op::Sqrt: return A().derivative() / (constant(2.0) * *this);
  }
  return constant(0.0);
}

std::string Expr::str() const {
  const Node* n = node_.get();
  auto A = [&] { return Expr(n->a).str(); };
  auto B = [&] { return Expr(n->b).str(); };
  switch (n->op) {
    case Op::Const: return n->value < 0 ? "(" + fmt_num(n->value) + ")" : fmt_num(n->value);
    case Op::Var: return "x";
    case Op::Add: return "(" + A() + "+" + B() + ")";
    case Op::Sub: return "(" + A() + "-" + B() + ")";
    case Op::Mul: return "(" + A() + "*" + B() + ")";
    case Op::Div: return "(" + A() + "/" + B() + ")";
    case Op::Neg: return "(-" + A() + ")";
    case Op::Pow: return "(" + A() + "^" + B() + ")";
    case Op::Sin: return "sin(" + A() + ")";
    case Op::Cos: return "cos(" + A() + ")";
    case Op::Exp: return "exp(" + A() + ")";
    case Op::Log: return "log(" + A() + ")";
    case Op::Sqrt: return "sqrt(" + A() + ")";
  }
  return "?";
}

namespace {

class Parser {
 public:
  Parser(std::string_view text, std::string_view names) : s_(text) {
    std::string cur;
    for (char ch : names) {
      if (ch == ',') {
        if (!cur.empty()) names_.push_back(cur);
        cur.clear();
      } else if (!std::isspace(static_cast<unsigned char>(ch))) {
        cur.push_back(ch);
      }
    }
    if (!cur.empty()) names_.push_back(cur);
  }

  Expr parse() {
    Expr e = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::ParseError, msg + " at offset " + std::to_string(pos_) + " in \"" + std::string(s_) + "\"");
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr sum() {
    Expr e = product();
    for (;;) {
      if (eat('+')) e = e + product();
      else if (eat('-')) e = e - product();
      else return e;
    }
  }
  Expr product() {
    Expr e = unary();
    for (;;) {
      if (eat('*')) e = e * unary();
      else if (eat('/')) e = e / unary();
      else return e;
    }
  }
  Expr unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return power();
  }
  Expr power() {
    Expr base = atom();
    if (eat('^')) return pow(base, unary());  // right associative, binds tighter than unary minus on the left
    return base;
  }
  Expr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    if (eat('(')) {
      Expr e = sum();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.data() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<size_t>(end - begin);
      return Expr::constant(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string id(s_.substr(start, pos_ - start));
      if (id == "pi") return Expr::constant(std::numbers::pi);
      for (const auto& nm : names_)
        if (id == nm) return Expr::var();
      static const char* fns[] = {"sin", "cos", "exp", "log", "sqrt"};
      for (const char* f : fns) {
        if (id == f) {
          if (!eat('(')) fail("expected '(' after " + id);
          Expr arg = sum();
          if (!eat(')')) fail("expected ')'");
          if (id == "sin") return sin(arg);
          if (id == "cos") return cos(arg);
          if (id == "exp") return exp(arg);
          if (id == "log") return log(arg);
          return sqrt(arg);
        }
      }
      pos_ = start;
      fail("unknown identifier '" + id + "'");
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  std::vector<std::string> names_;
  size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text, std::string_view names) { return Parser(text, names).parse(); }

}  // namespace stackel
