#include "stackel/univariate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stackel/errors.hpp"

namespace stackel {

Jet operator+(const Jet& a, const Jet& b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
Jet operator-(const Jet& a, const Jet& b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
Jet operator*(const Jet& a, const Jet& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}
Jet operator/(const Jet& a, const Jet& b) {
  const double q = a.v / b.v;
  const double q1 = (a.d1 - q * b.d1) / b.v;
  const double q2 = (a.d2 - 2.0 * q1 * b.d1 - q * b.d2) / b.v;
  return {q, q1, q2};
}
Jet operator*(double s, const Jet& a) { return {s * a.v, s * a.d1, s * a.d2}; }
Jet jet_log(const Jet& a) {
  const double l1 = a.d1 / a.v;
  return {std::log(a.v), l1, a.d2 / a.v - l1 * l1};
}
Jet jet_pow(const Jet& a, double e) {
  const double p = std::pow(a.v, e);
  const double pm1 = std::pow(a.v, e - 1.0);
  const double pm2 = std::pow(a.v, e - 2.0);
  return {p, e * pm1 * a.d1, e * (e - 1.0) * pm2 * a.d1 * a.d1 + e * pm1 * a.d2};
}

namespace {

struct ConstImpl final : UnivariateFn::Impl {
  double c;
  explicit ConstImpl(double c_) : c(c_) {}
  Jet jet(double) const override { return {c, 0.0, 0.0}; }
  double value(double) const override { return c; }
  std::string describe() const override {
    std::ostringstream os;
    os.precision(17);
    os << c;
    return os.str();
  }
};

struct ExprImpl final : UnivariateFn::Impl {
  Expr f, f1, f2;
  explicit ExprImpl(const Expr& e) : f(e), f1(e.derivative()), f2(f1.derivative()) {}
  Jet jet(double x) const override { return {f.eval(x), f1.eval(x), f2.eval(x)}; }
  double value(double x) const override { return f.eval(x); }
  std::string describe() const override { return f.str(); }
};

struct JetImpl final : UnivariateFn::Impl {
  std::function<Jet(double)> fn;
  std::string desc;
  Jet jet(double x) const override { return fn(x); }
  std::string describe() const override { return desc; }
};

// Natural (or periodic) cubic spline on a uniform grid.
struct SplineImpl final : UnivariateFn::Impl {
  double x0, h;
  bool periodic;
  std::vector<double> y, m;  // values and second derivatives at knots

  SplineImpl(double x0_, double h_, std::vector<double> v, bool per) : x0(x0_), h(h_), periodic(per), y(std::move(v)) {
    const size_t n = y.size();
    m.assign(n, 0.0);
    if (n < 3) return;
    if (!periodic) {
      // tridiagonal solve for interior second derivatives, natural ends
      std::vector<double> c(n, 0.0), d(n, 0.0);
      for (size_t i = 1; i + 1 < n; ++i) {
        const double rhs = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
        const double denom = 4.0 - (i > 1 ? c[i - 1] : 0.0);
        c[i] = 1.0 / denom;
        d[i] = (rhs - (i > 1 ? d[i - 1] : 0.0)) / denom;
      }
      for (size_t i = n - 2; i >= 1; --i) {
        m[i] = d[i] - c[i] * m[i + 1];
        if (i == 1) break;
      }
    } else {
      // cyclic system solved by simple Gauss-Seidel sweeps (diagonally dominant)
      std::vector<double> rhs(n);
      for (size_t i = 0; i < n; ++i) {
        const double yp = y[(i + 1) % n], ym = y[(i + n - 1) % n];
        rhs[i] = 6.0 * (yp - 2.0 * y[i] + ym) / (h * h);
      }
      for (int it = 0; it < 200; ++it) {
        double change = 0.0;
        for (size_t i = 0; i < n; ++i) {
          const double nv = (rhs[i] - m[(i + 1) % n] - m[(i + n - 1) % n]) / 4.0;
          change = std::max(change, std::abs(nv - m[i]));
          m[i] = nv;
        }
        if (change < 1e-15 * (1.0 + *std::max_element(m.begin(), m.end()))) break;
      }
    }
  }

  Jet jet(double x) const override {
    const size_t n = y.size();
    double t = (x - x0) / h;
    long idx;
    if (periodic) {
      const double period = static_cast<double>(n);
      t = std::fmod(t, period);
      if (t < 0) t += period;
      idx = static_cast<long>(std::floor(t));
      if (idx >= static_cast<long>(n)) idx = static_cast<long>(n) - 1;
    } else {
      idx = std::clamp(static_cast<long>(std::floor(t)), 0L, static_cast<long>(n) - 2);
    }
    const size_t i0 = static_cast<size_t>(idx), i1 = periodic ? (i0 + 1) % n : i0 + 1;
    const double a = t - static_cast<double>(idx);  // in [0,1]
    const double b = 1.0 - a;
    const double v = b * y[i0] + a * y[i1] + ((b * b * b - b) * m[i0] + (a * a * a - a) * m[i1]) * h * h / 6.0;
    const double dv = (y[i1] - y[i0]) / h + ((-3.0 * b * b + 1.0) * m[i0] + (3.0 * a * a - 1.0) * m[i1]) * h / 6.0;
    const double d2 = b * m[i0] + a * m[i1];
    return {v, dv, d2};
  }
  std::string describe() const override { return "spline[" + std::to_string(y.size()) + "]"; }
};

enum class BinOp { Add, Sub, Mul, Div };

struct BinaryImpl final : UnivariateFn::Impl {
  UnivariateFn a, b;
  BinOp op;
  BinaryImpl(UnivariateFn a_, UnivariateFn b_, BinOp o) : a(std::move(a_)), b(std::move(b_)), op(o) {}
  Jet jet(double x) const override {
    const Jet ja = a.jet(x), jb = b.jet(x);
    switch (op) {
      case BinOp::Add: return ja + jb;
      case BinOp::Sub: return ja - jb;
      case BinOp::Mul: return ja * jb;
      case BinOp::Div: return ja / jb;
    }
    return {};
  }
  double value(double x) const override {
    const double va = a(x), vb = b(x);
    switch (op) {
      case BinOp::Add: return va + vb;
      case BinOp::Sub: return va - vb;
      case BinOp::Mul: return va * vb;
      case BinOp::Div: return va / vb;
    }
    return 0.0;
  }
  std::string describe() const override {
    static const char* sym[] = {"+", "-", "*", "/"};
    return "(" + a.describe() + sym[static_cast<int>(op)] + b.describe() + ")";
  }
};

UnivariateFn combine(const UnivariateFn& a, const UnivariateFn& b, BinOp op) {
  if (a.is_constant() && b.is_constant()) {
    const double x = a.constant_value(), y = b.constant_value();
    switch (op) {
      case BinOp::Add: return UnivariateFn::constant(x + y);
      case BinOp::Sub: return UnivariateFn::constant(x - y);
      case BinOp::Mul: return UnivariateFn::constant(x * y);
      case BinOp::Div: return UnivariateFn::constant(x / y);
    }
  }
  if (a.expr() && b.expr()) {
    const Expr& x = *a.expr();
    const Expr& y = *b.expr();
    switch (op) {
      case BinOp::Add: return UnivariateFn::from_expr(x + y);
      case BinOp::Sub: return UnivariateFn::from_expr(x - y);
      case BinOp::Mul: return UnivariateFn::from_expr(x * y);
      case BinOp::Div: return UnivariateFn::from_expr(x / y);
    }
  }
  return UnivariateFn(std::make_shared<BinaryImpl>(a, b, op));
}

}  // namespace

UnivariateFn::UnivariateFn() : UnivariateFn(constant(0.0)) {}

UnivariateFn::UnivariateFn(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

UnivariateFn UnivariateFn::constant(double c) {
  UnivariateFn f(std::make_shared<ConstImpl>(c));
  f.expr_ = Expr::constant(c);
  f.constant_ = c;
  return f;
}

UnivariateFn UnivariateFn::from_expr(const Expr& e) {
  if (e.is_constant()) return constant(e.eval(0.0));
  UnivariateFn f(std::make_shared<ExprImpl>(e));
  f.expr_ = e;
  return f;
}

UnivariateFn UnivariateFn::parse(const std::string& text) { return from_expr(parse_expr(text, "x,t,x1,x2,x3")); }

UnivariateFn UnivariateFn::from_samples(double x0, double h, std::vector<double> values, bool periodic) {
  if (values.size() < 4) throw Error(ErrorCode::ConfigError, "spline needs at least 4 samples");
  return UnivariateFn(std::make_shared<SplineImpl>(x0, h, std::move(values), periodic));
}

UnivariateFn UnivariateFn::from_jet(std::function<Jet(double)> f, std::string description) {
  auto impl = std::make_shared<JetImpl>();
  impl->fn = std::move(f);
  impl->desc = std::move(description);
  return UnivariateFn(impl);
}

UnivariateFn operator+(const UnivariateFn& a, const UnivariateFn& b) { return combine(a, b, BinOp::Add); }
UnivariateFn operator-(const UnivariateFn& a, const UnivariateFn& b) { return combine(a, b, BinOp::Sub); }
UnivariateFn operator*(const UnivariateFn& a, const UnivariateFn& b) { return combine(a, b, BinOp::Mul); }
UnivariateFn operator/(const UnivariateFn& a, const UnivariateFn& b) { return combine(a, b, BinOp::Div); }
UnivariateFn operator*(double s, const UnivariateFn& a) { return combine(UnivariateFn::constant(s), a, BinOp::Mul); }

std::pair<double, double> sampled_range(const UnivariateFn& f, double a, double b, int n) {
  double lo = f(a), hi = lo;
  for (int i = 1; i <= n; ++i) {
    const double v = f(a + (b - a) * i / n);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

}  // namespace stackel
