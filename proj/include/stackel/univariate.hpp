#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stackel/expr.hpp"

namespace stackel {

// Value with first and second derivative at a point.
struct Jet {
  double v = 0.0, d1 = 0.0, d2 = 0.0;
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator*(double s, const Jet& a);
Jet jet_log(const Jet& a);
Jet jet_pow(const Jet& a, double e);

// Smooth function of one real variable carrying analytic derivatives up to order 2.
// Closed-form entries keep their expression so that symbolic derivatives stay available.
class UnivariateFn {
 public:
  struct Impl {
    virtual ~Impl() = default;
    virtual Jet jet(double x) const = 0;
    virtual double value(double x) const { return jet(x).v; }
    virtual std::string describe() const = 0;
  };

  UnivariateFn();  // zero
  explicit UnivariateFn(std::shared_ptr<const Impl> impl);

  static UnivariateFn constant(double c);
  static UnivariateFn from_expr(const Expr& e);
  static UnivariateFn parse(const std::string& text);
  // Cubic spline through uniform samples on [x0, x0 + h*(n-1)]; periodic closes the last interval.
  static UnivariateFn from_samples(double x0, double h, std::vector<double> values, bool periodic);
  static UnivariateFn from_jet(std::function<Jet(double)> f, std::string description);

  Jet jet(double x) const { return impl_->jet(x); }
  double operator()(double x) const { return impl_->value(x); }
  double d1(double x) const { return jet(x).d1; }
  double d2(double x) const { return jet(x).d2; }

  bool is_constant() const { return constant_.has_value(); }
  double constant_value() const { return constant_.value_or(0.0); }
  const std::optional<Expr>& expr() const { return expr_; }
  std::string describe() const { return impl_->describe(); }

  friend UnivariateFn operator+(const UnivariateFn& a, const UnivariateFn& b);
  friend UnivariateFn operator-(const UnivariateFn& a, const UnivariateFn& b);
  friend UnivariateFn operator*(const UnivariateFn& a, const UnivariateFn& b);
  friend UnivariateFn operator/(const UnivariateFn& a, const UnivariateFn& b);
  friend UnivariateFn operator*(double s, const UnivariateFn& a);

 private:
  std::shared_ptr<const Impl> impl_;
  std::optional<Expr> expr_;
  std::optional<double> constant_;
};

// min/max of f over n+1 uniform samples of [a, b].
std::pair<double, double> sampled_range(const UnivariateFn& f, double a, double b, int n = 512);

}  // namespace stackel
