#include <doctest.h>

#include <cmath>

#include "stackel/coordmap.hpp"
#include "stackel/errors.hpp"
#include "stackel/expr.hpp"
#include "stackel/univariate.hpp"

using namespace stackel;

TEST_CASE("expression parsing and evaluation") {
  const Expr e = parse_expr("2 + 0.5*sin(x)^2 - exp(-x)/3");
  for (double x : {0.0, 0.3, 1.7})
    CHECK(e.eval(x) == doctest::Approx(2 + 0.5 * std::pow(std::sin(x), 2) - std::exp(-x) / 3).epsilon(1e-15));
  CHECK(parse_expr("pi").eval(0.0) == doctest::Approx(M_PI));
  CHECK(parse_expr("-x^2").eval(3.0) == doctest::Approx(-9.0));
  CHECK(parse_expr("4").is_constant());
  CHECK_FALSE(parse_expr("x*0 + x").is_constant());
  CHECK_THROWS_AS(parse_expr("sin(x"), Error);
  CHECK_THROWS_AS(parse_expr("y + 1"), Error);
}

TEST_CASE("symbolic derivative matches central differences") {
  const Expr e = parse_expr("sqrt(1 + x^2) * cos(3*x) + log(2 + sin(x))");
  const Expr d = e.derivative(), dd = d.derivative();
  for (double x : {-1.0, 0.2, 2.5}) {
    const double h = 1e-5;
    CHECK(d.eval(x) == doctest::Approx((e.eval(x + h) - e.eval(x - h)) / (2 * h)).epsilon(1e-8));
    CHECK(dd.eval(x) == doctest::Approx((d.eval(x + h) - d.eval(x - h)) / (2 * h)).epsilon(1e-7));
  }
}

TEST_CASE("univariate jets through arithmetic") {
  const UnivariateFn f = UnivariateFn::parse("exp(x)"), g = UnivariateFn::parse("1 + x^2");
  const UnivariateFn q = f / g;
  const double x = 0.7;
  const double v = std::exp(x) / (1 + x * x);
  const double d1 = v * (1 - 2 * x / (1 + x * x));
  CHECK(q(x) == doctest::Approx(v));
  CHECK(q.d1(x) == doctest::Approx(d1));
  CHECK(UnivariateFn::constant(3.0).is_constant());
}

TEST_CASE("periodic spline reproduces a trigonometric polynomial") {
  const int n = 256;
  const double h = 2 * M_PI / n;
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = std::sin(i * h) + 0.5 * std::cos(2 * i * h);
  const UnivariateFn s = UnivariateFn::from_samples(0.0, h, v, true);
  for (double x : {0.013, 1.0, 4.2, 6.27}) {
    CHECK(s(x) == doctest::Approx(std::sin(x) + 0.5 * std::cos(2 * x)).epsilon(1e-6));
    CHECK(s.d1(x) == doctest::Approx(std::cos(x) - std::sin(2 * x)).epsilon(1e-4));
  }
}

TEST_CASE("coordinate map is a monotone bijection") {
  const CoordinateMap m(UnivariateFn::parse("1 + 0.5*sin(pi*x)^2"), 1.0);
  // ∫_0^1 sqrt(1 + ½ sin² πx) dx
  CHECK(m.total() > 1.0);
  CHECK(m.total() < std::sqrt(1.5));
  double prev = -1.0;
  for (int i = 0; i <= 20; ++i) {
    const double x = i / 20.0, y = m.forward(x);
    CHECK(y > prev);
    prev = y;
    CHECK(m.inverse(y) == doctest::Approx(x).epsilon(1e-12));
  }
}
