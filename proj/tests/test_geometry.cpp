#include <doctest.h>

#include <cmath>

#include "stackel/errors.hpp"
#include "stackel/fixture.hpp"
#include "stackel/geometry.hpp"

using namespace stackel;

namespace {

StackelMatrix flat() {
  Eigen::Matrix3d m;
  m << 2, 1, 1, 0, -1, 1, 0, 1, -2;
  return constant_stackel(m, 1.0);
}

}  // namespace

TEST_CASE("constant fixture has unit metric coefficients") {
  const StackelMatrix S = flat();
  const Model model{S, {UnivariateFn(), UnivariateFn(), UnivariateFn()}};
  const MetricEval e = metric_eval(model, {0.3, 1.0, 2.0});
  // cofactors (1, 3, 2) and det 2 give H² = det / cofactor
  CHECK(e.H_sq[0] == doctest::Approx(2.0));
  CHECK(e.H_sq[1] == doctest::Approx(2.0 / 3.0));
  CHECK(e.H_sq[2] == doctest::Approx(1.0));
  const ValidationReport v = validate_stackel(S);
  CHECK(v.valid);
  CHECK(v.c1 == doctest::Approx(0.5));
  CHECK(v.c2 == doctest::Approx(1.0));
}

TEST_CASE("gauge transformations keep the metric") {
  const Fixture fx = load_fixture(STACKEL_FIXTURES "/radial_variable.json");
  const Model m{fx.S, fx.phi};
  Eigen::Matrix2d G;
  G << 1.5, -0.2, 0.4, 0.9;
  Model a = m, b = m;
  a.S = column_gauge(m.S, G);
  b.S = first_column_shift(m.S, 0.7, -0.4);
  for (const Point3 x : {Point3{0.1, 0.5, 2.0}, Point3{0.9, 4.0, 5.5}}) {
    const MetricEval e = metric_eval(m, x), ea = metric_eval(a, x), eb = metric_eval(b, x);
    for (int d = 0; d < 3; ++d) {
      CHECK(ea.H_sq[d] == doctest::Approx(e.H_sq[d]).epsilon(1e-13));
      CHECK(eb.H_sq[d] == doctest::Approx(e.H_sq[d]).epsilon(1e-13));
    }
  }
  Eigen::Matrix2d singular;
  singular << 1, 2, 2, 4;
  CHECK_THROWS_AS(column_gauge(m.S, singular), Error);
}

TEST_CASE("canonical gauge normalizes gauge-equivalent blocks identically") {
  const StackelMatrix S = flat();
  Eigen::Matrix2d G;
  G << 2.0, 0.5, -0.3, 1.2;
  const StackelMatrix T = column_gauge(S, G);
  const StackelMatrix nS = column_gauge(S, canonical_angular_gauge(S).inverse());
  const StackelMatrix nT = column_gauge(T, canonical_angular_gauge(T).inverse());
  for (int r = 1; r < 3; ++r)
    for (int c = 1; c < 3; ++c) CHECK(nS(r, c)(0.3) == doctest::Approx(nT(r, c)(0.3)).epsilon(1e-12));
}

TEST_CASE("fixture loading diagnostics") {
  CHECK_THROWS_AS(load_fixture(STACKEL_FIXTURES "/does_not_exist.json"), Error);
  nlohmann::json bad = {{"rows", {{1, 2}, {0, 1, 1}, {0, 1, -2}}}, {"A", 1.0}, {"phi", {0, 0, 0}}};
  CHECK_THROWS_AS(fixture_from_json(bad), Error);
  nlohmann::json ok = {{"rows", {{2, 1, 1}, {0, -1, 1}, {0, 1, -2}}}, {"A", 1.0}, {"phi", {0, 0, 0}}};
  const Fixture a = fixture_from_json(ok), b = fixture_from_json(ok);
  CHECK(a.hash == b.hash);
}

TEST_CASE("validation rejects an interleaved angular block") {
  Eigen::Matrix3d m;
  m << 2, 1, 1, 0, -1, 1, 0, -1, 2;
  CHECK_FALSE(validate_stackel(constant_stackel(m, 1.0)).valid);
}

TEST_CASE("reparametrization preserves the metric under the change of variable") {
  const StackelMatrix S = flat();
  const Model m{S, {UnivariateFn(), UnivariateFn(), UnivariateFn()}};
  const Model r = reparam_model(m, {UnivariateFn::parse("1 + 0.5*sin(pi*x)^2"), UnivariateFn::constant(1.0), UnivariateFn::constant(1.0)});
  const ReparamResult rr = reparam(m.S, m.phi, {UnivariateFn::parse("1 + 0.5*sin(pi*x)^2"), UnivariateFn::constant(1.0), UnivariateFn::constant(1.0)});
  // H₁ dx = H̄₁ dy with dy = sqrt(f) dx
  const double x = 0.37, y = rr.maps[0].forward(x);
  const double f = 1 + 0.5 * std::pow(std::sin(M_PI * x), 2);
  const MetricEval e = metric_eval(m, {x, 1.0, 2.0}), er = metric_eval(r, {y, 1.0, 2.0});
  CHECK(er.H_sq[0] * f == doctest::Approx(e.H_sq[0]).epsilon(1e-10));
  CHECK(er.H_sq[1] == doctest::Approx(e.H_sq[1]).epsilon(1e-10));
}
