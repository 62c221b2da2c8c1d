#include <doctest.h>

#include <cmath>

#include "stackel/conformal.hpp"
#include "stackel/oracle.hpp"

using namespace stackel;

TEST_CASE("constant boundary data gives a constant conformal factor when the zeroth-order term vanishes") {
  const Fixture fx = load_fixture(STACKEL_FIXTURES "/radial_variable.json");
  const Grid3 g = Grid3::cube(12, fx.S.A);
  const ZerothOrderField z = zeroth_order_coefficient(fx.S, fx.phi, g);
  CHECK(std::max(std::abs(z.min), std::abs(z.max)) < 1e-9);
  const BoundaryData eta = BoundaryData::sample(12, 12, [](double, double) { return 2.5; }, [](double, double) { return 2.5; });
  const ConformalSolution s = solve_conformal(fx.S, fx.phi, eta, g);
  CHECK(s.c.min() == 2.5);
  CHECK(s.c.max() == 2.5);
}

TEST_CASE("maximum principle bounds for a nonnegative zeroth-order term") {
  const Fixture fx = load_fixture(STACKEL_FIXTURES "/potential.json");
  const Grid3 g = Grid3::cube(12, fx.S.A);
  const BoundaryData eta = BoundaryData::sample(
      12, 12, [](double a, double b) { return 1.0 + 0.2 * std::cos(a) * std::sin(b); }, [](double, double) { return 1.5; });
  const ConformalSolution s = solve_conformal(fx.S, fx.phi, eta, g);
  CHECK(s.c.min() > 0.0);
  if (s.coefficient_nonnegative) CHECK(s.upper_bound_checked);
  if (s.coefficient_nonpositive) CHECK(s.lower_bound_checked);
  CHECK(s.residual < 1e-8);
}

TEST_CASE("alpha quotient is independent of the boundary data up to discretization error") {
  const Fixture fx = load_fixture(STACKEL_FIXTURES "/radial_variable.json");
  std::vector<int> ns{12, 16};
  std::vector<double> d;
  for (int n : ns) {
    const Grid3 g = Grid3::cube(n, fx.S.A);
    auto one = [](double, double) { return 1.0; };
    const ConformalSolution a = solve_conformal(fx.S, fx.phi, BoundaryData::sample(n, n, one, one), g);
    const ConformalSolution b = solve_conformal(
        fx.S, fx.phi, BoundaryData::sample(n, n, [](double x, double) { return 1.0 + 0.3 * std::sin(x); }, [](double, double) { return 2.0; }),
        g);
    const AlphaReport r = alpha_pde_check(fx.S, a.c, b.c);
    d.push_back(r.max_diff);
    // the quantity with α in place of its fourth root does not cancel
    CHECK(r.literal_max_diff > 100 * r.max_diff);
  }
  CHECK(d[1] < d[0]);
}

TEST_CASE("build_model keeps c = 1 for compatible potentials and solves otherwise") {
  const Model a = build_model(load_fixture(STACKEL_FIXTURES "/exp_radial.json"), 12);
  CHECK(a.c->constant_value().value_or(-1.0) == 1.0);
  const Model b = build_model(load_fixture(STACKEL_FIXTURES "/potential.json"), 12);
  CHECK_FALSE(b.c->constant_value().has_value());
  CHECK(b.c->value({0.0, 1.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-12));
}
