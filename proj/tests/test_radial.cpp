#include <doctest.h>

#include <cmath>
#include <random>

#include "stackel/conformal.hpp"
#include "stackel/errors.hpp"
#include "stackel/radial.hpp"

using namespace stackel;

namespace {

RadialRow flat_row() {
  return RadialRow(UnivariateFn::constant(1.0), UnivariateFn::constant(1.0), UnivariateFn::constant(0.0), 1.0);
}

}  // namespace

TEST_CASE("Wronskians stay at one for random complex pairs") {
  const Model m = build_model(load_fixture(STACKEL_FIXTURES "/radial_variable.json"));
  const RadialRow row = RadialRow::of(m);
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> U(-60.0, 60.0);
  FssOptions o;
  o.high_precision = true;
  for (int i = 0; i < 20; ++i) {
    const FssData f = fss(row, {cplx(U(gen), U(gen)), cplx(U(gen), U(gen))}, o);
    CHECK(std::abs(f.W0 - 1.0) < 1e-10);
    CHECK(std::abs(f.W1 - 1.0) < 1e-10);
  }
}

TEST_CASE("flat row closed forms") {
  const RadialRow row = flat_row();
  for (const cplx k2 : {cplx(0.5, 0.0), cplx(30.0, 4.0), cplx(-20.0, 0.5), cplx(400.0, -50.0)}) {
    const WTData w = wt(row, {k2, 0.0});
    const cplx k = std::sqrt(k2);
    CHECK(std::abs(w.Delta_value() - std::sinh(k) / k) <= 1e-8 * std::abs(std::sinh(k) / k));
    const cplx M = -k * std::cosh(k) / std::sinh(k);
    CHECK(std::abs(w.M - M) <= 1e-8 * std::abs(M));
    CHECK(std::abs(w.N - M) <= 1e-8 * std::abs(M));
  }
  const WTData z = wt(row, {0.0, 0.0});
  CHECK(std::abs(z.Delta_value() - 1.0) < 1e-10);
  CHECK(std::abs(z.M + 1.0) < 1e-10);
}

TEST_CASE("Dirichlet poles are flagged") {
  const RadialRow row = flat_row();
  const SpectralPair pole{-M_PI * M_PI, 0.0};
  CHECK(wt(row, pole).is_pole);
  CHECK_THROWS_AS(wt_regular(row, pole), Error);
  CHECK_FALSE(wt(row, {-M_PI * M_PI + 1e-3, 0.0}).is_pole);
}

TEST_CASE("boundary derivative map reproduces the solution of the two-point problem") {
  const Model m = build_model(load_fixture(STACKEL_FIXTURES "/exp_radial.json"));
  const RadialRow row = RadialRow::of(m);
  const SpectralPair p{7.0, 3.0};
  FssOptions o;
  o.trajectory = true;
  const FssData f = fss(row, p, o);
  const WTData w = wt(f);
  const Eigen::Matrix2cd B = bvp_derivative_map(w);
  // the sine-type solution from x = 0: u(0) = 0, u'(0) = 1
  const cplx uA = f.s0 * std::exp(f.log_scale0), duA = f.ds0 * std::exp(f.log_scale0);
  const Eigen::Vector2cd d = B * Eigen::Vector2cd(0.0, uA);
  CHECK(std::abs(d(0) - 1.0) < 1e-9);
  CHECK(std::abs(d(1) - duA) < 1e-9 * std::abs(duA));
}

TEST_CASE("normal form link residuals") {
  const Fixture fx = load_fixture(STACKEL_FIXTURES "/radial_variable.json");
  const Model m = build_model(fx);
  const RadialNormalForm nf = radial_normal_form(m.S, m.phi[0]);
  const RadialRow row = RadialRow::of(m);
  for (const SpectralPair p : {SpectralPair{3.0, 2.0}, SpectralPair{cplx(50.0, 5.0), 20.0}, SpectralPair{-4.0, -1.0}}) {
    const LiouvilleReport r = liouville_wt(nf, row, p);
    CHECK(r.res_delta < 1e-8);
    CHECK(r.res_D < 1e-8);
    CHECK(r.res_M < 1e-8);
  }
  const OmegaForm o = omega_form(row, 12.0, 7.0);
  CHECK(o.res_delta < 1e-8);
  CHECK(o.res_D < 1e-8);
}

TEST_CASE("growth exponent of simple power laws") {
  std::vector<double> x, y1, y2;
  for (int i = 0; i < 64; ++i) {
    x.push_back(10.0 * std::pow(50.0, i / 63.0));
    y1.push_back(3.0 + std::sin(x.back()));
    y2.push_back(x.back());
  }
  CHECK(std::abs(growth_exponent(x, y1)) < 0.1);
  CHECK(growth_exponent(x, y2) == doctest::Approx(1.0).epsilon(1e-6));
}
