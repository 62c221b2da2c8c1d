#include <doctest.h>

#include <cmath>

#include "stackel/angular.hpp"
#include "stackel/conformal.hpp"
#include "stackel/errors.hpp"

using namespace stackel;

namespace {

AngularOperators flat_ops() {
  Eigen::Matrix3d m;
  m << 2, 1, 1, 0, -1, 1, 0, 1, -2;
  return AngularOperators::of(constant_stackel(m, 1.0), {UnivariateFn(), UnivariateFn(), UnivariateFn()});
}

}  // namespace

TEST_CASE("constant Hill row has trace 2 cos(2π sqrt λ)") {
  const HillRow row(UnivariateFn::constant(-1.0), UnivariateFn::constant(0.0), UnivariateFn::constant(0.0));
  for (double lam : {0.3, 1.0, 2.25, 7.1}) {
    const Monodromy m = hill_monodromy(row, lam, 0.0);
    CHECK(m.trace() == doctest::Approx(2 * std::cos(2 * M_PI * std::sqrt(lam))).epsilon(1e-9));
    CHECK(m.M.determinant() * std::exp(2 * m.log_scale) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("flat joint spectrum and multiplicities") {
  const auto sp = joint_spectrum_shooting(flat_ops(), {0.0, 12, true});
  REQUIRE(sp.size() == 12);
  CHECK(std::abs(sp[0].mu2) < 1e-9);
  CHECK(sp[0].multiplicity == 1);
  for (const auto& p : sp) {
    // µ² = 2j² + k², ν² = j² + k²
    const double j2 = p.mu2 - p.nu2, k2 = 2 * p.nu2 - p.mu2;
    CHECK(std::abs(std::sqrt(std::max(j2, 0.0)) - std::round(std::sqrt(std::max(j2, 0.0)))) < 1e-7);
    CHECK(std::abs(std::sqrt(std::max(k2, 0.0)) - std::round(std::sqrt(std::max(k2, 0.0)))) < 1e-7);
    const int mult = (std::round(j2) > 0 ? 2 : 1) * (std::round(k2) > 0 ? 2 : 1);
    CHECK(p.multiplicity == mult);
    CHECK(p.residual_v < 1e-8);
    CHECK(p.residual_w < 1e-8);
  }
}

TEST_CASE("separated modes are orthonormal and solve the discrete rows") {
  const AngularOperators ops = flat_ops();
  const auto sp = joint_spectrum_shooting(ops, {0.0, 6, true});
  const int N = 24;
  std::vector<Eigen::VectorXd> all;
  for (const auto& p : sp)
    for (auto& y : joint_modes(ops, p, N, N)) all.push_back(y);
  const double h = 2 * M_PI / N;
  for (size_t a = 0; a < all.size(); ++a)
    for (size_t b = 0; b < all.size(); ++b) {
      double ip = 0.0;
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) ip += ops.weight(j * h, k * h) * all[a](j * N + k) * all[b](j * N + k) * h * h;
      CHECK(ip == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-9));
    }
  const auto [rh, rl] = discrete_eigen_residual(ops, sp[3], 32);
  CHECK(rh < 1e-8);
  CHECK(rl < 1e-8);
}

TEST_CASE("variable angular row: shooting agrees with collocation") {
  const Model m = build_model(load_fixture(STACKEL_FIXTURES "/angular_variable.json"));
  const AngularOperators ops = AngularOperators::of(m);
  const auto s = joint_spectrum_shooting(ops, {0.0, 8, false});
  const auto o = joint_spectrum_oracle(ops, 32, 12);
  for (const auto& p : s) {
    double best = 1e300;
    for (const auto& q : o) best = std::min(best, std::max(std::abs(p.mu2 - q.mu2), std::abs(p.nu2 - q.nu2)));
    CHECK(best < 1e-6);
  }
}

TEST_CASE("shift moves the spectrum rigidly") {
  const AngularOperators ops = flat_ops();
  const auto a = joint_spectrum_shooting(ops, {0.0, 5, false});
  const auto b = joint_spectrum_shooting(ops.shifted(1.5, -0.5), {0.0, 5, false});
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(b[i].mu2 == doctest::Approx(a[i].mu2 + 1.5));
    CHECK(b[i].nu2 == doctest::Approx(a[i].nu2 - 0.5));
  }
}

TEST_CASE("cone density needs enough pairs") {
  const auto sp = joint_spectrum_shooting(flat_ops(), {0.0, 5, false});
  CHECK_THROWS_AS(cone_density(sp, 0.5, 1.0, 0.05, 2.0), Error);
}
