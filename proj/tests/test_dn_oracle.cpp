#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "stackel/conformal.hpp"
#include "stackel/dn.hpp"
#include "stackel/errors.hpp"
#include "stackel/oracle.hpp"

using namespace stackel;

namespace {

struct Setup {
  Model model;
  AngularOperators ops;
  std::vector<JointEigenpair> spectrum;
};

Setup setup(const std::string& name) {
  Model m = build_model(load_fixture(std::string(STACKEL_FIXTURES "/") + name));
  AngularOperators ops = AngularOperators::of(m);
  auto sp = joint_spectrum_shooting(ops, {40.0, 0, true});
  return {m, ops, sp};
}

double boundary_pairing(const Model& m, const BoundaryData& a, const BoundaryData& b) {
  const double h2 = kTwoPi / a.N2, h3 = kTwoPi / a.N3;
  double s = 0.0;
  for (int j = 0; j < a.N2; ++j)
    for (int k = 0; k < a.N3; ++k) {
      const size_t i = j * a.N3 + k;
      const MetricEval e0 = metric_eval(m, {0.0, j * h2, k * h3}), e1 = metric_eval(m, {m.S.A, j * h2, k * h3});
      s += std::sqrt(e0.H_sq[1] * e0.H_sq[2]) * a.f0[i] * b.f0[i] + std::sqrt(e1.H_sq[1] * e1.H_sq[2]) * a.f1[i] * b.f1[i];
    }
  return s * h2 * h3;
}

}  // namespace

TEST_CASE("flat fixture: separated DN matches the oracle on constant data and annihilates constants") {
  const Setup s = setup("f1.json");
  const int N = 16;
  const DnOperator op = assemble_dn(s.model, s.ops, s.spectrum, 64, N, N);
  const DiscreteLaplaceSystem sys(sample_metric(s.model, Grid3::cube(N, s.model.S.A)));
  BoundaryData f(N, N);
  std::fill(f.f0.begin(), f.f0.end(), 1.0);
  CHECK(relative_l2(apply_dn(op, f).out, dn_oracle(sys, f)) < 1e-10);
  std::fill(f.f1.begin(), f.f1.end(), 1.0);
  const BoundaryData z = apply_dn(op, f).out;
  for (size_t i = 0; i < z.size(); ++i) {
    CHECK(std::abs(z.f0[i]) < 1e-10);
    CHECK(std::abs(z.f1[i]) < 1e-10);
  }
  CHECK(sys.symmetry_defect() < 1e-12);
  CHECK(sys.constant_defect() < 1e-12);
}

TEST_CASE("separated DN is symmetric in the boundary area pairing") {
  const Setup s = setup("radial_variable.json");
  const int N = 16;
  const DnOperator op = assemble_dn(s.model, s.ops, s.spectrum, 64, N, N);
  const BoundaryData f = harmonic_datum(op, 8, 1), g = harmonic_datum(op, 8, 2);
  const double a = boundary_pairing(s.model, apply_dn(op, f).out, g), b = boundary_pairing(s.model, f, apply_dn(op, g).out);
  CHECK(a == doctest::Approx(b).epsilon(1e-8));
  CHECK(apply_dn(op, f).projection_residual < 1e-10);
}

TEST_CASE("DN blocks: symmetric form and its eigen-decomposition") {
  const Setup s = setup("exp_radial.json");
  const DnOperator op = assemble_dn(s.model, s.ops, s.spectrum, 32, 12, 12);
  REQUIRE_FALSE(op.blocks.empty());
  for (const auto& b : op.blocks) {
    // row 2 of the raw map carries a minus sign
    CHECK(b.block(0, 1) == doctest::Approx(-b.block(1, 0)).epsilon(1e-9));
    CHECK(block_eigen(b.block).residual < 1e-12);
    CHECK(b.omega_minus <= b.omega_plus);
  }
  CHECK(op.truncation <= 32);
}

TEST_CASE("discrete maximum principle of the oracle solve") {
  const Setup s = setup("angular_variable.json");
  const int N = 12;
  const DiscreteLaplaceSystem sys(sample_metric(s.model, Grid3::cube(N, s.model.S.A)));
  const BoundaryData f = BoundaryData::sample(
      N, N, [](double a, double b) { return std::sin(a) * std::cos(2 * b); }, [](double a, double) { return 0.5 * std::cos(a); });
  const ScalarField3 u = solve_laplace(sys, f);
  CHECK(u.min() >= -1.0 - 1e-9);
  CHECK(u.max() <= 1.0 + 1e-9);
}

TEST_CASE("convergence order of separated DN against the oracle") {
  const Setup s = setup("f1.json");
  const ConvergenceReport r = compare_dn(s.model, s.ops, s.spectrum, {12, 16, 24}, 3, 8, 0, 64);
  CHECK(r.order > 1.6);
  CHECK(r.order < 2.4);
  CHECK(fitted_order({10, 20}, {1.0, 0.25}) == doctest::Approx(2.0));
}

TEST_CASE("DN export and grid mismatch") {
  const Setup s = setup("f1.json");
  const DnOperator op = assemble_dn(s.model, s.ops, s.spectrum, 16, 8, 8);
  const auto dir = std::filesystem::temp_directory_path() / "stackel_dn_export";
  std::filesystem::create_directories(dir);
  export_dn(op, "hash", (dir / "dn").string());
  CHECK(std::filesystem::exists(dir / "dn.json"));
  CHECK(std::filesystem::exists(dir / "dn.csv"));
  CHECK_THROWS_AS(apply_dn(op, BoundaryData(10, 10)), Error);
}
