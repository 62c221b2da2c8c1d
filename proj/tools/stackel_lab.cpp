#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>

#include "stackel/conformal.hpp"
#include "stackel/errors.hpp"
#include "stackel/experiments.hpp"
#include "stackel/radial.hpp"

using namespace stackel;
namespace fs = std::filesystem;

namespace {

std::string out_path(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

int cmd_validate(const std::string& path) {
  const Fixture fx = load_fixture(path);
  const ValidationReport v = validate_stackel(fx.S);
  for (const auto& it : v.items) std::printf("%-32s %s  margin %.3e\n", it.name.c_str(), it.passed ? "ok  " : "FAIL", it.margin);
  std::printf("cone [%.6g, %.6g]  hash %s  %s\n", v.c1, v.c2, fx.hash.c_str(), v.valid ? "VALID" : "INVALID");
  return v.valid ? 0 : 1;
}

int cmd_spectrum(const std::string& path, int count, double mu2_max, int oracle_n, const std::string& out) {
  const Model model = build_model(load_fixture(path));
  const AngularOperators ops = AngularOperators::of(model);
  const auto pairs = oracle_n > 0 ? joint_spectrum_oracle(ops, oracle_n, count)
                                  : joint_spectrum_shooting(ops, {mu2_max, mu2_max > 0 ? 0 : count, false});
  for (size_t m = 0; m < pairs.size(); ++m)
    std::printf("%4zu  mu2 %.12g  nu2 %.12g  mult %d\n", m, pairs[m].mu2, pairs[m].nu2, pairs[m].multiplicity);
  write_spectrum_csv(out_path(out, "spectrum.csv"), pairs);
  return 0;
}

int cmd_wt(const std::string& path, double re_mu2, double im_mu2, double re_nu2, double im_nu2, const std::string& out) {
  const Model model = build_model(load_fixture(path));
  const RadialRow row = RadialRow::of(model);
  const SpectralPair p{cplx(re_mu2, im_mu2), cplx(re_nu2, im_nu2)};
  const WTData w = wt(row, p, FssOptions{.high_precision = true});
  auto show = [](const char* n, cplx v) { std::printf("%-6s %.15g %+.15gi\n", n, v.real(), v.imag()); };
  show("Delta", w.Delta_value());
  show("D", w.D_value());
  show("E", w.E_value());
  if (w.is_pole) std::printf("pole: Dirichlet eigenvalue of the radial row\n");
  else show("M", w.M), show("N", w.N);
  write_wt_csv(out_path(out, "wt.csv"), {{p, w}});
  return 0;
}

int cmd_dn(const std::string& path, int grid, int harmonics, const std::string& out) {
  const Fixture fx = load_fixture(path);
  const Model model = build_model(fx);
  const DnOperator op = separated_dn(model, harmonics, grid);
  std::printf("blocks %zu  modes %d  withheld %zu\n", op.blocks.size(), op.truncation, op.withheld.size());
  export_dn(op, fx.hash, out_path(out, "dn"));
  return 0;
}

int cmd_oracle(const std::string& path, int grid, int harmonics, unsigned seed, const std::string& out) {
  const Model model = build_model(load_fixture(path));
  const AngularOperators ops = AngularOperators::of(model);
  const auto spectrum = joint_spectrum_shooting(ops, {40.0, 0, true});
  const std::vector<int> grids{grid - 8, grid, grid + 8};
  const ConvergenceReport r = compare_dn(model, ops, spectrum, grids, 10, 8, seed, harmonics);
  for (const auto& row : r.rows) std::printf("grid %3d  datum %2d  rel_err %.6e\n", row.grid, row.datum, row.rel_err);
  std::printf("fitted order %.4f  (per datum %.4f .. %.4f)  projection residual %.2e\n", r.order, r.min_order, r.max_order,
              r.max_projection_residual);
  write_convergence_csv(out_path(out, "convergence.csv"), r);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stäckel-metric spectral toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  int grid = 24, harmonics = 64;
  double tol = 0.0;
  std::string out = "out";
  bool parallel = false;
  app.add_option("--grid", grid, "middle grid of the refinement study")->check(CLI::Range(16, 512));
  app.add_option("--harmonics", harmonics, "modes kept in the separated DN operator")->check(CLI::PositiveNumber);
  app.add_option("--tol", tol, "override of the primary tolerance");
  app.add_option("--out", out, "artifact directory");
  app.add_flag("--parallel", parallel, "run independent suites concurrently");

  std::string fixture, scenario;
  auto* validate = app.add_subcommand("validate", "check the structural conditions of a fixture");
  validate->add_option("fixture", fixture)->required();

  int count = 20, oracle_n = 0;
  double mu2_max = 0.0;
  auto* spectrum = app.add_subcommand("spectrum", "joint angular spectrum");
  spectrum->add_option("fixture", fixture)->required();
  spectrum->add_option("--count", count);
  spectrum->add_option("--mu2-max", mu2_max);
  spectrum->add_option("--oracle", oracle_n, "use the collocation oracle on an N×N grid");

  std::vector<double> mu2{0.0, 0.0}, nu2{0.0, 0.0};
  auto* wtc = app.add_subcommand("wt", "boundary spectral data at one pair");
  wtc->add_option("fixture", fixture)->required();
  wtc->add_option("--mu2", mu2, "real and imaginary part")->expected(1, 2);
  wtc->add_option("--nu2", nu2, "real and imaginary part")->expected(1, 2);

  auto* dn = app.add_subcommand("dn", "assemble and export the separated DN operator");
  dn->add_option("fixture", fixture)->required();

  unsigned seed = 0;
  auto* oracle = app.add_subcommand("oracle", "separated DN against the finite-difference solver");
  oracle->add_option("fixture", fixture)->required();
  oracle->add_option("--seed", seed);

  auto* suite = app.add_subcommand("suite", "run a scenario file");
  suite->add_option("scenario", scenario)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*validate) return cmd_validate(fixture);
    if (*spectrum) return cmd_spectrum(fixture, count, mu2_max, oracle_n, out);
    if (*wtc) {
      mu2.resize(2, 0.0);
      nu2.resize(2, 0.0);
      return cmd_wt(fixture, mu2[0], mu2[1], nu2[0], nu2[1], out);
    }
    if (*dn) return cmd_dn(fixture, grid, harmonics, out);
    if (*oracle) return cmd_oracle(fixture, grid, harmonics, seed, out);
    if (*suite) {
      SuiteOptions ov;
      ov.out.clear();
      if (app.count("--grid")) ov.grid = grid;
      if (app.count("--harmonics")) ov.harmonics = harmonics;
      if (app.count("--tol")) ov.tol = tol;
      if (app.count("--out")) ov.out = out;
      return run_scenario(scenario, parallel, &ov);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    const bool config = e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::ParseError;
    return config ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
