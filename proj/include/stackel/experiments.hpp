#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "stackel/angular.hpp"
#include "stackel/conformal.hpp"
#include "stackel/dn.hpp"
#include "stackel/fixture.hpp"
#include "stackel/oracle.hpp"

namespace stackel {

// relation: "le" passes when worst_margin ≤ tolerance, "ge" when ≥, "in" when inside [tolerance, upper].
struct SuiteRow {
  std::string name;
  std::string status;  // PASS, FAIL, DIFFERENT
  double worst_margin = 0.0;
  double tolerance = 0.0;
  std::string relation = "le";
  double upper = 0.0;
  nlohmann::json details = nlohmann::json::object();
};

struct SuiteReport {
  std::string suite;
  std::vector<SuiteRow> rows;
  bool passed() const;
  nlohmann::json to_json() const;
};

SuiteRow make_row(const std::string& name, double measured, double tol, const std::string& relation = "le", double upper = 0.0);

struct SuiteOptions {
  std::optional<int> grid;
  int harmonics = 64;
  std::optional<double> tol;
  unsigned seed = 0;
  std::string out;  // artifact directory; empty disables writing
};

struct Scenario {
  std::string suite;
  std::string fixture;
  std::optional<std::string> fixture2;
  SuiteOptions options;
  static Scenario from_json(const nlohmann::json& j, const std::string& base_dir, const std::string& origin);
};

// Model with its angular block rewritten in the canonical normalized gauge.
Model normalized_model(const Model& m);

// DN operator with at least `modes` modes taken from a freshly computed spectrum.
DnOperator separated_dn(const Model& model, int modes, int grid);

struct RecoveryEstimate {
  double s12 = 0.0, s13 = 0.0, intercept = 0.0;
  double expected_s12 = 0.0, expected_s13 = 0.0, expected_intercept = 0.0;
  int points = 0;
  std::vector<std::array<double, 3>> table;  // µ², ν², M
};
// Regression of −M ≈ sqrt(a µ² + b ν²) + c on joint-spectrum points with µ in [mu_lo, mu_hi].
// The expected intercept is the window average of ¼(µ²s12' + ν²s13')/(µ²s12 + ν²s13) at x = 0.
RecoveryEstimate boundary_recovery(const Model& model, double mu_lo = 15.0, double mu_hi = 40.0);

struct CamReport {
  std::vector<std::array<double, 4>> spectrum_values;  // µ², ν², |F|/scale, log scale
  double max_relative_on_spectrum = 0.0;
  double max_relative_on_fans = 0.0;
};
// F = DΔ̃ − D̃Δ on the first `points` joint-spectrum points of the common normalized gauge.
CamReport cam_compare(const Model& a, const Model& b, int points = 30);

// |F(iy, iy')|·ω over ω in [lo, hi] along three directions. `majorant` is the growth exponent of
// (|DΔ̃| + |D̃Δ|)·ω, which dominates |F|·ω pointwise; `raw` fits |F|·ω itself and is slow to
// settle when the two radial rows differ only slightly.
struct FanGrowth {
  double majorant = 0.0, raw = 0.0;
  double max_scaled = 0.0;  // max |F|·ω
  double max_majorant = 0.0;
};
FanGrowth cam_imaginary_growth(const Model& a, const Model& b, double lo = 10.0, double hi = 300.0, int samples = 40);

SuiteReport suite_gauge_invariance(const Fixture& fx, const SuiteOptions& opt);
SuiteReport suite_boundary_id(const Fixture& fx, const std::optional<Fixture>& fx2, const SuiteOptions& opt);
SuiteReport suite_cam(const Fixture& fx, const std::optional<Fixture>& fx2, const SuiteOptions& opt);
SuiteReport suite_boundary_recovery(const Fixture& fx, const SuiteOptions& opt);
SuiteReport suite_dn_oracle(const Fixture& fx, const SuiteOptions& opt);
SuiteReport suite_spectrum_density(const Fixture& fx, const SuiteOptions& opt);

// Runs a scenario file; writes report.json under the output directory. Returns the exit code.
int run_scenario(const std::string& path, bool parallel, const SuiteOptions* overrides = nullptr);

}  // namespace stackel
