#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "stackel/errors.hpp"
#include "stackel/experiments.hpp"

using namespace stackel;
namespace fs = std::filesystem;

namespace {

std::string write_scenario(const std::string& name, const nlohmann::json& j) {
  const fs::path dir = fs::temp_directory_path() / "stackel_scenarios";
  fs::create_directories(dir);
  std::ofstream(dir / name) << j.dump();
  return (dir / name).string();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("scenario validation") {
  CHECK_THROWS_AS(Scenario::from_json({{"suite", "bogus"}, {"fixture", "f.json"}}, ".", "s"), Error);
  CHECK_THROWS_AS(Scenario::from_json({{"suite", "gauge"}}, ".", "s"), Error);
  CHECK_THROWS_AS(Scenario::from_json({{"suite", "gauge"}, {"fixture", "f.json"}, {"grid", 4}}, ".", "s"), Error);
  CHECK_THROWS_AS(Scenario::from_json({{"suite", "gauge"}, {"fixture", "f.json"}, {"colour", 1}}, ".", "s"), Error);
  const Scenario s = Scenario::from_json({{"suite", "all"}, {"fixture", "f.json"}, {"grid", 24}, {"seed", 3}}, "/base", "s");
  CHECK(s.fixture == "/base/f.json");
  CHECK(s.options.grid.value() == 24);
  CHECK(s.options.seed == 3u);
  CHECK(s.options.out == "out");
}

TEST_CASE("row relations") {
  CHECK(make_row("a", 1e-11, 1e-10).status == "PASS");
  CHECK(make_row("a", 2e-10, 1e-10).status == "FAIL");
  CHECK(make_row("a", 1.9, 1.7, "in", 2.3).status == "PASS");
  CHECK(make_row("a", 2.4, 1.7, "in", 2.3).status == "FAIL");
  CHECK(make_row("a", std::nan(""), 1.0).status == "FAIL");
  CHECK(make_row("a", 0.5, 0.3, "ge").status == "PASS");
}

TEST_CASE("missing fixture and malformed scenario exit with 2") {
  const fs::path out = fs::temp_directory_path() / "stackel_scenarios" / "out_missing";
  CHECK(run_scenario(write_scenario("missing.json", {{"suite", "gauge"}, {"fixture", "nope.json"}, {"out", out.string()}}), false) == 2);
  const fs::path dir = fs::temp_directory_path() / "stackel_scenarios";
  std::ofstream(dir / "broken.json") << "{\"suite\": \"gauge\",";
  CHECK(run_scenario((dir / "broken.json").string(), false) == 2);
}

TEST_CASE("boundary identification: constructed equivalence passes, perturbed s33 is different") {
  SuiteOptions opt;
  const Fixture f = load_fixture(STACKEL_FIXTURES "/radial_variable.json");
  CHECK(suite_boundary_id(f, std::nullopt, opt).passed());
  const SuiteReport r = suite_boundary_id(load_fixture(STACKEL_FIXTURES "/f1.json"), load_fixture(STACKEL_FIXTURES "/perturbed_s33.json"), opt);
  CHECK_FALSE(r.passed());
  bool different = false;
  for (const auto& row : r.rows) different = different || row.status == "DIFFERENT";
  CHECK(different);
}

TEST_CASE("scenario runs are deterministic and write their report") {
  const fs::path out1 = fs::temp_directory_path() / "stackel_scenarios" / "det1";
  const fs::path out2 = fs::temp_directory_path() / "stackel_scenarios" / "det2";
  const std::string f1 = STACKEL_FIXTURES "/f1.json";
  CHECK(run_scenario(write_scenario("det1.json", {{"suite", "dn-oracle"}, {"fixture", f1}, {"grid", 24}, {"out", out1.string()}}), false) == 0);
  CHECK(run_scenario(write_scenario("det2.json", {{"suite", "dn-oracle"}, {"fixture", f1}, {"grid", 24}, {"out", out2.string()}}), false) == 0);
  CHECK(read_file(out1 / "convergence.csv") == read_file(out2 / "convergence.csv"));
  const auto report = nlohmann::json::parse(read_file(out1 / "report.json"));
  CHECK(report["status"] == "PASS");
  CHECK(report.contains("fixture_hash"));
  for (const auto& row : report["suites"][0]["rows"]) {
    CHECK(row.contains("name"));
    CHECK(row.contains("status"));
    CHECK(row.contains("worst_margin"));
    CHECK(row.contains("tolerance"));
  }
}

TEST_CASE("scaled fixture recovers its boundary coefficients") {
  const std::string fx = STACKEL_FIXTURES "/scaled.json";
  const RecoveryEstimate e = boundary_recovery(build_model(load_fixture(fx)));
  CHECK(e.s12 == doctest::Approx(4.0).epsilon(0.05));
  CHECK(e.s13 == doctest::Approx(1.0).epsilon(0.05));
}
