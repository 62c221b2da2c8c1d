#include "stackel/fixture.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "stackel/errors.hpp"

namespace stackel {

namespace {

[[noreturn]] void config_fail(const std::string& origin, const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::ConfigError, origin + ": field '" + field + "': " + msg);
}

UnivariateFn entry(const nlohmann::json& v, const std::string& origin, const std::string& field) {
  if (v.is_number()) return UnivariateFn::constant(v.get<double>());
  if (v.is_string()) {
    try {
      return UnivariateFn::parse(v.get<std::string>());
    } catch (const Error& e) {
      config_fail(origin, field, e.what());
    }
  }
  config_fail(origin, field, "expected a number or an expression string");
}

}  // namespace

std::string content_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Fixture fixture_from_json(const nlohmann::json& j, const std::string& origin) {
  Fixture fx;
  fx.raw = j;
  fx.hash = content_hash(j.dump());
  fx.name = j.value("name", origin);
  if (!j.contains("rows")) config_fail(origin, "rows", "missing");
  const auto& rows = j.at("rows");
  if (!rows.is_array() || rows.size() != 3) config_fail(origin, "rows", "expected 3 rows");
  for (int i = 0; i < 3; ++i) {
    if (!rows[i].is_array() || rows[i].size() != 3) config_fail(origin, "rows[" + std::to_string(i) + "]", "expected 3 entries");
    for (int k = 0; k < 3; ++k)
      fx.S.s[i][k] = entry(rows[i][k], origin, "rows[" + std::to_string(i) + "][" + std::to_string(k) + "]");
  }
  if (!j.contains("A") || !j.at("A").is_number()) config_fail(origin, "A", "missing or not a number");
  fx.S.A = j.at("A").get<double>();
  if (!(fx.S.A > 0.0)) config_fail(origin, "A", "must be positive");

  for (auto& p : fx.phi) p = UnivariateFn::constant(0.0);
  if (j.contains("phi")) {
    const auto& ph = j.at("phi");
    if (ph.is_string() && ph.get<std::string>() == "compatible") {
      fx.phi_compatible = true;
    } else if (ph.is_array() && ph.size() == 3) {
      for (int i = 0; i < 3; ++i) fx.phi[i] = entry(ph[i], origin, "phi[" + std::to_string(i) + "]");
    } else {
      config_fail(origin, "phi", "expected 3 entries or \"compatible\"");
    }
  }
  if (fx.phi_compatible) {
    auto p = compatible_potentials(fx.S);
    if (!p) config_fail(origin, "phi", "\"compatible\" needs closed-form rows with at most one varying row");
    fx.phi = *p;
  }
  if (j.contains("density_floor")) fx.density_floor = j.at("density_floor").get<double>();
  return fx;
}

Fixture load_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, path + ": cannot open fixture file");
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, path + ": " + e.what());
  }
  return fixture_from_json(j, path);
}

}  // namespace stackel
