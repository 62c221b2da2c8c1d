#pragma once

#include <json.hpp>
#include <optional>
#include <string>

#include "stackel/geometry.hpp"

namespace stackel {

// A Stäckel model as read from JSON:
// {"rows":[[e,e,e],[e,e,e],[e,e,e]], "A":1.0, "phi":[e,e,e] | "compatible"}
// Entries are numbers or expressions in x; a potential given as "compatible" is chosen so that
// the conformal factor is identically one.
struct Fixture {
  std::string name;
  StackelMatrix S;
  Potentials phi;
  bool phi_compatible = false;
  std::optional<double> density_floor;
  nlohmann::json raw;
  std::string hash;
};

Fixture fixture_from_json(const nlohmann::json& j, const std::string& origin = "<inline>");
Fixture load_fixture(const std::string& path);
std::string content_hash(const std::string& text);

}  // namespace stackel
