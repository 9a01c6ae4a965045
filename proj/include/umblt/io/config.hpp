#pragma once

#include <json.hpp>
#include <memory>
#include <string>
#include <vector>

#include "umblt/control/profile.hpp"
#include "umblt/measure/measurement.hpp"
#include "umblt/solver/rte_solver.hpp"

namespace umblt {

using Json = nlohmann::json;

/// One configuration key. type is one of number, integer, bool, string, vec2, numbers.
struct KeySpec {
  std::string path;  ///< dotted, e.g. "solver.rtol"
  std::string type;
  Json fallback;     ///< used when neither the config nor the preset sets the key
  std::string doc;
};

const std::vector<KeySpec>& config_schema();
/// Every key with its type, default and meaning.
std::string config_help();

/// Validated configuration with defaults and preset values filled in.
struct RunConfig {
  Json effective;  ///< full nested config, every schema key present
  std::string base_dir = ".";

  const Json& at(const std::string& dotted) const;
  double number(const std::string& k) const { return at(k).get<double>(); }
  int integer(const std::string& k) const { return at(k).get<int>(); }
  bool flag(const std::string& k) const { return at(k).get<bool>(); }
  std::string str(const std::string& k) const { return at(k).get<std::string>(); }
  Vec2 vec2(const std::string& k) const;
  std::vector<double> numbers(const std::string& k) const;

  Domain domain() const;
  DirectionSet directions() const;
  SolverOptions solver_options() const;
  std::string output_dir() const;
};

/// Validates against the schema: unknown keys, wrong types and out-of-range
/// values throw ValidationError naming the field path (e.g. "medium.sigma").
/// UMBLT_OUTPUT_DIR overrides output_dir.
RunConfig parse_config(const Json& j, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

/// Medium from the config: preset values, overrides and optional gridded files.
OpticalMedium build_medium(const RunConfig& c);
std::shared_ptr<RteSolver> build_solver(const RunConfig& c);
QLattice build_lattice(const RunConfig& c, const SpatialGrid& grid);
/// control.profile on the configured directions.
AngularProfile build_profile(const RunConfig& c, const DirectionSet& dirs);

}  // namespace umblt
