#pragma once

// Flat `section.key = value` configuration. Every key has a default
// from the standard two-asset setup, so an empty file is one scenario.
// A few keys accept comma-separated lists and expand into a Cartesian
// product of scenarios: scheme.kind (outer), mc.theta, scheme.p (inner).
// Numbers may be written as rationals, e.g. `1/3`.

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "mrc/montecarlo.hpp"
#include "mrc/simulate.hpp"

namespace mrc {

struct ConfigEntry {
  std::string value;
  std::size_t line = 0;  // 0 for command-line overrides
};

using KeyValues = std::map<std::string, ConfigEntry>;

/// Throws ParseError on malformed lines and UsageError on unknown keys.
KeyValues parse_key_values(std::istream& in);

/// `key=value` from the command line; same key checks as the file.
void apply_override(KeyValues& kv, const std::string& assignment);

/// Every accepted key with its default value, in documentation order.
const std::vector<std::pair<std::string, std::string>>& config_defaults();

/// Number or rational `a/b`.
double parse_real(const std::string& token);

std::vector<ScenarioConfig> build_scenarios(const KeyValues& kv);

/// Single simulation (list values rejected).
SimulationConfig build_simulation(const KeyValues& kv);

}  // namespace mrc
