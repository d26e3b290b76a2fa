#pragma once

// Replication engine for coverage studies of the standardized MRC error.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mrc/simulate.hpp"

namespace mrc {

/// Two-sided standard-normal critical values.
inline constexpr double kZ95 = 1.959964;
inline constexpr double kZ99 = 2.575829;

struct ScenarioConfig {
  std::string id = "scenario";
  SimulationConfig sim;
  double theta = 1.0;
  int replications = 1000;
  std::uint64_t master_seed = 42;
  std::pair<int, int> target{0, 1};  // zero-based (k, l)
  bool finite_sample_psis = true;
  bool block_scaling = true;

  void validate() const;
};

struct ScenarioResult {
  double mean = 0.0;
  double sd = 0.0;
  double coverage95 = 0.0;
  double coverage99 = 0.0;
  int replications_used = 0;
  int failures = 0;
  std::vector<double> z;  // standardized values of the successful replications
};

/// Standardized statistic of replication `r`; its random stream depends
/// only on (master_seed, r). Throws DegenerateVariance / InsufficientData
/// for replications that cannot be standardized.
double run_replication(const ScenarioConfig& cfg, std::uint64_t r);

/// Runs all replications on `threads` workers. Output does not depend on
/// the worker count. Throws Error when every replication fails.
ScenarioResult run_scenario(const ScenarioConfig& cfg, unsigned threads = 1);

/// Mean, sample SD and coverage of a set of z values.
ScenarioResult summarize(std::vector<double> z, int failures);

struct TableRow {
  ScenarioConfig config;
  std::optional<ScenarioResult> result;
  std::string error;  // set when the scenario failed
};

/// One row per config, in order. Scenario errors are recorded in the row.
/// Throws UsageError for an empty list.
std::vector<TableRow> run_table(const std::vector<ScenarioConfig>& cfgs, unsigned threads = 1);

/// Columns: scenario_id,theta,scheme,p,n,reps,mean,sd,cov95,cov99,failures
void write_table_csv(std::ostream& out, const std::vector<TableRow>& rows);

/// Rows plus a full config echo. Deterministic: carries no timestamps.
nlohmann::json table_json(const std::vector<TableRow>& rows);

nlohmann::json to_json(const ScenarioConfig& cfg);

}  // namespace mrc
