// mrc: command-line front end.
//
//   mrc constants --profile minmax [--kn K]
//   mrc estimate  --input ticks.csv [--theta 1] [--kn K] [--continuous-psi]
//   mrc simulate  [--config file] [--set key=value]... --seed S --output ticks.csv
//   mrc mc        [--config file] [--set key=value]... [--reps R] [--seed S]
//
// Exit codes: 0 success, 1 runtime/numeric failure, 2 usage or parse error.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mrc/config.hpp"
#include "mrc/errors.hpp"
#include "mrc/estimator.hpp"
#include "mrc/montecarlo.hpp"
#include "mrc/simulate.hpp"
#include "mrc/tickdata.hpp"
#include "mrc/weights.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// 12 digits after the point, exponent without padding: 8.333333333333e-2.
std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  std::string s(buf);
  const auto e = s.find('e');
  std::string mant = s.substr(0, e);
  std::string exp = s.substr(e + 1);
  const char sign = exp[0];
  exp = exp.substr(1);
  exp.erase(0, std::min(exp.find_first_not_of('0'), exp.size() - 1));
  return mant + "e" + (sign == '-' ? "-" : "") + exp;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(mrc::parse_real(item));
  return out;
}

mrc::WeightProfile make_profile(const std::string& name, const std::string& knots,
                                const std::string& values) {
  if (name == "minmax") return mrc::WeightProfile::min_max();
  if (name == "custom") {
    if (knots.empty() || values.empty())
      throw mrc::UsageError("custom profile needs --knots and --values");
    try {
      return mrc::WeightProfile::piecewise_linear(parse_list(knots), parse_list(values));
    } catch (const mrc::InvalidParameters& e) {
      throw mrc::UsageError(e.what());
    }
  }
  throw mrc::UsageError("unknown weight profile '" + name + "'");
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw mrc::Error("cannot open output file '" + path + "'");
  return file;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

mrc::KeyValues load_config(const std::string& path, const std::vector<std::string>& sets) {
  mrc::KeyValues kv;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw mrc::UsageError("cannot open config file '" + path + "'");
    kv = mrc::parse_key_values(in);
  }
  for (const auto& s : sets) mrc::apply_override(kv, s);
  return kv;
}

// ---------------------------------------------------------------------------

struct ConstantsArgs {
  std::string profile;
  std::string knots, values;
  std::optional<int> kn;
};

int cmd_constants(const ConstantsArgs& a) {
  const auto profile = make_profile(a.profile, a.knots, a.values);
  const auto phis = profile.kind() == mrc::WeightProfile::Kind::MinMax
                        ? mrc::min_max_capital_phi()
                        : mrc::capital_phi(profile);
  const auto psis = mrc::psi_constants(profile, a.kn.value_or(2));
  std::cout << "psi1=" << sci(psis.psi1) << '\n'
            << "psi2=" << sci(psis.psi2) << '\n'
            << "phi11=" << sci(phis.phi11) << '\n'
            << "phi12=" << sci(phis.phi12) << '\n'
            << "phi22=" << sci(phis.phi22) << '\n';
  if (a.kn) {
    std::cout << "kn=" << *a.kn << '\n'
              << "psi1_disc=" << sci(psis.psi1_disc) << '\n'
              << "psi2_disc=" << sci(psis.psi2_disc) << '\n';
  }
  return kExitOk;
}

struct EstimateArgs {
  std::string input;
  std::vector<std::string> asset_files;
  double theta = 1.0;
  std::optional<int> kn;
  bool continuous_psi = false;
  bool block_scaling = false;
  std::string profile = "minmax";
  std::string output;
};

int cmd_estimate(const EstimateArgs& a) {
  std::vector<mrc::TickSeries> series;
  if (!a.input.empty()) {
    std::ifstream in(a.input);
    if (!in) throw mrc::UsageError("cannot open input '" + a.input + "'");
    series = mrc::parse_ticks(in);
  }
  for (const auto& f : a.asset_files) {
    std::ifstream in(f);
    if (!in) throw mrc::UsageError("cannot open input '" + f + "'");
    series.push_back(mrc::parse_asset_ticks(in, std::filesystem::path(f).stem().string()));
  }
  if (series.empty()) throw mrc::UsageError("no input: give --input or --asset");

  const auto grid = mrc::refresh_times(series);
  mrc::EstimatorConfig cfg;
  cfg.theta = a.theta;
  cfg.window_override = a.kn;
  cfg.finite_sample_psis = !a.continuous_psi;
  cfg.block_scaling = a.block_scaling;
  cfg.profile = make_profile(a.profile, "", "");
  const auto est = mrc::mrc(grid, cfg);

  json assets = json::array();
  for (const auto& s : series) assets.push_back(s.asset_id);
  json out{{"assets", assets},
           {"mrc", matrix_json(est.mrc)},
           {"rcov", matrix_json(est.rcov)},
           {"k_n", est.k_n},
           {"N", est.n_intervals},
           {"preavg_blocks", est.n_preavg_blocks},
           {"theta", a.theta},
           {"finite_sample_psis", cfg.finite_sample_psis},
           {"block_scaling", cfg.block_scaling},
           {"psi1", est.psis_used.psi1},
           {"psi2", est.psis_used.psi2},
           {"overlap", matrix_json(mrc::overlap_stats(grid))}};
  std::ofstream file;
  open_output(a.output, file) << out.dump(2) << '\n';
  return kExitOk;
}

struct SimulateArgs {
  std::string config;
  std::vector<std::string> sets;
  std::uint64_t seed = 42;
  std::string output;
  std::string truth;
};

int cmd_simulate(const SimulateArgs& a) {
  const auto sim_cfg = mrc::build_simulation(load_config(a.config, a.sets));
  mrc::Rng rng(a.seed);
  const auto sim = mrc::simulate(sim_cfg, rng);

  std::ofstream file;
  std::ostream& out = open_output(a.output, file);
  out << "asset,timestamp,price\n";
  char buf[96];
  for (const auto& s : sim.ticks)
    for (std::size_t i = 0; i < s.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g\n", s.asset_id.c_str(), s.times[i],
                    s.values[i]);
      out << buf;
    }

  json jumps = json::array();
  for (const auto& j : sim.jumps) jumps.push_back({{"time", j.time}, {"size", {j.size(0), j.size(1)}}});
  const auto sc = mrc::theoretical_G_chi(sim_cfg.scheme, 2);
  mrc::ScenarioConfig echo;
  echo.sim = sim_cfg;
  json truth{{"seed", a.seed},
             {"true_qv", matrix_json(sim.truth.true_qv)},
             {"jumps", jumps},
             {"G", sc.G},
             {"chi", matrix_json(sc.chi)},
             {"upsilon", matrix_json(sim.truth.Upsilon)},
             {"latent_points", sim.latent_times.size()},
             {"config", mrc::to_json(echo)}};
  std::string truth_path = a.truth;
  if (truth_path.empty() && !a.output.empty() && a.output != "-")
    truth_path = a.output + ".truth.json";
  if (!truth_path.empty()) {
    std::ofstream tf(truth_path);
    if (!tf) throw mrc::Error("cannot open output file '" + truth_path + "'");
    tf << truth.dump(2) << '\n';
  }
  return kExitOk;
}

struct McArgs {
  std::string config;
  std::vector<std::string> sets;
  std::optional<long long> reps;
  std::optional<long long> seed;
  bool full_scale = false;
  unsigned threads = 0;
  std::string output;
  std::string json_path;
  std::string dump_z;
};

int cmd_mc(const McArgs& a) {
  auto kv = load_config(a.config, a.sets);
  if (a.full_scale) mrc::apply_override(kv, "mc.replications=10000");
  if (a.reps) {
    if (*a.reps < 1) throw mrc::UsageError("--reps must be >= 1");
    mrc::apply_override(kv, "mc.replications=" + std::to_string(*a.reps));
  }
  if (a.seed) {
    if (*a.seed < 0) throw mrc::UsageError("--seed must be non-negative");
    mrc::apply_override(kv, "mc.seed=" + std::to_string(*a.seed));
  }
  const auto scenarios = mrc::build_scenarios(kv);
  const unsigned threads =
      a.threads ? a.threads : std::max(1u, std::thread::hardware_concurrency());
  const auto rows = mrc::run_table(scenarios, threads);

  std::ofstream file;
  mrc::write_table_csv(open_output(a.output, file), rows);

  if (!a.json_path.empty()) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    json doc{{"generated_at", stamp}, {"payload", mrc::table_json(rows)}};
    std::ofstream jf(a.json_path);
    if (!jf) throw mrc::Error("cannot open output file '" + a.json_path + "'");
    jf << doc.dump(2) << '\n';
  }
  if (!a.dump_z.empty()) {
    std::ofstream zf(a.dump_z);
    if (!zf) throw mrc::Error("cannot open output file '" + a.dump_z + "'");
    zf << "scenario_id,z\n";
    char buf[64];
    for (const auto& row : rows)
      if (row.result)
        for (double z : row.result->z) {
          std::snprintf(buf, sizeof buf, "%.17g", z);
          zf << row.config.id << ',' << buf << '\n';
        }
  }
  int failed = 0;
  for (const auto& row : rows)
    if (!row.result) {
      std::cerr << "scenario " << row.config.id << " failed: " << row.error << '\n';
      ++failed;
    }
  return failed ? kExitRuntime : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pre-averaged realized covariance under noise and asynchronous sampling"};
  app.require_subcommand(1);

  ConstantsArgs ca;
  auto* constants = app.add_subcommand("constants", "Print weight-function constants");
  constants->add_option("--profile", ca.profile, "Weight profile: minmax | custom")->required();
  constants->add_option("--knots", ca.knots, "Custom profile knots, comma separated");
  constants->add_option("--values", ca.values, "Custom profile values, comma separated");
  constants->add_option("--kn", ca.kn, "Also print finite-sample psi at this window")
      ->check(CLI::Range(2, 100000000));

  EstimateArgs ea;
  auto* estimate = app.add_subcommand("estimate", "Estimate the MRC matrix from tick CSV");
  estimate->add_option("--input", ea.input, "Long-format CSV asset,timestamp,price");
  estimate->add_option("--asset", ea.asset_files,
                       "Per-asset CSV timestamp,price (asset id = file stem); repeatable");
  estimate->add_option("--theta", ea.theta, "Window constant theta")->check(CLI::PositiveNumber);
  estimate->add_option("--kn", ea.kn, "Override the window size")->check(CLI::Range(2, 100000000));
  estimate->add_flag("--continuous-psi", ea.continuous_psi,
                     "Use the integral psi constants instead of the finite-k_n ones");
  estimate->add_flag("--block-scaling", ea.block_scaling,
                     "Scale the pre-averaged term by N/(N-k_n+2)");
  estimate->add_option("--profile", ea.profile, "Weight profile (minmax)");
  estimate->add_option("--output,-o", ea.output, "Output JSON path (default stdout)");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Simulate one path and write tick CSV");
  simulate->add_option("--config", sa.config, "key=value config file");
  simulate->add_option("--set", sa.sets, "Override a config key (key=value); repeatable");
  simulate->add_option("--seed", sa.seed, "Random seed");
  simulate->add_option("--output,-o", sa.output, "Tick CSV path (default stdout)");
  simulate->add_option("--truth", sa.truth, "Ground-truth JSON path (default <output>.truth.json)");

  McArgs ma;
  auto* mc = app.add_subcommand("mc", "Run a Monte Carlo coverage table");
  mc->add_option("--config", ma.config, "key=value config file");
  mc->add_option("--set", ma.sets, "Override a config key (key=value); repeatable");
  mc->add_option("--reps", ma.reps, "Replications per scenario");
  mc->add_option("--seed", ma.seed, "Master seed");
  mc->add_flag("--full-scale", ma.full_scale, "Use 10000 replications per scenario");
  mc->add_option("--threads", ma.threads, "Worker threads (default: all cores)");
  mc->add_option("--output,-o", ma.output, "Table CSV path (default stdout)");
  mc->add_option("--json", ma.json_path, "Also write the table as JSON");
  mc->add_option("--dump-z", ma.dump_z, "Write every standardized value to this CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*constants) return cmd_constants(ca);
    if (*estimate) return cmd_estimate(ea);
    if (*simulate) return cmd_simulate(sa);
    if (*mc) return cmd_mc(ma);
  } catch (const mrc::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const mrc::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
