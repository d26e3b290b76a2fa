#include "mrc/montecarlo.hpp"

#include "mrc/errors.hpp"
#include "mrc/estimator.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>

namespace mrc {

void ScenarioConfig::validate() const {
  sim.validate();
  if (replications < 1) throw UsageError("replications must be >= 1");
  if (!(theta > 0.0)) throw InvalidParameters("theta must be positive");
  if (target.first < 0 || target.first > 1 || target.second < 0 || target.second > 1)
    throw InvalidParameters("target entry out of range");
}

double run_replication(const ScenarioConfig& cfg, std::uint64_t r) {
  Rng rng = Rng::for_stream(cfg.master_seed, r);
  const SimOutput sim = simulate(cfg.sim, rng);
  const SyncGrid grid = refresh_times(sim.ticks);

  EstimatorConfig ec;
  ec.theta = cfg.theta;
  ec.finite_sample_psis = cfg.finite_sample_psis;
  ec.block_scaling = cfg.block_scaling;
  const MrcEstimate est = mrc(grid, ec);

  // The limit theory is stated for k_n = theta sqrt(n), so the variance
  // uses the effective theta implied by the realized window.
  const double n = static_cast<double>(cfg.sim.scheme.n);
  const double theta_eff = est.k_n / std::sqrt(n);
  const WeightConstants wc = weight_constants(ec.profile, est.k_n);
  const auto [k, l] = cfg.target;
  const double v = avar_entry(sim.truth, theta_eff, wc, k, l);
  return standardize(est.mrc(k, l), sim.truth.true_qv(k, l), v, n);
}

ScenarioResult summarize(std::vector<double> z, int failures) {
  ScenarioResult res;
  res.failures = failures;
  res.replications_used = static_cast<int>(z.size());
  if (z.empty()) return res;
  const double m = static_cast<double>(z.size());
  double sum = 0.0;
  for (double v : z) sum += v;
  res.mean = sum / m;
  double ss = 0.0;
  int in95 = 0, in99 = 0;
  for (double v : z) {
    ss += (v - res.mean) * (v - res.mean);
    in95 += std::abs(v) <= kZ95;
    in99 += std::abs(v) <= kZ99;
  }
  res.sd = z.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
  res.coverage95 = in95 / m;
  res.coverage99 = in99 / m;
  res.z = std::move(z);
  return res;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, unsigned threads) {
  cfg.validate();
  const auto reps = static_cast<std::size_t>(cfg.replications);
  std::vector<double> z(reps, 0.0);
  std::vector<char> ok(reps, 0);
  std::vector<std::exception_ptr> fatal(reps);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t r = next++; r < reps; r = next++) {
      try {
        z[r] = run_replication(cfg, r);
        ok[r] = 1;
      } catch (const DegenerateVariance&) {
      } catch (const InsufficientData&) {
      } catch (...) {
        fatal[r] = std::current_exception();
      }
    }
  };
  const unsigned n_workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(reps)));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  }
  for (const auto& e : fatal)
    if (e) std::rethrow_exception(e);

  std::vector<double> good;
  good.reserve(reps);
  int failures = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    if (ok[r])
      good.push_back(z[r]);
    else
      ++failures;
  }
  if (good.empty()) throw Error("scenario '" + cfg.id + "': every replication failed");
  return summarize(std::move(good), failures);
}

std::vector<TableRow> run_table(const std::vector<ScenarioConfig>& cfgs, unsigned threads) {
  if (cfgs.empty()) throw UsageError("no scenarios to run");
  std::vector<TableRow> rows;
  for (const auto& c : cfgs) {
    TableRow row{c, std::nullopt, {}};
    try {
      row.result = run_scenario(c, threads);
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string fmt(double v, const char* format = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string p_label(const SamplingSchemeSpec& s) {
  if (s.p.empty()) return "1";
  bool same = true;
  for (double v : s.p) same = same && v == s.p.front();
  if (same) return fmt(s.p.front(), "%.10g");
  std::string out;
  for (std::size_t i = 0; i < s.p.size(); ++i) {
    if (i) out += ';';
    out += fmt(s.p[i], "%.10g");
  }
  return out;
}

}  // namespace

void write_table_csv(std::ostream& out, const std::vector<TableRow>& rows) {
  out << "scenario_id,theta,scheme,p,n,reps,mean,sd,cov95,cov99,failures\n";
  for (const auto& row : rows) {
    const auto& c = row.config;
    out << c.id << ',' << fmt(c.theta, "%.10g") << ',' << to_string(c.sim.scheme.kind) << ','
        << p_label(c.sim.scheme) << ',' << c.sim.scheme.n << ',' << c.replications << ',';
    if (row.result) {
      const auto& r = *row.result;
      out << fmt(r.mean) << ',' << fmt(r.sd) << ',' << fmt(r.coverage95, "%.4f") << ','
          << fmt(r.coverage99, "%.4f") << ',' << r.failures << '\n';
    } else {
      out << "NA,NA,NA,NA," << c.replications << '\n';
    }
  }
}

nlohmann::json to_json(const ScenarioConfig& cfg) {
  using nlohmann::json;
  const auto& h = cfg.sim.heston;
  json heston = json::array();
  for (const auto& a : h.asset)
    heston.push_back({{"kappa", a.kappa},
                      {"s", a.s},
                      {"sigma_bar", a.sigma_bar},
                      {"rho", a.rho},
                      {"lambdaV", a.lambdaV},
                      {"tauV", a.tauV}});
  auto levy = [](const CgmyLevy& z) {
    return json{{"c", z.c},
                {"gamma_plus", z.gamma_plus},
                {"gamma_minus", z.gamma_minus},
                {"beta", z.beta}};
  };
  const auto& s = cfg.sim.scheme;
  return json{
      {"id", cfg.id},
      {"theta", cfg.theta},
      {"replications", cfg.replications},
      {"master_seed", cfg.master_seed},
      {"target", {cfg.target.first + 1, cfg.target.second + 1}},
      {"finite_sample_psis", cfg.finite_sample_psis},
      {"block_scaling", cfg.block_scaling},
      {"noise_sd", cfg.sim.noise_sd},
      {"horizon", cfg.sim.horizon},
      {"heston", {{"assets", heston}, {"rho_B", h.rho_B}}},
      {"cgmy",
       {{"z1", levy(cfg.sim.cgmy.z1)},
        {"z0", levy(cfg.sim.cgmy.z0)},
        {"rho_J", cfg.sim.cgmy.rho_J},
        {"trunc_eps", cfg.sim.cgmy.trunc_eps}}},
      {"scheme",
       {{"kind", to_string(s.kind)},
        {"n", s.n},
        {"p", s.p},
        {"alpha", s.alpha},
        {"ig_a", s.ig_a},
        {"ig_b", s.ig_b}}},
  };
}

nlohmann::json table_json(const std::vector<TableRow>& rows) {
  using nlohmann::json;
  json out = json::array();
  for (const auto& row : rows) {
    const auto& c = row.config;
    json j{{"scenario_id", c.id},
           {"theta", c.theta},
           {"scheme", to_string(c.sim.scheme.kind)},
           {"p", p_label(c.sim.scheme)},
           {"n", c.sim.scheme.n},
           {"reps", c.replications},
           {"config", to_json(c)}};
    if (row.result) {
      const auto& r = *row.result;
      j["mean"] = r.mean;
      j["sd"] = r.sd;
      j["cov95"] = r.coverage95;
      j["cov99"] = r.coverage99;
      j["failures"] = r.failures;
      j["replications_used"] = r.replications_used;
    } else {
      j["error"] = row.error;
    }
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace mrc
