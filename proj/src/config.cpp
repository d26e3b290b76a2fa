#include "mrc/config.hpp"

#include "mrc/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace mrc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (out.empty()) out.emplace_back();
  return out;
}

const std::vector<std::string> kSweepKeys{"scheme.kind", "mc.theta", "scheme.p"};

bool known_key(const std::string& key) {
  const auto& d = config_defaults();
  return std::any_of(d.begin(), d.end(), [&](const auto& e) { return e.first == key; });
}

void check_key(const std::string& key, std::size_t line) {
  if (!known_key(key)) {
    std::string msg = "unknown config key '" + key + "'";
    if (line) msg = "line " + std::to_string(line) + ": " + msg;
    throw UsageError(msg);
  }
}

class Lookup {
 public:
  explicit Lookup(const KeyValues& kv) : kv_(kv) {}

  std::string raw(const std::string& key) const {
    if (auto it = kv_.find(key); it != kv_.end()) return it->second.value;
    for (const auto& [k, v] : config_defaults())
      if (k == key) return v;
    throw UsageError("unknown config key '" + key + "'");
  }
  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  double real(const std::string& key) const { return parse_value(key, raw(key)); }
  long long integer(const std::string& key) const {
    const double v = real(key);
    if (v != std::floor(v)) throw UsageError("config key '" + key + "' must be an integer");
    return static_cast<long long>(v);
  }
  bool boolean(const std::string& key) const {
    const auto v = raw(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw UsageError("config key '" + key + "' must be true or false");
  }
  std::vector<std::string> list(const std::string& key) const { return split_list(raw(key)); }

  static double parse_value(const std::string& key, const std::string& token) {
    try {
      return parse_real(token);
    } catch (const UsageError&) {
      throw UsageError("config key '" + key + "': invalid number '" + token + "'");
    }
  }

 private:
  const KeyValues& kv_;
};

SimulationConfig simulation_from(const Lookup& L, const std::string& kind_token,
                                 const std::string& p_token) {
  SimulationConfig sim;
  auto& h = sim.heston;
  for (int k = 0; k < 2; ++k) {
    const std::string s = std::to_string(k + 1);
    auto& a = h.asset[k];
    a.kappa = L.real("heston.kappa" + s);
    a.s = L.real("heston.s" + s);
    a.sigma_bar = L.real("heston.sigma_bar" + s);
    a.rho = L.real("heston.rho" + s);
    a.lambdaV = L.real("heston.lambdaV" + s);
    a.tauV = L.real("heston.tauV" + s);
  }
  h.rho_B = L.real("heston.rho_B");
  h.validate();

  sim.cgmy = CgmyParams::calibrated(h, L.real("cgmy.share"), L.real("cgmy.gamma_plus"),
                                    L.real("cgmy.gamma_minus"), L.real("cgmy.beta"),
                                    L.real("cgmy.rho_J"), L.real("cgmy.trunc_eps"));
  if (L.raw("cgmy.c1") != "auto") sim.cgmy.z1.c = L.real("cgmy.c1");
  if (L.raw("cgmy.c0") != "auto") sim.cgmy.z0.c = L.real("cgmy.c0");

  auto& sc = sim.scheme;
  sc.kind = scheme_kind_from_string(kind_token);
  const long long n = L.integer("scheme.n");
  if (n < 1 || n > 100000000) throw UsageError("scheme.n out of range");
  sc.n = static_cast<int>(n);
  sc.alpha = L.real("scheme.alpha");
  sc.ig_a = L.real("scheme.ig_a");
  sc.ig_b = L.real("scheme.ig_b");
  const bool p1 = L.raw("scheme.p1") != "none";
  const bool p2 = L.raw("scheme.p2") != "none";
  if (p1 != p2) throw UsageError("scheme.p1 and scheme.p2 must be set together");
  if (p1) {
    sc.p = {L.real("scheme.p1"), L.real("scheme.p2")};
  } else if (p_token != "none") {
    const double p = Lookup::parse_value("scheme.p", p_token);
    sc.p = {p, p};
  }
  sim.noise_sd = L.real("noise.sd");
  sim.horizon = L.real("sim.horizon");
  sim.validate();
  return sim;
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& config_defaults() {
  static const std::vector<std::pair<std::string, std::string>> d{
      {"heston.kappa1", "5"},        {"heston.kappa2", "4"},
      {"heston.s1", "0.3"},          {"heston.s2", "0.4"},
      {"heston.sigma_bar1", "0.25"}, {"heston.sigma_bar2", "0.3"},
      {"heston.rho1", "-0.6"},       {"heston.rho2", "-0.75"},
      {"heston.lambdaV1", "5"},      {"heston.lambdaV2", "10"},
      {"heston.tauV1", "0.05"},      {"heston.tauV2", "0.01"},
      {"heston.rho_B", "0.5"},
      {"cgmy.share", "0.15"},        {"cgmy.gamma_plus", "3"},
      {"cgmy.gamma_minus", "5"},     {"cgmy.beta", "0.5"},
      {"cgmy.rho_J", "0.2"},         {"cgmy.trunc_eps", "1e-5"},
      {"cgmy.c1", "auto"},           {"cgmy.c0", "auto"},
      {"scheme.kind", "equidistant"}, {"scheme.n", "23400"},
      {"scheme.p", "none"},          {"scheme.p1", "none"},
      {"scheme.p2", "none"},         {"scheme.alpha", "0.5"},
      {"scheme.ig_a", "-2"},         {"scheme.ig_b", "-2"},
      {"noise.sd", "0.005"},         {"sim.horizon", "1"},
      {"mc.theta", "1"},             {"mc.replications", "1000"},
      {"mc.seed", "42"},             {"mc.target", "1,2"},
      {"mc.finite_sample_psis", "true"},
      {"mc.block_scaling", "true"},
  };
  return d;
}

double parse_real(const std::string& token) {
  const std::string t = trim(token);
  auto parse = [&](const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
      throw UsageError("invalid number '" + token + "'");
    return v;
  };
  if (const auto slash = t.find('/'); slash != std::string::npos) {
    const double num = parse(trim(t.substr(0, slash)));
    const double den = parse(trim(t.substr(slash + 1)));
    if (den == 0.0) throw UsageError("invalid number '" + token + "'");
    return num / den;
  }
  return parse(t);
}

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    check_key(key, lineno);
    kv[key] = {trim(line.substr(eq + 1)), lineno};
  }
  return kv;
}

void apply_override(KeyValues& kv, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw UsageError("override must be key=value: '" + assignment + "'");
  const std::string key = trim(assignment.substr(0, eq));
  check_key(key, 0);
  kv[key] = {trim(assignment.substr(eq + 1)), 0};
}

std::vector<ScenarioConfig> build_scenarios(const KeyValues& kv) {
  const Lookup L(kv);
  const auto kinds = L.list("scheme.kind");
  const auto thetas = L.list("mc.theta");
  const auto ps = L.list("scheme.p");

  const long long reps = L.integer("mc.replications");
  if (reps < 1) throw UsageError("mc.replications must be >= 1");
  const long long seed = L.integer("mc.seed");
  if (seed < 0) throw UsageError("mc.seed must be non-negative");
  const auto target = L.list("mc.target");
  if (target.size() != 2) throw UsageError("mc.target must be 'k,l'");
  const int tk = static_cast<int>(Lookup::parse_value("mc.target", target[0])) - 1;
  const int tl = static_cast<int>(Lookup::parse_value("mc.target", target[1])) - 1;
  if (tk < 0 || tk > 1 || tl < 0 || tl > 1) throw UsageError("mc.target entries must be 1 or 2");

  std::vector<ScenarioConfig> out;
  for (const auto& kind : kinds)
    for (const auto& th : thetas)
      for (const auto& p : ps) {
        ScenarioConfig c;
        c.sim = simulation_from(L, kind, p);
        c.theta = Lookup::parse_value("mc.theta", th);
        if (!(c.theta > 0.0)) throw UsageError("mc.theta must be positive");
        c.replications = static_cast<int>(reps);
        c.master_seed = static_cast<std::uint64_t>(seed);
        c.target = {tk, tl};
        c.finite_sample_psis = L.boolean("mc.finite_sample_psis");
        c.block_scaling = L.boolean("mc.block_scaling");
        c.id = kind + "/theta=" + th + "/p=" + p;
        out.push_back(std::move(c));
      }
  return out;
}

SimulationConfig build_simulation(const KeyValues& kv) {
  const Lookup L(kv);
  for (const auto& key : kSweepKeys)
    if (L.list(key).size() != 1)
      throw UsageError("config key '" + key + "' must be a single value here");
  return simulation_from(L, L.raw("scheme.kind"), L.raw("scheme.p"));
}

}  // namespace mrc
