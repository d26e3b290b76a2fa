#include "mrc/simulate.hpp"

#include "mrc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mrc {

// ---------------------------------------------------------------------------
// Sampling scheme
// ---------------------------------------------------------------------------

std::string to_string(SamplingSchemeSpec::Kind kind) {
  switch (kind) {
    case SamplingSchemeSpec::Kind::Equidistant: return "equidistant";
    case SamplingSchemeSpec::Kind::IgHitting: return "hitting";
    case SamplingSchemeSpec::Kind::PoissonArrivals: return "poisson";
    case SamplingSchemeSpec::Kind::AlternatingGrid: return "alternating";
  }
  return "unknown";
}

SamplingSchemeSpec::Kind scheme_kind_from_string(const std::string& s) {
  using Kind = SamplingSchemeSpec::Kind;
  if (s == "equidistant") return Kind::Equidistant;
  if (s == "hitting") return Kind::IgHitting;
  if (s == "poisson") return Kind::PoissonArrivals;
  if (s == "alternating") return Kind::AlternatingGrid;
  throw UsageError("unknown scheme kind '" + s + "'");
}

void SamplingSchemeSpec::validate(int d) const {
  if (n < 1) throw InvalidParameters("scheme: n must be >= 1");
  if (d < 1 || d > 16) throw InvalidParameters("scheme: unsupported dimension");
  if (kind == Kind::PoissonArrivals) {
    if (p.size() != static_cast<std::size_t>(d))
      throw InvalidParameters("scheme: poisson needs one intensity per asset");
    for (double v : p)
      if (!(v > 0.0)) throw InvalidParameters("scheme: poisson intensities must be positive");
    return;
  }
  if (!p.empty()) {
    if (p.size() != static_cast<std::size_t>(d))
      throw InvalidParameters("scheme: thinning needs one probability per asset");
    for (double v : p)
      if (!(v > 0.0 && v <= 1.0))
        throw InvalidParameters("scheme: thinning probabilities must lie in (0,1]");
  }
  if (kind == Kind::AlternatingGrid && !(alpha > 0.0 && alpha < 1.0))
    throw InvalidParameters("scheme: alpha must lie in (0,1)");
  if (kind == Kind::IgHitting && !(ig_a * ig_b > 0.0))
    throw InvalidParameters("scheme: hitting barrier needs a*b > 0");
}

// ---------------------------------------------------------------------------
// Heston
// ---------------------------------------------------------------------------

HestonParams HestonParams::reference() {
  HestonParams h;
  h.asset[0] = {5.0, 0.3, 0.25, -0.6, 5.0, 0.05};
  h.asset[1] = {4.0, 0.4, 0.3, -0.75, 10.0, 0.01};
  h.rho_B = 0.5;
  return h;
}

Eigen::Matrix4d HestonParams::correlation() const {
  Eigen::Matrix4d c = Eigen::Matrix4d::Identity();
  c(0, 1) = c(1, 0) = rho_B;
  c(0, 2) = c(2, 0) = asset[0].rho;
  c(1, 3) = c(3, 1) = asset[1].rho;
  return c;
}

void HestonParams::validate() const {
  if (std::abs(rho_B) > 1.0) throw InvalidParameters("heston: |rho_B| > 1");
  for (const auto& a : asset) {
    if (std::abs(a.rho) > 1.0) throw InvalidParameters("heston: |rho_k| > 1");
    if (a.kappa < 0 || a.s < 0 || a.sigma_bar < 0 || a.lambdaV < 0 || a.tauV < 0)
      throw InvalidParameters("heston: kappa, s, sigma_bar, lambdaV, tauV must be >= 0");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(correlation(), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12)
    throw InvalidParameters("heston: correlation matrix is not positive semidefinite");
}

Eigen::Matrix4d correlation_factor(const HestonParams& h) {
  h.validate();
  const Eigen::Matrix4d c = h.correlation();
  // Cholesky that tolerates a zero pivot (perfect correlation).
  Eigen::Matrix4d L = Eigen::Matrix4d::Zero();
  for (int j = 0; j < 4; ++j) {
    double diag = c(j, j);
    for (int k = 0; k < j; ++k) diag -= L(j, k) * L(j, k);
    if (diag < -1e-12)
      throw InvalidParameters("heston: correlation matrix is not positive semidefinite");
    L(j, j) = std::sqrt(std::max(diag, 0.0));
    for (int i = j + 1; i < 4; ++i) {
      double v = c(i, j);
      for (int k = 0; k < j; ++k) v -= L(i, k) * L(j, k);
      L(i, j) = L(j, j) > 0.0 ? v / L(j, j) : 0.0;
    }
  }
  if ((L * L.transpose() - c).cwiseAbs().maxCoeff() > 1e-12)
    throw InvalidParameters("heston: correlation matrix is not positive semidefinite");
  return L;
}

HestonPath simulate_heston(const HestonParams& h, const LatentGrid& grid, Rng& rng) {
  const Eigen::Matrix4d L = correlation_factor(h);
  const auto& t = grid.times;
  const std::size_t M = t.size();
  if (M == 0) throw InvalidParameters("heston: empty latent grid");
  if (!grid.driver.empty() && grid.driver.size() + 1 != M)
    throw InvalidParameters("heston: driver length must be grid length - 1");

  HestonPath out;
  for (int k = 0; k < 2; ++k) {
    out.x[k].assign(M, 0.0);
    out.var[k].assign(M, 0.0);
  }

  // Variance jumps: compound Poisson on the grid span, sizes U[0, 2 tauV].
  std::array<std::vector<std::pair<double, double>>, 2> vjumps;
  const double span = t.back() - t.front();
  for (int k = 0; k < 2; ++k) {
    const auto& a = h.asset[k];
    if (a.lambdaV > 0.0 && span > 0.0) {
      const auto count = rng.poisson(a.lambdaV * span);
      for (std::uint64_t j = 0; j < count; ++j) {
        const double when = t.front() + rng.uniform() * span;
        vjumps[k].emplace_back(when, 2.0 * a.tauV * rng.uniform());
      }
      std::sort(vjumps[k].begin(), vjumps[k].end());
    }
    for (const auto& [when, size] : vjumps[k]) out.var_jump_times[k].push_back(when);
  }

  std::array<double, 2> v{h.asset[0].sigma_bar * h.asset[0].sigma_bar,
                          h.asset[1].sigma_bar * h.asset[1].sigma_bar};
  std::array<double, 2> x{0.0, 0.0};
  std::array<std::size_t, 2> next_jump{0, 0};
  for (int k = 0; k < 2; ++k) out.var[k][0] = v[k];

  Eigen::Vector4d xi, dw;
  for (std::size_t i = 0; i + 1 < M; ++i) {
    const double dt = t[i + 1] - t[i];
    const double sq = std::sqrt(dt);
    // Always draw four normals so W^2, B^1, B^2 do not depend on the scheme.
    for (int j = 0; j < 4; ++j) xi(j) = rng.normal();
    if (!grid.driver.empty()) xi(0) = grid.driver[i] / sq;
    dw = L * xi * sq;  // increments of (W1, W2, B1, B2)

    for (int k = 0; k < 2; ++k) {
      const auto& a = h.asset[k];
      const double vp = std::max(v[k], 0.0);
      const double vol = std::sqrt(vp);
      x[k] += vol * dw(k);
      double jump = 0.0;
      auto& nj = next_jump[k];
      while (nj < vjumps[k].size() && vjumps[k][nj].first <= t[i + 1])
        jump += vjumps[k][nj++].second;
      v[k] += a.kappa * (a.sigma_bar * a.sigma_bar - vp) * dt + a.s * vol * dw(2 + k) + jump -
              a.lambdaV * a.tauV * dt;
      out.x[k][i + 1] = x[k];
      out.var[k][i + 1] = v[k];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CGMY
// ---------------------------------------------------------------------------

double CgmyLevy::second_moment() const {
  return c * std::tgamma(2.0 - beta) *
         (std::pow(gamma_plus, beta - 2.0) + std::pow(gamma_minus, beta - 2.0));
}

double calibrate_c(double share, double sigma_bar, double gamma_plus, double gamma_minus,
                   double beta) {
  if (!(share >= 0.0 && share < 1.0))
    throw InvalidParameters("calibrate_c: share must lie in [0,1)");
  const double unit = CgmyLevy{1.0, gamma_plus, gamma_minus, beta}.second_moment();
  return share / (1.0 - share) * sigma_bar * sigma_bar / unit;
}

double calibrate_c0(double share, double sigma_bar2, double rho_J, const CgmyLevy& z1,
                    double gamma_plus, double gamma_minus, double beta) {
  if (!(share >= 0.0 && share < 1.0))
    throw InvalidParameters("calibrate_c0: share must lie in [0,1)");
  if (std::abs(rho_J) > 1.0) throw InvalidParameters("calibrate_c0: |rho_J| > 1");
  const double target = share / (1.0 - share) * sigma_bar2 * sigma_bar2;
  const double rest = target - rho_J * rho_J * z1.second_moment();
  if (rho_J * rho_J == 1.0) return 0.0;
  if (rest < 0.0)
    throw InvalidParameters("calibrate_c0: correlated jumps alone exceed the target share");
  const double unit = CgmyLevy{1.0, gamma_plus, gamma_minus, beta}.second_moment();
  return rest / ((1.0 - rho_J * rho_J) * unit);
}

CgmyParams CgmyParams::calibrated(const HestonParams& h, double share, double gamma_plus,
                                  double gamma_minus, double beta, double rho_J,
                                  double trunc_eps) {
  CgmyParams p;
  p.rho_J = rho_J;
  p.trunc_eps = trunc_eps;
  p.z1 = {calibrate_c(share, h.asset[0].sigma_bar, gamma_plus, gamma_minus, beta), gamma_plus,
          gamma_minus, beta};
  p.z0 = {calibrate_c0(share, h.asset[1].sigma_bar, rho_J, p.z1, gamma_plus, gamma_minus,
                       beta),
          gamma_plus, gamma_minus, beta};
  return p;
}

void CgmyParams::validate() const {
  for (const auto* z : {&z1, &z0}) {
    if (z->c < 0.0) throw InvalidParameters("cgmy: c must be >= 0");
    if (!(z->gamma_plus > 0.0 && z->gamma_minus > 0.0))
      throw InvalidParameters("cgmy: gamma must be positive");
    if (!(z->beta < 1.0))
      throw InvalidParameters("cgmy: unsupported regime, beta must be < 1");
    if (!(z->beta > 0.0)) throw InvalidParameters("cgmy: beta must be positive");
  }
  if (std::abs(rho_J) > 1.0) throw InvalidParameters("cgmy: |rho_J| > 1");
  if (!(trunc_eps > 0.0)) throw InvalidParameters("cgmy: trunc_eps must be positive");
}

std::vector<LevyJump> simulate_tempered_stable(const CgmyLevy& p, double eps, double horizon,
                                               Rng& rng) {
  if (!(p.beta < 1.0)) throw InvalidParameters("cgmy: unsupported regime, beta must be < 1");
  std::vector<LevyJump> out;
  if (p.c <= 0.0 || horizon <= 0.0) return out;
  // Mass of c x^{-1-beta} on [eps, inf).
  const double mass = p.c * std::pow(eps, -p.beta) / p.beta;
  for (const double sign : {1.0, -1.0}) {
    const double gamma = sign > 0 ? p.gamma_plus : p.gamma_minus;
    const auto proposals = rng.poisson(mass * horizon);
    for (std::uint64_t j = 0; j < proposals; ++j) {
      const double when = rng.uniform() * horizon;
      const double size = eps * std::pow(rng.uniform(), -1.0 / p.beta);
      if (rng.uniform() <= std::exp(-gamma * size)) out.push_back({when, sign * size});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const LevyJump& a, const LevyJump& b) { return a.time < b.time; });
  return out;
}

std::vector<CgmyJumps::Combined> CgmyJumps::combined() const {
  std::vector<Combined> out;
  out.reserve(z1.size() + z0.size());
  const double w0 = std::sqrt(std::max(0.0, 1.0 - rho_J * rho_J));
  for (const auto& j : z1) out.push_back({j.time, Eigen::Vector2d(j.size, rho_J * j.size)});
  if (w0 > 0.0)
    for (const auto& j : z0) out.push_back({j.time, Eigen::Vector2d(0.0, w0 * j.size)});
  std::stable_sort(out.begin(), out.end(),
                   [](const Combined& a, const Combined& b) { return a.time < b.time; });
  return out;
}

CgmyJumps simulate_cgmy(const CgmyParams& p, double horizon, Rng& rng) {
  p.validate();
  CgmyJumps out;
  out.rho_J = p.rho_J;
  out.z1 = simulate_tempered_stable(p.z1, p.trunc_eps, horizon, rng);
  out.z0 = simulate_tempered_stable(p.z0, p.trunc_eps, horizon, rng);
  return out;
}

// ---------------------------------------------------------------------------
// Observation times
// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> thin(std::size_t latent_size, double p, Rng& rng) {
  std::vector<std::size_t> idx;
  if (latent_size == 0) return idx;
  std::size_t m = static_cast<std::size_t>(rng.geometric(p) - 1);
  while (m < latent_size) {
    idx.push_back(m);
    m += static_cast<std::size_t>(rng.geometric(p));
  }
  return idx;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

}  // namespace

ObservationTimes sample_times(const SamplingSchemeSpec& spec, int d, double horizon,
                              Rng& master) {
  spec.validate(d);
  Rng rng = master.split();
  Rng thin_rng = master.split();
  if (!(horizon > 0.0)) throw InvalidParameters("sample_times: horizon must be positive");
  using Kind = SamplingSchemeSpec::Kind;
  const double n = static_cast<double>(spec.n);
  ObservationTimes out;
  auto& lt = out.latent.times;

  switch (spec.kind) {
    case Kind::Equidistant: {
      const auto last = static_cast<std::size_t>(std::floor(n * horizon + 1e-9));
      lt.resize(last + 1);
      for (std::size_t i = 0; i <= last; ++i) lt[i] = static_cast<double>(i) / n;
      break;
    }
    case Kind::AlternatingGrid: {
      for (std::size_t i = 0;; ++i) {
        const double ti =
            (static_cast<double>(i) + (i % 2 == 1 ? spec.alpha : 0.0)) / n;
        if (ti > horizon) break;
        lt.push_back(ti);
      }
      break;
    }
    case Kind::IgHitting: {
      // Hitting time of W_t + sqrt(n) a t = b / sqrt(n): IG with mean
      // b/(a n) and shape b^2/n; W moves by b/sqrt(n) - sqrt(n) a dt.
      const double rn = std::sqrt(n);
      const double mean = spec.ig_b / (spec.ig_a * n);
      const double shape = spec.ig_b * spec.ig_b / n;
      lt.push_back(0.0);
      for (;;) {
        const double dt = inverse_gaussian(rng, mean, shape);
        const double next = lt.back() + dt;
        if (next > horizon) break;
        out.latent.driver.push_back(spec.ig_b / rn - rn * spec.ig_a * (next - lt.back()));
        lt.push_back(next);
      }
      break;
    }
    case Kind::PoissonArrivals: {
      std::vector<std::vector<double>> arrivals(static_cast<std::size_t>(d));
      std::vector<double> all{0.0};
      for (int k = 0; k < d; ++k) {
        const double rate = n * spec.p[static_cast<std::size_t>(k)];
        for (double tk = rng.exponential(rate); tk <= horizon; tk += rng.exponential(rate))
          arrivals[static_cast<std::size_t>(k)].push_back(tk);
        all.insert(all.end(), arrivals[static_cast<std::size_t>(k)].begin(),
                   arrivals[static_cast<std::size_t>(k)].end());
      }
      std::sort(all.begin(), all.end());
      all.erase(std::unique(all.begin(), all.end()), all.end());
      lt = std::move(all);
      for (const auto& a : arrivals) {
        std::vector<std::size_t> idx;
        idx.reserve(a.size());
        for (double tk : a)
          idx.push_back(static_cast<std::size_t>(
              std::lower_bound(lt.begin(), lt.end(), tk) - lt.begin()));
        out.observed.push_back(std::move(idx));
      }
      return out;
    }
  }

  for (int k = 0; k < d; ++k)
    out.observed.push_back(spec.thinned() ? thin(lt.size(), spec.p[static_cast<std::size_t>(k)], thin_rng)
                                          : all_indices(lt.size()));
  return out;
}

// ---------------------------------------------------------------------------
// Noise and assembly
// ---------------------------------------------------------------------------

std::vector<std::vector<double>> add_noise(const std::vector<std::vector<double>>& x,
                                           double sd, Rng& rng) {
  if (!(sd >= 0.0)) throw InvalidParameters("noise sd must be >= 0");
  auto y = x;
  if (sd == 0.0) return y;
  for (auto& series : y)
    for (auto& v : series) v += sd * rng.normal();
  return y;
}

void SimulationConfig::validate() const {
  heston.validate();
  cgmy.validate();
  scheme.validate(2);
  if (!(noise_sd >= 0.0)) throw InvalidParameters("noise sd must be >= 0");
  if (!(horizon > 0.0)) throw InvalidParameters("horizon must be positive");
}

SimOutput simulate(const SimulationConfig& cfg, Rng& rng) {
  cfg.validate();
  constexpr int d = 2;
  SimOutput out;

  Rng times_rng = rng.split();
  Rng path_rng = rng.split();
  Rng jump_rng = rng.split();
  Rng noise_rng = rng.split();
  ObservationTimes obs = sample_times(cfg.scheme, d, cfg.horizon, times_rng);
  if (obs.latent.times.size() < 2)
    throw InsufficientData("simulate: latent grid has fewer than two points");
  out.heston = simulate_heston(cfg.heston, obs.latent, path_rng);
  const auto& t = obs.latent.times;
  const std::size_t M = t.size();
  const double window_end = t.back();

  CgmyJumps cj = simulate_cgmy(cfg.cgmy, window_end, jump_rng);
  out.jumps = cj.combined();

  // Latent X = continuous part + cumulative jumps with S <= t_i.
  std::size_t j = 0;
  Eigen::Vector2d cum = Eigen::Vector2d::Zero();
  for (int k = 0; k < d; ++k) out.x[k].resize(M);
  for (std::size_t i = 0; i < M; ++i) {
    while (j < out.jumps.size() && out.jumps[j].time <= t[i]) cum += out.jumps[j++].size;
    for (int k = 0; k < d; ++k) out.x[k][i] = out.heston.x[k][i] + cum(k);
  }

  // Noisy ticks.
  std::vector<std::vector<double>> at_ticks(d);
  for (int k = 0; k < d; ++k)
    for (std::size_t i : obs.observed[k]) at_ticks[k].push_back(out.x[k][i]);
  const auto noisy = add_noise(at_ticks, cfg.noise_sd, noise_rng);
  for (int k = 0; k < d; ++k) {
    TickSeries ts;
    ts.asset_id = "asset" + std::to_string(k + 1);
    for (std::size_t i : obs.observed[k]) ts.times.push_back(t[i]);
    ts.values = noisy[k];
    out.ticks.push_back(std::move(ts));
  }

  // Ground truth.
  GroundTruth& gt = out.truth;
  const SchemeConstants sc = theoretical_G_chi(cfg.scheme, d);
  gt.fine_grid = t;
  gt.Sigma = MatrixPath(d, M);
  gt.G.assign(M, sc.G);
  gt.chi = MatrixPath(sc.chi, M);
  gt.Upsilon = cfg.noise_sd * cfg.noise_sd * Eigen::MatrixXd::Identity(d, d);
  const double rho_B = cfg.heston.rho_B;
  for (std::size_t i = 0; i < M; ++i) {
    const double v1 = std::max(out.heston.var[0][i], 0.0);
    const double v2 = std::max(out.heston.var[1][i], 0.0);
    auto S = gt.Sigma.at(i);
    S(0, 0) = v1;
    S(1, 1) = v2;
    S(0, 1) = S(1, 0) = rho_B * std::sqrt(v1 * v2);
  }
  gt.true_qv = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i + 1 < M; ++i) gt.true_qv += gt.Sigma.at(i) * (t[i + 1] - t[i]);
  for (const auto& jump : out.jumps) {
    gt.true_qv += jump.size * jump.size.transpose();
    // Grid cell (t_i, t_{i+1}] containing the jump.
    auto it = std::lower_bound(t.begin(), t.end(), jump.time);
    const auto right = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - t.begin(), 1));
    const std::size_t left = right - 1;
    JumpRecord r;
    r.time = jump.time;
    r.size = jump.size;
    r.sigma_left = gt.Sigma.at(left);
    r.sigma_right = gt.Sigma.at(right);
    r.G_left = gt.G[left];
    r.G_right = gt.G[right];
    r.chi_left = gt.chi.at(left);
    r.chi_right = gt.chi.at(right);
    gt.jumps.push_back(std::move(r));
  }

  out.latent_times = std::move(obs.latent.times);
  out.observed = std::move(obs.observed);
  return out;
}

}  // namespace mrc
