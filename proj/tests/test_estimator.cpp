#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mrc/errors.hpp"
#include "mrc/estimator.hpp"
#include "oracles.hpp"

using namespace mrc;

namespace {

// Synchronous grid at times 0..N with the given per-step increments
// (rows = steps, columns = assets) starting from `start`.
SyncGrid grid_from_increments(const std::vector<std::vector<double>>& inc,
                              std::vector<double> start = {}) {
  const std::size_t N = inc.size();
  const std::size_t d = inc.empty() ? 1 : inc[0].size();
  if (start.empty()) start.assign(d, 0.0);
  std::vector<double> T(N + 1);
  std::vector<std::vector<double>> tau(d), vals(d);
  std::vector<std::vector<std::size_t>> idx(d);
  for (std::size_t p = 0; p <= N; ++p) T[p] = static_cast<double>(p);
  for (std::size_t k = 0; k < d; ++k) {
    tau[k] = T;
    vals[k].push_back(start[k]);
    for (std::size_t p = 0; p < N; ++p) vals[k].push_back(vals[k].back() + inc[p][k]);
    for (std::size_t p = 0; p <= N; ++p) idx[k].push_back(p);
  }
  return SyncGrid(T, tau, vals, idx);
}

std::vector<std::vector<double>> column(std::vector<double> v) {
  std::vector<std::vector<double>> out;
  for (double x : v) out.push_back({x});
  return out;
}

EstimatorConfig with_k(int k, bool finite = true) {
  EstimatorConfig c;
  c.window_override = k;
  c.finite_sample_psis = finite;
  return c;
}

}  // namespace

TEST_CASE("window size") {
  CHECK(window_size(1.0, 23400) == 153);
  CHECK(window_size(1.0 / 3.0, 23400) == 51);
  CHECK(window_size(1.0, 1) == 2);
  CHECK(window_size(0.01, 100) == 2);
  CHECK_THROWS_AS(window_size(1.0, 0), InsufficientData);
}

TEST_CASE("pre-averaged blocks") {
  const auto mm = WeightProfile::min_max();
  auto b = preaverage(grid_from_increments(column({2.0, -4.0, 6.0})), 2, mm);
  REQUIRE(b.rows() == 3);
  CHECK(b(0, 0) == 1.0);
  CHECK(b(1, 0) == -2.0);
  CHECK(b(2, 0) == 3.0);

  b = preaverage(grid_from_increments(column({1, 1, 0, 0})), 3, mm);
  REQUIRE(b.rows() == 3);
  CHECK(b(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(b(1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(b(2, 0) == 0.0);

  b = preaverage(grid_from_increments(column({0, 0, 0, 0, 0})), 4, mm);
  CHECK(b.rows() == 3);
  CHECK(b.isZero(0.0));

  // N = k - 1 is the shortest admissible grid (one block).
  CHECK(preaverage(grid_from_increments(column({1, 1})), 3, mm).rows() == 1);
  CHECK_THROWS_AS(preaverage(grid_from_increments(column({1})), 3, mm), InsufficientData);
}

TEST_CASE("realized covariance") {
  auto r = realized_cov(grid_from_increments(column({1.0, -1.0})));
  CHECK(r(0, 0) == 2.0);
  r = realized_cov(grid_from_increments({{1.0, 1.0}, {0.0, 1.0}}));
  CHECK(r(0, 0) == 1.0);
  CHECK(r(0, 1) == 1.0);
  CHECK(r(1, 0) == 1.0);
  CHECK(r(1, 1) == 2.0);
  CHECK(realized_cov(grid_from_increments({{0, 0}, {0, 0}})).isZero(0.0));
}

TEST_CASE("MRC hand values") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  std::vector<double> inc(17);
  for (auto& x : inc) x = nd(gen);
  for (bool finite : {true, false}) {
    const auto e = mrc::mrc(grid_from_increments(column(inc)), with_k(2, finite));
    CHECK(std::abs(e.mrc(0, 0)) <= 1e-12);
  }
  const auto e3 = mrc::mrc(grid_from_increments(column({1, 1, 0, 0})), with_k(3, true));
  CHECK(std::abs(e3.mrc(0, 0) - 1.5) <= 1e-12);
  CHECK(e3.k_n == 3);
  CHECK(e3.n_preavg_blocks == 3);
  CHECK(e3.n_intervals == 4);
  CHECK(e3.psis_used.psi2 == doctest::Approx(2.0 / 27.0).epsilon(1e-14));

  const auto flat = mrc::mrc(grid_from_increments({{0, 0}, {0, 0}, {0, 0}}), with_k(2));
  CHECK(flat.mrc.isZero(0.0));
}

TEST_CASE("MRC equals the double-sum oracle") {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> kd(2, 12), nd_len(12, 60);
  for (int rep = 0; rep < 50; ++rep) {
    const int k = kd(gen);
    const int N = std::max(nd_len(gen), k);
    std::vector<std::vector<double>> inc(static_cast<std::size_t>(N), std::vector<double>(3));
    for (auto& row : inc)
      for (auto& x : row) x = nd(gen);
    for (bool finite : {true, false}) {
      const auto e = mrc::mrc(grid_from_increments(inc), with_k(k, finite));
      const auto wc = psi_constants(WeightProfile::min_max(), k);
      const double psi1 = finite ? wc.psi1_disc : 1.0;
      const double psi2 = finite ? wc.psi2_disc : 1.0 / 12.0;
      const auto want = oracle::mrc(inc, k, psi1, psi2, oracle::tri);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          CHECK(e.mrc(a, b) == doctest::Approx(want[a][b]).epsilon(1e-11).scale(1.0));
    }
    // Block scaling multiplies only the pre-averaged term.
    EstimatorConfig cfg = with_k(k);
    cfg.block_scaling = true;
    const auto e = mrc::mrc(grid_from_increments(inc), cfg);
    const auto wc = psi_constants(WeightProfile::min_max(), k);
    const auto plain = oracle::mrc(inc, k, wc.psi1_disc, wc.psi2_disc, oracle::tri);
    const auto no_corr = oracle::mrc(inc, k, 0.0, wc.psi2_disc, oracle::tri);
    const double f = static_cast<double>(N) / (N - k + 2);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double want = plain[a][b] + (f - 1.0) * no_corr[a][b];
        CHECK(e.mrc(a, b) == doctest::Approx(want).epsilon(1e-11).scale(1.0));
      }
  }
}

TEST_CASE("MRC on an asynchronous grid uses next-tick increments") {
  std::vector<TickSeries> s(2);
  s[0] = {"a", {0, 1, 3, 5, 6, 8, 9}, {0, 1, 3, 2, 5, 4, 7}};
  s[1] = {"b", {0, 2, 4, 5, 7, 10}, {1, 0, 2, 2, 6, 3}};
  const auto g = refresh_times(s);
  std::vector<std::vector<double>> inc;
  for (std::size_t p = 0; p < g.intervals(); ++p)
    inc.push_back({g.increments(0)[p], g.increments(1)[p]});
  const auto e = mrc::mrc(g, with_k(2));
  const auto wc = psi_constants(WeightProfile::min_max(), 2);
  const auto want = oracle::mrc(inc, 2, wc.psi1_disc, wc.psi2_disc, oracle::tri);
  CHECK(e.mrc(0, 1) == doctest::Approx(want[0][1]).epsilon(1e-12));
  CHECK(e.rcov(0, 0) >= 0.0);
}

TEST_CASE("symmetry, scaling and translation") {
  std::mt19937_64 gen(21);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> dy(-512, 512);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<std::vector<double>> inc(40, std::vector<double>(3));
    std::vector<std::vector<double>> dyadic(40, std::vector<double>(3));
    for (std::size_t p = 0; p < 40; ++p)
      for (int k = 0; k < 3; ++k) {
        inc[p][k] = nd(gen);
        dyadic[p][k] = dy(gen) / 1024.0;
      }
    const auto cfg = with_k(5);
    const auto base = mrc::mrc(grid_from_increments(inc), cfg);
    CHECK((base.mrc - base.mrc.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((base.rcov - base.rcov.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((base.rcov.diagonal().array() >= 0.0).all());

    const double c = 3.7;
    auto scaled = inc;
    for (auto& row : scaled)
      for (auto& x : row) x *= c;
    const auto sc = mrc::mrc(grid_from_increments(scaled), cfg);
    CHECK(((sc.mrc - c * c * base.mrc).cwiseAbs().maxCoeff()) <=
          1e-12 * c * c * base.mrc.cwiseAbs().maxCoeff());
    CHECK(((sc.rcov - c * c * base.rcov).cwiseAbs().maxCoeff()) <=
          1e-12 * c * c * base.rcov.cwiseAbs().maxCoeff());

    const auto shifted = mrc::mrc(grid_from_increments(inc, {10.0, -3.0, 0.5}), cfg);
    CHECK((shifted.mrc - base.mrc).cwiseAbs().maxCoeff() <= 1e-12);

    // Dyadic prices make every step exact, so translation is bit-exact.
    const auto d0 = mrc::mrc(grid_from_increments(dyadic), cfg);
    const auto d1 = mrc::mrc(grid_from_increments(dyadic, {64.0, -32.0, 8.0}), cfg);
    CHECK((d0.mrc - d1.mrc).cwiseAbs().maxCoeff() == 0.0);
    CHECK((d0.rcov - d1.rcov).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("configuration checks") {
  auto g = grid_from_increments(column({1, 2, 3}));
  EstimatorConfig bad;
  bad.theta = 0.0;
  CHECK_THROWS_AS(mrc::mrc(g, bad), InvalidParameters);
  CHECK_THROWS_AS(mrc::mrc(g, with_k(1)), InvalidWindow);
  CHECK_THROWS_AS(mrc::mrc(g, with_k(6)), InsufficientData);
  EstimatorConfig def;
  CHECK(mrc::mrc(g, def).k_n == 2);  // ceil(sqrt(3)) = 2
}

TEST_CASE("Brownian motion without noise: unbiased up to the known finite-sample terms") {
  // Exact expectation for X = W on an equidistant grid with t = 1:
  //   E[MRC] = s (N - k + 2) / N - psi1/(2 psi2 k^2),
  // s = N/(N-k+2) with block scaling and 1 otherwise.
  std::mt19937_64 gen(1234);
  std::normal_distribution<double> nd;
  std::vector<double> rmse;
  for (int n : {1000, 4000, 16000}) {
    std::vector<double> plain, scaled;
    double sq = 0.0;
    const int reps = 200;
    int k = 0;
    for (int r = 0; r < reps; ++r) {
      std::vector<std::vector<double>> inc(static_cast<std::size_t>(n), std::vector<double>(1));
      const double sd = 1.0 / std::sqrt(static_cast<double>(n));
      for (auto& row : inc) row[0] = sd * nd(gen);
      const auto g = grid_from_increments(inc);
      EstimatorConfig cfg;
      const auto e = mrc::mrc(g, cfg);
      cfg.block_scaling = true;
      const auto es = mrc::mrc(g, cfg);
      k = e.k_n;
      plain.push_back(e.mrc(0, 0));
      scaled.push_back(es.mrc(0, 0));
      sq += (es.mrc(0, 0) - 1.0) * (es.mrc(0, 0) - 1.0);
    }
    const auto wc = psi_constants(WeightProfile::min_max(), k);
    const double corr = wc.psi1_disc / (2.0 * wc.psi2_disc * k * k);
    const double exp_plain = static_cast<double>(n - k + 2) / n - corr;
    const auto mp = oracle::mean_se(plain);
    const auto ms = oracle::mean_se(scaled);
    CHECK(std::abs(mp.mean - exp_plain) <= 3.0 * mp.se);
    CHECK(std::abs(ms.mean - (1.0 - corr)) <= 3.0 * ms.se);
    CHECK(std::abs(ms.mean - 1.0) <= 3.0 * ms.se);
    rmse.push_back(std::sqrt(sq / reps));
  }
  CHECK(rmse[1] < rmse[0]);
  CHECK(rmse[2] < rmse[1]);
}

TEST_CASE("pure noise: the bias correction removes the noise contribution") {
  // X = 0, Y = eps with sd v. Exact expectation:
  //   E[MRC] = (s (N-k+2) - N) v^2 psi1 / (psi2 k^2),
  // which is exactly zero with block scaling.
  std::mt19937_64 gen(77);
  std::normal_distribution<double> nd(0.0, 0.005);
  const int n = 23400;
  std::vector<double> plain, scaled;
  int k = 0;
  for (int r = 0; r < 200; ++r) {
    TickSeries s{"a", std::vector<double>(n + 1), std::vector<double>(n + 1)};
    for (int i = 0; i <= n; ++i) {
      s.times[static_cast<std::size_t>(i)] = static_cast<double>(i) / n;
      s.values[static_cast<std::size_t>(i)] = nd(gen);
    }
    const auto g = refresh_times({s});
    EstimatorConfig cfg;
    const auto e = mrc::mrc(g, cfg);
    cfg.block_scaling = true;
    k = e.k_n;
    plain.push_back(e.mrc(0, 0));
    scaled.push_back(mrc::mrc(g, cfg).mrc(0, 0));
  }
  CHECK(k == 153);
  const auto wc = psi_constants(WeightProfile::min_max(), k);
  const double v2 = 0.005 * 0.005;
  const double exp_plain = -(k - 2) * v2 * wc.psi1_disc / (wc.psi2_disc * k * k);
  const auto mp = oracle::mean_se(plain);
  const auto ms = oracle::mean_se(scaled);
  CHECK(std::abs(mp.mean - exp_plain) <= 3.0 * mp.se);
  CHECK(std::abs(ms.mean) <= 3.0 * ms.se);
}
