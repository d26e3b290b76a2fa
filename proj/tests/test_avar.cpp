#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mrc/avar.hpp"
#include "mrc/errors.hpp"
#include "mrc/estimator.hpp"
#include "oracles.hpp"

using namespace mrc;

namespace {

const WeightConstants kWc = weight_constants(WeightProfile::min_max(), 100);

GroundTruth constant_truth(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& upsilon,
                           double G, const Eigen::MatrixXd& chi, std::size_t M = 101) {
  GroundTruth t;
  for (std::size_t i = 0; i < M; ++i) t.fine_grid.push_back(static_cast<double>(i) / (M - 1));
  t.Sigma = MatrixPath(sigma, M);
  t.G.assign(M, G);
  t.chi = MatrixPath(chi, M);
  t.Upsilon = upsilon;
  t.true_qv = sigma;
  return t;
}

GroundTruth scalar_truth(double sigma, double upsilon) {
  return constant_truth(Eigen::MatrixXd::Constant(1, 1, sigma),
                        Eigen::MatrixXd::Constant(1, 1, upsilon), 1.0,
                        Eigen::MatrixXd::Ones(1, 1));
}

JumpRecord jump(const Eigen::VectorXd& size, const Eigen::MatrixXd& sl,
                const Eigen::MatrixXd& sr, double gl, double gr, const Eigen::MatrixXd& cl,
                const Eigen::MatrixXd& cr, double time = 0.5) {
  JumpRecord j;
  j.time = time;
  j.size = size;
  j.sigma_left = sl;
  j.sigma_right = sr;
  j.G_left = gl;
  j.G_right = gr;
  j.chi_left = cl;
  j.chi_right = cr;
  return j;
}

Eigen::MatrixXd random_psd(std::mt19937_64& gen, int d, double scale) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = nd(gen);
  return scale * a * a.transpose();
}

Eigen::MatrixXd random_chi(std::mt19937_64& gen, int d) {
  std::uniform_real_distribution<double> u;
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) c(i, j) = c(j, i) = u(gen);
  return c;
}

}  // namespace

TEST_CASE("closed-path values") {
  // Continuous, Sigma = 1, G = 1, no noise: 4 Phi22 / psi2^2 = 576 Phi22 = 151/140.
  const auto cont = avar(scalar_truth(1.0, 0.0), 1.0, kWc);
  CHECK(std::abs(cont.total(0, 0, 0, 0) - 151.0 / 140.0) <= 1e-9);
  CHECK(cont.jump(0, 0, 0, 0) == 0.0);

  // Noise only: 4 Phi11 v^2 / psi2^2 = 96 v^2.
  const double v = 0.3;
  const auto noise = avar_continuous(scalar_truth(0.0, v), 1.0, kWc);
  CHECK(std::abs(noise(0, 0, 0, 0) - 96.0 * v * v) <= 1e-12);

  CHECK(avar_continuous(scalar_truth(0.0, 0.0), 1.0, kWc)(0, 0, 0, 0) == 0.0);

  // One unit jump with Sigma = G = 1 on both sides: 1152 Phi22 = 151/70.
  auto t = scalar_truth(0.0, 0.0);
  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  t.jumps.push_back(jump(Eigen::VectorXd::Ones(1), one, one, 1.0, 1.0, one, one));
  CHECK(std::abs(avar_jump(t, 1.0, kWc)(0, 0, 0, 0) - 151.0 / 70.0) <= 1e-9);

  // A zero jump adds nothing.
  t.jumps.push_back(jump(Eigen::VectorXd::Zero(1), one, one, 1.0, 1.0, one, one));
  CHECK(std::abs(avar_jump(t, 1.0, kWc)(0, 0, 0, 0) - 151.0 / 70.0) <= 1e-9);
}

TEST_CASE("univariate noiseless reduction") {
  // Upsilon = 0, d = 1: 2 Phi22 theta psi2^-2 * 2 int Sigma^2 G ds.
  for (double theta : {0.3, 1.0, 2.5})
    for (double s : {0.04, 1.0, 3.0})
      for (double G : {1.0, 4.2}) {
        const auto t = constant_truth(Eigen::MatrixXd::Constant(1, 1, s),
                                      Eigen::MatrixXd::Zero(1, 1), G,
                                      Eigen::MatrixXd::Ones(1, 1));
        const double want = 2.0 * kWc.phi22 * theta / (kWc.psi2 * kWc.psi2) * 2.0 * s * s * G;
        CHECK(std::abs(avar_continuous(t, theta, kWc)(0, 0, 0, 0) - want) <=
              1e-10 * std::max(1.0, want));
      }
}

TEST_CASE("bivariate entry (1,2,1,2) against a hand-expanded formula") {
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd S = random_psd(gen, 2, 0.5);
    const Eigen::MatrixXd Y = random_psd(gen, 2, 0.01);
    const Eigen::MatrixXd C = random_chi(gen, 2);
    const double G = 1.0 + rep * 0.3, theta = 0.2 + rep * 0.1;
    const Eigen::MatrixXd U = Y.cwiseProduct(C);
    const double diff = S(0, 0) * S(1, 1) + S(0, 1) * S(0, 1);
    const double noise = U(0, 0) * U(1, 1) + U(0, 1) * U(0, 1);
    const double cross = S(0, 0) * U(1, 1) + S(1, 1) * U(0, 0) + 2.0 * S(0, 1) * U(0, 1);
    const double want = 2.0 / (kWc.psi2 * kWc.psi2) *
                        (kWc.phi22 * theta * diff * G +
                         kWc.phi11 / std::pow(theta, 3) * noise / G + kWc.phi12 / theta * cross);
    const auto t = constant_truth(S, Y, G, C);
    CHECK(avar_continuous(t, theta, kWc)(0, 1, 0, 1) == doctest::Approx(want).epsilon(1e-12));
    CHECK(avar_entry(t, theta, kWc, 0, 1) == doctest::Approx(want).epsilon(1e-12));

    // Jump in asset 1 only pairs with the asset-2 kernel.
    auto tj = t;
    Eigen::VectorXd dx(2);
    dx << 0.7, 0.0;
    tj.jumps.push_back(jump(dx, S, S, G, G, C, C));
    const double c22 = kWc.phi22 * theta * 2.0 * S(1, 1) * G + kWc.phi12 / theta * 2.0 * U(1, 1);
    CHECK(avar_jump(tj, theta, kWc)(0, 1, 0, 1) ==
          doctest::Approx(dx(0) * dx(0) * c22 / (kWc.psi2 * kWc.psi2)).epsilon(1e-12));
  }
}

TEST_CASE("tensor symmetries on random ground truths") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 10; ++rep) {
    const int d = 2 + rep % 3;
    const std::size_t M = 60;
    GroundTruth t;
    t.Sigma = MatrixPath(d, M);
    t.chi = MatrixPath(d, M);
    for (std::size_t i = 0; i < M; ++i) {
      t.fine_grid.push_back(static_cast<double>(i) / M);
      t.Sigma.at(i) = random_psd(gen, d, 0.2);
      t.chi.at(i) = random_chi(gen, d);
      t.G.push_back(u(gen));
    }
    t.Upsilon = random_psd(gen, d, 0.01);
    for (int j = 0; j < 3; ++j) {
      Eigen::VectorXd dx(d);
      for (int k = 0; k < d; ++k) dx(k) = nd(gen);
      t.jumps.push_back(jump(dx, random_psd(gen, d, 0.2), random_psd(gen, d, 0.2), u(gen),
                             u(gen), random_chi(gen, d), random_chi(gen, d)));
    }
    CHECK_NOTHROW(t.validate());
    const double theta = u(gen);
    const auto r = avar(t, theta, kWc);
    double scale = 0.0;
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) scale = std::max(scale, std::abs(r.total(k, l, k, l)));
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) {
        CHECK(r.total(k, l, k, l) >= -1e-12);
        CHECK(avar_entry(t, theta, kWc, k, l) ==
              doctest::Approx(r.total(k, l, k, l)).epsilon(1e-10));
        for (int kp = 0; kp < d; ++kp)
          for (int lp = 0; lp < d; ++lp) {
            const double v = r.total(k, l, kp, lp);
            CHECK(std::abs(v - r.total(kp, lp, k, l)) <= 1e-12 * scale);
            CHECK(std::abs(v - r.total(l, k, kp, lp)) <= 1e-12 * scale);
            CHECK(std::abs(v - r.total(k, l, lp, kp)) <= 1e-12 * scale);
            CHECK(std::abs(v - r.continuous(k, l, kp, lp) - r.jump(k, l, kp, lp)) <=
                  1e-14 * scale);
          }
      }
  }
}

TEST_CASE("Riemann sums converge under grid refinement") {
  auto make = [](std::size_t M) {
    GroundTruth t;
    t.Sigma = MatrixPath(2, M + 1);
    t.chi = MatrixPath(Eigen::MatrixXd::Ones(2, 2), M + 1);
    for (std::size_t i = 0; i <= M; ++i) {
      const double s = static_cast<double>(i) / M;
      t.fine_grid.push_back(s);
      const double v1 = 0.06 + 0.02 * std::sin(2 * std::numbers::pi * s);
      const double v2 = 0.09 * std::exp(-s);
      auto S = t.Sigma.at(i);
      S(0, 0) = v1;
      S(1, 1) = v2;
      S(0, 1) = S(1, 0) = 0.5 * std::sqrt(v1 * v2);
      t.G.push_back(1.0 + 0.5 * s * s);
    }
    t.Upsilon = 2.5e-5 * Eigen::MatrixXd::Identity(2, 2);
    return t;
  };
  const auto coarse = avar_continuous(make(2000), 0.7, kWc);
  const auto fine = avar_continuous(make(4000), 0.7, kWc);
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l)
      for (int kp = 0; kp < 2; ++kp)
        for (int lp = 0; lp < 2; ++lp) {
          const double a = coarse(k, l, kp, lp), b = fine(k, l, kp, lp);
          CHECK(std::abs(a - b) <= 1e-3 * std::abs(b));
        }
}

TEST_CASE("scheme constants") {
  SamplingSchemeSpec poisson;
  poisson.kind = SamplingSchemeSpec::Kind::PoissonArrivals;
  poisson.p = {1.0, 1.0};
  auto sc = theoretical_G_chi(poisson, 2);
  CHECK(sc.G == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(sc.chi.isIdentity(0.0));

  poisson.p = {1.0, 2.0, 0.5};
  sc = theoretical_G_chi(poisson, 3);
  const double want = 1.0 + 0.5 + 2.0 - 1.0 / 3.0 - 1.0 / 1.5 - 1.0 / 2.5 + 1.0 / 3.5;
  CHECK(sc.G == doctest::Approx(want).epsilon(1e-14));

  SamplingSchemeSpec lm;
  lm.p = {1.0 / 3.0, 1.0 / 3.0};
  sc = theoretical_G_chi(lm, 2);
  CHECK(sc.G == doctest::Approx(4.2).epsilon(1e-14));
  CHECK(sc.chi(0, 1) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(sc.chi(0, 0) == 1.0);

  lm.kind = SamplingSchemeSpec::Kind::IgHitting;
  lm.ig_a = -2.0;
  lm.ig_b = -4.0;
  sc = theoretical_G_chi(lm, 2);
  CHECK(sc.G == doctest::Approx(8.4).epsilon(1e-14));

  SamplingSchemeSpec eq;
  sc = theoretical_G_chi(eq, 1);
  CHECK(sc.G == 1.0);
  CHECK(sc.chi(0, 0) == 1.0);
  sc = theoretical_G_chi(eq, 2);
  CHECK((sc.chi.array() == 1.0).all());

  lm.p = {0.5};
  CHECK_THROWS_AS(theoretical_G_chi(lm, 2), InvalidParameters);
}

TEST_CASE("standardization") {
  CHECK(standardize(1.5, 1.0, 4.0, 16.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(standardize(0.7, 0.7, 2.0, 23400.0) == 0.0);
  CHECK_THROWS_AS(standardize(1.0, 0.0, 0.0, 16.0), DegenerateVariance);
  CHECK_THROWS_AS(standardize(1.0, 0.0, -1.0, 16.0), DegenerateVariance);
  CHECK_THROWS_AS(standardize(1.0, 0.0, std::nan(""), 16.0), DegenerateVariance);

  auto t = scalar_truth(1.0, 0.0);
  t.true_qv = Eigen::MatrixXd::Constant(1, 1, 1.0);
  MrcEstimate e;
  e.mrc = Eigen::MatrixXd::Constant(1, 1, 1.25);
  const auto r = avar(t, 1.0, kWc);
  CHECK(standardize(e, t, r, 16.0, 0, 0) ==
        doctest::Approx(2.0 * 0.25 / std::sqrt(151.0 / 140.0)).epsilon(1e-12));
}

TEST_CASE("invalid ground truth") {
  auto t = scalar_truth(1.0, 0.0);
  t.G[3] = 0.0;
  CHECK_THROWS_AS(avar_continuous(t, 1.0, kWc), InvalidParameters);
  CHECK_THROWS_AS(t.validate(), InvalidParameters);
  auto u = scalar_truth(1.0, 0.0);
  CHECK_THROWS_AS(avar(u, 0.0, kWc), InvalidParameters);
  u.chi.at(2)(0, 0) = 0.5;
  CHECK_THROWS_AS(u.validate(), InvalidParameters);
}

TEST_CASE("simulated error variance matches continuous plus jump AVAR") {
  // Two Brownian motions with very different variances and one jump in
  // asset 1 only. The jump multiplies the pre-averaged continuous part of
  // asset 2, so its contribution scales with Sigma^22, not Sigma^11.
  const int n = 4096, reps = 600;
  const double s1 = 4.0, s2 = 0.25, jump_size = 1.0;
  std::mt19937_64 gen(31);
  std::normal_distribution<double> nd;
  std::vector<double> err;
  int k = 0;
  for (int r = 0; r < reps; ++r) {
    std::vector<TickSeries> s(2);
    for (int a = 0; a < 2; ++a) {
      s[a].asset_id = a == 0 ? "a" : "b";
      s[a].times.resize(n + 1);
      s[a].values.assign(n + 1, 0.0);
    }
    double x1 = 0.0, x2 = 0.0, qv = 0.0;
    const double dt = 1.0 / n;
    for (int i = 0; i <= n; ++i) {
      if (i > 0) {
        const double d1 = std::sqrt(s1 * dt) * nd(gen);
        const double d2 = std::sqrt(s2 * dt) * nd(gen);
        x1 += d1;
        x2 += d2;
        qv += d1 * d2;
        if (i == n / 2) x1 += jump_size;
      }
      for (int a = 0; a < 2; ++a) s[a].times[static_cast<std::size_t>(i)] = i * dt;
      s[0].values[static_cast<std::size_t>(i)] = x1;
      s[1].values[static_cast<std::size_t>(i)] = x2;
    }
    EstimatorConfig cfg;
    cfg.block_scaling = true;
    const auto e = mrc::mrc(refresh_times(s), cfg);
    k = e.k_n;
    err.push_back(std::pow(n, 0.25) * (e.mrc(0, 1) - qv));
  }
  const double theta = k / std::sqrt(static_cast<double>(n));
  Eigen::MatrixXd S(2, 2);
  S << s1, 0.0, 0.0, s2;
  auto t = constant_truth(S, Eigen::MatrixXd::Zero(2, 2), 1.0, Eigen::MatrixXd::Ones(2, 2));
  Eigen::VectorXd dx(2);
  dx << jump_size, 0.0;
  t.jumps.push_back(jump(dx, S, S, 1.0, 1.0, t.chi.at(0), t.chi.at(0)));
  const double predicted = avar_entry(t, theta, kWc, 0, 1);
  const auto ms = oracle::mean_se(err);
  const double var = ms.sd * ms.sd;
  // Sample variance of 600 near-normal draws: relative SE about 6%.
  CHECK(var == doctest::Approx(predicted).epsilon(0.2));
  // The alternative pairing (jump in asset 1 against Sigma^11) would
  // predict a jump term 16 times larger.
  double cont = avar_continuous(t, theta, kWc)(0, 1, 0, 1);
  const double swapped = cont + 16.0 * (predicted - cont);
  CHECK(var < 0.5 * swapped);
}
