#include "mrc/estimator.hpp"

#include "mrc/errors.hpp"

#include <cmath>
#include <string>

namespace mrc {

namespace {

// Increments as an N x d matrix.
Eigen::MatrixXd increment_matrix(const SyncGrid& grid) {
  const auto N = static_cast<Eigen::Index>(grid.intervals());
  const auto d = static_cast<Eigen::Index>(grid.dim());
  Eigen::MatrixXd D(N, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const auto& v = grid.values(static_cast<std::size_t>(k));
    for (Eigen::Index p = 0; p < N; ++p)
      D(p, k) = v[static_cast<std::size_t>(p + 1)] - v[static_cast<std::size_t>(p)];
  }
  return D;
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace

void EstimatorConfig::validate() const {
  if (!(theta > 0.0)) throw InvalidParameters("theta must be positive");
  if (window_override && *window_override < 2)
    throw InvalidWindow("window override must be >= 2");
}

int window_size(double theta, std::size_t N) {
  if (N == 0) throw InsufficientData("window_size: no refresh intervals");
  if (!(theta > 0.0)) throw InvalidParameters("theta must be positive");
  const double k = std::ceil(theta * std::sqrt(static_cast<double>(N)));
  return std::max(2, static_cast<int>(k));
}

Eigen::MatrixXd preaverage(const SyncGrid& grid, int k_n, const WeightProfile& profile) {
  const auto w = discrete_weights(profile, k_n);
  const std::size_t N = grid.intervals();
  if (N + 1 < static_cast<std::size_t>(k_n))
    throw InsufficientData("grid has " + std::to_string(N) +
                           " intervals, need at least k_n - 1 = " +
                           std::to_string(k_n - 1));
  const Eigen::MatrixXd D = increment_matrix(grid);
  const auto blocks = static_cast<Eigen::Index>(N) - k_n + 2;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(blocks, D.cols());
  // Row i uses increments i+1 .. i+k_n-1 (1-based), i.e. D rows i .. i+k_n-2.
  for (int p = 1; p < k_n; ++p) {
    const double wp = w[static_cast<std::size_t>(p)];
    if (wp == 0.0) continue;
    out += wp * D.middleRows(p - 1, blocks);
  }
  return out;
}

Eigen::MatrixXd realized_cov(const SyncGrid& grid) {
  const Eigen::MatrixXd D = increment_matrix(grid);
  return symmetrize(D.transpose() * D);
}

MrcEstimate mrc(const SyncGrid& grid, const EstimatorConfig& config) {
  config.validate();
  const std::size_t N = grid.intervals();
  const int k_n = config.window_override ? *config.window_override
                                         : window_size(config.theta, N);
  const Eigen::MatrixXd bars = preaverage(grid, k_n, config.profile);

  WeightConstants wc = weight_constants(config.profile, k_n);
  if (config.finite_sample_psis) wc = wc.with_discrete_psis();

  MrcEstimate est;
  est.k_n = k_n;
  est.n_intervals = N;
  est.n_preavg_blocks = static_cast<std::size_t>(bars.rows());
  est.psis_used = wc;
  est.rcov = realized_cov(grid);
  const double k = static_cast<double>(k_n);
  Eigen::MatrixXd signal = symmetrize(bars.transpose() * bars);
  if (config.block_scaling)
    signal *= static_cast<double>(N) / static_cast<double>(bars.rows());
  est.mrc = signal / (wc.psi2 * k) - (wc.psi1 / (2.0 * wc.psi2 * k * k)) * est.rcov;
  return est;
}

}  // namespace mrc
