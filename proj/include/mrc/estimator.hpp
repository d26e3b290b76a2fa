#pragma once

// Pre-averaged modulated realized covariance (MRC).
//
//   MRC = 1/(psi2 k_n) sum_i Ybar_i Ybar_i^T - psi1/(2 psi2 k_n^2) [Y,Y]
//
// where Ybar_i are weighted sums of k_n - 1 consecutive synchronized
// increments and [Y,Y] is the realized covariance on the refresh grid.
// With block_scaling the first term is multiplied by N/(N-k_n+2), which
// undoes the under-weighting of the first and last k_n increments.

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "mrc/tickdata.hpp"
#include "mrc/weights.hpp"

namespace mrc {

struct EstimatorConfig {
  double theta = 1.0;
  std::optional<int> window_override;
  WeightProfile profile = WeightProfile::min_max();
  bool finite_sample_psis = true;
  bool block_scaling = false;

  void validate() const;
};

struct MrcEstimate {
  Eigen::MatrixXd mrc;
  Eigen::MatrixXd rcov;
  int k_n = 0;
  std::size_t n_preavg_blocks = 0;
  std::size_t n_intervals = 0;
  WeightConstants psis_used;
};

/// max(2, ceil(theta sqrt(N))). Throws InsufficientData for N == 0.
int window_size(double theta, std::size_t N);

/// Pre-averaged increments, one row per block i = 0..N-k_n+1, one column
/// per asset. Throws InsufficientData when N < k_n - 1.
Eigen::MatrixXd preaverage(const SyncGrid& grid, int k_n, const WeightProfile& profile);

/// sum_p dY_p dY_p^T over the synchronized increments.
Eigen::MatrixXd realized_cov(const SyncGrid& grid);

MrcEstimate mrc(const SyncGrid& grid, const EstimatorConfig& config);

}  // namespace mrc
