#pragma once

// Asymptotic covariance of n^{1/4} (MRC - [X,X]) given ground truth: the
// continuous part driven by Sigma, the noise covariance Upsilon, the
// duration level G and the overlap matrix chi, and the jump part driven by
// the jump sizes together with the two-sided limits of those processes.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "mrc/estimator.hpp"
#include "mrc/scheme.hpp"
#include "mrc/weights.hpp"

namespace mrc {

/// Dense d x d x d x d array.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int d) : d_(d), data_(static_cast<std::size_t>(d * d * d * d), 0.0) {}

  int dim() const noexcept { return d_; }
  double& operator()(int k, int l, int kp, int lp) { return data_[index(k, l, kp, lp)]; }
  double operator()(int k, int l, int kp, int lp) const { return data_[index(k, l, kp, lp)]; }

  Tensor4& operator+=(const Tensor4& o);
  friend Tensor4 operator+(Tensor4 a, const Tensor4& b) { return a += b; }

 private:
  std::size_t index(int k, int l, int kp, int lp) const {
    return static_cast<std::size_t>(((k * d_ + l) * d_ + kp) * d_ + lp);
  }
  int d_ = 0;
  std::vector<double> data_;
};

/// Sequence of d x d matrices stored contiguously (column-major each).
class MatrixPath {
 public:
  MatrixPath() = default;
  MatrixPath(int d, std::size_t length)
      : d_(d), data_(static_cast<std::size_t>(d * d) * length, 0.0) {}
  /// Constant path.
  MatrixPath(const Eigen::MatrixXd& value, std::size_t length);

  int dim() const noexcept { return d_; }
  std::size_t size() const noexcept {
    return d_ == 0 ? 0 : data_.size() / static_cast<std::size_t>(d_ * d_);
  }
  Eigen::Map<Eigen::MatrixXd> at(std::size_t i) {
    return {data_.data() + i * static_cast<std::size_t>(d_ * d_), d_, d_};
  }
  Eigen::Map<const Eigen::MatrixXd> at(std::size_t i) const {
    return {data_.data() + i * static_cast<std::size_t>(d_ * d_), d_, d_};
  }

 private:
  int d_ = 0;
  std::vector<double> data_;
};

struct JumpRecord {
  double time = 0.0;
  Eigen::VectorXd size;  // Delta X at the jump
  Eigen::MatrixXd sigma_left, sigma_right;
  double G_left = 1.0, G_right = 1.0;
  Eigen::MatrixXd chi_left, chi_right;
};

struct GroundTruth {
  std::vector<double> fine_grid;  // increasing, integration nodes
  MatrixPath Sigma;               // Sigma_s = sigma_s sigma_s^T on fine_grid
  std::vector<double> G;          // duration level on fine_grid
  MatrixPath chi;                 // overlap matrix on fine_grid
  Eigen::MatrixXd Upsilon;        // noise covariance, constant
  std::vector<JumpRecord> jumps;
  Eigen::MatrixXd true_qv;        // [X,X] over the horizon

  int dim() const { return static_cast<int>(Upsilon.rows()); }
  /// Throws InvalidParameters on inconsistent sizes, non-positive G, or an
  /// out-of-range chi / non-PSD Upsilon.
  void validate() const;
};

struct AvarResult {
  Tensor4 continuous;
  Tensor4 jump;
  Tensor4 total;
};

/// Left-endpoint Riemann sum over the fine grid of the continuous-part
/// integrand. `theta` is k_n / sqrt(n).
Tensor4 avar_continuous(const GroundTruth& truth, double theta, const WeightConstants& wc);

/// Sum over recorded jumps.
Tensor4 avar_jump(const GroundTruth& truth, double theta, const WeightConstants& wc);

AvarResult avar(const GroundTruth& truth, double theta, const WeightConstants& wc);

/// Only the (k,l,k,l) entry of the total, which is all the standardized
/// statistic needs.
double avar_entry(const GroundTruth& truth, double theta, const WeightConstants& wc,
                  int k, int l);

struct SchemeConstants {
  double G = 1.0;
  Eigen::MatrixXd chi;
};

/// Limits G and chi for time-homogeneous schemes:
///   Poisson (rates n p_k):  G = sum over non-empty subsets S of
///                           (-1)^{|S|-1} / sum_{k in S} p_k, chi = I;
///   thinned latent grid:    G = G0 sum_S (-1)^{|S|-1} / (1 - prod_{k in S}(1 - p_k)),
///                           chi_kl = p_k p_l / (p_k + p_l - p_k p_l);
///   unthinned latent grid:  G = G0, chi = all ones,
/// with G0 = 1 for equidistant and alternating grids and b/a for hitting times.
SchemeConstants theoretical_G_chi(const SamplingSchemeSpec& scheme, int d);

/// n^{1/4} (MRC^{kl} - [X,X]^{kl}) / sqrt(AVAR^{klkl}). Throws
/// DegenerateVariance when the variance entry is not positive.
double standardize(const MrcEstimate& estimate, const GroundTruth& truth,
                   const AvarResult& avar, double n, int k, int l);

double standardize(double estimate_kl, double truth_kl, double avar_klkl, double n);

}  // namespace mrc
