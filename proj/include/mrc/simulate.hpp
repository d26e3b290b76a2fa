#pragma once

// Ground-truth generation for the bivariate study: Heston-type stochastic
// variance with compensated variance jumps, correlated CGMY price jumps,
// latent observation grids (equidistant, inverse-Gaussian hitting times,
// Poisson arrivals, alternating), Lo-MacKinlay thinning and Gaussian noise.

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "mrc/avar.hpp"
#include "mrc/rng.hpp"
#include "mrc/scheme.hpp"
#include "mrc/tickdata.hpp"

namespace mrc {

struct AssetVolParams {
  double kappa = 0.0;
  double s = 0.0;          // vol-of-variance
  double sigma_bar = 0.0;  // long-run volatility; variance starts at sigma_bar^2
  double rho = 0.0;        // corr(W^k, B^k)
  double lambdaV = 0.0;    // variance-jump intensity
  double tauV = 0.0;       // variance jumps ~ U[0, 2 tauV]
};

struct HestonParams {
  std::array<AssetVolParams, 2> asset{};
  double rho_B = 0.0;  // corr(W^1, W^2)

  /// Default two-asset parameter set.
  static HestonParams reference();

  /// Correlation of (W^1, W^2, B^1, B^2).
  Eigen::Matrix4d correlation() const;
  void validate() const;
};

/// Lower-triangular L with L L^T = correlation of (W^1, W^2, B^1, B^2).
/// W^1 comes first so an externally fixed W^1 increment stays consistent.
/// Throws InvalidParameters unless the matrix is PSD with |rho| <= 1.
Eigen::Matrix4d correlation_factor(const HestonParams& h);

/// One CGMY Levy density c e^{-gamma_-|x|}/|x|^{1+beta} (x<0),
/// c e^{-gamma_+ x}/x^{1+beta} (x>0).
struct CgmyLevy {
  double c = 0.0;
  double gamma_plus = 3.0;
  double gamma_minus = 5.0;
  double beta = 0.5;

  /// int x^2 f(x) dx = c Gamma(2-beta) (gamma_+^{beta-2} + gamma_-^{beta-2}).
  double second_moment() const;
};

/// Z^1 ~ z1, Z^0 ~ z0 independent; Z^2 = rho_J Z^1 + sqrt(1-rho_J^2) Z^0.
struct CgmyParams {
  CgmyLevy z1;
  CgmyLevy z0;
  double rho_J = 0.2;
  double trunc_eps = 1e-5;

  /// Intensities chosen so that jumps carry `share` of the expected
  /// quadratic variation of each asset.
  static CgmyParams calibrated(const HestonParams& h, double share, double gamma_plus,
                               double gamma_minus, double beta, double rho_J,
                               double trunc_eps = 1e-5);
  void validate() const;
};

/// c such that c m2 / (sigma_bar^2 + c m2) = share, m2 the unit-c second moment.
double calibrate_c(double share, double sigma_bar, double gamma_plus, double gamma_minus,
                   double beta);

/// c0 for asset 2 given c1: rho_J^2 E[Z1,Z1] + (1-rho_J^2) E[Z0,Z0] hits the target.
double calibrate_c0(double share, double sigma_bar2, double rho_J, const CgmyLevy& z1,
                    double gamma_plus, double gamma_minus, double beta);

struct LevyJump {
  double time = 0.0;
  double size = 0.0;
};

/// Exact simulation of all jumps with |x| >= eps on [0, horizon]: proposals
/// from the untempered stable tail c x^{-1-beta} on [eps, inf) accepted with
/// probability e^{-gamma x}, independently per side. Sorted by time.
std::vector<LevyJump> simulate_tempered_stable(const CgmyLevy& p, double eps,
                                               double horizon, Rng& rng);

struct CgmyJumps {
  std::vector<LevyJump> z1, z0;
  double rho_J = 0.0;

  struct Combined {
    double time;
    Eigen::Vector2d size;
  };
  /// Jumps of (Z^1, Z^2) merged by time.
  std::vector<Combined> combined() const;
};

/// Throws InvalidParameters("unsupported regime") when beta >= 1.
CgmyJumps simulate_cgmy(const CgmyParams& p, double horizon, Rng& rng);

struct LatentGrid {
  std::vector<double> times;
  /// W^1 increments over (times[i], times[i+1]] when the grid is generated
  /// by hitting times of W^1; empty otherwise.
  std::vector<double> driver;
};

struct ObservationTimes {
  LatentGrid latent;
  std::vector<std::vector<std::size_t>> observed;  // indices into latent.times
};

ObservationTimes sample_times(const SamplingSchemeSpec& spec, int d, double horizon,
                              Rng& rng);

struct HestonPath {
  std::array<std::vector<double>, 2> x;    // continuous part on the latent grid
  std::array<std::vector<double>, 2> var;  // Euler variance (before truncation)
  std::array<std::vector<double>, 2> var_jump_times;
};

/// Euler scheme on the latent grid with full truncation of the variance.
HestonPath simulate_heston(const HestonParams& h, const LatentGrid& grid, Rng& rng);

/// Y = X + eps, eps i.i.d. N(0, sd^2) per tick and asset.
std::vector<std::vector<double>> add_noise(const std::vector<std::vector<double>>& x,
                                           double sd, Rng& rng);

struct SimulationConfig {
  HestonParams heston = HestonParams::reference();
  CgmyParams cgmy = CgmyParams::calibrated(HestonParams::reference(), 0.15, 3.0, 5.0, 0.5,
                                           0.2);
  SamplingSchemeSpec scheme;
  double noise_sd = 0.005;
  double horizon = 1.0;

  void validate() const;
};

struct SimOutput {
  std::vector<double> latent_times;
  std::vector<std::vector<std::size_t>> observed;
  std::array<std::vector<double>, 2> x;  // latent X including jumps
  HestonPath heston;
  std::vector<CgmyJumps::Combined> jumps;  // jumps inside the simulated window
  std::vector<TickSeries> ticks;           // noisy observations
  GroundTruth truth;
};

SimOutput simulate(const SimulationConfig& cfg, Rng& rng);

}  // namespace mrc
