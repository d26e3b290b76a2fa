#pragma once

#include <cstdint>
#include <random>

namespace mrc {

/// Random source for one simulation stream. Streams are derived from a
/// (master seed, stream id) pair, so replication r draws the same numbers
/// regardless of which worker runs it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  static Rng for_stream(std::uint64_t master_seed, std::uint64_t stream);

  /// Independent child stream seeded from the next draws of this one.
  /// Simulation stages use their own child so that scenarios which differ
  /// in one stage still share the random numbers of the others.
  Rng split();

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal() { return normal_(engine_); }
  double exponential(double rate);
  std::uint64_t poisson(double mean);
  /// Number of Bernoulli(p) trials up to and including the first success.
  std::uint64_t geometric(double p);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Inverse Gaussian IG(mean, shape) by the transform method with one
/// chi-square(1) draw and a root-selection uniform.
double inverse_gaussian(Rng& rng, double mean, double shape);

}  // namespace mrc
