#include "mrc/rng.hpp"

#include <cmath>

namespace mrc {

Rng::Rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  engine_.seed(seq);
}

Rng Rng::for_stream(std::uint64_t master_seed, std::uint64_t stream) {
  Rng r(0);
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x6d72u};
  r.engine_.seed(seq);
  return r;
}

Rng Rng::split() {
  const std::uint64_t a = engine_();
  const std::uint64_t b = engine_();
  Rng r(0);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  r.engine_.seed(seq);
  return r;
}

double Rng::uniform() {
  // 53 random bits mapped to the open interval.
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::exponential(double rate) { return -std::log(uniform()) / rate; }

std::uint64_t Rng::poisson(double mean) {
  if (!(mean > 0.0)) return 0;
  return std::poisson_distribution<std::uint64_t>(mean)(engine_);
}

std::uint64_t Rng::geometric(double p) {
  if (p >= 1.0) return 1;
  return std::geometric_distribution<std::uint64_t>(p)(engine_) + 1;
}

double inverse_gaussian(Rng& rng, double mean, double shape) {
  const double v = rng.normal();
  const double y = v * v;
  const double my = mean * y;
  // x = mean + mean^2 y/(2 shape) - mean/(2 shape) sqrt(4 mean shape y + mean^2 y^2),
  // rearranged to avoid cancellation.
  const double x = mean - 2.0 * mean * my / (std::sqrt(4.0 * mean * shape * y + my * my) + my);
  return rng.uniform() <= mean / (mean + x) ? x : mean * mean / x;
}

}  // namespace mrc
