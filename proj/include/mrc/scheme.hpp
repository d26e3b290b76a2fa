#pragma once

#include <string>
#include <vector>

namespace mrc {

/// Observation-time design. The latent grid is one of the four kinds; when
/// `p` is non-empty each asset observes latent points through independent
/// geometric gaps with success probability p[k] (Lo-MacKinlay thinning).
/// For PoissonArrivals `p` instead holds the per-asset intensity multipliers
/// (asset k ticks at rate n p[k]).
struct SamplingSchemeSpec {
  enum class Kind { Equidistant, IgHitting, PoissonArrivals, AlternatingGrid };

  Kind kind = Kind::Equidistant;
  int n = 23400;
  std::vector<double> p;
  double alpha = 0.5;
  // Hitting-time barrier W_t - W_s + sqrt(n) a (t - s) = b / sqrt(n).
  double ig_a = -2.0;
  double ig_b = -2.0;

  bool thinned() const { return kind != Kind::PoissonArrivals && !p.empty(); }
  /// Throws InvalidParameters when the scheme is inconsistent for d assets.
  void validate(int d) const;
};

std::string to_string(SamplingSchemeSpec::Kind kind);
SamplingSchemeSpec::Kind scheme_kind_from_string(const std::string& s);

}  // namespace mrc
