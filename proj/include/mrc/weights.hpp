#pragma once

// Pre-averaging weight functions and the scalar constants derived from them.
//
// A weight g on [0,1] must vanish at both ends and have a positive L2 norm.
// Two kinds are supported: the triangle g(x) = min(x, 1-x) and a tabulated
// piecewise-linear function. Both are piecewise polynomial, so every
// integral below is computed exactly (to rounding) by Gauss-Kronrod rules
// applied between breakpoints.

#include <functional>
#include <span>
#include <vector>

namespace mrc {

/// A real function on [0,1] together with the points where it (or its
/// derivative) is not smooth.
struct PiecewiseFn {
  std::function<double(double)> f;
  std::vector<double> breaks;  // interior breakpoints, sorted

  double operator()(double x) const { return f(x); }
};

class WeightProfile {
 public:
  enum class Kind { MinMax, Custom };

  /// g(x) = min(x, 1 - x).
  static WeightProfile min_max();

  /// Piecewise-linear interpolant through (knots[i], values[i]). Knots must
  /// start at 0, end at 1 and be strictly increasing; the derivative is
  /// piecewise constant.
  static WeightProfile piecewise_linear(std::vector<double> knots,
                                        std::vector<double> values);

  Kind kind() const noexcept { return kind_; }
  double g(double x) const;
  /// Piecewise derivative; at a knot the right derivative is returned.
  double gprime(double x) const;

  std::span<const double> knots() const noexcept { return knots_; }

  PiecewiseFn weight() const;
  PiecewiseFn derivative() const;

 private:
  WeightProfile(Kind kind, std::vector<double> knots, std::vector<double> values);
  void validate() const;

  Kind kind_;
  std::vector<double> knots_;   // includes 0 and 1
  std::vector<double> values_;  // empty for MinMax
};

struct WeightConstants {
  double psi1 = 0.0;  // int g'^2
  double psi2 = 0.0;  // int g^2
  double phi11 = 0.0;
  double phi12 = 0.0;
  double phi22 = 0.0;
  double psi1_disc = 0.0;
  double psi2_disc = 0.0;
  int k_n = 0;

  /// Same constants with psi1/psi2 replaced by their finite-k_n versions.
  WeightConstants with_discrete_psis() const {
    WeightConstants out = *this;
    out.psi1 = psi1_disc;
    out.psi2 = psi2_disc;
    return out;
  }
};

struct CapitalPhi {
  double phi11 = 0.0;
  double phi12 = 0.0;
  double phi22 = 0.0;
};

/// g(p / k_n) for p = 0..k_n-1. Throws InvalidWindow when k_n < 2.
std::vector<double> discrete_weights(const WeightProfile& profile, int k_n);

/// psi1, psi2 and their finite-sample versions
///   psi2_disc = (1/k) sum_{p=1}^{k-1} g(p/k)^2
///   psi1_disc = k sum_{p=1}^{k} (g(p/k) - g((p-1)/k))^2.
/// The Phi fields are left at zero; see weight_constants().
WeightConstants psi_constants(const WeightProfile& profile, int k_n);

/// phi_{u,v}(y) = int_y^1 u(x - y) v(x) dx.
double phi(const PiecewiseFn& u, const PiecewiseFn& v, double y);

/// Phi_11, Phi_12, Phi_22 by nested quadrature of phi_{g,g} and phi_{g',g'}.
CapitalPhi capital_phi(const WeightProfile& profile);

/// Phi_12 through the integration-by-parts identity int phi_{g',g}^2.
double phi12_by_parts(const WeightProfile& profile);

/// Closed-form constants of the triangle weight (rationals confirmed by the
/// quadrature route in the test suite).
CapitalPhi min_max_capital_phi();

/// All constants at window k_n. MinMax uses the closed forms, custom
/// profiles go through quadrature.
WeightConstants weight_constants(const WeightProfile& profile, int k_n);

/// Adaptive Gauss-Kronrod on each piece of [a, b] cut at `breaks`.
/// Throws NumericError when the summed error estimate exceeds
/// tol * max(1, |integral|).
double integrate_pieces(const std::function<double(double)>& f, double a,
                        double b, std::span<const double> breaks,
                        double tol = 1e-10);

}  // namespace mrc
