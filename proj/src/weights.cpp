#include "mrc/weights.hpp"

#include "mrc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace mrc {

namespace {

constexpr double kEndpointTol = 1e-14;

std::vector<double> sorted_unique_inside(std::vector<double> pts, double a,
                                         double b) {
  std::erase_if(pts, [&](double p) { return !(p > a && p < b); });
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](double x, double y) { return std::abs(x - y) < 1e-15; }),
            pts.end());
  return pts;
}

// Kinks of phi_{u,v}(y) as a function of y: pairwise knot differences.
std::vector<double> phi_breaks(std::span<const double> knots) {
  std::vector<double> out;
  for (double hi : knots)
    for (double lo : knots)
      if (hi > lo) out.push_back(hi - lo);
  return sorted_unique_inside(std::move(out), 0.0, 1.0);
}

}  // namespace

double integrate_pieces(const std::function<double(double)>& f, double a,
                        double b, std::span<const double> breaks, double tol) {
  using boost::math::quadrature::gauss_kronrod;
  if (!(b > a)) return 0.0;
  std::vector<double> cuts{a};
  for (double x : breaks)
    if (x > a && x < b) cuts.push_back(x);
  cuts.push_back(b);

  double total = 0.0;
  double residual = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] <= 0.0) continue;
    double err = 0.0;
    total += gauss_kronrod<double, 15>::integrate(f, cuts[i], cuts[i + 1], 12,
                                                  1e-11, &err);
    residual += err;
  }
  if (!(residual <= tol * std::max(1.0, std::abs(total))) || !std::isfinite(total))
    throw NumericError("quadrature did not converge", residual);
  return total;
}

WeightProfile::WeightProfile(Kind kind, std::vector<double> knots,
                             std::vector<double> values)
    : kind_(kind), knots_(std::move(knots)), values_(std::move(values)) {
  validate();
}

WeightProfile WeightProfile::min_max() {
  return WeightProfile(Kind::MinMax, {0.0, 0.5, 1.0}, {});
}

WeightProfile WeightProfile::piecewise_linear(std::vector<double> knots,
                                              std::vector<double> values) {
  if (knots.size() != values.size() || knots.size() < 2)
    throw InvalidParameters("weight: knots and values must have equal length >= 2");
  if (knots.front() != 0.0 || knots.back() != 1.0)
    throw InvalidParameters("weight: knots must start at 0 and end at 1");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1]))
      throw InvalidParameters("weight: knots must be strictly increasing");
  return WeightProfile(Kind::Custom, std::move(knots), std::move(values));
}

void WeightProfile::validate() const {
  if (std::abs(g(0.0)) > kEndpointTol || std::abs(g(1.0)) > kEndpointTol)
    throw InvalidParameters("weight: g(0) and g(1) must vanish");
  const auto w = weight();
  const double norm = integrate_pieces([&](double x) { return w(x) * w(x); }, 0.0,
                                       1.0, w.breaks);
  if (!(norm > 1e-10)) throw InvalidParameters("weight: int g^2 must be positive");
}

double WeightProfile::g(double x) const {
  if (x < 0.0 || x > 1.0) return 0.0;
  if (kind_ == Kind::MinMax) return std::min(x, 1.0 - x);
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  if (it == knots_.end()) return values_.back();
  const auto j = static_cast<std::size_t>(it - knots_.begin());
  const double x0 = knots_[j - 1], x1 = knots_[j];
  return values_[j - 1] + (values_[j] - values_[j - 1]) * (x - x0) / (x1 - x0);
}

double WeightProfile::gprime(double x) const {
  if (x < 0.0 || x >= 1.0) return 0.0;
  if (kind_ == Kind::MinMax) return x < 0.5 ? 1.0 : -1.0;
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  const auto j = static_cast<std::size_t>(it - knots_.begin());
  return (values_[j] - values_[j - 1]) / (knots_[j] - knots_[j - 1]);
}

PiecewiseFn WeightProfile::weight() const {
  return {[self = *this](double x) { return self.g(x); },
          sorted_unique_inside(knots_, 0.0, 1.0)};
}

PiecewiseFn WeightProfile::derivative() const {
  return {[self = *this](double x) { return self.gprime(x); },
          sorted_unique_inside(knots_, 0.0, 1.0)};
}

std::vector<double> discrete_weights(const WeightProfile& profile, int k_n) {
  if (k_n < 2)
    throw InvalidWindow("window k_n must be >= 2, got " + std::to_string(k_n));
  std::vector<double> w(static_cast<std::size_t>(k_n));
  w[0] = 0.0;
  for (int p = 1; p < k_n; ++p)
    w[static_cast<std::size_t>(p)] =
        profile.g(static_cast<double>(p) / static_cast<double>(k_n));
  return w;
}

WeightConstants psi_constants(const WeightProfile& profile, int k_n) {
  const auto w = discrete_weights(profile, k_n);
  const double k = static_cast<double>(k_n);

  WeightConstants c;
  c.k_n = k_n;
  const auto g = profile.weight();
  const auto gp = profile.derivative();
  c.psi2 = integrate_pieces([&](double x) { return g(x) * g(x); }, 0.0, 1.0, g.breaks);
  c.psi1 = integrate_pieces([&](double x) { return gp(x) * gp(x); }, 0.0, 1.0, gp.breaks);

  double s2 = 0.0;
  for (int p = 1; p < k_n; ++p) s2 += w[p] * w[p];
  c.psi2_disc = s2 / k;

  double s1 = 0.0;
  for (int p = 1; p <= k_n; ++p) {
    const double hi = p < k_n ? w[p] : profile.g(1.0);
    const double d = hi - w[p - 1];
    s1 += d * d;
  }
  c.psi1_disc = k * s1;
  return c;
}

double phi(const PiecewiseFn& u, const PiecewiseFn& v, double y) {
  if (y < 0.0 || y > 1.0) throw InvalidParameters("phi: y must lie in [0,1]");
  std::vector<double> br(v.breaks.begin(), v.breaks.end());
  for (double b : u.breaks) br.push_back(y + b);
  br = sorted_unique_inside(std::move(br), y, 1.0);
  return integrate_pieces([&](double x) { return u(x - y) * v(x); }, y, 1.0, br);
}

CapitalPhi capital_phi(const WeightProfile& profile) {
  const auto g = profile.weight();
  const auto gp = profile.derivative();
  const auto ybreaks = phi_breaks(profile.knots());

  auto outer = [&](auto&& integrand) {
    return integrate_pieces(integrand, 0.0, 1.0, ybreaks, 1e-9);
  };
  CapitalPhi out;
  out.phi22 = outer([&](double y) {
    const double a = phi(g, g, y);
    return a * a;
  });
  out.phi12 = outer([&](double y) { return phi(g, g, y) * phi(gp, gp, y); });
  out.phi11 = outer([&](double y) {
    const double b = phi(gp, gp, y);
    return b * b;
  });
  return out;
}

double phi12_by_parts(const WeightProfile& profile) {
  const auto g = profile.weight();
  const auto gp = profile.derivative();
  return integrate_pieces(
      [&](double y) {
        const double a = phi(gp, g, y);
        return a * a;
      },
      0.0, 1.0, phi_breaks(profile.knots()), 1e-9);
}

CapitalPhi min_max_capital_phi() {
  return {1.0 / 6.0, 1.0 / 96.0, 151.0 / 80640.0};
}

WeightConstants weight_constants(const WeightProfile& profile, int k_n) {
  WeightConstants c = psi_constants(profile, k_n);
  CapitalPhi phis;
  if (profile.kind() == WeightProfile::Kind::MinMax) {
    c.psi1 = 1.0;
    c.psi2 = 1.0 / 12.0;
    phis = min_max_capital_phi();
  } else {
    phis = capital_phi(profile);
  }
  c.phi11 = phis.phi11;
  c.phi12 = phis.phi12;
  c.phi22 = phis.phi22;
  return c;
}

}  // namespace mrc
