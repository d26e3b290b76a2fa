#pragma once

// Reference implementations used only by the tests. Each one is written
// directly from the defining formula, without sharing code with the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

// Composite 5-point Gauss-Legendre on [a,b] split at `cuts` and then into
// `m` equal panels. Exact for polynomials of degree <= 9 on each panel.
inline double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                             std::vector<double> cuts = {}, int m = 4) {
  static constexpr std::array<double, 5> x{0.0, -0.5384693101056831, 0.5384693101056831,
                                           -0.9061798459386640, 0.9061798459386640};
  static constexpr std::array<double, 5> w{0.5688888888888889, 0.4786286704993665,
                                           0.4786286704993665, 0.2369268850561891,
                                           0.2369268850561891};
  if (!(b > a)) return 0.0;
  cuts.push_back(a);
  cuts.push_back(b);
  std::erase_if(cuts, [&](double c) { return c < a || c > b; });
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    if (!(hi > lo)) continue;
    const double h = (hi - lo) / m;
    for (int j = 0; j < m; ++j) {
      const double c = lo + (j + 0.5) * h;
      for (std::size_t q = 0; q < 5; ++q) total += w[q] * f(c + 0.5 * h * x[q]) * 0.5 * h;
    }
  }
  return total;
}

inline double tri(double x) { return (x < 0.0 || x > 1.0) ? 0.0 : std::min(x, 1.0 - x); }
inline double tri_prime(double x) {
  if (x < 0.0 || x >= 1.0) return 0.0;
  return x < 0.5 ? 1.0 : -1.0;
}

// phi_{u,v}(y) = int_y^1 u(x-y) v(x) dx for functions with kinks at `ku`
// (for u) and `kv` (for v).
inline double phi(const std::function<double(double)>& u, const std::vector<double>& ku,
                  const std::function<double(double)>& v, const std::vector<double>& kv,
                  double y) {
  std::vector<double> cuts = kv;
  for (double k : ku) cuts.push_back(y + k);
  return gauss_legendre([&](double x) { return u(x - y) * v(x); }, y, 1.0, cuts);
}

// Literal iteration of the refresh-time definitions. Each series is a
// strictly increasing list of times. Returns (T, tau) or nullopt if any
// series is empty.
struct RefreshOracle {
  std::vector<double> T;
  std::vector<std::vector<double>> tau;
};

inline RefreshOracle refresh(const std::vector<std::vector<double>>& times) {
  RefreshOracle out;
  const std::size_t d = times.size();
  out.tau.resize(d);
  double T0 = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < d; ++k) {
    T0 = std::max(T0, times[k].front());
    out.tau[k].push_back(times[k].front());
  }
  out.T.push_back(T0);
  for (;;) {
    const double prev = out.T.back();
    std::vector<double> next(d);
    bool all = true;
    for (std::size_t k = 0; k < d && all; ++k) {
      bool found = false;
      double best = std::numeric_limits<double>::infinity();
      for (double t : times[k])
        if (t > prev && t < best) {
          best = t;
          found = true;
        }
      if (!found) all = false;
      next[k] = best;
    }
    if (!all) break;
    out.T.push_back(*std::max_element(next.begin(), next.end()));
    for (std::size_t k = 0; k < d; ++k) out.tau[k].push_back(next[k]);
  }
  return out;
}

// MRC from increments (N rows, d columns) by the double sum of the
// definition, with explicit weights g(p/k).
inline std::vector<std::vector<double>> mrc(const std::vector<std::vector<double>>& inc,
                                            int k, double psi1, double psi2,
                                            const std::function<double(double)>& g) {
  const std::size_t N = inc.size();
  const std::size_t d = inc.empty() ? 0 : inc[0].size();
  std::vector<std::vector<double>> out(d, std::vector<double>(d, 0.0));
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      double signal = 0.0;
      for (long i = 0; i <= static_cast<long>(N) - k + 1; ++i) {
        double ya = 0.0, yb = 0.0;
        for (int p = 1; p <= k - 1; ++p) {
          const double w = g(static_cast<double>(p) / k);
          ya += w * inc[static_cast<std::size_t>(i + p - 1)][a];
          yb += w * inc[static_cast<std::size_t>(i + p - 1)][b];
        }
        signal += ya * yb;
      }
      double rc = 0.0;
      for (std::size_t p = 0; p < N; ++p) rc += inc[p][a] * inc[p][b];
      out[a][b] = signal / (psi2 * k) - psi1 / (2.0 * psi2 * k * k) * rc;
    }
  return out;
}

// Sample mean and standard error.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  double sd = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& x) {
  MeanSe r;
  const double n = static_cast<double>(x.size());
  for (double v : x) r.mean += v;
  r.mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - r.mean) * (v - r.mean);
  r.sd = std::sqrt(ss / (n - 1.0));
  r.se = r.sd / std::sqrt(n);
  return r;
}

}  // namespace oracle
