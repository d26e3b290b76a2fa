#include "mrc/avar.hpp"

#include "mrc/errors.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace mrc {

Tensor4& Tensor4::operator+=(const Tensor4& o) {
  if (o.d_ != d_) throw InvalidParameters("tensor dimension mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

MatrixPath::MatrixPath(const Eigen::MatrixXd& value, std::size_t length)
    : MatrixPath(static_cast<int>(value.rows()), length) {
  for (std::size_t i = 0; i < length; ++i) at(i) = value;
}

void GroundTruth::validate() const {
  const int d = dim();
  const std::size_t M = fine_grid.size();
  if (d < 1 || Upsilon.cols() != d) throw InvalidParameters("truth: Upsilon must be d x d");
  if (Sigma.size() != M || G.size() != M || chi.size() != M)
    throw InvalidParameters("truth: paths must align with fine_grid");
  if (M > 0 && (Sigma.dim() != d || chi.dim() != d))
    throw InvalidParameters("truth: path dimension mismatch");
  for (std::size_t i = 1; i < M; ++i)
    if (!(fine_grid[i] > fine_grid[i - 1]))
      throw InvalidParameters("truth: fine_grid must be increasing");
  for (double g : G)
    if (!(g > 0.0)) throw InvalidParameters("truth: G must be strictly positive");
  for (std::size_t i = 0; i < M; ++i) {
    const auto c = chi.at(i);
    for (int k = 0; k < d; ++k) {
      if (c(k, k) != 1.0) throw InvalidParameters("truth: chi diagonal must be 1");
      for (int l = 0; l < d; ++l)
        if (c(k, l) < 0.0 || c(k, l) > 1.0 || c(k, l) != c(l, k))
          throw InvalidParameters("truth: chi must be symmetric with entries in [0,1]");
    }
  }
  if ((Upsilon - Upsilon.transpose()).cwiseAbs().maxCoeff() > 1e-14)
    throw InvalidParameters("truth: Upsilon must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Upsilon, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-14)
    throw InvalidParameters("truth: Upsilon must be positive semidefinite");
  for (const auto& j : jumps) {
    if (j.size.size() != d || j.sigma_left.rows() != d || j.sigma_right.rows() != d ||
        j.chi_left.rows() != d || j.chi_right.rows() != d)
      throw InvalidParameters("truth: jump record dimension mismatch");
    if (!(j.G_left > 0.0) || !(j.G_right > 0.0))
      throw InvalidParameters("truth: G must be strictly positive at jumps");
  }
}

namespace {

// Pointwise continuous-part integrand (before the 2/psi2^2 factor).
template <class SigmaM, class NoiseM>
double continuous_integrand(const SigmaM& S, const NoiseM& U, double G, double theta,
                            const WeightConstants& wc, int k, int l, int kp, int lp) {
  const double diff = S(k, kp) * S(l, lp) + S(k, lp) * S(l, kp);
  const double noise = U(k, kp) * U(l, lp) + U(k, lp) * U(l, kp);
  const double cross = S(k, kp) * U(l, lp) + S(l, kp) * U(k, lp) + S(l, lp) * U(k, kp) +
                       S(k, lp) * U(l, kp);
  return wc.phi22 * theta * diff * G + wc.phi11 / (theta * theta * theta) * noise / G +
         wc.phi12 / theta * cross;
}

// Conditional covariance of the pre-averaged continuous+noise part that
// multiplies a jump: Phi22 theta (Sigma_- G_- + Sigma G) + Phi12/theta (U_- + U).
Eigen::MatrixXd jump_kernel(const JumpRecord& j, const Eigen::MatrixXd& Upsilon,
                            double theta, const WeightConstants& wc) {
  const Eigen::MatrixXd u_left = Upsilon.cwiseProduct(j.chi_left);
  const Eigen::MatrixXd u_right = Upsilon.cwiseProduct(j.chi_right);
  return wc.phi22 * theta * (j.sigma_left * j.G_left + j.sigma_right * j.G_right) +
         wc.phi12 / theta * (u_left + u_right);
}

double jump_term(const Eigen::VectorXd& dx, const Eigen::MatrixXd& C, int k, int l, int kp,
                 int lp) {
  // Cov of (dX^k xi^l + xi^k dX^l) and (dX^k' xi^l' + xi^k' dX^l'), Cov(xi) = C.
  return dx(k) * dx(kp) * C(l, lp) + dx(k) * dx(lp) * C(l, kp) +
         dx(l) * dx(kp) * C(k, lp) + dx(l) * dx(lp) * C(k, kp);
}

void check_theta(double theta) {
  if (!(theta > 0.0)) throw InvalidParameters("theta must be positive");
}

}  // namespace

Tensor4 avar_continuous(const GroundTruth& truth, double theta, const WeightConstants& wc) {
  check_theta(theta);
  for (double g : truth.G)
    if (!(g > 0.0)) throw InvalidParameters("truth: G must be strictly positive");
  const int d = truth.dim();
  Tensor4 out(d);
  const std::size_t M = truth.fine_grid.size();
  Eigen::MatrixXd U(d, d);
  for (std::size_t i = 0; i + 1 < M; ++i) {
    const double dt = truth.fine_grid[i + 1] - truth.fine_grid[i];
    const auto S = truth.Sigma.at(i);
    U = truth.Upsilon.cwiseProduct(truth.chi.at(i));
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l)
        for (int kp = 0; kp < d; ++kp)
          for (int lp = 0; lp < d; ++lp)
            out(k, l, kp, lp) +=
                continuous_integrand(S, U, truth.G[i], theta, wc, k, l, kp, lp) * dt;
  }
  const double scale = 2.0 / (wc.psi2 * wc.psi2);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      for (int kp = 0; kp < d; ++kp)
        for (int lp = 0; lp < d; ++lp) out(k, l, kp, lp) *= scale;
  return out;
}

Tensor4 avar_jump(const GroundTruth& truth, double theta, const WeightConstants& wc) {
  check_theta(theta);
  const int d = truth.dim();
  Tensor4 out(d);
  const double scale = 1.0 / (wc.psi2 * wc.psi2);
  for (const auto& j : truth.jumps) {
    const Eigen::MatrixXd C = jump_kernel(j, truth.Upsilon, theta, wc);
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l)
        for (int kp = 0; kp < d; ++kp)
          for (int lp = 0; lp < d; ++lp)
            out(k, l, kp, lp) += scale * jump_term(j.size, C, k, l, kp, lp);
  }
  return out;
}

AvarResult avar(const GroundTruth& truth, double theta, const WeightConstants& wc) {
  AvarResult r;
  r.continuous = avar_continuous(truth, theta, wc);
  r.jump = avar_jump(truth, theta, wc);
  r.total = r.continuous + r.jump;
  return r;
}

double avar_entry(const GroundTruth& truth, double theta, const WeightConstants& wc,
                  int k, int l) {
  check_theta(theta);
  const int d = truth.dim();
  Eigen::MatrixXd U(d, d);
  double cont = 0.0;
  for (std::size_t i = 0; i + 1 < truth.fine_grid.size(); ++i) {
    if (!(truth.G[i] > 0.0)) throw InvalidParameters("truth: G must be strictly positive");
    const double dt = truth.fine_grid[i + 1] - truth.fine_grid[i];
    U = truth.Upsilon.cwiseProduct(truth.chi.at(i));
    cont += continuous_integrand(truth.Sigma.at(i), U, truth.G[i], theta, wc, k, l, k, l) * dt;
  }
  double jmp = 0.0;
  for (const auto& j : truth.jumps)
    jmp += jump_term(j.size, jump_kernel(j, truth.Upsilon, theta, wc), k, l, k, l);
  return (2.0 * cont + jmp) / (wc.psi2 * wc.psi2);
}

SchemeConstants theoretical_G_chi(const SamplingSchemeSpec& scheme, int d) {
  scheme.validate(d);
  using Kind = SamplingSchemeSpec::Kind;
  SchemeConstants out;
  out.chi = Eigen::MatrixXd::Ones(d, d);

  // Inclusion-exclusion over non-empty subsets of assets.
  auto subset_sum = [d](auto&& term) {
    double acc = 0.0;
    for (unsigned mask = 1; mask < (1u << d); ++mask) {
      const int size = std::popcount(mask);
      acc += (size % 2 == 1 ? 1.0 : -1.0) * term(mask);
    }
    return acc;
  };

  if (scheme.kind == Kind::PoissonArrivals) {
    out.G = subset_sum([&](unsigned mask) {
      double rate = 0.0;
      for (int k = 0; k < d; ++k)
        if (mask & (1u << k)) rate += scheme.p[static_cast<std::size_t>(k)];
      return 1.0 / rate;
    });
    out.chi = Eigen::MatrixXd::Identity(d, d);
    return out;
  }

  double G0 = 1.0;
  if (scheme.kind == Kind::IgHitting) G0 = scheme.ig_b / scheme.ig_a;

  if (!scheme.thinned()) {
    out.G = G0;
    return out;
  }
  out.G = G0 * subset_sum([&](unsigned mask) {
    double miss = 1.0;
    for (int k = 0; k < d; ++k)
      if (mask & (1u << k)) miss *= 1.0 - scheme.p[static_cast<std::size_t>(k)];
    return 1.0 / (1.0 - miss);
  });
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) {
      if (k == l) continue;
      const double pk = scheme.p[static_cast<std::size_t>(k)];
      const double pl = scheme.p[static_cast<std::size_t>(l)];
      out.chi(k, l) = pk * pl / (pk + pl - pk * pl);
    }
  return out;
}

double standardize(double estimate_kl, double truth_kl, double avar_klkl, double n) {
  if (!(avar_klkl > 0.0) || !std::isfinite(avar_klkl))
    throw DegenerateVariance("non-positive asymptotic variance " + std::to_string(avar_klkl));
  return std::pow(n, 0.25) * (estimate_kl - truth_kl) / std::sqrt(avar_klkl);
}

double standardize(const MrcEstimate& estimate, const GroundTruth& truth,
                   const AvarResult& avar, double n, int k, int l) {
  return standardize(estimate.mrc(k, l), truth.true_qv(k, l), avar.total(k, l, k, l), n);
}

}  // namespace mrc
