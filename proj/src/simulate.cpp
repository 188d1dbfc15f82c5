#include "mixstdf/simulate.hpp"

#include "mixstdf/seeding.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace mixstdf {

void SimSpec::validate() const {
  if (n < 1) throw std::invalid_argument("SimSpec: n must be >= 1");
  if (!(noiseSigma >= 0.0) || !std::isfinite(noiseSigma)) throw std::invalid_argument("SimSpec: noise sigma must be >= 0");
  mixstdf::validate(theta);
}

double sample_positive_stable(double alpha, Rng& rng) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("sample_positive_stable: alpha outside (0,1)");
  std::uniform_real_distribution<double> unif(0.0, std::numbers::pi);
  std::exponential_distribution<double> expo(1.0);
  double u = unif(rng);
  while (u <= 0.0) u = unif(rng);
  const double w = expo(rng);
  const double a = std::sin(alpha * u) / std::pow(std::sin(u), 1.0 / alpha);
  const double b = std::pow(std::sin((1.0 - alpha) * u) / w, (1.0 - alpha) / alpha);
  return a * b;
}

Eigen::VectorXd sample_logistic_factor(Index m, double alpha, Rng& rng) {
  if (m < 1) throw std::invalid_argument("sample_logistic_factor: m must be >= 1");
  const double s = sample_positive_stable(alpha, rng);
  std::exponential_distribution<double> expo(1.0);
  Eigen::VectorXd z(m);
  for (Index j = 0; j < m; ++j) z(j) = std::pow(s / expo(rng), alpha);
  return z;
}

HrFactorSampler::HrFactorSampler(const Eigen::MatrixXd& gamma) : gamma_(gamma) {
  const Index m = gamma.rows();
  if (m < 1 || gamma.cols() != m) throw std::invalid_argument("HrFactorSampler: variogram must be square");
  for (Index j = 0; j < m; ++j) {
    std::vector<Index> others;
    for (Index t = 0; t < m; ++t)
      if (t != j) others.push_back(t);
    Eigen::MatrixXd L;
    if (!others.empty()) {
      Eigen::LLT<Eigen::MatrixXd> llt(induced_covariance(gamma, j, others));
      if (llt.info() != Eigen::Success) throw std::domain_error("HrFactorSampler: induced covariance is not positive definite");
      L = llt.matrixL();
    }
    chol_.push_back(std::move(L));
    others_.push_back(std::move(others));
  }
}

// Spectral function normalised at j: Y_j = 1, Y_t = exp(V_t - G_jt / 2).
Eigen::VectorXd HrFactorSampler::spectral(Index j, Rng& rng) const {
  const Index m = dim();
  Eigen::VectorXd y = Eigen::VectorXd::Ones(m);
  const auto& others = others_[static_cast<std::size_t>(j)];
  if (others.empty()) return y;
  std::normal_distribution<double> norm;
  Eigen::VectorXd e(static_cast<Index>(others.size()));
  for (Index i = 0; i < e.size(); ++i) e(i) = norm(rng);
  const Eigen::VectorXd v = chol_[static_cast<std::size_t>(j)] * e;
  for (Index i = 0; i < e.size(); ++i) {
    const Index t = others[static_cast<std::size_t>(i)];
    y(t) = std::exp(std::min(v(i) - 0.5 * gamma_(j, t), 700.0));
  }
  return y;
}

Eigen::VectorXd HrFactorSampler::draw(Rng& rng) const {
  const Index m = dim();
  std::exponential_distribution<double> expo(1.0);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
  for (Index j = 0; j < m; ++j) {
    double e = expo(rng);
    double zeta = 1.0 / e;
    while (zeta > z(j)) {
      const Eigen::VectorXd y = spectral(j, rng);
      bool fresh = true;
      for (Index i = 0; i < j && fresh; ++i) fresh = zeta * y(i) < z(i);
      if (fresh) z = z.cwiseMax(zeta * y);
      e += expo(rng);
      zeta = 1.0 / e;
    }
  }
  return z;
}

Eigen::VectorXd sample_hr_factor(const Eigen::MatrixXd& gammaJ, Rng& rng) {
  return HrFactorSampler(gammaJ).draw(rng);
}

Eigen::MatrixXd sample_mixture(const SimSpec& spec) {
  spec.validate();
  const MixtureParams& theta = spec.theta;
  const Index n = spec.n, d = theta.dim();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, d);

  for (Index s = 0; s < theta.columns(); ++s) {
    std::vector<Index> J;
    for (Index j = 0; j < d; ++j)
      if (theta.A(j, s) > 0.0) J.push_back(j);
    if (J.empty()) continue;
    const auto m = static_cast<Index>(J.size());
    Rng rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(s)}));

    std::optional<HrFactorSampler> hr;
    if (theta.family == Family::HuslerReiss) {
      Eigen::MatrixXd G(m, m);
      for (Index u = 0; u < m; ++u)
        for (Index v = 0; v < m; ++v)
          G(u, v) = theta.gamma_for(s)(J[static_cast<std::size_t>(u)], J[static_cast<std::size_t>(v)]);
      hr.emplace(G);
    }
    for (Index i = 0; i < n; ++i) {
      const Eigen::VectorXd z = hr ? hr->draw(rng) : sample_logistic_factor(m, theta.alpha_for(s), rng);
      for (Index u = 0; u < m; ++u) {
        const Index j = J[static_cast<std::size_t>(u)];
        M(i, j) = std::max(M(i, j), theta.A(j, s) * z(u));
      }
    }
  }

  if (spec.noiseSigma > 0.0) {
    Rng rng(derive_seed(spec.seed, {0x6e6f697365ULL}));
    std::normal_distribution<double> noise(0.0, spec.noiseSigma);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < d; ++j) M(i, j) += noise(rng);
  }
  return M;
}

}  // namespace mixstdf
