#pragma once

// Exact simulation of max-stable mixture models and their factors, with
// optional additive Gaussian noise.

#include "mixstdf/model.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <random>

namespace mixstdf {

using Rng = std::mt19937_64;

struct SimSpec {
  MixtureParams theta;
  Index n = 0;
  double noiseSigma = 0.0;  // standard deviation of the additive noise; 0 gives exact max-stable data
  std::uint64_t seed = 1;

  void validate() const;
};

/// Positive stable draw with Laplace transform exp(-t^alpha) (Kanter's representation).
double sample_positive_stable(double alpha, Rng& rng);

/// Z_j = (S / E_j)^alpha: logistic max-stable vector with unit Frechet margins.
Eigen::VectorXd sample_logistic_factor(Index m, double alpha, Rng& rng);

/// Husler-Reiss max-stable vector with unit Frechet margins, drawn with the
/// extremal-functions algorithm. Holds one Cholesky factor per conditioning index.
class HrFactorSampler {
 public:
  explicit HrFactorSampler(const Eigen::MatrixXd& gamma);
  Index dim() const { return gamma_.rows(); }
  Eigen::VectorXd draw(Rng& rng) const;

 private:
  Eigen::VectorXd spectral(Index j, Rng& rng) const;

  Eigen::MatrixXd gamma_;
  std::vector<Eigen::MatrixXd> chol_;
  std::vector<std::vector<Index>> others_;
};

Eigen::VectorXd sample_hr_factor(const Eigen::MatrixXd& gammaJ, Rng& rng);

/// n x d sample M_j = max_s a_js Z_js (+ noise). Column s draws from its own
/// stream derived from (seed, s); the noise has a separate stream.
Eigen::MatrixXd sample_mixture(const SimSpec& spec);

}  // namespace mixstdf
