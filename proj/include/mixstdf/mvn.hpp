#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace mixstdf {

/// Standard normal cdf, via std::erfc (full double precision).
double normal_cdf(double x);

/// Standard normal quantile (Wichura AS241, relative error ~1e-16).
double normal_quantile(double p);

/// P(X <= h, Y <= k) for a standard bivariate normal with correlation rho.
/// Drezner-Wesolowsky / Genz Gauss-Legendre scheme, ~1e-15 absolute.
double bivariate_normal_cdf(double h, double k, double rho);

struct MvnOptions {
  double accuracy = 1e-5;            // absolute target for the error estimate
  std::uint64_t seed = 0x6d766e5eedULL;
  int randomizations = 8;            // independent random shifts of the lattice
  int initialPoints = 4096;          // lattice points per shift, doubled on demand
  int maxPoints = 1 << 17;
};

struct MvnResult {
  double value = 0.0;
  double error = 0.0;      // 3 x standard error over the random shifts
  bool converged = true;   // false if maxPoints was hit before reaching accuracy
};

/// Pivoted Cholesky factor with Genz-Bretz variable prioritisation: at each
/// step the variable with the smallest expected conditional probability is
/// integrated first. `order[i]` is the original index of the i-th variable,
/// so L * L^T == P * Sigma * P^T and `upper` is permuted accordingly.
struct ReorderedCholesky {
  Eigen::MatrixXd L;
  std::vector<Eigen::Index> order;
  Eigen::VectorXd upper;
};

/// Throws std::domain_error if Sigma is not symmetric positive definite.
ReorderedCholesky cholesky_reordered(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& upper);

/// Phi_m(upper; Sigma) for a centred normal vector.
///
/// +inf limits are marginalised out exactly, any -inf limit gives 0. After
/// reduction, m = 1 and m = 2 are evaluated in closed form (error 0); m >= 3
/// uses Genz's separation-of-variables transform integrated with a randomly
/// shifted Richtmyer lattice (baker-transformed), deterministic for a fixed seed.
MvnResult mvn_cdf(const Eigen::VectorXd& upper, const Eigen::MatrixXd& sigma, const MvnOptions& opts = {});

}  // namespace mixstdf
