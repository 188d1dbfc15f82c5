#pragma once

// Parametric max-stable mixture models and their stable tail dependence
// functions (stdf). A model is a d x r coefficient matrix A together with a
// factor family (logistic or Husler-Reiss) and its dependence parameters.

#include "mixstdf/mvn.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixstdf {

using Eigen::Index;

enum class Family { Logistic, HuslerReiss };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

/// Support of one column of A, as sorted 0-based row indices. Empty only as
/// the stop sentinel of direction discovery.
using Signature = std::vector<int>;

/// Smallest and largest admissible logistic dependence parameter.
inline constexpr double kAlphaFloor = 1e-3;
inline constexpr double kAlphaCeil = 1.0 - 1e-3;

/// Rejects alpha outside (0,1) and clamps the rest into [1e-3, 1 - 1e-3].
double clamp_alpha(double alpha);

struct MixtureParams {
  Family family = Family::Logistic;
  Eigen::MatrixXd A;                    // d x r, entries in [0,1]
  Eigen::VectorXd alpha;                // logistic: size 1 (shared) or r
  std::vector<Eigen::MatrixXd> gamma;   // Husler-Reiss: 1 (shared) or r variograms, each d x d

  Index dim() const { return A.rows(); }
  Index columns() const { return A.cols(); }
  bool shared() const { return family == Family::Logistic ? alpha.size() == 1 : gamma.size() == 1; }
  double alpha_for(Index s) const { return alpha.size() == 1 ? alpha(0) : alpha(s); }
  const Eigen::MatrixXd& gamma_for(Index s) const {
    return gamma.size() == 1 ? gamma.front() : gamma[static_cast<std::size_t>(s)];
  }

  static MixtureParams logistic(Eigen::MatrixXd A, double alpha);
  static MixtureParams husler_reiss(Eigen::MatrixXd A, Eigen::MatrixXd gamma);
};

struct VariogramCheck {
  bool valid = false;
  std::string reason;
  explicit operator bool() const { return valid; }
};

/// Symmetric, zero diagonal and conditionally negative definite, the last
/// checked through positive definiteness of the covariance induced at index 0.
VariogramCheck validate_variogram(const Eigen::MatrixXd& gamma, double tol = 1e-10);

/// Covariance of (W_t - W_j)_{t in others} for a Gaussian vector with
/// variogram `gamma`: 0.5 * (G_jt + G_jt' - G_tt').
Eigen::MatrixXd induced_covariance(const Eigen::MatrixXd& gamma, Index j, const std::vector<Index>& others);

/// Throws std::invalid_argument describing the first violated invariant.
/// With `requireStandardized`, rows must sum to one and columns be non-empty.
void validate(const MixtureParams& theta, bool requireStandardized = false);

/// J_s = { j : a_js > zeroTol } for every column, in column order.
template <typename Derived>
std::vector<Signature> signatures(const Eigen::MatrixBase<Derived>& A, double zeroTol = 0.0) {
  std::vector<Signature> out(static_cast<std::size_t>(A.cols()));
  for (Index s = 0; s < A.cols(); ++s)
    for (Index j = 0; j < A.rows(); ++j)
      if (A(j, s) > zeroTol) out[static_cast<std::size_t>(s)].push_back(static_cast<int>(j));
  return out;
}

/// Column permutation putting columns in decreasing lexicographic order
/// (first differing entry decides). Stable for identical columns.
template <typename Derived>
std::vector<Index> lex_order_permutation(const Eigen::MatrixBase<Derived>& A) {
  std::vector<Index> perm(static_cast<std::size_t>(A.cols()));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::stable_sort(perm.begin(), perm.end(), [&](Index l, Index r) {
    for (Index j = 0; j < A.rows(); ++j) {
      if (A(j, l) != A(j, r)) return A(j, l) > A(j, r);
    }
    return false;
  });
  return perm;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> lex_order_columns(
    const Eigen::MatrixBase<Derived>& A) {
  const auto perm = lex_order_permutation(A);
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(A.rows(), A.cols());
  for (Index s = 0; s < A.cols(); ++s) out.col(s) = A.col(perm[static_cast<std::size_t>(s)]);
  return out;
}

/// Reorders the columns of A (and per-column dependence parameters) lexicographically.
MixtureParams lex_ordered(const MixtureParams& theta);

/// Logistic factor (sum_j (a_j x_j)^{1/alpha})^alpha, evaluated in log space
/// so that small alpha does not overflow or underflow.
template <typename DerivedX, typename DerivedA>
typename DerivedX::Scalar stdf_logistic_factor(const Eigen::MatrixBase<DerivedX>& xJ,
                                               const Eigen::MatrixBase<DerivedA>& aJ,
                                               typename DerivedX::Scalar alpha) {
  using Scalar = typename DerivedX::Scalar;
  if (!(alpha > Scalar(0) && alpha < Scalar(1))) throw std::domain_error("stdf_logistic_factor: alpha outside (0,1)");
  if (xJ.size() != aJ.size() || xJ.size() == 0) throw std::invalid_argument("stdf_logistic_factor: size mismatch");
  using std::exp;
  using std::log;
  Scalar top = -std::numeric_limits<Scalar>::infinity();
  for (Index j = 0; j < xJ.size(); ++j) {
    const Scalar u = aJ(j) * xJ(j);
    if (u > Scalar(0)) top = std::max(top, Scalar(log(u)));
  }
  if (top == -std::numeric_limits<Scalar>::infinity()) return Scalar(0);
  Scalar acc(0);
  for (Index j = 0; j < xJ.size(); ++j) {
    const Scalar u = aJ(j) * xJ(j);
    if (u > Scalar(0)) acc += exp((log(u) - top) / alpha);
  }
  return exp(top + alpha * log(acc));
}

/// Husler-Reiss factor sum_j u_j Phi_{m-1}(eta^j; Sigma^j) with u = a * x and
/// eta^j_t = ln(u_j / u_t) + G_jt / 2. Zero u_j contribute nothing; a zero u_t
/// sends eta^j_t to +inf, which removes that coordinate from Phi.
double stdf_hr_factor(const Eigen::VectorXd& xJ, const Eigen::VectorXd& aJ, const Eigen::MatrixXd& gammaJ,
                      const MvnOptions& mvn = {});

/// ell(x; theta) = sum_s ell^{(s)}_{J_s}((a_js x_j)_{j in J_s}).
double stdf_mixture(const Eigen::VectorXd& x, const MixtureParams& theta, const MvnOptions& mvn = {});

/// Bivariate margin ell_{st}(xs, xt) of the mixture stdf.
double stdf_pair(const MixtureParams& theta, Index s, Index t, double xs = 1.0, double xt = 1.0,
                 const MvnOptions& mvn = {});

/// zeta_J = ell(sum_{j in J} e_j). Lies in [1, |J|] for standardized A.
double extremal_coefficient(const Signature& J, const MixtureParams& theta, const MvnOptions& mvn = {});

}  // namespace mixstdf
