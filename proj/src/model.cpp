#include "mixstdf/model.hpp"

#include <Eigen/Cholesky>

#include <sstream>

namespace mixstdf {

std::string to_string(Family f) { return f == Family::Logistic ? "logistic" : "husler_reiss"; }

Family family_from_string(const std::string& s) {
  if (s == "logistic") return Family::Logistic;
  if (s == "husler_reiss" || s == "hr" || s == "HuslerReiss") return Family::HuslerReiss;
  throw std::invalid_argument("unknown family '" + s + "' (expected logistic or husler_reiss)");
}

double clamp_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("logistic alpha must lie in (0,1)");
  return std::clamp(alpha, kAlphaFloor, kAlphaCeil);
}

MixtureParams MixtureParams::logistic(Eigen::MatrixXd A, double alpha) {
  MixtureParams theta;
  theta.family = Family::Logistic;
  theta.A = std::move(A);
  theta.alpha = Eigen::VectorXd::Constant(1, clamp_alpha(alpha));
  return theta;
}

MixtureParams MixtureParams::husler_reiss(Eigen::MatrixXd A, Eigen::MatrixXd gamma) {
  MixtureParams theta;
  theta.family = Family::HuslerReiss;
  theta.A = std::move(A);
  theta.gamma.push_back(std::move(gamma));
  return theta;
}

Eigen::MatrixXd induced_covariance(const Eigen::MatrixXd& gamma, Index j, const std::vector<Index>& others) {
  const auto m = static_cast<Index>(others.size());
  Eigen::MatrixXd S(m, m);
  for (Index a = 0; a < m; ++a) {
    const Index t = others[static_cast<std::size_t>(a)];
    for (Index b = 0; b < m; ++b) {
      const Index u = others[static_cast<std::size_t>(b)];
      S(a, b) = 0.5 * (gamma(j, t) + gamma(j, u) - gamma(t, u));
    }
  }
  return S;
}

VariogramCheck validate_variogram(const Eigen::MatrixXd& gamma, double tol) {
  if (gamma.rows() != gamma.cols()) return {false, "not square"};
  if (!gamma.allFinite()) return {false, "non-finite entries"};
  const Index d = gamma.rows();
  for (Index i = 0; i < d; ++i) {
    if (std::abs(gamma(i, i)) > tol) return {false, "non-zero diagonal"};
    for (Index j = i + 1; j < d; ++j) {
      if (std::abs(gamma(i, j) - gamma(j, i)) > tol) return {false, "not symmetric"};
      if (gamma(i, j) < 0.0) return {false, "negative entry"};
    }
  }
  if (d == 1) return {true, {}};
  std::vector<Index> others;
  for (Index t = 1; t < d; ++t) others.push_back(t);
  const Eigen::MatrixXd S = induced_covariance(gamma, 0, others);
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) return {false, "induced covariance is not positive definite"};
  const double scale = std::max(1.0, S.diagonal().maxCoeff());
  if (llt.matrixL().toDenseMatrix().diagonal().minCoeff() <= std::sqrt(1e-13 * scale))
    return {false, "induced covariance is not positive definite"};
  return {true, {}};
}

void validate(const MixtureParams& theta, bool requireStandardized) {
  const Index d = theta.dim(), r = theta.columns();
  if (d < 1 || r < 1) throw std::invalid_argument("coefficient matrix must be non-empty");
  if (!theta.A.allFinite() || theta.A.minCoeff() < 0.0 || theta.A.maxCoeff() > 1.0)
    throw std::invalid_argument("coefficient matrix entries must lie in [0,1]");
  if (requireStandardized) {
    for (Index j = 0; j < d; ++j)
      if (std::abs(theta.A.row(j).sum() - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "row " << j + 1 << " of A does not sum to 1";
        throw std::invalid_argument(os.str());
      }
    for (Index s = 0; s < r; ++s)
      if (!(theta.A.col(s).sum() > 0.0)) throw std::invalid_argument("A has an all-zero column");
  }
  if (theta.family == Family::Logistic) {
    if (!theta.gamma.empty()) throw std::invalid_argument("logistic model carries variogram parameters");
    if (theta.alpha.size() != 1 && theta.alpha.size() != r)
      throw std::invalid_argument("alpha must have size 1 or r");
    for (Index s = 0; s < theta.alpha.size(); ++s)
      if (!(theta.alpha(s) > 0.0 && theta.alpha(s) < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
  } else {
    if (theta.alpha.size() != 0) throw std::invalid_argument("Husler-Reiss model carries alpha");
    if (theta.gamma.size() != 1 && theta.gamma.size() != static_cast<std::size_t>(r))
      throw std::invalid_argument("gamma must hold 1 or r variogram matrices");
    for (const auto& g : theta.gamma) {
      if (g.rows() != d || g.cols() != d) throw std::invalid_argument("variogram must be d x d");
      // Only the blocks on each signature enter the stdf, so validity is
      // required there rather than on the full matrix.
      if (!g.allFinite()) throw std::invalid_argument("variogram has non-finite entries");
    }
    const auto sigs = signatures(theta.A);
    for (Index s = 0; s < r; ++s) {
      const auto& J = sigs[static_cast<std::size_t>(s)];
      if (J.size() < 2) continue;
      Eigen::MatrixXd sub(static_cast<Index>(J.size()), static_cast<Index>(J.size()));
      for (std::size_t a = 0; a < J.size(); ++a)
        for (std::size_t b = 0; b < J.size(); ++b) sub(static_cast<Index>(a), static_cast<Index>(b)) = theta.gamma_for(s)(J[a], J[b]);
      const auto check = validate_variogram(sub);
      if (!check) throw std::invalid_argument("variogram restricted to signature of column " + std::to_string(s + 1) +
                                              " invalid: " + check.reason);
    }
  }
}

MixtureParams lex_ordered(const MixtureParams& theta) {
  const auto perm = lex_order_permutation(theta.A);
  MixtureParams out = theta;
  for (Index s = 0; s < theta.columns(); ++s) {
    const Index src = perm[static_cast<std::size_t>(s)];
    out.A.col(s) = theta.A.col(src);
    if (theta.family == Family::Logistic && theta.alpha.size() > 1) out.alpha(s) = theta.alpha(src);
    if (theta.family == Family::HuslerReiss && theta.gamma.size() > 1)
      out.gamma[static_cast<std::size_t>(s)] = theta.gamma[static_cast<std::size_t>(src)];
  }
  return out;
}

double stdf_hr_factor(const Eigen::VectorXd& xJ, const Eigen::VectorXd& aJ, const Eigen::MatrixXd& gammaJ,
                      const MvnOptions& mvn) {
  const Index m = xJ.size();
  if (m < 1 || aJ.size() != m || gammaJ.rows() != m || gammaJ.cols() != m)
    throw std::invalid_argument("stdf_hr_factor: size mismatch");
  const Eigen::VectorXd u = aJ.cwiseProduct(xJ);
  if ((u.array() < 0.0).any() || !u.allFinite()) throw std::domain_error("stdf_hr_factor: inputs must be finite and >= 0");
  if (m == 1) return u(0);

  double total = 0.0;
  std::vector<Index> others;
  for (Index j = 0; j < m; ++j) {
    if (u(j) <= 0.0) continue;
    others.clear();
    for (Index t = 0; t < m; ++t)
      if (t != j && u(t) > 0.0) others.push_back(t);
    if (others.empty()) {
      total += u(j);
      continue;
    }
    const auto k = static_cast<Index>(others.size());
    Eigen::VectorXd eta(k);
    for (Index a = 0; a < k; ++a) {
      const Index t = others[static_cast<std::size_t>(a)];
      eta(a) = std::log(u(j) / u(t)) + 0.5 * gammaJ(j, t);
    }
    const Eigen::MatrixXd S = induced_covariance(gammaJ, j, others);
    total += u(j) * mvn_cdf(eta, S, mvn).value;
  }
  return total;
}

namespace {

double factor_on_support(const Eigen::VectorXd& x, const MixtureParams& theta, Index s, const MvnOptions& mvn) {
  std::vector<Index> J;
  for (Index j = 0; j < theta.dim(); ++j)
    if (theta.A(j, s) > 0.0) J.push_back(j);
  if (J.empty()) return 0.0;
  const auto m = static_cast<Index>(J.size());
  Eigen::VectorXd xs(m), as(m);
  for (Index a = 0; a < m; ++a) {
    xs(a) = x(J[static_cast<std::size_t>(a)]);
    as(a) = theta.A(J[static_cast<std::size_t>(a)], s);
  }
  if (theta.family == Family::Logistic) return stdf_logistic_factor(xs, as, theta.alpha_for(s));
  const Eigen::MatrixXd& G = theta.gamma_for(s);
  Eigen::MatrixXd gs(m, m);
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b) gs(a, b) = G(J[static_cast<std::size_t>(a)], J[static_cast<std::size_t>(b)]);
  return stdf_hr_factor(xs, as, gs, mvn);
}

}  // namespace

double stdf_mixture(const Eigen::VectorXd& x, const MixtureParams& theta, const MvnOptions& mvn) {
  if (x.size() != theta.dim()) throw std::invalid_argument("stdf_mixture: point has wrong dimension");
  if (!x.allFinite() || (x.array() < 0.0).any()) throw std::domain_error("stdf_mixture: point must be finite and >= 0");
  double total = 0.0;
  for (Index s = 0; s < theta.columns(); ++s) total += factor_on_support(x, theta, s, mvn);
  return total;
}

double stdf_pair(const MixtureParams& theta, Index s, Index t, double xs, double xt, const MvnOptions& mvn) {
  if (s == t) throw std::invalid_argument("stdf_pair: indices must differ");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(theta.dim());
  x(s) = xs;
  x(t) = xt;
  return stdf_mixture(x, theta, mvn);
}

double extremal_coefficient(const Signature& J, const MixtureParams& theta, const MvnOptions& mvn) {
  if (J.empty()) throw std::invalid_argument("extremal_coefficient: empty index set");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(theta.dim());
  for (int j : J) x(j) = 1.0;
  return stdf_mixture(x, theta, mvn);
}

}  // namespace mixstdf
