#include "mixstdf/directions.hpp"

#include <algorithm>
#include <cmath>

namespace mixstdf {

DirectionReport identify_directions(const Eigen::MatrixXd& sample, const FitConfig& config, int tMax,
                                    const LambdaRule& lambdaRule) {
  const Index d = sample.cols();
  if (tMax <= 0) tMax = d >= 30 ? std::numeric_limits<int>::max() : static_cast<int>((Index{1} << d) - 1);
  DirectionReport rep;
  for (int t = 1; t <= tMax; ++t) {
    FitConfig cfg = config;
    if (lambdaRule) cfg.penalty.lambda = lambdaRule(t);
    rep.lambdas.push_back(cfg.penalty.lambda);
    try {
      rep.fits.push_back(fit_known_r(sample, t, cfg));
    } catch (const std::exception& e) {
      throw DirectionError("fit with " + std::to_string(t) + " columns failed: " + e.what(), rep);
    }
    const auto& sigs = rep.fits.back().signatures;
    rep.tFinal = t;
    const bool empty = std::any_of(sigs.begin(), sigs.end(), [](const Signature& s) { return s.empty(); });
    if (empty || t == tMax) {
      rep.capReached = !empty;
      break;
    }
  }
  const FitReport& last = rep.fits.back();
  rep.directions = direction_set(last.signatures);
  std::size_t nonEmpty = 0;
  for (const auto& s : last.signatures) nonEmpty += s.empty() ? 0 : 1;
  rep.collapsedDuplicates = rep.directions.size() < nonEmpty;
  if (last.theta.family == Family::Logistic) {
    rep.weights = logistic_weights(last.theta);
    rep.weightsAvailable = true;
  }
  return rep;
}

namespace {

std::map<Signature, double> pooled_weights(const Eigen::MatrixXd& A, const std::function<double(Index)>& alphaOf) {
  std::map<Signature, double> out;
  const auto sigs = signatures(A);
  double total = 0.0;
  for (Index s = 0; s < A.cols(); ++s) {
    const auto& J = sigs[static_cast<std::size_t>(s)];
    if (J.empty()) continue;
    const double alpha = alphaOf(s);
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("logistic_weights: alpha outside (0,1)");
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(A.rows());
    const double w = stdf_logistic_factor(ones, A.col(s), alpha);
    out[J] += w;
    total += w;
  }
  if (out.empty()) throw std::invalid_argument("logistic_weights: every column is empty");
  for (auto& [J, w] : out) w /= total;
  return out;
}

}  // namespace

std::map<Signature, double> logistic_weights(const Eigen::MatrixXd& A, double alpha) {
  return pooled_weights(A, [alpha](Index) { return alpha; });
}

std::map<Signature, double> logistic_weights(const MixtureParams& theta) {
  if (theta.family != Family::Logistic) throw std::invalid_argument("logistic_weights: logistic family only");
  return pooled_weights(theta.A, [&](Index s) { return theta.alpha_for(s); });
}

double fitted_pair_stdf(const MixtureParams& theta, Index s, Index t, const MvnOptions& mvn) {
  if (s == t) throw std::invalid_argument("fitted_chi: s and t must differ");
  return stdf_pair(theta, s, t, 1.0, 1.0, mvn);
}

double fitted_chi(const MixtureParams& theta, Index s, Index t, const MvnOptions& mvn) {
  return std::clamp(2.0 - fitted_pair_stdf(theta, s, t, mvn), 0.0, 1.0);
}

}  // namespace mixstdf
