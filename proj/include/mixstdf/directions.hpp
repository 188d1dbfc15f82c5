#pragma once

// Extreme-direction discovery for an unknown number of columns, direction
// weights and fitted extremal correlations.

#include "mixstdf/estimate.hpp"
#include "mixstdf/metrics.hpp"

#include <functional>
#include <map>
#include <stdexcept>

namespace mixstdf {

struct DirectionReport {
  DirectionSet directions;             // never contains the empty signature
  std::map<Signature, double> weights; // logistic family only
  bool weightsAvailable = false;
  int tFinal = 0;
  bool capReached = false;             // tMax hit without an empty column
  bool collapsedDuplicates = false;    // some columns of the final fit shared a signature
  std::vector<FitReport> fits;         // one per t
  std::vector<double> lambdas;         // penalty weight used for each t
};

class DirectionError : public std::runtime_error {
 public:
  DirectionError(const std::string& what, DirectionReport partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const DirectionReport& partial() const { return partial_; }

 private:
  DirectionReport partial_;
};

/// Penalty weight to use for the fit with t columns.
using LambdaRule = std::function<double(int t)>;

/// Fits t = 1, 2, ... columns until a fitted column is empty and returns the
/// remaining signatures as a set. tMax <= 0 means 2^d - 1. Without a rule the
/// config's lambda is used for every t.
DirectionReport identify_directions(const Eigen::MatrixXd& sample, const FitConfig& config, int tMax = 0,
                                    const LambdaRule& lambdaRule = {});

/// Normalised weight of every non-empty column, (sum_j a_js^{1/alpha})^alpha
/// divided by the total; columns with equal signatures are pooled.
std::map<Signature, double> logistic_weights(const Eigen::MatrixXd& A, double alpha);
std::map<Signature, double> logistic_weights(const MixtureParams& theta);

/// ell_st(1, 1) of the fitted model.
double fitted_pair_stdf(const MixtureParams& theta, Index s, Index t, const MvnOptions& mvn = {});

/// 2 - ell_st(1, 1), clipped to [0, 1].
double fitted_chi(const MixtureParams& theta, Index s, Index t, const MvnOptions& mvn = {});

}  // namespace mixstdf
