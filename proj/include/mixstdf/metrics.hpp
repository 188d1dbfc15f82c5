#pragma once

// Replicate-level scores: Jaccard distance between direction sets, ED-S,
// column matching and the standardized mean-squared error.

#include "mixstdf/model.hpp"

#include <Eigen/Core>

#include <set>
#include <vector>

namespace mixstdf {

using DirectionSet = std::set<Signature>;

DirectionSet direction_set(const std::vector<Signature>& sigs);

/// 1 - |est n truth| / |est u truth| on sets of signatures.
double jaccard_direction_distance(const DirectionSet& est, const DirectionSet& truth);

struct EdScore {
  double mean = 0.0;       // mean Jaccard distance (lower is better)
  double exactRate = 0.0;  // fraction of replicates with distance 0
};
EdScore ed_score(const std::vector<DirectionSet>& reps, const DirectionSet& truth);

struct ColumnMatch {
  std::vector<Index> perm;  // column s of the truth is matched with column perm[s] of the estimate
  Eigen::MatrixXd A;        // the permuted estimate
  double residual = 0.0;    // sum of squared entry differences after matching
};

/// Column permutation of Ahat minimising the squared distance to A. Exhaustive
/// for r <= 8, Hungarian algorithm above.
ColumnMatch match_columns(const Eigen::MatrixXd& Ahat, const Eigen::MatrixXd& A);

/// Minimum-cost perfect assignment on a square cost matrix (row i -> column result[i]).
std::vector<Index> hungarian(const Eigen::MatrixXd& cost);

/// Applies a column permutation to A and to per-column dependence parameters.
MixtureParams permute_columns(const MixtureParams& theta, const std::vector<Index>& perm);

/// Dependence parameters entering the score: alpha entries, or the upper
/// triangle of each variogram restricted to pairs that share a true signature.
Eigen::VectorXd identifiable_dependence(const MixtureParams& theta, const MixtureParams& truth);

struct SmseResult {
  double value = 0.0;
  int used = 0;      // replicates with the true number of columns
  int excluded = 0;  // replicates skipped because their column count differs
  double excludedFraction() const { return used + excluded > 0 ? double(excluded) / (used + excluded) : 0.0; }
};

/// Column-matched, max-normalised mean-squared error with 0/0 = 0.
SmseResult smse(const std::vector<MixtureParams>& estimates, const MixtureParams& truth);

}  // namespace mixstdf
