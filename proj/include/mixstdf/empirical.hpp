#pragma once

// Rank-based tail summaries: ranks, the empirical stdf and pairwise
// extremal correlation diagnostics.

#include <Eigen/Core>

namespace mixstdf {

using Eigen::Index;

/// Column-wise ascending ranks in 1..n. Ties are broken by original row
/// index (the earlier row gets the smaller rank).
Eigen::MatrixXi ranks(const Eigen::MatrixXd& sample);

/// k = round(fraction * n), clipped to [1, n].
int tail_count(Index n, double fraction);

/// (1/k) * #{ i : exists j with R_ij > n + 1/2 - k x_j }.
/// Raw estimator, not clamped to the theoretical stdf bounds.
double empirical_stdf(const Eigen::MatrixXi& ranks, int k, const Eigen::VectorXd& x);

/// empirical_stdf at every row of `grid` (q x d).
Eigen::VectorXd empirical_stdf_grid(const Eigen::MatrixXi& ranks, int k, const Eigen::MatrixXd& grid);

/// 2 - ell_hat_{st}(1, 1), clamped to [0, 1].
double empirical_chi(const Eigen::MatrixXi& ranks, int k, Index s, Index t);

/// (1 - chi) / (2 (3 - chi)): 0 for perfect dependence, 1/6 for tail independence.
inline double chi_pseudo_distance(double chi) { return (1.0 - chi) / (2.0 * (3.0 - chi)); }

}  // namespace mixstdf
