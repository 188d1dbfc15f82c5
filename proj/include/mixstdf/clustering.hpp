#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace mixstdf {

using Eigen::Index;

struct KMeansResult {
  Eigen::MatrixXd centers;           // t x p
  std::vector<int> assignment;       // cluster of each point
  double inertia = 0.0;              // sum of squared distances to assigned centres
  std::vector<double> inertiaTrace;  // inertia after each Lloyd iteration
  int emptyRepairs = 0;
};

/// Lloyd iterations from k-means++ seeding on the rows of `points`.
/// An empty cluster is re-seeded at the point farthest from its current centre.
KMeansResult kmeans(const Eigen::MatrixXd& points, int t, std::uint64_t seed, int maxIter = 300);

/// Pairwise extremal pseudo-distance (1 - chi) / (2 (3 - chi)) between
/// columns of the sample, with chi the empirical extremal correlation at k.
Eigen::MatrixXd chi_distance_matrix(const Eigen::MatrixXd& sample, int k);

struct PamResult {
  std::vector<int> medoids;     // sorted indices
  std::vector<int> assignment;  // index into `medoids` for every point
  double cost = 0.0;
  double buildCost = 0.0;
  std::vector<double> costTrace;  // after BUILD, then after every accepted swap
};

/// Partitioning Around Medoids (BUILD + SWAP to local optimality) on a
/// symmetric distance matrix. The seed only breaks ties between equal-cost
/// candidates.
PamResult pam(const Eigen::MatrixXd& distances, int K, std::uint64_t seed = 0);

/// PAM cost for K = 1..maxK, for choosing the number of clusters by inertia.
std::vector<double> pam_cost_profile(const Eigen::MatrixXd& distances, int maxK, std::uint64_t seed = 0);

}  // namespace mixstdf
