#include "mixstdf/clustering.hpp"

#include "mixstdf/empirical.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace mixstdf {

namespace {

int nearest_center(const Eigen::MatrixXd& centers, const Eigen::RowVectorXd& p, double* dist2) {
  int best = 0;
  double bestD = std::numeric_limits<double>::infinity();
  for (Index c = 0; c < centers.rows(); ++c) {
    const double d = (centers.row(c) - p).squaredNorm();
    if (d < bestD) {
      bestD = d;
      best = static_cast<int>(c);
    }
  }
  if (dist2) *dist2 = bestD;
  return best;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int t, std::uint64_t seed, int maxIter) {
  const Index n = points.rows(), p = points.cols();
  if (t < 1) throw std::invalid_argument("kmeans: t must be >= 1");
  if (t > n) throw std::invalid_argument("kmeans: more clusters than points");

  std::mt19937_64 rng(seed);
  KMeansResult res;
  res.centers.resize(t, p);

  // k-means++ seeding
  std::uniform_int_distribution<Index> pick(0, n - 1);
  res.centers.row(0) = points.row(pick(rng));
  Eigen::VectorXd d2(n);
  for (Index i = 0; i < n; ++i) d2(i) = (points.row(i) - res.centers.row(0)).squaredNorm();
  for (int c = 1; c < t; ++c) {
    const double total = d2.sum();
    Index chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      for (chosen = 0; chosen < n - 1; ++chosen) {
        target -= d2(chosen);
        if (target <= 0.0 && d2(chosen) > 0.0) break;
      }
    } else {
      chosen = pick(rng);
    }
    res.centers.row(c) = points.row(chosen);
    for (Index i = 0; i < n; ++i) d2(i) = std::min(d2(i), (points.row(i) - res.centers.row(c)).squaredNorm());
  }

  res.assignment.assign(static_cast<std::size_t>(n), -1);
  std::vector<Index> counts(static_cast<std::size_t>(t));
  for (int iter = 0; iter < maxIter; ++iter) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      const int c = nearest_center(res.centers, points.row(i), nullptr);
      if (c != res.assignment[static_cast<std::size_t>(i)]) {
        res.assignment[static_cast<std::size_t>(i)] = c;
        changed = true;
      }
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(t, p);
    std::fill(counts.begin(), counts.end(), 0);
    for (Index i = 0; i < n; ++i) {
      const int c = res.assignment[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < t; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        res.centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      Index far = 0;
      double farD = -1.0;
      for (Index i = 0; i < n; ++i) {
        const double d = (points.row(i) - res.centers.row(res.assignment[static_cast<std::size_t>(i)])).squaredNorm();
        if (d > farD) {
          farD = d;
          far = i;
        }
      }
      res.centers.row(c) = points.row(far);
      ++res.emptyRepairs;
    }
    double inertia = 0.0;
    for (Index i = 0; i < n; ++i) {
      double dd;
      nearest_center(res.centers, points.row(i), &dd);
      inertia += dd;
    }
    res.inertiaTrace.push_back(inertia);
    if (!changed && iter > 0) break;
  }
  // Final assignment consistent with the final centres.
  res.inertia = 0.0;
  for (Index i = 0; i < n; ++i) {
    double dd;
    res.assignment[static_cast<std::size_t>(i)] = nearest_center(res.centers, points.row(i), &dd);
    res.inertia += dd;
  }
  return res;
}

Eigen::MatrixXd chi_distance_matrix(const Eigen::MatrixXd& sample, int k) {
  const Index d = sample.cols();
  if (d < 2) throw std::invalid_argument("chi_distance_matrix: need at least two variables");
  const Eigen::MatrixXi R = ranks(sample);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(d, d);
  for (Index s = 0; s < d; ++s)
    for (Index t = s + 1; t < d; ++t) D(s, t) = D(t, s) = chi_pseudo_distance(empirical_chi(R, k, s, t));
  return D;
}

namespace {

double medoid_cost(const Eigen::MatrixXd& D, const std::vector<int>& medoids) {
  double cost = 0.0;
  for (Index j = 0; j < D.rows(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (int m : medoids) best = std::min(best, D(j, m));
    cost += best;
  }
  return cost;
}

}  // namespace

PamResult pam(const Eigen::MatrixXd& D, int K, std::uint64_t seed) {
  const Index n = D.rows();
  if (D.cols() != n) throw std::invalid_argument("pam: distance matrix must be square");
  if (K < 1 || K > n) throw std::invalid_argument("pam: K must satisfy 1 <= K <= number of points");
  if (!D.allFinite() || (D.array() < 0.0).any()) throw std::invalid_argument("pam: distances must be finite and >= 0");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  PamResult res;
  std::vector<bool> isMedoid(static_cast<std::size_t>(n), false);
  Eigen::VectorXd nearest = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());

  // BUILD
  {
    int best = -1;
    double bestCost = std::numeric_limits<double>::infinity();
    for (int i : order) {
      const double c = D.col(i).sum();
      if (c < bestCost) {
        bestCost = c;
        best = i;
      }
    }
    res.medoids.push_back(best);
    isMedoid[static_cast<std::size_t>(best)] = true;
    nearest = D.col(best);
  }
  while (static_cast<int>(res.medoids.size()) < K) {
    int best = -1;
    double bestGain = -1.0;
    for (int i : order) {
      if (isMedoid[static_cast<std::size_t>(i)]) continue;
      double gain = 0.0;
      for (Index j = 0; j < n; ++j) gain += std::max(0.0, nearest(j) - D(j, i));
      if (gain > bestGain) {
        bestGain = gain;
        best = i;
      }
    }
    res.medoids.push_back(best);
    isMedoid[static_cast<std::size_t>(best)] = true;
    nearest = nearest.cwiseMin(D.col(best));
  }
  res.buildCost = res.cost = medoid_cost(D, res.medoids);
  res.costTrace.push_back(res.cost);

  // SWAP: best improving (medoid, non-medoid) exchange until none improves.
  for (;;) {
    double bestCost = res.cost;
    int bestOut = -1, bestIn = -1;
    for (std::size_t mi = 0; mi < res.medoids.size(); ++mi) {
      for (int h : order) {
        if (isMedoid[static_cast<std::size_t>(h)]) continue;
        std::vector<int> trial = res.medoids;
        trial[mi] = h;
        const double c = medoid_cost(D, trial);
        if (c < bestCost - 1e-15 * std::max(1.0, bestCost)) {
          bestCost = c;
          bestOut = static_cast<int>(mi);
          bestIn = h;
        }
      }
    }
    if (bestOut < 0) break;
    isMedoid[static_cast<std::size_t>(res.medoids[static_cast<std::size_t>(bestOut)])] = false;
    isMedoid[static_cast<std::size_t>(bestIn)] = true;
    res.medoids[static_cast<std::size_t>(bestOut)] = bestIn;
    res.cost = bestCost;
    res.costTrace.push_back(res.cost);
  }

  std::sort(res.medoids.begin(), res.medoids.end());
  res.assignment.assign(static_cast<std::size_t>(n), 0);
  for (Index j = 0; j < n; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < res.medoids.size(); ++m) {
      if (D(j, res.medoids[m]) < best) {
        best = D(j, res.medoids[m]);
        res.assignment[static_cast<std::size_t>(j)] = static_cast<int>(m);
      }
    }
  }
  return res;
}

std::vector<double> pam_cost_profile(const Eigen::MatrixXd& D, int maxK, std::uint64_t seed) {
  std::vector<double> out;
  for (int K = 1; K <= std::min<Index>(maxK, D.rows()); ++K) out.push_back(pam(D, K, seed).cost);
  return out;
}

}  // namespace mixstdf
