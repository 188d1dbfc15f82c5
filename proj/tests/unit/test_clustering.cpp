#include "mixstdf/clustering.hpp"
#include "mixstdf/simulate.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace mixstdf;

namespace {

double subset_cost(const Eigen::MatrixXd& D, const std::vector<int>& med) {
  double c = 0.0;
  for (Index j = 0; j < D.rows(); ++j) {
    double b = std::numeric_limits<double>::infinity();
    for (int m : med) b = std::min(b, D(j, m));
    c += b;
  }
  return c;
}

// Minimum cost over all K-subsets of medoids.
double best_subset_cost(const Eigen::MatrixXd& D, int K) {
  const int n = static_cast<int>(D.rows());
  std::vector<bool> pick(static_cast<std::size_t>(n), false);
  std::fill(pick.begin(), pick.begin() + K, true);
  double best = std::numeric_limits<double>::infinity();
  do {
    std::vector<int> med;
    for (int i = 0; i < n; ++i)
      if (pick[static_cast<std::size_t>(i)]) med.push_back(i);
    best = std::min(best, subset_cost(D, med));
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

}  // namespace

TEST_CASE("k-means separates well-separated groups") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z(0.0, 0.1);
  Eigen::MatrixXd P(90, 2);
  const double cx[] = {0, 5, 10};
  for (Index i = 0; i < 90; ++i) P.row(i) << cx[i % 3] + z(rng), z(rng);
  const KMeansResult r = kmeans(P, 3, 4);
  for (Index i = 3; i < 90; ++i) CHECK(r.assignment[static_cast<std::size_t>(i)] == r.assignment[static_cast<std::size_t>(i % 3)]);
  CHECK(std::set<int>(r.assignment.begin(), r.assignment.end()).size() == 3);
  for (std::size_t i = 1; i < r.inertiaTrace.size(); ++i) CHECK(r.inertiaTrace[i] <= r.inertiaTrace[i - 1] + 1e-12);
  CHECK_THROWS_AS(kmeans(P, 91, 1), std::invalid_argument);
}

TEST_CASE("PAM reaches a swap-optimal solution close to the exhaustive optimum") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::MatrixXd pts(9, 2);
    for (Index i = 0; i < pts.size(); ++i) pts(i) = u(rng);
    Eigen::MatrixXd D(9, 9);
    for (Index i = 0; i < 9; ++i)
      for (Index j = 0; j < 9; ++j) D(i, j) = (pts.row(i) - pts.row(j)).norm();
    for (int K : {1, 2, 3}) {
      const PamResult r = pam(D, K, 1);
      CHECK(r.cost == doctest::Approx(subset_cost(D, r.medoids)));
      CHECK(r.cost <= r.buildCost + 1e-12);
      if (K == 1) CHECK(r.cost == doctest::Approx(best_subset_cost(D, 1)));
      CHECK(r.cost <= 1.25 * best_subset_cost(D, K));
      // No single swap improves the result.
      for (std::size_t m = 0; m < r.medoids.size(); ++m)
        for (int h = 0; h < 9; ++h) {
          std::vector<int> t = r.medoids;
          t[m] = h;
          CHECK(subset_cost(D, t) >= r.cost - 1e-12);
        }
    }
  }
  CHECK_THROWS_AS(pam(Eigen::MatrixXd::Zero(3, 2), 1), std::invalid_argument);
}

TEST_CASE("chi distances between columns") {
  Eigen::MatrixXd A(4, 2);
  A << 1, 0, 1, 0, 0, 1, 0, 1;
  const Eigen::MatrixXd X = sample_mixture({MixtureParams::logistic(A, 0.1), 4000, 0.0, 3});
  const Eigen::MatrixXd D = chi_distance_matrix(X, 200);
  CHECK(D(0, 1) < 0.05);
  CHECK(D(2, 3) < 0.05);
  CHECK(D(0, 2) > 0.12);
  CHECK(D(0, 0) == 0.0);
  const PamResult r = pam(D, 2);
  CHECK(r.assignment[0] == r.assignment[1]);
  CHECK(r.assignment[2] == r.assignment[3]);
  CHECK(r.assignment[0] != r.assignment[2]);
}
