#include "mixstdf/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace mixstdf {

Eigen::MatrixXi ranks(const Eigen::MatrixXd& sample) {
  const Index n = sample.rows(), d = sample.cols();
  if (n == 0 || d == 0) throw std::invalid_argument("ranks: empty sample");
  if (!sample.allFinite()) throw std::invalid_argument("ranks: sample has non-finite entries");
  Eigen::MatrixXi R(n, d);
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index j = 0; j < d; ++j) {
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return sample(a, j) < sample(b, j); });
    for (Index pos = 0; pos < n; ++pos) R(idx[static_cast<std::size_t>(pos)], j) = static_cast<int>(pos + 1);
  }
  return R;
}

int tail_count(Index n, double fraction) {
  if (n < 1) throw std::invalid_argument("tail_count: empty sample");
  if (!(fraction > 0.0)) throw std::invalid_argument("tail_count: fraction must be positive");
  const double k = std::round(fraction * static_cast<double>(n));
  return static_cast<int>(std::clamp<double>(k, 1.0, static_cast<double>(n)));
}

namespace {

void check_k(Index n, int k) {
  if (k < 1 || k > n) throw std::invalid_argument("tail fraction k must satisfy 1 <= k <= n");
}

}  // namespace

double empirical_stdf(const Eigen::MatrixXi& R, int k, const Eigen::VectorXd& x) {
  const Index n = R.rows(), d = R.cols();
  check_k(n, k);
  if (x.size() != d) throw std::invalid_argument("empirical_stdf: point has wrong dimension");
  Eigen::VectorXd thresh = (static_cast<double>(n) + 0.5) - static_cast<double>(k) * x.array();
  long count = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) {
      if (static_cast<double>(R(i, j)) > thresh(j)) {
        ++count;
        break;
      }
    }
  }
  return static_cast<double>(count) / static_cast<double>(k);
}

Eigen::VectorXd empirical_stdf_grid(const Eigen::MatrixXi& R, int k, const Eigen::MatrixXd& grid) {
  const Index n = R.rows(), d = R.cols();
  check_k(n, k);
  if (grid.cols() != d) throw std::invalid_argument("empirical_stdf_grid: grid has wrong dimension");
  const Index q = grid.rows();
  Eigen::VectorXd out(q);
  const Eigen::MatrixXd thresh =
      ((static_cast<double>(n) + 0.5) - static_cast<double>(k) * grid.array()).matrix();  // q x d
  const Eigen::MatrixXd Rd = R.cast<double>();
  for (Index m = 0; m < q; ++m) {
    const Eigen::RowVectorXd t = thresh.row(m);
    long count = 0;
    for (Index i = 0; i < n; ++i) {
      if ((Rd.row(i).array() > t.array()).any()) ++count;
    }
    out(m) = static_cast<double>(count) / static_cast<double>(k);
  }
  return out;
}

double empirical_chi(const Eigen::MatrixXi& R, int k, Index s, Index t) {
  if (s == t) throw std::invalid_argument("empirical_chi: s and t must differ");
  if (s < 0 || t < 0 || s >= R.cols() || t >= R.cols()) throw std::out_of_range("empirical_chi: index out of range");
  Eigen::MatrixXi pair(R.rows(), 2);
  pair.col(0) = R.col(s);
  pair.col(1) = R.col(t);
  const double ell = empirical_stdf(pair, k, Eigen::Vector2d(1.0, 1.0));
  return std::clamp(2.0 - ell, 0.0, 1.0);
}

}  // namespace mixstdf
