#include "mixstdf/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mixstdf {

DirectionSet direction_set(const std::vector<Signature>& sigs) {
  DirectionSet out;
  for (const auto& s : sigs)
    if (!s.empty()) out.insert(s);
  return out;
}

double jaccard_direction_distance(const DirectionSet& est, const DirectionSet& truth) {
  if (est.empty() || truth.empty()) throw std::invalid_argument("jaccard_direction_distance: empty direction set");
  std::size_t common = 0;
  for (const auto& s : est) common += truth.count(s);
  const std::size_t uni = est.size() + truth.size() - common;
  return 1.0 - static_cast<double>(common) / static_cast<double>(uni);
}

EdScore ed_score(const std::vector<DirectionSet>& reps, const DirectionSet& truth) {
  if (reps.empty()) throw std::invalid_argument("ed_score: no replicates");
  EdScore out;
  for (const auto& r : reps) {
    const double dist = jaccard_direction_distance(r, truth);
    out.mean += dist;
    if (dist == 0.0) out.exactRate += 1.0;
  }
  out.mean /= static_cast<double>(reps.size());
  out.exactRate /= static_cast<double>(reps.size());
  return out;
}

std::vector<Index> hungarian(const Eigen::MatrixXd& cost) {
  const Index n = cost.rows();
  if (cost.cols() != n) throw std::invalid_argument("hungarian: cost matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  // Potentials formulation, 1-based with a virtual column 0.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<Index> p(n + 1, 0), way(n + 1, 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const Index i0 = p[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> out(n);
  for (Index j = 1; j <= n; ++j) out[p[j] - 1] = j - 1;
  return out;
}

ColumnMatch match_columns(const Eigen::MatrixXd& Ahat, const Eigen::MatrixXd& A) {
  if (Ahat.rows() != A.rows() || Ahat.cols() != A.cols()) throw std::invalid_argument("match_columns: shape mismatch");
  const Index r = A.cols();
  Eigen::MatrixXd cost(r, r);
  for (Index s = 0; s < r; ++s)
    for (Index t = 0; t < r; ++t) cost(s, t) = (Ahat.col(t) - A.col(s)).squaredNorm();

  ColumnMatch out;
  if (r <= 8) {
    std::vector<Index> perm(static_cast<std::size_t>(r));
    std::iota(perm.begin(), perm.end(), Index{0});
    double best = std::numeric_limits<double>::infinity();
    do {
      double c = 0.0;
      for (Index s = 0; s < r; ++s) c += cost(s, perm[static_cast<std::size_t>(s)]);
      if (c < best) {
        best = c;
        out.perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    out.perm = hungarian(cost);
  }
  out.A.resize(A.rows(), r);
  out.residual = 0.0;
  for (Index s = 0; s < r; ++s) {
    out.A.col(s) = Ahat.col(out.perm[static_cast<std::size_t>(s)]);
    out.residual += cost(s, out.perm[static_cast<std::size_t>(s)]);
  }
  return out;
}

MixtureParams permute_columns(const MixtureParams& theta, const std::vector<Index>& perm) {
  MixtureParams out = theta;
  for (std::size_t s = 0; s < perm.size(); ++s) {
    out.A.col(static_cast<Index>(s)) = theta.A.col(perm[s]);
    if (theta.alpha.size() > 1) out.alpha(static_cast<Index>(s)) = theta.alpha(perm[s]);
    if (theta.gamma.size() > 1) out.gamma[s] = theta.gamma[static_cast<std::size_t>(perm[s])];
  }
  return out;
}

Eigen::VectorXd identifiable_dependence(const MixtureParams& theta, const MixtureParams& truth) {
  if (theta.family == Family::Logistic) return theta.alpha;
  const auto sigs = signatures(truth.A);
  std::vector<double> out;
  const auto nG = theta.gamma.size();
  for (std::size_t g = 0; g < nG; ++g) {
    const auto& G = theta.gamma[g];
    for (Index t = 0; t < G.rows(); ++t) {
      for (Index u = t + 1; u < G.cols(); ++u) {
        bool used = false;
        for (std::size_t s = 0; s < sigs.size() && !used; ++s) {
          if (nG > 1 && s != g) continue;
          const auto& J = sigs[s];
          used = std::binary_search(J.begin(), J.end(), static_cast<int>(t)) &&
                 std::binary_search(J.begin(), J.end(), static_cast<int>(u));
        }
        if (used) out.push_back(G(t, u));
      }
    }
  }
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Index>(out.size()));
}

namespace {

double normalized_sq(double est, double truth, double scale) {
  const double num = (est - truth) * (est - truth);
  if (num == 0.0) return 0.0;
  return num / (scale * scale);
}

}  // namespace

SmseResult smse(const std::vector<MixtureParams>& estimates, const MixtureParams& truth) {
  if (estimates.empty()) throw std::invalid_argument("smse: no replicates");
  SmseResult res;
  std::vector<Eigen::MatrixXd> A;
  std::vector<Eigen::VectorXd> Z;
  const Eigen::VectorXd zTrue = identifiable_dependence(truth, truth);
  for (const auto& est : estimates) {
    if (est.family != truth.family || est.dim() != truth.dim()) throw std::invalid_argument("smse: estimate has wrong family or dimension");
    if (est.columns() != truth.columns()) {
      ++res.excluded;
      continue;
    }
    const ColumnMatch m = match_columns(est.A, truth.A);
    const MixtureParams matched = permute_columns(est, m.perm);
    A.push_back(matched.A);
    Z.push_back(identifiable_dependence(matched, truth));
    if (Z.back().size() != zTrue.size()) throw std::invalid_argument("smse: dependence parameters do not match the truth");
    ++res.used;
  }
  if (res.used == 0) {
    res.value = std::numeric_limits<double>::quiet_NaN();
    return res;
  }
  Eigen::MatrixXd mA = A.front();
  Eigen::VectorXd mZ = Z.front();
  for (std::size_t l = 1; l < A.size(); ++l) {
    mA = mA.cwiseMax(A[l]);
    mZ = mZ.cwiseMax(Z[l]);
  }
  double total = 0.0;
  for (std::size_t l = 0; l < A.size(); ++l) {
    for (Index j = 0; j < mA.rows(); ++j)
      for (Index s = 0; s < mA.cols(); ++s) total += normalized_sq(A[l](j, s), truth.A(j, s), mA(j, s));
    for (Index t = 0; t < mZ.size(); ++t) total += normalized_sq(Z[l](t), zTrue(t), mZ(t));
  }
  res.value = total / static_cast<double>(res.used);
  return res;
}

}  // namespace mixstdf
