#pragma once

// Penalised least-squares estimation of mixture models on the stdf: the
// row-wise p-pseudo-norm penalty, the loss, the joint (PNPLS) fit, row
// standardisation and the alternating known-r procedure.

#include "mixstdf/model.hpp"
#include "mixstdf/optimize.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixstdf {

struct PenaltySpec {
  double p = 0.4;       // exponent in (0, 1]
  double lambda = 0.0;  // weight >= 0
};

/// sum_j (sum_s a_js^p)^{1/p}. Invariant under column permutations; for a
/// standardized A it lies in [d, d r^{1/p - 1}], equal to d iff rows are one-hot.
template <typename Derived>
typename Derived::Scalar penalty(const Eigen::MatrixBase<Derived>& A, double p) {
  using Scalar = typename Derived::Scalar;
  if (!(p > 0.0 && p <= 1.0)) throw std::domain_error("penalty: exponent p must lie in (0, 1]");
  if ((A.array() < Scalar(0)).any()) throw std::domain_error("penalty: negative coefficient");
  if (p == 1.0) return A.sum();
  return A.array().pow(Scalar(p)).rowwise().sum().pow(Scalar(1.0 / p)).sum();
}

/// Evaluates ell(c_m; theta) at every row of a fixed grid. Logistic columns
/// share one exponential per distinct coordinate value.
class GridStdf {
 public:
  GridStdf(Eigen::MatrixXd grid, MvnOptions mvn = {});

  const Eigen::MatrixXd& grid() const { return grid_; }
  Index size() const { return grid_.rows(); }
  Eigen::VectorXd evaluate(const MixtureParams& theta) const;
  /// Contribution of column s alone.
  Eigen::VectorXd column(const MixtureParams& theta, Index s) const;

  /// Reuses the last contribution of every column whose parameters did not
  /// change, which makes coordinate-wise finite differences cheap.
  class CachedEvaluator {
   public:
    explicit CachedEvaluator(const GridStdf& model) : model_(model) {}
    Eigen::VectorXd evaluate(const MixtureParams& theta);

   private:
    const GridStdf& model_;
    std::vector<Eigen::VectorXd> keys_, values_;
  };

 private:
  Eigen::MatrixXd grid_;
  MvnOptions mvn_;
  // Distinct positive values per coordinate and, per point, the level index
  // of each non-zero coordinate.
  std::vector<double> levelLog_;
  std::vector<Index> levelStart_;
  std::vector<std::size_t> pointStart_;
  std::vector<Index> entryLevel_;
};

struct LossParts {
  double data = 0.0;     // sum_m (ellHat_m - ell(c_m; theta))^2
  double penalty = 0.0;  // P(A), unweighted
  double total = 0.0;    // data + lambda * penalty
};

LossParts ls_loss(const MixtureParams& theta, const Eigen::VectorXd& ellHat, const Eigen::MatrixXd& grid,
                  const PenaltySpec& pen, const MvnOptions& mvn = {});
LossParts ls_loss(const MixtureParams& theta, const Eigen::VectorXd& ellHat, const GridStdf& model,
                  const PenaltySpec& pen);

struct FitConfig {
  Eigen::MatrixXd grid;      // q x d evaluation points
  int k = 0;                 // tail count for the empirical stdf
  PenaltySpec penalty;
  double zeroTol = 1e-4;     // final entries <= zeroTol become exact zeros
  double stopEps = 1e-4;     // Euclidean change between alternations
  int maxAltIters = 5;
  Family family = Family::Logistic;
  bool perColumnDependence = false;
  double alphaLower = kAlphaFloor, alphaUpper = kAlphaCeil;
  double gammaLower = 1e-3, gammaUpper = 50.0;
  double alphaStart = 0.5;
  double gammaStart = 1.0;
  bool randomDependenceStart = false;  // draw the dependence start uniformly inside its box
  bool angularKmeans = true;           // cluster angles x / |x|_1 instead of raw Pareto values
  int kmeansRestarts = 10;
  int starts = 1;                      // independent k-means starts; the lowest final loss wins
  bool mergeDuplicates = true;         // try merging columns that share a signature
  std::uint64_t seed = 1;
  OptimOptions optim;
  MvnOptions mvn;

  void validate() const;
};

struct StageInfo {
  std::string name;
  OptimStatus status = OptimStatus::Converged;
  int evals = 0;
  double loss = 0.0;
  double seconds = 0.0;
};

struct FitReport {
  MixtureParams theta;                // standardized, thresholded, lex-ordered
  std::vector<Signature> signatures;
  std::vector<double> lossTrace;      // total loss after PNPLS and after each alternation
  std::vector<StageInfo> stages;
  int alternations = 0;
  bool stopCriterionMet = false;
  std::vector<Index> repairedRows;    // rows reset by the zero-row rule
  LossParts finalLoss;
  Eigen::VectorXd ellHat;
  double lambda = 0.0;
  int startIndex = 0;                 // which start produced this fit
  std::vector<double> startLosses;    // final loss of every start
  int merges = 0;                     // accepted merges of duplicate-signature columns
};

/// Optimiser failure tagged with the stage it happened in. Carries the report
/// accumulated up to that point.
class FitError : public std::runtime_error {
 public:
  FitError(std::string stage, const std::string& what, FitReport partial)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), partial_(std::move(partial)) {}
  const std::string& stage() const { return stage_; }
  const FitReport& partial() const { return partial_; }

 private:
  std::string stage_;
  FitReport partial_;
};

/// Joint minimisation of the penalised loss over (A, theta_Z) with A in
/// [0,1]^{d x r}; the result is not row-standardized.
MixtureParams pnpls_fit(const Eigen::VectorXd& ellHat, const Eigen::MatrixXd& grid, const MixtureParams& theta0,
                        const FitConfig& config);

struct StandardizeResult {
  Eigen::MatrixXd A;
  std::vector<Index> repairedRows;
};

/// Divides every row by its sum. A row whose sum is below zeroTol is reset
/// to a one-hot row at its largest entry (first column on ties).
StandardizeResult standardize_rows(const Eigen::MatrixXd& A, double zeroTol = 1e-4);

/// Starting coefficient matrix with t columns from k-means on the top 10%
/// (by row sum) of the unit-Pareto transformed sample. Falls back to the
/// uniform matrix 1/t when fewer than t rows are retained. The k-means run
/// with the lowest inertia over `restarts` seeds is used.
struct KmeansStart {
  Eigen::MatrixXd A;
  bool fallback = false;
};
KmeansStart kmeans_start(const Eigen::MatrixXd& sample, int t, std::uint64_t seed = 1, bool angular = true,
                         int restarts = 10);

/// Default dependence parameters for a fit with r columns.
MixtureParams initial_params(const Eigen::MatrixXd& A, const FitConfig& config);

/// The full alternating procedure on precomputed empirical stdf values.
FitReport fit_from_stdf(const Eigen::VectorXd& ellHat, const MixtureParams& theta0, const FitConfig& config);

/// Ranks the sample, estimates ell on the grid, starts from k-means unless
/// theta0 is given, and runs the alternating procedure. With several starts,
/// start 0 is the k-means start with restarts and start i > 0 a single k-means
/// run with a derived seed; the fit with the lowest final loss is returned.
/// Each candidate goes through merge_duplicate_columns when enabled.
FitReport fit_known_r(const Eigen::MatrixXd& sample, int r, const FitConfig& config,
                      const std::optional<MixtureParams>& theta0 = std::nullopt);

/// Repeatedly merges two columns with the same non-empty signature (the sum
/// goes to the first, the second becomes empty), refits from there and keeps
/// the result when the penalised loss decreases.
FitReport merge_duplicate_columns(const Eigen::VectorXd& ellHat, FitReport report, const FitConfig& config);

/// All points of dimension d whose support size is in `nonzeroCounts` and
/// whose non-zero coordinates take values in `values`. Rows ordered by
/// support (sizes in the given order, supports lexicographic) then values.
Eigen::MatrixXd generate_grid(Index d, const std::vector<double>& values, const std::vector<int>& nonzeroCounts);

}  // namespace mixstdf
