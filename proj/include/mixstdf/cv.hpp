#pragma once

// K-fold cross-validation of the penalisation weight and the greedy
// refinement of the lambda grid.

#include "mixstdf/estimate.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mixstdf {

struct CvPlan {
  int K = 10;
  std::uint64_t seed = 1;
  std::vector<std::vector<Index>> folds;  // row indices of each validation block

  /// Contiguous near-equal blocks of a seeded shuffle of 0..n-1 (identity order without shuffle).
  static CvPlan make(Index n, int K, std::uint64_t seed = 1, bool shuffle = true);
  void validate(Index n) const;
};

/// Training samples and validation stdf vectors of every fold, computed once
/// and shared by all lambda values.
struct CvFolds {
  std::vector<Eigen::MatrixXd> train;
  std::vector<Eigen::VectorXd> validEll;
  int kTrain = 0;
  int kValid = 0;
};

/// kTrain = floor(k (K-1) / K) on the training rows, kValid = floor(k / K) on the fold rows.
CvFolds prepare_folds(const Eigen::MatrixXd& sample, const CvPlan& plan, const FitConfig& config);

struct CvScore {
  double lambda = 0.0;
  double mean = 0.0;             // +inf when a fold fit failed
  std::vector<double> perFold;   // unpenalised validation error of each fold
  bool failed = false;
  std::string diagnostics;
};

CvScore cv_score(const CvFolds& folds, int r, const FitConfig& config, double lambda);
CvScore cv_score(const Eigen::MatrixXd& sample, int r, const FitConfig& config, double lambda, const CvPlan& plan);

struct CvPass {
  std::vector<double> grid;
  std::vector<double> scores;
  Index argmin = 0;
};

struct LambdaSearch {
  double lambdaStar = 0.0;
  std::vector<double> finalGrid;
  std::vector<CvPass> passes;
  bool boundary = false;  // the minimiser was still at a grid edge when the search stopped
};

using LambdaScore = std::function<double(double)>;

/// Scores every value of a fixed grid once.
LambdaSearch fixed_lambda_grid(const LambdaScore& score, const std::vector<double>& grid);

/// Repeats: score the grid; stop when the minimiser is interior (outside the
/// first and last 20% of indices); at the lower edge divide the step by ten and
/// rebuild a grid of the same size around the minimiser; at the upper edge
/// shift the grid so the minimiser sits in the middle. The initial grid must
/// be positive, increasing and equally spaced.
LambdaSearch greedy_lambda_grid(const LambdaScore& score, const std::vector<double>& initialGrid,
                                int maxRefinements = 5);

/// Greedy search with scores from cv_score; fold data are prepared once.
/// `trace` receives every scored lambda in evaluation order.
LambdaSearch greedy_lambda_grid(const Eigen::MatrixXd& sample, int r, const FitConfig& config,
                                const std::vector<double>& initialGrid, const CvPlan& plan, int maxRefinements = 5,
                                std::vector<CvScore>* trace = nullptr);

}  // namespace mixstdf
