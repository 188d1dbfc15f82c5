#pragma once

// Replicated simulation studies: simulate, fit (known r or direction
// discovery), and score every (n, k/n, p) cell.

#include "mixstdf/cv.hpp"
#include "mixstdf/directions.hpp"
#include "mixstdf/metrics.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mixstdf {

enum class StudyMode { KnownR, Identify };

struct LambdaChoice {
  bool cv = false;
  double value = 0.0;               // used when cv is false
  std::vector<double> grid;         // candidate values when cv is true
  int folds = 10;
  bool greedy = false;              // greedy refinement instead of a single pass over `grid`
  int maxRefinements = 5;
  bool shuffle = true;
};

struct StudySpec {
  MixtureParams truth;
  double noiseSigma = 0.0;
  Family fitFamily = Family::Logistic;
  StudyMode mode = StudyMode::KnownR;
  int replicates = 1;
  std::vector<Index> n;
  std::vector<double> kFrac;
  std::vector<double> p;
  LambdaChoice lambda;
  int tMax = 0;
  int threads = 1;
  std::uint64_t seed = 1;
  FitConfig base;  // grid, bounds and optimiser settings; k, p, lambda, family and seed are set per task

  void validate() const;
};

struct ReplicateOutcome {
  std::size_t cell = 0;
  int replicate = 0;
  std::uint64_t dataSeed = 0;
  bool failed = false;
  std::string error;
  double lambda = 0.0;
  int tFinal = 0;
  DirectionSet directions;
  double distance = 1.0;
  MixtureParams theta;  // empty columns removed
};

struct CellSummary {
  Index n = 0;
  double kFrac = 0.0;
  double p = 0.0;
  int replicates = 0;
  int failed = 0;
  EdScore ed;
  SmseResult smse;          // NaN value when the fitted family differs from the truth
  double tFinalHit = 0.0;   // identify mode: fraction of replicates with tFinal = r + 1
};

struct StudyResult {
  std::vector<CellSummary> cells;
  std::vector<ReplicateOutcome> replicates;
};

using StudyLog = std::function<void(const std::string&)>;

/// Runs cells x replicates on a bounded worker pool. Replicate l of sample
/// size n uses the same data in every (k/n, p) cell. Failures are recorded
/// per replicate and the study continues.
StudyResult run_study(const StudySpec& spec, const StudyLog& log = {});

/// Penalty weight for a fit with t columns on `sample` under `choice`.
double choose_lambda(const Eigen::MatrixXd& sample, int t, const FitConfig& config, const LambdaChoice& choice,
                     std::vector<CvScore>* trace = nullptr);

}  // namespace mixstdf
