#include "mixstdf/cv.hpp"

#include "mixstdf/empirical.hpp"
#include "mixstdf/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace mixstdf {

CvPlan CvPlan::make(Index n, int K, std::uint64_t seed, bool shuffle) {
  if (K < 2) throw std::invalid_argument("CvPlan: K must be >= 2");
  if (n < K) throw std::invalid_argument("CvPlan: fewer observations than folds");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  if (shuffle) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  CvPlan plan;
  plan.K = K;
  plan.seed = seed;
  Index pos = 0;
  for (int f = 0; f < K; ++f) {
    const Index size = n / K + (f < n % K ? 1 : 0);
    plan.folds.emplace_back(order.begin() + pos, order.begin() + pos + size);
    pos += size;
  }
  return plan;
}

void CvPlan::validate(Index n) const {
  if (K < 2 || static_cast<int>(folds.size()) != K) throw std::invalid_argument("CvPlan: wrong number of folds");
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  Index smallest = n, largest = 0;
  for (const auto& f : folds) {
    smallest = std::min<Index>(smallest, static_cast<Index>(f.size()));
    largest = std::max<Index>(largest, static_cast<Index>(f.size()));
    for (Index i : f) {
      if (i < 0 || i >= n) throw std::invalid_argument("CvPlan: row index out of range");
      ++seen[static_cast<std::size_t>(i)];
    }
  }
  if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; }))
    throw std::invalid_argument("CvPlan: folds do not partition the sample");
  if (largest - smallest > 1) throw std::invalid_argument("CvPlan: fold sizes differ by more than one");
}

CvFolds prepare_folds(const Eigen::MatrixXd& sample, const CvPlan& plan, const FitConfig& config) {
  const Index n = sample.rows();
  plan.validate(n);
  if (config.k < 1) throw std::invalid_argument("prepare_folds: k must be >= 1");
  CvFolds out;
  out.kTrain = config.k * (plan.K - 1) / plan.K;
  out.kValid = config.k / plan.K;
  if (out.kTrain < 1 || out.kValid < 1) throw std::invalid_argument("prepare_folds: k too small for the number of folds");
  std::vector<int> foldOf(static_cast<std::size_t>(n));
  for (int f = 0; f < plan.K; ++f)
    for (Index i : plan.folds[static_cast<std::size_t>(f)]) foldOf[static_cast<std::size_t>(i)] = f;
  for (int f = 0; f < plan.K; ++f) {
    const auto& rows = plan.folds[static_cast<std::size_t>(f)];
    Eigen::MatrixXd valid(static_cast<Index>(rows.size()), sample.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) valid.row(static_cast<Index>(i)) = sample.row(rows[i]);
    Eigen::MatrixXd train(n - valid.rows(), sample.cols());
    Index t = 0;
    for (Index i = 0; i < n; ++i)
      if (foldOf[static_cast<std::size_t>(i)] != f) train.row(t++) = sample.row(i);
    out.validEll.push_back(empirical_stdf_grid(ranks(valid), out.kValid, config.grid));
    out.train.push_back(std::move(train));
  }
  return out;
}

CvScore cv_score(const CvFolds& folds, int r, const FitConfig& config, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("cv_score: lambda must be >= 0");
  CvScore res;
  res.lambda = lambda;
  const GridStdf model(config.grid, config.mvn);
  for (std::size_t f = 0; f < folds.train.size(); ++f) {
    FitConfig cfg = config;
    cfg.k = folds.kTrain;
    cfg.penalty.lambda = lambda;
    cfg.seed = derive_seed(config.seed, {static_cast<std::uint64_t>(f)});
    try {
      const FitReport rep = fit_known_r(folds.train[f], r, cfg);
      res.perFold.push_back((folds.validEll[f] - model.evaluate(rep.theta)).squaredNorm());
    } catch (const std::exception& e) {
      res.failed = true;
      res.perFold.push_back(std::numeric_limits<double>::infinity());
      res.diagnostics += "fold " + std::to_string(f) + ": " + e.what() + "; ";
    }
  }
  res.mean = res.failed ? std::numeric_limits<double>::infinity()
                        : std::accumulate(res.perFold.begin(), res.perFold.end(), 0.0) / static_cast<double>(res.perFold.size());
  return res;
}

CvScore cv_score(const Eigen::MatrixXd& sample, int r, const FitConfig& config, double lambda, const CvPlan& plan) {
  return cv_score(prepare_folds(sample, plan, config), r, config, lambda);
}

namespace {

CvPass score_pass(const LambdaScore& score, const std::vector<double>& grid, std::map<double, double>& memo) {
  CvPass pass;
  pass.grid = grid;
  for (double l : grid) {
    auto it = memo.find(l);
    if (it == memo.end()) it = memo.emplace(l, score(l)).first;
    pass.scores.push_back(it->second);
  }
  pass.argmin = std::min_element(pass.scores.begin(), pass.scores.end()) - pass.scores.begin();
  if (!std::isfinite(pass.scores[static_cast<std::size_t>(pass.argmin)]))
    throw std::runtime_error("lambda search: every grid value failed");
  return pass;
}

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("lambda grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) throw std::invalid_argument("lambda grid values must be >= 0");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("lambda grid must be increasing");
  }
}

}  // namespace

LambdaSearch fixed_lambda_grid(const LambdaScore& score, const std::vector<double>& grid) {
  check_grid(grid);
  std::map<double, double> memo;
  LambdaSearch out;
  out.passes.push_back(score_pass(score, grid, memo));
  const auto& p = out.passes.back();
  out.lambdaStar = grid[static_cast<std::size_t>(p.argmin)];
  out.finalGrid = grid;
  out.boundary = grid.size() > 1 && (p.argmin == 0 || p.argmin + 1 == static_cast<Index>(grid.size()));
  return out;
}

LambdaSearch greedy_lambda_grid(const LambdaScore& score, const std::vector<double>& initialGrid, int maxRefinements) {
  check_grid(initialGrid);
  if (maxRefinements < 0) throw std::invalid_argument("greedy_lambda_grid: maxRefinements must be >= 0");
  const auto G = static_cast<Index>(initialGrid.size());
  if (G < 2) throw std::invalid_argument("greedy_lambda_grid: need at least two grid values");
  if (!(initialGrid.front() > 0.0)) throw std::invalid_argument("greedy_lambda_grid: grid values must be positive");
  double step = initialGrid[1] - initialGrid[0];
  for (Index i = 1; i < G; ++i) {
    const double gap = initialGrid[static_cast<std::size_t>(i)] - initialGrid[static_cast<std::size_t>(i - 1)];
    if (std::abs(gap - step) > 1e-9 * std::max(1.0, std::abs(step) * G)) throw std::invalid_argument("greedy_lambda_grid: grid must be equally spaced");
  }
  const Index edge = std::max<Index>(1, static_cast<Index>(std::floor(0.2 * static_cast<double>(G))));

  std::map<double, double> memo;
  LambdaSearch out;
  std::vector<double> grid = initialGrid;
  for (int refinement = 0;; ++refinement) {
    out.passes.push_back(score_pass(score, grid, memo));
    const Index arg = out.passes.back().argmin;
    const double best = grid[static_cast<std::size_t>(arg)];
    out.lambdaStar = best;
    out.finalGrid = grid;
    const bool low = arg < edge, high = arg >= G - edge;
    out.boundary = low || high;
    if (!out.boundary || refinement == maxRefinements) break;
    double start;
    if (low) {
      step /= 10.0;
      start = std::max(step, best - static_cast<double>(G / 2) * step);
    } else {
      start = best - static_cast<double>(G / 2) * step;
    }
    for (Index i = 0; i < G; ++i) grid[static_cast<std::size_t>(i)] = start + static_cast<double>(i) * step;
  }
  return out;
}

LambdaSearch greedy_lambda_grid(const Eigen::MatrixXd& sample, int r, const FitConfig& config,
                                const std::vector<double>& initialGrid, const CvPlan& plan, int maxRefinements,
                                std::vector<CvScore>* trace) {
  const CvFolds folds = prepare_folds(sample, plan, config);
  return greedy_lambda_grid(
      [&](double lambda) {
        CvScore s = cv_score(folds, r, config, lambda);
        if (trace) trace->push_back(s);
        return s.mean;
      },
      initialGrid, maxRefinements);
}

}  // namespace mixstdf
