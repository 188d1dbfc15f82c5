#include "mixstdf/study.hpp"

#include "mixstdf/empirical.hpp"
#include "mixstdf/seeding.hpp"
#include "mixstdf/simulate.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace mixstdf {

void StudySpec::validate() const {
  mixstdf::validate(truth, true);
  if (replicates < 1) throw std::invalid_argument("study: replicates must be >= 1");
  if (n.empty() || kFrac.empty() || p.empty()) throw std::invalid_argument("study: n, k_frac and p lists must be non-empty");
  for (Index v : n)
    if (v < 2) throw std::invalid_argument("study: sample sizes must be >= 2");
  for (double v : kFrac)
    if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument("study: k_frac values must lie in (0,1]");
  for (double v : p)
    if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument("study: p values must lie in (0,1]");
  if (!(noiseSigma >= 0.0)) throw std::invalid_argument("study: noise sigma must be >= 0");
  if (threads < 1) throw std::invalid_argument("study: threads must be >= 1");
  if (lambda.cv) {
    if (lambda.grid.empty()) throw std::invalid_argument("study: cross-validation needs a lambda grid");
    if (lambda.folds < 2) throw std::invalid_argument("study: folds must be >= 2");
  } else if (!(lambda.value >= 0.0)) {
    throw std::invalid_argument("study: lambda must be >= 0");
  }
  if (base.grid.rows() == 0 || base.grid.cols() != truth.dim()) throw std::invalid_argument("study: grid dimension does not match the model");
}

double choose_lambda(const Eigen::MatrixXd& sample, int t, const FitConfig& config, const LambdaChoice& choice,
                     std::vector<CvScore>* trace) {
  if (!choice.cv) return choice.value;
  const CvPlan plan = CvPlan::make(sample.rows(), choice.folds, config.seed, choice.shuffle);
  if (choice.greedy) return greedy_lambda_grid(sample, t, config, choice.grid, plan, choice.maxRefinements, trace).lambdaStar;
  const CvFolds folds = prepare_folds(sample, plan, config);
  return fixed_lambda_grid(
             [&](double l) {
               CvScore s = cv_score(folds, t, config, l);
               if (trace) trace->push_back(s);
               return s.mean;
             },
             choice.grid)
      .lambdaStar;
}

namespace {

MixtureParams drop_empty_columns(const MixtureParams& theta) {
  std::vector<Index> keep;
  for (Index s = 0; s < theta.columns(); ++s)
    if ((theta.A.col(s).array() > 0.0).any()) keep.push_back(s);
  MixtureParams out = theta;
  out.A.resize(theta.dim(), static_cast<Index>(keep.size()));
  if (theta.alpha.size() > 1) out.alpha.resize(static_cast<Index>(keep.size()));
  if (theta.gamma.size() > 1) out.gamma.clear();
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.A.col(static_cast<Index>(i)) = theta.A.col(keep[i]);
    if (theta.alpha.size() > 1) out.alpha(static_cast<Index>(i)) = theta.alpha(keep[i]);
    if (theta.gamma.size() > 1) out.gamma.push_back(theta.gamma[static_cast<std::size_t>(keep[i])]);
  }
  return out;
}

struct Cell {
  Index n;
  double kFrac, p;
};

}  // namespace

StudyResult run_study(const StudySpec& spec, const StudyLog& log) {
  spec.validate();
  std::vector<Cell> cells;
  for (Index n : spec.n)
    for (double kf : spec.kFrac)
      for (double p : spec.p) cells.push_back({n, kf, p});

  const std::size_t total = cells.size() * static_cast<std::size_t>(spec.replicates);
  StudyResult res;
  res.replicates.resize(total);
  const DirectionSet truthDirs = direction_set(signatures(spec.truth.A));
  std::mutex logMutex;
  auto say = [&](const std::string& msg) {
    if (!log) return;
    std::lock_guard<std::mutex> lock(logMutex);
    log(msg);
  };

  auto runTask = [&](std::size_t task) {
    const std::size_t c = task / static_cast<std::size_t>(spec.replicates);
    const int rep = static_cast<int>(task % static_cast<std::size_t>(spec.replicates));
    const Cell& cell = cells[c];
    ReplicateOutcome& out = res.replicates[task];
    out.cell = c;
    out.replicate = rep;
    out.dataSeed = derive_seed(spec.seed, {static_cast<std::uint64_t>(cell.n), static_cast<std::uint64_t>(rep)});
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Eigen::MatrixXd X = sample_mixture({spec.truth, cell.n, spec.noiseSigma, out.dataSeed});
      FitConfig cfg = spec.base;
      cfg.family = spec.fitFamily;
      cfg.k = tail_count(cell.n, cell.kFrac);
      cfg.penalty.p = cell.p;
      cfg.seed = derive_seed(out.dataSeed, {1});
      if (spec.mode == StudyMode::KnownR) {
        const int r = static_cast<int>(spec.truth.columns());
        cfg.penalty.lambda = choose_lambda(X, r, cfg, spec.lambda);
        const FitReport fit = fit_known_r(X, r, cfg);
        out.lambda = cfg.penalty.lambda;
        out.tFinal = r;
        out.theta = drop_empty_columns(fit.theta);
        out.directions = direction_set(fit.signatures);
      } else {
        const DirectionReport dr =
            identify_directions(X, cfg, spec.tMax, [&](int t) { return choose_lambda(X, t, cfg, spec.lambda); });
        out.lambda = dr.lambdas.back();
        out.tFinal = dr.tFinal;
        out.theta = drop_empty_columns(dr.fits.back().theta);
        out.directions = dr.directions;
      }
      out.distance = out.directions.empty() ? 1.0 : jaccard_direction_distance(out.directions, truthDirs);
    } catch (const std::exception& e) {
      out.failed = true;
      out.error = e.what();
    }
    std::ostringstream msg;
    msg << "cell n=" << cell.n << " k/n=" << cell.kFrac << " p=" << cell.p << " replicate " << rep
        << (out.failed ? " failed: " + out.error : "") << " lambda=" << out.lambda << " t=" << out.tFinal
        << " distance=" << out.distance << " seconds="
        << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    say(msg.str());
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t task = next++; task < total; task = next++) runTask(task);
  };
  const auto nThreads = std::min<std::size_t>(static_cast<std::size_t>(spec.threads), total);
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < nThreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t c = 0; c < cells.size(); ++c) {
    CellSummary sum;
    sum.n = cells[c].n;
    sum.kFrac = cells[c].kFrac;
    sum.p = cells[c].p;
    std::vector<DirectionSet> sets;
    std::vector<MixtureParams> thetas;
    int hits = 0;
    for (int rep = 0; rep < spec.replicates; ++rep) {
      const auto& o = res.replicates[c * static_cast<std::size_t>(spec.replicates) + static_cast<std::size_t>(rep)];
      ++sum.replicates;
      if (o.failed) {
        ++sum.failed;
        continue;
      }
      sets.push_back(o.directions.empty() ? DirectionSet{Signature{}} : o.directions);
      if (o.tFinal == spec.truth.columns() + 1) ++hits;
      if (spec.fitFamily == spec.truth.family) thetas.push_back(o.theta);
    }
    if (!sets.empty()) {
      sum.ed = ed_score(sets, truthDirs);
      sum.tFinalHit = static_cast<double>(hits) / static_cast<double>(sets.size());
    } else {
      sum.ed.mean = std::numeric_limits<double>::quiet_NaN();
      sum.ed.exactRate = std::numeric_limits<double>::quiet_NaN();
    }
    if (!thetas.empty()) {
      sum.smse = smse(thetas, spec.truth);
    } else {
      sum.smse.value = std::numeric_limits<double>::quiet_NaN();
    }
    res.cells.push_back(sum);
  }
  return res;
}

}  // namespace mixstdf
