// Acceptance suite. Prints one PASS/FAIL line per criterion; detail lines are
// indented. Arguments select criteria by number (default: all).

#include "mixstdf/cli.hpp"
#include "mixstdf/directions.hpp"
#include "mixstdf/empirical.hpp"
#include "mixstdf/estimate.hpp"
#include "mixstdf/io.hpp"
#include "mixstdf/metrics.hpp"
#include "mixstdf/seeding.hpp"
#include "mixstdf/simulate.hpp"
#include "mixstdf/study.hpp"

#include "ks.hpp"
#include "oracles.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

using namespace mixstdf;
namespace fs = std::filesystem;

namespace {

// Tolerances and thresholds.
constexpr int kLawDraws = 1000;
constexpr double kBoundTolLogistic = 1e-12;
constexpr double kBoundTolHr = 1e-5;
constexpr double kHomogTolLogistic = 1e-9;
constexpr double kHomogTolHr = 1e-5;
constexpr double kConvexSlack = 1e-6;
constexpr double kLawSecondsLogistic = 60.0;
constexpr double kLawSecondsHr = 600.0;
constexpr int kHrPairs = 500;
constexpr double kHrPairTol = 1e-5;
constexpr double kOrthantTol = 5e-4;
constexpr Index kGridPoints = 650;
constexpr Index kSimDraws = 100000;
constexpr double kZetaTol = 0.05;
constexpr double kKsLevel = 0.01;
constexpr double kSimSeconds = 120.0;
constexpr double kNoiselessLoss = 1e-10;
constexpr int kDecompositionDraws = 100;
constexpr int kStudyReplicates = 20;
constexpr Index kStudyN = 3000;
constexpr double kNoiseSigma = 3.0;  // variance 9
constexpr double kKnownRKFrac = 0.02;
constexpr double kKnownREdMax = 0.25;
constexpr double kKnownRExactMin = 0.5;
constexpr double kKnownRMinutes = 60.0;
const std::vector<double> kCvGrid = {0.01, 0.02, 0.04, 0.08};
constexpr int kCvFolds = 10;
constexpr double kIdentifyKFrac = 0.04;
constexpr int kIdentifyTMax = 8;
constexpr double kIdentifyLambda = 0.1;
constexpr int kIdentifyStarts = 4;
constexpr double kIdentifyHitMin = 0.5;
constexpr int kMatchInstances = 200;
constexpr int kScoreSets = 50;
constexpr double kOracleTol = 1e-12;
constexpr std::uint64_t kSeed = 20240601;

const std::vector<double> kGridValues = {0.25, 1.0 / 3.0, 0.5, 0.75, 1.0};

Eigen::MatrixXd benchmark_A() {
  Eigen::MatrixXd A(4, 4);
  A << 1. / 3, 1. / 3, 1. / 3, 0, 0.5, 0, 0, 0.5, 0, 0.75, 0.25, 0, 0, 0.5, 0, 0.5;
  return A;
}

Eigen::MatrixXd benchmark_gamma() {
  Eigen::MatrixXd G = Eigen::MatrixXd::Ones(4, 4);
  G.diagonal().setZero();
  return G;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string summary;
};

void detail(const std::string& s) { std::cout << "    " << s << std::endl; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// --------------------------------------------------------------------------
// 1. Stdf laws

Eigen::MatrixXd random_A(std::mt19937_64& rng, int d, int r) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd A;
  for (;;) {
    A = Eigen::MatrixXd::Zero(d, r);
    for (Index i = 0; i < A.size(); ++i)
      if (u(rng) < 0.6) A(i) = u(rng);
    for (int j = 0; j < d; ++j)
      if (A.row(j).sum() == 0.0) A(j, std::uniform_int_distribution<int>(0, r - 1)(rng)) = u(rng) + 0.01;
    if ((A.colwise().sum().array() > 0.0).all()) break;
  }
  for (int j = 0; j < d; ++j) A.row(j) /= A.row(j).sum();
  return A;
}

// Squared Euclidean distances between random points in R^d: a valid variogram.
Eigen::MatrixXd random_variogram(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> z(0.0, 1.0);
  const double scale = std::uniform_real_distribution<double>(0.1, 1.5)(rng);
  Eigen::MatrixXd P(d, d);
  for (Index i = 0; i < P.size(); ++i) P(i) = z(rng);
  Eigen::MatrixXd G(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) G(i, j) = scale * (P.row(i) - P.row(j)).squaredNorm();
  return G;
}

Eigen::VectorXd random_point(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(0.0, 2.0);
  Eigen::VectorXd x(d);
  for (int j = 0; j < d; ++j) x(j) = u(rng) < 0.3 ? 0.0 : u(rng);
  if (x.maxCoeff() == 0.0) x(0) = 1.0;
  return x;
}

struct LawStats {
  int evaluations = 0;
  int violations = 0;
  double worstBound = -1e300, worstHomog = 0.0, worstMargin = 0.0, worstConvex = -1e300;
  double seconds = 0.0;
};

LawStats law_suite(Family family, std::uint64_t seed) {
  const double boundTol = family == Family::Logistic ? kBoundTolLogistic : kBoundTolHr;
  const double homogTol = family == Family::Logistic ? kHomogTolLogistic : kHomogTolHr;
  std::mt19937_64 rng(seed);
  LawStats st;
  const auto t0 = std::chrono::steady_clock::now();
  for (int draw = 0; draw < kLawDraws; ++draw) {
    const int d = std::uniform_int_distribution<int>(2, 5)(rng);
    const int r = std::uniform_int_distribution<int>(1, 4)(rng);
    const Eigen::MatrixXd A = random_A(rng, d, r);
    MixtureParams th;
    if (family == Family::Logistic) {
      th = MixtureParams::logistic(A, std::uniform_real_distribution<double>(0.02, 0.98)(rng));
    } else {
      th = MixtureParams::husler_reiss(A, random_variogram(rng, d));
      if (std::uniform_int_distribution<int>(0, 1)(rng)) {
        th.gamma.clear();
        for (int s = 0; s < r; ++s) th.gamma.push_back(random_variogram(rng, d));
      }
    }
    validate(th, true);
    auto ell = [&](const Eigen::VectorXd& x) {
      ++st.evaluations;
      return stdf_mixture(x, th);
    };
    auto flag = [&](double deviation, double tol, double& worst) {
      worst = std::max(worst, deviation);
      if (deviation > tol) ++st.violations;
    };
    for (int j = 0; j < d; ++j) {
      const double m = std::abs(ell(Eigen::VectorXd::Unit(d, j)) - 1.0);
      flag(m, boundTol, st.worstMargin);
    }
    for (int rep = 0; rep < 2; ++rep) {
      const Eigen::VectorXd x = random_point(rng, d), y = random_point(rng, d);
      const double lx = ell(x), ly = ell(y);
      for (const auto& [v, lv] : {std::pair{x, lx}, std::pair{y, ly}}) {
        flag(std::max(v.maxCoeff() - lv, lv - v.sum()) / std::max(1.0, v.sum()), boundTol, st.worstBound);
      }
      const double c = std::exp(std::uniform_real_distribution<double>(std::log(0.1), std::log(10.0))(rng));
      flag(std::abs(ell(c * x) - c * lx) / std::max(1.0, c * lx), homogTol, st.worstHomog);
      for (double t : {0.25, 0.5, 0.75}) flag(ell(t * x + (1 - t) * y) - (t * lx + (1 - t) * ly), kConvexSlack, st.worstConvex);
    }
  }
  st.seconds = elapsed(t0);
  return st;
}

Outcome criterion1() {
  const LawStats lg = law_suite(Family::Logistic, derive_seed(kSeed, {1, 1}));
  const LawStats hr = law_suite(Family::HuslerReiss, derive_seed(kSeed, {1, 2}));
  for (const auto& [name, s] : {std::pair{"logistic", lg}, std::pair{"husler_reiss", hr}})
    detail(fmt("%s: %d evaluations, %d violations, max deviation bound %.2e homogeneity %.2e margin %.2e convexity %.2e, %.1f s",
               name, s.evaluations, s.violations, s.worstBound, s.worstHomog, s.worstMargin, s.worstConvex, s.seconds));
  const bool ok = lg.violations == 0 && hr.violations == 0 && lg.seconds < kLawSecondsLogistic && hr.seconds < kLawSecondsHr;
  return {ok, fmt("stdf laws over %d draws per family: %d + %d violations, %.1f s + %.1f s", kLawDraws, lg.violations,
                  hr.violations, lg.seconds, hr.seconds)};
}

// --------------------------------------------------------------------------
// 2. Husler-Reiss correctness

Outcome criterion2() {
  std::mt19937_64 rng(derive_seed(kSeed, {2}));
  std::uniform_real_distribution<double> ux(0.01, 5.0), ug(0.001, 20.0);
  double worstPair = 0.0;
  for (int i = 0; i < kHrPairs; ++i) {
    const double x1 = ux(rng), x2 = ux(rng), g = ug(rng), l = std::sqrt(g);
    const double closed = x1 * normal_cdf(l / 2 + std::log(x1 / x2) / l) + x2 * normal_cdf(l / 2 + std::log(x2 / x1) / l);
    Eigen::Matrix2d G;
    G << 0, g, g, 0;
    const MixtureParams th = MixtureParams::husler_reiss(Eigen::MatrixXd::Ones(2, 1), G);
    worstPair = std::max(worstPair, std::abs(stdf_mixture(Eigen::Vector2d(x1, x2), th) - closed));
  }
  double worstOrthant = 0.0;
  for (int i = -9; i <= 9; ++i) {
    const double rho = i / 10.0;
    Eigen::Matrix2d S;
    S << 1, rho, rho, 1;
    const double exact = 0.25 + std::asin(rho) / (2.0 * std::acos(-1.0));
    worstOrthant = std::max(worstOrthant, std::abs(mvn_cdf(Eigen::Vector2d::Zero(), S).value - exact));
  }
  detail(fmt("bivariate stdf max error %.2e over %d pairs; orthant max error %.2e", worstPair, kHrPairs, worstOrthant));
  return {worstPair <= kHrPairTol && worstOrthant <= kOrthantTol,
          fmt("HR bivariate closed form (err %.1e) and orthant identity (err %.1e)", worstPair, worstOrthant)};
}

// --------------------------------------------------------------------------
// 3. Grid recipe

Outcome criterion3() {
  const Index q = generate_grid(4, kGridValues, {2, 3}).rows();
  return {q == kGridPoints, fmt("generate_grid(4, 5 values, {2,3}) has %ld points", static_cast<long>(q))};
}

// --------------------------------------------------------------------------
// 4. Simulation fidelity

double zeta_pair(const Eigen::MatrixXd& Z) { return Z.rows() / (1.0 / Z.rowwise().maxCoeff().array()).sum(); }

Outcome criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(derive_seed(kSeed, {4}));
  Eigen::MatrixXd L(kSimDraws, 2), H(kSimDraws, 2);
  for (Index i = 0; i < kSimDraws; ++i) L.row(i) = sample_logistic_factor(2, 0.25, rng).transpose();
  Eigen::Matrix2d G;
  G << 0, 1, 1, 0;
  const HrFactorSampler hr(G);
  for (Index i = 0; i < kSimDraws; ++i) H.row(i) = hr.draw(rng).transpose();
  const double zl = zeta_pair(L), zh = zeta_pair(H);
  const double zlTrue = std::pow(2.0, 0.25), zhTrue = 2.0 * normal_cdf(0.5);
  double minP = 1.0;
  for (const Eigen::MatrixXd* M : {&L, &H})
    for (Index j = 0; j < 2; ++j) {
      std::vector<double> v(M->col(j).data(), M->col(j).data() + M->rows());
      const auto ks = testsupport::ks_test(v, testsupport::frechet_cdf);
      minP = std::min(minP, ks.pValue);
    }
  const double sec = elapsed(t0);
  detail(fmt("logistic zeta %.4f (target %.4f), HR zeta %.4f (target %.4f), smallest KS p-value %.3f, %.1f s", zl, zlTrue, zh,
             zhTrue, minP, sec));
  const bool ok = std::abs(zl - zlTrue) <= kZetaTol && std::abs(zh - zhTrue) <= kZetaTol && minP > kKsLevel && sec < kSimSeconds;
  return {ok, fmt("simulation fidelity: zeta %.3f / %.3f, KS p >= %.3f", zl, zh, minP)};
}

// --------------------------------------------------------------------------
// 5. Estimator sanity

Outcome criterion5() {
  const Eigen::MatrixXd grid = generate_grid(4, kGridValues, {2, 3});
  const MixtureParams truth = MixtureParams::logistic(benchmark_A(), 0.25);
  const GridStdf model(grid);
  const Eigen::VectorXd ell = model.evaluate(truth);
  FitConfig cfg;
  cfg.grid = grid;
  cfg.k = 60;
  cfg.penalty.lambda = 0.0;
  const MixtureParams fit = pnpls_fit(ell, grid, truth, cfg);
  const double loss = ls_loss(fit, ell, model, cfg.penalty).total;

  std::mt19937_64 rng(derive_seed(kSeed, {5}));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int exact = 0;
  for (int i = 0; i < kDecompositionDraws; ++i) {
    const MixtureParams th = MixtureParams::logistic(random_A(rng, 4, 1 + i % 4), 0.05 + 0.9 * u(rng));
    const PenaltySpec pen{0.1 + 0.9 * u(rng), 2.0 * u(rng)};
    const LossParts lp = ls_loss(th, ell, model, pen);
    const double data = (ell - model.evaluate(th)).squaredNorm();
    if (lp.total == lp.data + pen.lambda * lp.penalty && lp.data == data && lp.penalty == penalty(th.A, pen.p)) ++exact;
  }
  detail(fmt("noiseless loss at truth after lambda=0 fit: %.3e; decomposition exact on %d/%d", loss, exact, kDecompositionDraws));
  return {loss <= kNoiselessLoss && exact == kDecompositionDraws,
          fmt("estimator sanity: noiseless loss %.1e, decomposition %d/%d", loss, exact, kDecompositionDraws)};
}

// --------------------------------------------------------------------------
// 6. Known-r study

StudySpec known_r_spec() {
  StudySpec spec;
  spec.truth = MixtureParams::logistic(benchmark_A(), 0.25);
  spec.noiseSigma = kNoiseSigma;
  spec.mode = StudyMode::KnownR;
  spec.replicates = kStudyReplicates;
  spec.n = {kStudyN};
  spec.kFrac = {kKnownRKFrac};
  spec.p = {0.4};
  spec.lambda.cv = true;
  spec.lambda.grid = kCvGrid;
  spec.lambda.folds = kCvFolds;
  spec.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  spec.seed = derive_seed(kSeed, {6});
  spec.base.grid = generate_grid(4, kGridValues, {2, 3});
  spec.base.k = 1;
  return spec;
}

std::string direction_text(const DirectionSet& s) {
  std::string out;
  for (const auto& J : s) out += signature_label(J);
  return out.empty() ? "{}" : out;
}

Outcome criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  const StudySpec spec = known_r_spec();
  const StudyResult res = run_study(spec);
  const double minutes = elapsed(t0) / 60.0;
  for (const auto& r : res.replicates)
    detail(fmt("replicate %2d lambda %.3f distance %.3f %s%s", r.replicate, r.lambda, r.distance, direction_text(r.directions).c_str(),
               r.failed ? (" FAILED: " + r.error).c_str() : ""));
  const CellSummary& c = res.cells.front();
  detail(fmt("ED-S %.4f, exact recovery %.2f, SMSE %.4f (%d used), failed %d, %.1f min", c.ed.mean, c.ed.exactRate, c.smse.value,
             c.smse.used, c.failed, minutes));
  const double exact = c.ed.exactRate * (c.replicates - c.failed) / c.replicates;
  const bool ok = c.ed.mean <= kKnownREdMax && exact >= kKnownRExactMin && minutes <= kKnownRMinutes;
  return {ok, fmt("known-r study: ED-S %.3f (<= %.2f), exact %.0f%% (>= %.0f%%), %.1f min", c.ed.mean, kKnownREdMax, 100 * exact,
                  100 * kKnownRExactMin, minutes)};
}

// --------------------------------------------------------------------------
// 7. Unknown-r study

StudySpec identify_spec(const MixtureParams& truth) {
  StudySpec spec;
  spec.truth = truth;
  spec.noiseSigma = kNoiseSigma;
  spec.fitFamily = Family::Logistic;
  spec.mode = StudyMode::Identify;
  spec.replicates = kStudyReplicates;
  spec.n = {kStudyN};
  spec.kFrac = {kIdentifyKFrac};
  spec.p = {0.4};
  spec.lambda.value = kIdentifyLambda;
  spec.tMax = kIdentifyTMax;
  spec.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  spec.seed = derive_seed(kSeed, {7});
  spec.base.grid = generate_grid(4, kGridValues, {2, 3});
  spec.base.k = 1;
  spec.base.starts = kIdentifyStarts;
  return spec;
}

Outcome criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  const StudyResult lg = run_study(identify_spec(MixtureParams::logistic(benchmark_A(), 0.25)));
  int hits = 0;
  for (const auto& r : lg.replicates) {
    hits += !r.failed && r.tFinal == 5;
    detail(fmt("logistic data, replicate %2d t %d distance %.3f %s%s", r.replicate, r.tFinal, r.distance,
               direction_text(r.directions).c_str(), r.failed ? (" FAILED: " + r.error).c_str() : ""));
  }
  const StudyResult hr = run_study(identify_spec(MixtureParams::husler_reiss(benchmark_A(), benchmark_gamma())));
  for (const auto& r : hr.replicates)
    detail(fmt("HR data, replicate %2d t %d distance %.3f %s%s", r.replicate, r.tFinal, r.distance, direction_text(r.directions).c_str(),
               r.failed ? (" FAILED: " + r.error).c_str() : ""));
  const CellSummary& a = lg.cells.front();
  const CellSummary& b = hr.cells.front();
  const double rate = static_cast<double>(hits) / kStudyReplicates;
  detail(fmt("logistic data: tFinal=5 in %d/%d, ED-S %.4f, exact %.2f, failed %d", hits, kStudyReplicates, a.ed.mean, a.ed.exactRate,
             a.failed));
  detail(fmt("HR data, logistic fit: tFinal=5 rate %.2f, ED-S %.4f, exact %.2f, failed %d", b.tFinalHit, b.ed.mean, b.ed.exactRate,
             b.failed));
  detail(fmt("%.1f min", elapsed(t0) / 60.0));
  const bool ok = rate >= kIdentifyHitMin && a.failed == 0 && b.failed == 0 && std::isfinite(b.ed.mean);
  return {ok, fmt("unknown-r study: tFinal=5 in %.0f%% (>= %.0f%%); misspecified cell ED-S %.3f, %d failures", 100 * rate,
                  100 * kIdentifyHitMin, b.ed.mean, b.failed)};
}

// --------------------------------------------------------------------------
// 8. Sparsity mechanism

Outcome criterion8() {
  const StudySpec spec = known_r_spec();
  const std::uint64_t dataSeed = derive_seed(spec.seed, {static_cast<std::uint64_t>(kStudyN), 0});
  const Eigen::MatrixXd X = sample_mixture({spec.truth, kStudyN, kNoiseSigma, dataSeed});
  FitConfig cfg = spec.base;
  cfg.k = tail_count(kStudyN, kKnownRKFrac);
  cfg.seed = derive_seed(dataSeed, {1});
  auto zeros = [](const Eigen::MatrixXd& A) { return static_cast<int>((A.array() == 0.0).count()); };
  auto clean = [&](const Eigen::MatrixXd& A) { return ((A.array() == 0.0) || (A.array() > cfg.zeroTol)).all(); };
  cfg.penalty.lambda = 0.0;
  const FitReport base = fit_known_r(X, 4, cfg);
  const int z0 = zeros(base.theta.A);
  bool allClean = clean(base.theta.A);
  int best = z0;
  double bestLambda = 0.0;
  std::string line = fmt("zeros: lambda=0 -> %d", z0);
  for (double l : kCvGrid) {
    cfg.penalty.lambda = l;
    const FitReport f = fit_known_r(X, 4, cfg);
    const int z = zeros(f.theta.A);
    allClean = allClean && clean(f.theta.A);
    line += fmt(", %.2f -> %d", l, z);
    if (z > best) {
      best = z;
      bestLambda = l;
    }
  }
  detail(line);
  return {best > z0 && allClean,
          fmt("sparsity: %d exact zeros at lambda %.2f vs %d at lambda 0, thresholding clean: %s", best, bestLambda, z0,
              allClean ? "yes" : "no")};
}

// --------------------------------------------------------------------------
// 9. Metrics oracles

Outcome criterion9() {
  std::mt19937_64 rng(derive_seed(kSeed, {9}));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int matchOk = 0;
  for (int i = 0; i < kMatchInstances; ++i) {
    Eigen::MatrixXd A(4, 3), B(4, 3);
    for (Index e = 0; e < A.size(); ++e) {
      A(e) = u(rng);
      B(e) = u(rng);
    }
    const ColumnMatch m = match_columns(B, A);
    const auto [perm, cost] = testsupport::brute_match(B, A);
    bool same = std::abs(m.residual - cost) <= kOracleTol;
    for (int s = 0; s < 3; ++s) same = same && m.perm[static_cast<std::size_t>(s)] == perm[static_cast<std::size_t>(s)];
    matchOk += same;
  }

  const MixtureParams truth = MixtureParams::logistic(benchmark_A(), 0.25);
  const DirectionSet truthDirs = direction_set(signatures(truth.A));
  std::vector<Signature> pool;
  for (int mask = 1; mask < 16; ++mask) {
    Signature s;
    for (int j = 0; j < 4; ++j)
      if (mask >> j & 1) s.push_back(j);
    pool.push_back(s);
  }
  int smseOk = 0, edOk = 0;
  for (int set = 0; set < kScoreSets; ++set) {
    const int N = 2 + set % 9;
    std::vector<MixtureParams> est;
    std::vector<Eigen::MatrixXd> As;
    std::vector<double> alphas;
    std::vector<DirectionSet> dirs;
    for (int l = 0; l < N; ++l) {
      Eigen::MatrixXd Ah = benchmark_A();
      for (Index e = 0; e < Ah.size(); ++e)
        if (u(rng) < 0.5) Ah(e) = std::max(0.0, Ah(e) + 0.2 * (u(rng) - 0.5));
      if (u(rng) < 0.3) Ah.col(0).swap(Ah.col(2));
      const double a = 0.1 + 0.3 * u(rng);
      est.push_back(MixtureParams::logistic(Ah, a));
      As.push_back(Ah);
      alphas.push_back(a);
      DirectionSet d;
      const int size = 1 + static_cast<int>(u(rng) * 5);
      for (int k = 0; k < size; ++k) d.insert(pool[static_cast<std::size_t>(u(rng) * pool.size())]);
      dirs.push_back(d);
    }
    const double lib = smse(est, truth).value;
    const double ref = testsupport::brute_smse(As, alphas, truth.A, 0.25);
    smseOk += std::abs(lib - ref) <= kOracleTol * std::max(1.0, ref);
    const EdScore ed = ed_score(dirs, truthDirs);
    double mean = 0.0;
    int exact = 0;
    for (const auto& d : dirs) {
      const double j = testsupport::brute_jaccard(d, truthDirs);
      mean += j / N;
      exact += j == 0.0;
    }
    edOk += std::abs(ed.mean - mean) <= kOracleTol && ed.exactRate == static_cast<double>(exact) / N;
  }
  const double perfect = smse({truth, truth, truth}, truth).value;
  detail(fmt("match %d/%d, smse %d/%d, ed %d/%d, perfect smse %.1f", matchOk, kMatchInstances, smseOk, kScoreSets, edOk, kScoreSets,
             perfect));
  return {matchOk == kMatchInstances && smseOk == kScoreSets && edOk == kScoreSets && perfect == 0.0,
          fmt("metric oracles: matching %d/%d, SMSE %d/%d, ED-S %d/%d, perfect SMSE %g", matchOk, kMatchInstances, smseOk, kScoreSets,
              edOk, kScoreSets, perfect)};
}

// --------------------------------------------------------------------------
// 10. Determinism

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mixstdf");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) detail("cli failed: " + err.str());
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Outcome criterion10() {
  const fs::path root = fs::temp_directory_path() / "mixstdf_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path model = root / "model.json";
  write_json(model.string(), params_to_json(MixtureParams::logistic(benchmark_A(), 0.25)));
  const fs::path studyCfg = root / "study.json";
  std::ofstream(studyCfg) << R"({"mode": "identify", "replicates": 2, "n": [600], "k_frac": 0.05, "lambda": 0.1,
                               "t_max": 5, "noise_sigma": 3.0, "threads": 2})";
  bool ran = true;
  for (const std::string run : {"a", "b"}) {
    const fs::path dir = root / run;
    fs::create_directories(dir);
    const std::string d = dir.string() + "/";
    ran = ran && cli({"simulate", "--model-file", model.string(), "--n", "1500", "--noise-sigma", "3", "--seed", "11", "--output",
                      d + "x.csv"}) == 0;
    ran = ran && cli({"fit", "--input", d + "x.csv", "--r", "4", "--lambda", "0.04", "--k-frac", "0.04", "--seed", "5",
                      "--output", d + "fit"}) == 0;
    ran = ran && cli({"identify", "--input", d + "x.csv", "--lambda", "0.1", "--k-frac", "0.04", "--t-max", "6", "--starts", "2",
                      "--seed", "5", "--output", d + "id"}) == 0;
    ran = ran && cli({"study", "--config", studyCfg.string(), "--model-file", model.string(), "--seed", "3", "--output",
                      d + "study"}) == 0;
  }
  int files = 0, identical = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    if (entry.path().extension() == ".log") continue;
    ++files;
    const std::string a = slurp(entry.path());
    const std::string b = slurp(root / "b" / entry.path().filename());
    if (!a.empty() && a == b) ++identical;
    else detail("differs: " + entry.path().filename().string());
  }
  detail(fmt("%d/%d output files identical across two runs", identical, files));
  return {ran && files >= 8 && identical == files,
          fmt("determinism: simulate -> fit -> identify -> study, %d/%d files byte-identical", identical, files)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                          criterion6, criterion7, criterion8, criterion9, criterion10};
  std::set<int> chosen;
  for (int i = 1; i < argc; ++i) chosen.insert(std::atoi(argv[i]));
  int failed = 0;
  for (int c = 1; c <= static_cast<int>(criteria.size()); ++c) {
    if (!chosen.empty() && !chosen.count(c)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(c - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c << ": " << o.summary << fmt(" [%.1f s]", elapsed(t0)) << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
