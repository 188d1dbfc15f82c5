#include "mixstdf/empirical.hpp"
#include "mixstdf/estimate.hpp"
#include "mixstdf/simulate.hpp"

#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <random>
#include <set>

using namespace mixstdf;

namespace {

Eigen::MatrixXd benchmark_A() {
  Eigen::MatrixXd A(4, 4);
  A << 1. / 3, 1. / 3, 1. / 3, 0, 0.5, 0, 0, 0.5, 0, 0.75, 0.25, 0, 0, 0.5, 0, 0.5;
  return A;
}

const std::vector<double> kValues = {0.25, 1. / 3, 0.5, 0.75, 1.0};

bool same_set(const std::vector<Signature>& a, const std::vector<Signature>& b) {
  return std::set<Signature>(a.begin(), a.end()) == std::set<Signature>(b.begin(), b.end());
}

}  // namespace

TEST_CASE("penalty values") {
  CHECK(penalty(benchmark_A(), 1.0) == doctest::Approx(4.0));
  CHECK(penalty(Eigen::MatrixXd::Identity(3, 3), 0.4) == doctest::Approx(3.0));
  const Eigen::MatrixXd U = Eigen::MatrixXd::Constant(4, 3, 1.0 / 3.0);
  CHECK(penalty(U, 0.4) == doctest::Approx(4.0 * std::pow(3.0, 1.0 / 0.4 - 1.0)));
  Eigen::MatrixXd A(1, 2);
  A << 0.5, 0.5;
  CHECK(penalty(A, 0.5) == doctest::Approx(std::pow(2 * std::sqrt(0.5), 2.0)));
  A(0, 0) = -0.1;
  CHECK_THROWS_AS(penalty(A, 0.5), std::domain_error);
  CHECK_THROWS_AS(penalty(U, 0.0), std::domain_error);
}

TEST_CASE("grid generation") {
  CHECK(generate_grid(4, kValues, {2, 3}).rows() == 650);
  CHECK(generate_grid(5, kValues, {2, 3}).rows() == 1500);
  CHECK(generate_grid(3, {1.0}, {1, 2, 3}).rows() == 7);
  const Eigen::MatrixXd G = generate_grid(3, {0.5, 1.0}, {2});
  REQUIRE(G.rows() == 12);
  CHECK(G.row(0) == Eigen::RowVector3d(0.5, 0.5, 0.0));
  CHECK(G.row(1) == Eigen::RowVector3d(0.5, 1.0, 0.0));
  CHECK(G.row(4) == Eigen::RowVector3d(0.5, 0.0, 0.5));
}

TEST_CASE("row standardisation") {
  Eigen::MatrixXd A(3, 2);
  A << 1, 3, 0, 0, 2e-5, 1e-5;
  const StandardizeResult s = standardize_rows(A);
  CHECK(s.A.row(0).isApprox(Eigen::RowVector2d(0.25, 0.75)));
  CHECK(s.A.row(1) == Eigen::RowVector2d(1, 0));
  CHECK(s.A.row(2) == Eigen::RowVector2d(1, 0));
  CHECK(s.repairedRows == std::vector<Index>{1, 2});
}

TEST_CASE("grid evaluator agrees with the pointwise stdf") {
  const Eigen::MatrixXd grid = generate_grid(4, kValues, {2, 3});
  GridStdf model(grid);
  const MixtureParams lg = MixtureParams::logistic(benchmark_A(), 0.25);
  Eigen::MatrixXd G(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) G(i, j) = 0.6 * std::abs(i - j);
  const MixtureParams hr = MixtureParams::husler_reiss(benchmark_A(), G);
  for (const auto* th : {&lg, &hr}) {
    const Eigen::VectorXd v = model.evaluate(*th);
    GridStdf::CachedEvaluator cache(model);
    const Eigen::VectorXd c1 = cache.evaluate(*th);
    const Eigen::VectorXd c2 = cache.evaluate(*th);
    for (Index m = 0; m < grid.rows(); m += 7) CHECK(v(m) == doctest::Approx(stdf_mixture(grid.row(m).transpose(), *th)).epsilon(1e-10));
    CHECK((c1 - v).norm() == 0.0);
    CHECK((c2 - v).norm() == 0.0);
  }
}

TEST_CASE("loss decomposition and the noiseless fit") {
  const Eigen::MatrixXd grid = generate_grid(4, kValues, {2, 3});
  const MixtureParams truth = MixtureParams::logistic(benchmark_A(), 0.25);
  GridStdf model(grid);
  const Eigen::VectorXd ell = model.evaluate(truth);
  const PenaltySpec pen{0.4, 0.7};
  const LossParts lp = ls_loss(truth, ell, model, pen);
  CHECK(lp.data == 0.0);
  CHECK(lp.total == lp.data + 0.7 * lp.penalty);

  FitConfig cfg;
  cfg.grid = grid;
  cfg.k = 10;
  cfg.penalty.lambda = 0.0;
  const MixtureParams fitted = pnpls_fit(ell, grid, truth, cfg);
  CHECK(ls_loss(fitted, ell, model, cfg.penalty).total <= 1e-10);
}

TEST_CASE("configuration validation") {
  FitConfig cfg;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.grid = generate_grid(3, {1.0}, {2});
  cfg.k = 5;
  CHECK_NOTHROW(cfg.validate());
  cfg.starts = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("k-means start") {
  const MixtureParams truth = MixtureParams::logistic(benchmark_A(), 0.25);
  const Eigen::MatrixXd X = sample_mixture({truth, 2000, 0.0, 5});
  const KmeansStart ks = kmeans_start(X, 4, 3);
  CHECK_FALSE(ks.fallback);
  REQUIRE(ks.A.rows() == 4);
  REQUIRE(ks.A.cols() == 4);
  CHECK((ks.A.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK((ks.A.array() >= 0.0).all());
  const KmeansStart fb = kmeans_start(X.topRows(20), 4, 3);
  CHECK(fb.fallback);
  CHECK(fb.A.isApprox(Eigen::MatrixXd::Constant(4, 4, 0.25)));
}

TEST_CASE("known-r fit recovers the benchmark signatures") {
  const MixtureParams truth = MixtureParams::logistic(benchmark_A(), 0.25);
  const Eigen::MatrixXd X = sample_mixture({truth, 3000, 0.0, 2});
  FitConfig cfg;
  cfg.grid = generate_grid(4, kValues, {2, 3});
  cfg.k = 150;
  cfg.penalty.lambda = 0.02;
  cfg.seed = 4;
  const FitReport one = fit_known_r(X, 4, cfg, truth);
  CHECK(same_set(one.signatures, signatures(truth.A)));
  CHECK((one.theta.A.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(one.lossTrace.size() >= 2);
  cfg.starts = 3;
  const FitReport multi = fit_known_r(X, 4, cfg);
  CHECK(multi.startLosses.size() == 3);
  cfg.starts = 1;
  const FitReport single = fit_known_r(X, 4, cfg);
  CHECK(multi.finalLoss.total <= single.finalLoss.total);
  CHECK(multi.finalLoss.total == *std::min_element(multi.startLosses.begin(), multi.startLosses.end()));
}
