#include "mixstdf/study.hpp"

#include <doctest.h>

using namespace mixstdf;

namespace {

StudySpec small_study() {
  Eigen::MatrixXd A(3, 2);
  A << 1, 0, 0.5, 0.5, 0, 1;
  StudySpec spec;
  spec.truth = MixtureParams::logistic(A, 0.3);
  spec.noiseSigma = 0.5;
  spec.replicates = 3;
  spec.n = {400};
  spec.kFrac = {0.1};
  spec.p = {0.4};
  spec.lambda.value = 0.02;
  spec.seed = 9;
  spec.base.grid = generate_grid(3, {0.5, 1.0}, {2, 3});
  spec.base.k = 1;
  return spec;
}

}  // namespace

TEST_CASE("study runs are reproducible across thread counts") {
  StudySpec spec = small_study();
  const StudyResult a = run_study(spec);
  spec.threads = 3;
  const StudyResult b = run_study(spec);
  REQUIRE(a.cells.size() == 1);
  CHECK(a.cells[0].replicates == 3);
  CHECK(a.cells[0].failed == 0);
  CHECK(a.cells[0].ed.mean == b.cells[0].ed.mean);
  CHECK(a.cells[0].smse.value == b.cells[0].smse.value);
  REQUIRE(a.replicates.size() == b.replicates.size());
  for (std::size_t i = 0; i < a.replicates.size(); ++i) {
    CHECK(a.replicates[i].dataSeed == b.replicates[i].dataSeed);
    CHECK(a.replicates[i].theta.A == b.replicates[i].theta.A);
  }
}

TEST_CASE("identify-mode study and validation") {
  StudySpec spec = small_study();
  spec.mode = StudyMode::Identify;
  spec.tMax = 3;
  spec.replicates = 2;
  const StudyResult r = run_study(spec);
  CHECK(r.cells[0].failed == 0);
  CHECK(r.cells[0].tFinalHit >= 0.0);
  spec.replicates = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}
