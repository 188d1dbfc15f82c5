#include "mixstdf/cli.hpp"
#include "mixstdf/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mixstdf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mixstdf_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int cli(std::vector<std::string> args, std::string* outText = nullptr) {
  args.insert(args.begin(), "mixstdf");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (outText) *outText = out.str() + err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("parameter JSON round trip") {
  Eigen::MatrixXd A(3, 2);
  A << 0.5, 0.5, 1, 0, 0, 1;
  MixtureParams lg = MixtureParams::logistic(A, 0.3);
  MixtureParams back = params_from_json(params_to_json(lg));
  CHECK(back.A == lg.A);
  CHECK(back.alpha == lg.alpha);
  Eigen::Matrix3d G;
  G << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  MixtureParams hr = MixtureParams::husler_reiss(A, G);
  back = params_from_json(params_to_json(hr));
  CHECK(back.family == Family::HuslerReiss);
  CHECK(back.gamma.front() == G);
  Json j = params_to_json(lg);
  j["extra"] = 1;
  CHECK_THROWS(params_from_json(j));
  CHECK(signature_label({0, 2, 3}) == "{1,3,4}");
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("CSV round trip") {
  const fs::path dir = scratch("csv");
  Eigen::MatrixXd M(2, 3);
  M << 1.5, -2, 1e-300, 0.1, 3, 7;
  write_csv((dir / "m.csv").string(), M, {"a", "b", "c"});
  CHECK(read_csv((dir / "m.csv").string()) == M);
  CHECK_THROWS_AS(read_csv((dir / "missing.csv").string()), std::invalid_argument);
}

TEST_CASE("command-line exit codes") {
  const fs::path dir = scratch("codes");
  CHECK(cli({}) == 2);
  CHECK(cli({"nonsense"}) == 2);
  CHECK(cli({"fit", "--input", (dir / "missing.csv").string(), "--r", "2"}) == 2);
  const fs::path cfg = dir / "bad.json";
  std::ofstream(cfg) << R"({"n": 10, "unknown_key": 3})";
  std::string msg;
  CHECK(cli({"simulate", "--config", cfg.string()}, &msg) == 2);
  CHECK(msg.find("unknown_key") != std::string::npos);
  CHECK(cli({"--help"}) == 0);
}

TEST_CASE("command-line pipeline is byte reproducible") {
  const fs::path dir = scratch("pipeline");
  const fs::path model = dir / "model.json";
  std::ofstream(model) << R"({"family": "logistic", "d": 3, "r": 2, "A": [1, 0, 0.5, 0.5, 0, 1], "alpha": 0.3})";
  auto run = [&](const std::string& tag) {
    const std::string base = (dir / tag).string();
    REQUIRE(cli({"simulate", "--model-file", model.string(), "--n", "600", "--noise-sigma", "0.5", "--seed", "4", "--output",
                 base + "_x.csv"}) == 0);
    REQUIRE(cli({"fit", "--input", base + "_x.csv", "--r", "2", "--lambda", "0.02", "--k-frac", "0.1", "--seed", "2", "--output",
                 base + "_fit"}) == 0);
    REQUIRE(cli({"identify", "--input", base + "_x.csv", "--lambda", "0.02", "--k-frac", "0.1", "--t-max", "3", "--output",
                 base + "_id"}) == 0);
    REQUIRE(cli({"diagnose", "--input", base + "_x.csv", "--model-file", base + "_fit.json", "--k-frac", "0.1", "--output",
                 base + "_chi.csv"}) == 0);
  };
  run("a");
  run("b");
  for (const std::string suffix : {"_x.csv", "_x.csv.json", "_fit.json", "_fit_loss.csv", "_id.json", "_id_directions.csv", "_chi.csv"}) {
    const std::string a = slurp(dir / ("a" + suffix)), b = slurp(dir / ("b" + suffix));
    CHECK_MESSAGE(!a.empty(), suffix);
    CHECK_MESSAGE(a == b, suffix);
  }
  const Json fit = read_json((dir / "a_fit.json").string());
  CHECK(fit.at("signatures").size() == 2);
}
