#include "mixstdf/cli.hpp"

#include "mixstdf/cv.hpp"
#include "mixstdf/directions.hpp"
#include "mixstdf/empirical.hpp"
#include "mixstdf/io.hpp"
#include "mixstdf/simulate.hpp"
#include "mixstdf/study.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

namespace mixstdf {

namespace {

class UsageError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw UsageError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw UsageError(where + ": unknown key '" + key + "'");
}

template <typename T>
T get_or(const Json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw UsageError("config key '" + key + "' has the wrong type");
  }
}

std::string require_string(const Json& j, const std::string& key) {
  if (!j.contains(key)) throw UsageError("config key '" + key + "' is required");
  return get_or<std::string>(j, key, "");
}

// Keys understood by every command that fits a model.
const std::set<std::string> kFitKeys = {"family",        "k",         "k_frac",      "p",
                                        "lambda",        "grid",      "zero_tol",    "stop_eps",
                                        "max_alt_iters", "per_column", "alpha_start", "gamma_start",
                                        "random_start",  "kmeans_restarts", "angular_kmeans", "max_evals",
                                        "starts",        "merge_duplicates", "cv"};
const std::set<std::string> kCommonKeys = {"seed", "output", "log"};

std::set<std::string> keys(std::initializer_list<std::set<std::string>> parts) {
  std::set<std::string> out;
  for (const auto& p : parts) out.insert(p.begin(), p.end());
  return out;
}

Eigen::MatrixXd grid_from_json(const Json& cfg, Index d) {
  std::vector<double> values = {0.25, 1.0 / 3.0, 0.5, 0.75, 1.0};
  std::vector<int> counts;
  for (int c : {2, 3})
    if (c <= d) counts.push_back(c);
  if (counts.empty()) counts.push_back(1);
  if (cfg.contains("grid")) {
    const Json& g = cfg.at("grid");
    check_keys(g, {"values", "counts"}, "grid");
    values = get_or(g, "values", values);
    counts = get_or(g, "counts", counts);
  }
  return generate_grid(d, values, counts);
}

LambdaChoice lambda_choice(const Json& cfg) {
  LambdaChoice choice;
  choice.grid = {0.01, 0.02, 0.04, 0.08};
  if (cfg.contains("cv")) {
    const Json& c = cfg.at("cv");
    check_keys(c, {"folds", "grid", "greedy", "max_refinements", "shuffle"}, "cv");
    choice.folds = get_or(c, "folds", choice.folds);
    choice.grid = get_or(c, "grid", choice.grid);
    choice.greedy = get_or(c, "greedy", choice.greedy);
    choice.maxRefinements = get_or(c, "max_refinements", choice.maxRefinements);
    choice.shuffle = get_or(c, "shuffle", choice.shuffle);
    if (choice.greedy && !c.contains("grid")) choice.grid = {0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1};
  }
  if (cfg.contains("lambda")) {
    const Json& l = cfg.at("lambda");
    if (l.is_string()) {
      if (l.get<std::string>() != "cv") throw UsageError("lambda must be a number or \"cv\"");
      choice.cv = true;
    } else if (l.is_number()) {
      choice.value = l.get<double>();
      if (!(choice.value >= 0.0)) throw UsageError("lambda must be >= 0");
    } else {
      throw UsageError("lambda must be a number or \"cv\"");
    }
  }
  return choice;
}

FitConfig fit_config(const Json& cfg, Index n, Index d) {
  FitConfig fc;
  fc.grid = grid_from_json(cfg, d);
  if (cfg.contains("k")) {
    fc.k = get_or(cfg, "k", 0);
    if (fc.k < 1 || fc.k > n) throw UsageError("k must lie in 1..n");
  } else {
    const double kf = get_or(cfg, "k_frac", 0.02);
    if (!(kf > 0.0 && kf <= 1.0)) throw UsageError("k_frac must lie in (0,1]");
    fc.k = tail_count(n, kf);
  }
  fc.family = family_from_string(get_or<std::string>(cfg, "family", "logistic"));
  fc.penalty.p = get_or(cfg, "p", 0.4);
  fc.zeroTol = get_or(cfg, "zero_tol", fc.zeroTol);
  fc.stopEps = get_or(cfg, "stop_eps", fc.stopEps);
  fc.maxAltIters = get_or(cfg, "max_alt_iters", fc.maxAltIters);
  fc.perColumnDependence = get_or(cfg, "per_column", fc.perColumnDependence);
  fc.alphaStart = get_or(cfg, "alpha_start", fc.alphaStart);
  fc.gammaStart = get_or(cfg, "gamma_start", fc.gammaStart);
  fc.randomDependenceStart = get_or(cfg, "random_start", fc.randomDependenceStart);
  fc.kmeansRestarts = get_or(cfg, "kmeans_restarts", fc.kmeansRestarts);
  fc.angularKmeans = get_or(cfg, "angular_kmeans", fc.angularKmeans);
  fc.starts = get_or(cfg, "starts", fc.starts);
  fc.mergeDuplicates = get_or(cfg, "merge_duplicates", fc.mergeDuplicates);
  fc.optim.maxEvals = get_or(cfg, "max_evals", fc.optim.maxEvals);
  fc.seed = get_or<std::uint64_t>(cfg, "seed", 1);
  fc.validate();
  return fc;
}

MixtureParams model_from_config(const Json& cfg) {
  if (cfg.contains("model") && cfg.contains("model_file")) throw UsageError("give either model or model_file");
  if (cfg.contains("model")) return params_from_json(cfg.at("model"));
  if (!cfg.contains("model_file")) throw UsageError("a model or model_file is required");
  const Json j = read_json(require_string(cfg, "model_file"));
  if (j.contains("theta")) return params_from_json(j.at("theta"));
  if (j.contains("fits") && j.at("fits").is_array() && !j.at("fits").empty()) return params_from_json(j.at("fits").back().at("theta"));
  if (j.contains("model")) return params_from_json(j.at("model"));
  return params_from_json(j);
}

class Logger {
 public:
  explicit Logger(const std::string& path) {
    if (path.empty()) return;
    file_.open(path);
    if (!file_) throw std::runtime_error("cannot write " + path);
  }
  void line(const std::string& msg) {
    if (file_) file_ << msg << '\n' << std::flush;
  }
  void fit(const std::string& tag, const FitReport& rep) {
    for (const auto& s : rep.stages) {
      std::ostringstream os;
      os << tag << " stage=\"" << s.name << "\" status=" << to_string(s.status) << " evals=" << s.evals
         << " loss=" << format_double(s.loss) << " seconds=" << s.seconds;
      line(os.str());
    }
  }

 private:
  std::ofstream file_;
};

std::string output_path(const Json& cfg, const std::string& fallback) { return get_or<std::string>(cfg, "output", fallback); }

std::string log_path(const Json& cfg, const std::string& output) { return get_or<std::string>(cfg, "log", output + ".log"); }

std::string seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

// ---------------------------------------------------------------------------

void cmd_simulate(const Json& cfg, std::ostream& out) {
  check_keys(cfg, keys({kCommonKeys, {"model", "model_file", "n", "noise_sigma"}}), "simulate");
  SimSpec spec;
  spec.theta = model_from_config(cfg);
  spec.n = get_or<Index>(cfg, "n", 0);
  spec.noiseSigma = get_or(cfg, "noise_sigma", 0.0);
  spec.seed = get_or<std::uint64_t>(cfg, "seed", 1);
  spec.validate();
  const std::string path = output_path(cfg, "sample.csv");
  Logger log(log_path(cfg, path));
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::MatrixXd X = sample_mixture(spec);
  log.line("simulate n=" + std::to_string(spec.n) + " seconds=" + seconds_since(t0));
  std::vector<std::string> header;
  for (Index j = 0; j < X.cols(); ++j) header.push_back("x" + std::to_string(j + 1));
  write_csv(path, X, header);
  Json side;
  side["model"] = params_to_json(spec.theta);
  side["n"] = spec.n;
  side["noise_sigma"] = spec.noiseSigma;
  side["seed"] = spec.seed;
  write_json(path + ".json", side);
  out << "wrote " << path << " (" << X.rows() << " x " << X.cols() << ")\n";
}

Eigen::MatrixXd load_sample(const Json& cfg) {
  const Eigen::MatrixXd X = read_csv(require_string(cfg, "input"));
  if (!X.allFinite()) throw UsageError("sample contains non-finite values");
  return X;
}

void cmd_fit(const Json& cfg, std::ostream& out) {
  check_keys(cfg, keys({kCommonKeys, kFitKeys, {"input", "r"}}), "fit");
  const Eigen::MatrixXd X = load_sample(cfg);
  const int r = get_or(cfg, "r", 0);
  if (r < 1) throw UsageError("r must be >= 1");
  FitConfig fc = fit_config(cfg, X.rows(), X.cols());
  const LambdaChoice choice = lambda_choice(cfg);
  const std::string prefix = output_path(cfg, "fit");
  Logger log(log_path(cfg, prefix));
  auto t0 = std::chrono::steady_clock::now();
  std::vector<CvScore> trace;
  fc.penalty.lambda = choose_lambda(X, r, fc, choice, &trace);
  if (choice.cv) log.line("cv lambda=" + format_double(fc.penalty.lambda) + " seconds=" + seconds_since(t0));
  t0 = std::chrono::steady_clock::now();
  const FitReport rep = fit_known_r(X, r, fc);
  log.fit("fit", rep);
  log.line("fit total seconds=" + seconds_since(t0));
  Json j = fit_report_to_json(rep);
  j["k"] = fc.k;
  j["p"] = fc.penalty.p;
  write_json(prefix + ".json", j);
  Eigen::MatrixXd lt(static_cast<Index>(rep.lossTrace.size()), 2);
  for (std::size_t i = 0; i < rep.lossTrace.size(); ++i) lt.row(static_cast<Index>(i)) << static_cast<double>(i), rep.lossTrace[i];
  write_csv(prefix + "_loss.csv", lt, {"step", "loss"});
  out << "signatures:";
  for (const auto& s : rep.signatures) out << ' ' << signature_label(s);
  out << "\nwrote " << prefix << ".json\n";
}

void cmd_identify(const Json& cfg, std::ostream& out) {
  check_keys(cfg, keys({kCommonKeys, kFitKeys, {"input", "t_max"}}), "identify");
  const Eigen::MatrixXd X = load_sample(cfg);
  const FitConfig fc = fit_config(cfg, X.rows(), X.cols());
  const LambdaChoice choice = lambda_choice(cfg);
  const int tMax = get_or(cfg, "t_max", 0);
  const std::string prefix = output_path(cfg, "directions");
  Logger log(log_path(cfg, prefix));
  const auto t0 = std::chrono::steady_clock::now();
  DirectionReport rep;
  try {
    rep = identify_directions(X, fc, tMax, [&](int t) { return choose_lambda(X, t, fc, choice); });
  } catch (const DirectionError& e) {
    write_json(prefix + ".json", direction_report_to_json(e.partial()));
    throw;
  }
  for (std::size_t i = 0; i < rep.fits.size(); ++i) log.fit("t=" + std::to_string(i + 1), rep.fits[i]);
  log.line("identify seconds=" + seconds_since(t0));
  write_json(prefix + ".json", direction_report_to_json(rep));
  std::ofstream csv(prefix + "_directions.csv");
  if (!csv) throw std::runtime_error("cannot write " + prefix + "_directions.csv");
  csv << "direction,weight\n";
  for (const auto& J : rep.directions) {
    csv << '"' << signature_label(J) << "\",";
    if (rep.weightsAvailable) csv << format_double(rep.weights.at(J));
    csv << '\n';
  }
  if (rep.capReached) out << "warning: t_max reached without an empty column\n";
  out << "directions (" << rep.directions.size() << ", t=" << rep.tFinal << "):";
  for (const auto& J : rep.directions) out << ' ' << signature_label(J);
  out << "\nwrote " << prefix << ".json\n";
}

void cmd_cv(const Json& cfg, std::ostream& out) {
  check_keys(cfg, keys({kCommonKeys, kFitKeys, {"input", "r"}}), "cv");
  const Eigen::MatrixXd X = load_sample(cfg);
  const int r = get_or(cfg, "r", 0);
  if (r < 1) throw UsageError("r must be >= 1");
  const FitConfig fc = fit_config(cfg, X.rows(), X.cols());
  LambdaChoice choice = lambda_choice(cfg);
  choice.cv = true;
  if (choice.folds > X.rows()) throw UsageError("more folds than observations");
  const std::string prefix = output_path(cfg, "cv");
  Logger log(log_path(cfg, prefix));
  const CvPlan plan = CvPlan::make(X.rows(), choice.folds, fc.seed, choice.shuffle);
  std::vector<CvScore> trace;
  const auto t0 = std::chrono::steady_clock::now();
  const LambdaSearch search = choice.greedy
                                  ? greedy_lambda_grid(X, r, fc, choice.grid, plan, choice.maxRefinements, &trace)
                                  : [&] {
                                      const CvFolds folds = prepare_folds(X, plan, fc);
                                      return fixed_lambda_grid(
                                          [&](double l) {
                                            trace.push_back(cv_score(folds, r, fc, l));
                                            return trace.back().mean;
                                          },
                                          choice.grid);
                                    }();
  log.line("cv evaluations=" + std::to_string(trace.size()) + " seconds=" + seconds_since(t0));
  std::ofstream csv(prefix + "_cv.csv");
  if (!csv) throw std::runtime_error("cannot write " + prefix + "_cv.csv");
  csv << "pass,lambda,score";
  for (int f = 0; f < choice.folds; ++f) csv << ",fold" << f + 1;
  csv << '\n';
  std::map<double, const CvScore*> byLambda;
  for (const auto& s : trace) byLambda[s.lambda] = &s;
  for (std::size_t p = 0; p < search.passes.size(); ++p) {
    for (double l : search.passes[p].grid) {
      const CvScore& s = *byLambda.at(l);
      csv << p + 1 << ',' << format_double(l) << ',' << format_double(s.mean);
      for (double v : s.perFold) csv << ',' << format_double(v);
      csv << '\n';
    }
  }
  Json j;
  j["lambda"] = search.lambdaStar;
  j["boundary"] = search.boundary;
  j["final_grid"] = search.finalGrid;
  j["passes"] = search.passes.size();
  j["folds"] = choice.folds;
  j["k"] = fc.k;
  Json failures = Json::array();
  for (const auto& s : trace)
    if (s.failed) failures.push_back({{"lambda", s.lambda}, {"diagnostics", s.diagnostics}});
  j["failures"] = std::move(failures);
  write_json(prefix + ".json", j);
  out << "lambda* = " << format_double(search.lambdaStar) << (search.boundary ? " (at grid boundary)" : "") << '\n';
}

void cmd_diagnose(const Json& cfg, std::ostream& out) {
  check_keys(cfg, keys({kCommonKeys, {"input", "model", "model_file", "k", "k_frac"}}), "diagnose");
  const Eigen::MatrixXd X = load_sample(cfg);
  const MixtureParams theta = model_from_config(cfg);
  if (X.cols() < 2) throw UsageError("diagnose needs at least two variables");
  if (theta.dim() != X.cols()) throw UsageError("model dimension does not match the sample");
  int k = get_or(cfg, "k", 0);
  if (k == 0) k = tail_count(X.rows(), get_or(cfg, "k_frac", 0.02));
  if (k < 1 || k > X.rows()) throw UsageError("k must lie in 1..n");
  const std::string path = output_path(cfg, "chi.csv");
  const Eigen::MatrixXi R = ranks(X);
  std::ofstream csv(path);
  if (!csv) throw std::runtime_error("cannot write " + path);
  csv << "s,t,empirical_chi,fitted_chi,fitted_pair_stdf\n";
  double gap = 0.0;
  Index pairs = 0;
  for (Index s = 0; s < X.cols(); ++s) {
    for (Index t = s + 1; t < X.cols(); ++t) {
      const double emp = empirical_chi(R, k, s, t);
      const double raw = fitted_pair_stdf(theta, s, t);
      const double fit = fitted_chi(theta, s, t);
      csv << s + 1 << ',' << t + 1 << ',' << format_double(emp) << ',' << format_double(fit) << ',' << format_double(raw) << '\n';
      gap += std::abs(emp - fit);
      ++pairs;
    }
  }
  out << "pairs: " << pairs << ", mean |empirical - fitted| = " << format_double(gap / static_cast<double>(pairs)) << '\n';
}

std::string cell_label(const CellSummary& c) {
  std::ostringstream os;
  os << c.n << ',' << format_double(c.kFrac) << ',' << format_double(c.p);
  return os.str();
}

void cmd_study(const Json& cfg, std::ostream& out) {
  check_keys(cfg, keys({kCommonKeys, kFitKeys, {"model", "model_file", "noise_sigma", "fit_family", "mode", "replicates", "n", "t_max", "threads"}}), "study");
  StudySpec spec;
  spec.truth = model_from_config(cfg);
  spec.noiseSigma = get_or(cfg, "noise_sigma", 0.0);
  spec.fitFamily = family_from_string(get_or(cfg, "fit_family", to_string(spec.truth.family)));
  const std::string mode = get_or<std::string>(cfg, "mode", "known_r");
  if (mode == "known_r") {
    spec.mode = StudyMode::KnownR;
  } else if (mode == "identify") {
    spec.mode = StudyMode::Identify;
  } else {
    throw UsageError("mode must be known_r or identify");
  }
  spec.replicates = get_or(cfg, "replicates", 1);
  spec.n = get_or(cfg, "n", std::vector<Index>{});
  if (cfg.contains("k_frac") && cfg.at("k_frac").is_number()) {
    spec.kFrac = {cfg.at("k_frac").get<double>()};
  } else {
    spec.kFrac = get_or(cfg, "k_frac", std::vector<double>{0.02});
  }
  if (cfg.contains("p") && cfg.at("p").is_number()) {
    spec.p = {cfg.at("p").get<double>()};
  } else {
    spec.p = get_or(cfg, "p", std::vector<double>{0.4});
  }
  if (cfg.contains("k")) throw UsageError("study takes k_frac, not k");
  spec.lambda = lambda_choice(cfg);
  spec.tMax = get_or(cfg, "t_max", 0);
  spec.threads = get_or(cfg, "threads", 1);
  spec.seed = get_or<std::uint64_t>(cfg, "seed", 1);
  Json fitPart = cfg;
  for (const char* key : {"k_frac", "p", "model", "model_file", "noise_sigma", "fit_family", "mode", "replicates", "n", "t_max", "threads", "output", "log", "lambda", "cv", "family"})
    fitPart.erase(key);
  spec.base = fit_config(fitPart, 1, spec.truth.dim());
  spec.validate();

  const std::string prefix = output_path(cfg, "study");
  Logger log(log_path(cfg, prefix));
  const auto t0 = std::chrono::steady_clock::now();
  const StudyResult res = run_study(spec, [&](const std::string& m) { log.line(m); });
  log.line("study seconds=" + seconds_since(t0));

  const std::string lambdaRule = spec.lambda.cv ? "cv" : format_double(spec.lambda.value);
  std::ofstream cells(prefix + "_cells.csv");
  if (!cells) throw std::runtime_error("cannot write " + prefix + "_cells.csv");
  cells << "n,k_frac,p,lambda_rule,data_family,fit_family,mode,replicates,failed,ed_s,exact_recovery,t_final_hit,smse,smse_used,smse_excluded\n";
  for (const auto& c : res.cells) {
    cells << cell_label(c) << ',' << lambdaRule << ',' << to_string(spec.truth.family) << ',' << to_string(spec.fitFamily) << ','
          << mode << ',' << c.replicates << ',' << c.failed << ',' << format_double(c.ed.mean) << ','
          << format_double(c.ed.exactRate) << ',' << format_double(c.tFinalHit) << ',' << format_double(c.smse.value) << ','
          << c.smse.used << ',' << c.smse.excluded << '\n';
  }
  std::ofstream reps(prefix + "_replicates.csv");
  if (!reps) throw std::runtime_error("cannot write " + prefix + "_replicates.csv");
  reps << "n,k_frac,p,replicate,data_seed,failed,lambda,t_final,distance,directions,error\n";
  for (const auto& r : res.replicates) {
    std::string dirs;
    for (const auto& J : r.directions) dirs += signature_label(J);
    reps << cell_label(res.cells[r.cell]) << ',' << r.replicate << ',' << r.dataSeed << ',' << (r.failed ? 1 : 0) << ','
         << format_double(r.lambda) << ',' << r.tFinal << ',' << format_double(r.distance) << ",\"" << dirs << "\",\"" << r.error
         << "\"\n";
  }
  for (const auto& c : res.cells)
    out << "n=" << c.n << " k/n=" << c.kFrac << " p=" << c.p << ": ED-S " << format_double(c.ed.mean) << ", exact "
        << format_double(c.ed.exactRate) << ", SMSE " << format_double(c.smse.value) << ", failed " << c.failed << '\n';
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse max-stable mixture models: simulation, estimation and direction discovery"};
  app.require_subcommand(1);
  std::map<std::string, std::string> flags;
  std::string configPath;

  struct Command {
    CLI::App* app;
    void (*run)(const Json&, std::ostream&);
  };
  std::vector<Command> commands;
  auto add = [&](const std::string& name, const std::string& help, void (*run)(const Json&, std::ostream&),
                 std::vector<std::pair<std::string, std::string>> options) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", configPath, "JSON configuration file");
    options.insert(options.begin(), {{"output", "output path or prefix"}, {"seed", "random seed"}, {"log", "sidecar log path"}});
    for (const auto& [key, desc] : options) {
      std::string flag = key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      sub->add_option_function<std::string>("--" + flag, [&flags, key = key](const std::string& v) { flags[key] = v; }, desc);
    }
    commands.push_back({sub, run});
  };
  add("simulate", "simulate a mixture-model sample", cmd_simulate,
      {{"n", "sample size"}, {"noise_sigma", "noise standard deviation"}, {"model_file", "model JSON"}});
  add("fit", "fit a model with a known number of columns", cmd_fit,
      {{"input", "sample CSV"}, {"r", "number of columns"}, {"lambda", "penalty weight or cv"}, {"k_frac", "tail fraction"},
       {"k", "tail count"}, {"p", "penalty exponent"}, {"family", "logistic or husler_reiss"}, {"starts", "number of k-means starts"}});
  add("identify", "discover extreme directions", cmd_identify,
      {{"input", "sample CSV"}, {"t_max", "largest number of columns"}, {"lambda", "penalty weight or cv"},
       {"k_frac", "tail fraction"}, {"k", "tail count"}, {"p", "penalty exponent"}, {"family", "logistic or husler_reiss"},
       {"starts", "number of k-means starts"}});
  add("cv", "cross-validate the penalty weight", cmd_cv,
      {{"input", "sample CSV"}, {"r", "number of columns"}, {"k_frac", "tail fraction"}, {"k", "tail count"},
       {"p", "penalty exponent"}, {"family", "logistic or husler_reiss"}});
  add("diagnose", "empirical versus fitted extremal correlations", cmd_diagnose,
      {{"input", "sample CSV"}, {"model_file", "fitted model or report JSON"}, {"k_frac", "tail fraction"}, {"k", "tail count"}});
  add("study", "replicated simulation study", cmd_study,
      {{"replicates", "replicates per cell"}, {"threads", "worker threads"}, {"model_file", "model JSON"},
       {"mode", "known_r or identify"}, {"lambda", "penalty weight or cv"}, {"t_max", "largest number of columns"}});
  bool fixedGrid = false;
  commands[3].app->add_flag("--fixed-grid", fixedGrid, "single pass over the grid instead of greedy refinement");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    Json cfg = Json::object();
    if (!configPath.empty()) {
      cfg = read_json(configPath);
      if (!cfg.is_object()) throw UsageError(configPath + ": expected a JSON object");
    }
    for (const auto& [key, value] : flags) {
      Json parsed;
      try {
        parsed = Json::parse(value);
      } catch (const Json::parse_error&) {
        parsed = value;
      }
      if (key == "lambda" && parsed.is_string() && parsed.get<std::string>() == "cv") parsed = "cv";
      cfg[key] = parsed;
      if (parsed.is_number() && (key == "input" || key == "output" || key == "log" || key == "model_file")) cfg[key] = value;
    }
    for (const auto& c : commands) {
      if (!c.app->parsed()) continue;
      if (c.app == commands[3].app) {
        Json cvBlock = cfg.contains("cv") ? cfg.at("cv") : Json::object();
        if (fixedGrid) cvBlock["greedy"] = false;
        else if (!cvBlock.contains("greedy")) cvBlock["greedy"] = true;
        cfg["cv"] = cvBlock;
      }
      c.run(cfg, out);
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace mixstdf
