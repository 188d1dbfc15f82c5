#include "mixstdf/estimate.hpp"

#include "mixstdf/clustering.hpp"
#include "mixstdf/empirical.hpp"
#include "mixstdf/seeding.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>
#include <tuple>

namespace mixstdf {

// ---------------------------------------------------------------------------
// Grid evaluation

GridStdf::GridStdf(Eigen::MatrixXd grid, MvnOptions mvn) : grid_(std::move(grid)), mvn_(mvn) {
  if (grid_.rows() == 0) throw std::invalid_argument("GridStdf: empty grid");
  if (!grid_.allFinite() || (grid_.array() < 0.0).any()) throw std::invalid_argument("GridStdf: grid points must be >= 0");
  const Index q = grid_.rows(), d = grid_.cols();
  std::vector<std::vector<double>> levels(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) {
    auto& lv = levels[static_cast<std::size_t>(j)];
    for (Index pt = 0; pt < q; ++pt)
      if (grid_(pt, j) > 0.0) lv.push_back(grid_(pt, j));
    std::sort(lv.begin(), lv.end());
    lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
    levelStart_.push_back(static_cast<Index>(levelLog_.size()));
    for (double v : lv) levelLog_.push_back(std::log(v));
  }
  levelStart_.push_back(static_cast<Index>(levelLog_.size()));
  pointStart_.push_back(0);
  for (Index pt = 0; pt < q; ++pt) {
    for (Index j = 0; j < d; ++j) {
      if (grid_(pt, j) <= 0.0) continue;
      const auto& lv = levels[static_cast<std::size_t>(j)];
      const auto pos = std::lower_bound(lv.begin(), lv.end(), grid_(pt, j)) - lv.begin();
      entryLevel_.push_back(levelStart_[static_cast<std::size_t>(j)] + static_cast<Index>(pos));
    }
    pointStart_.push_back(entryLevel_.size());
  }
}

Eigen::VectorXd GridStdf::evaluate(const MixtureParams& theta) const {
  if (theta.dim() != grid_.cols()) throw std::invalid_argument("GridStdf: model dimension does not match grid");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
  for (Index s = 0; s < theta.columns(); ++s) out += column(theta, s);
  return out;
}

Eigen::VectorXd GridStdf::column(const MixtureParams& theta, Index s) const {
  const Index q = grid_.rows(), d = grid_.cols();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (theta.family == Family::Logistic) {
    const double alpha = theta.alpha_for(s);
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("GridStdf: alpha outside (0,1)");
    // e = log(a_j v) / alpha for every distinct level v of coordinate j; the
    // terms exp(e - top) are shared by all grid points using that level.
    const auto nLevels = static_cast<Index>(levelLog_.size());
    Eigen::ArrayXd e(nLevels);
    double top = kNegInf;
    for (Index j = 0; j < d; ++j) {
      const double la = std::log(theta.A(j, s));
      for (Index v = levelStart_[static_cast<std::size_t>(j)]; v < levelStart_[static_cast<std::size_t>(j + 1)]; ++v) {
        e(v) = (la + levelLog_[static_cast<std::size_t>(v)]) / alpha;
        top = std::max(top, e(v));
      }
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(q);
    if (top == kNegInf) return out;
    const Eigen::ArrayXd E = (e - top).exp();
    const double scale = std::exp(alpha * top);
    for (Index pt = 0; pt < q; ++pt) {
      const auto b = pointStart_[static_cast<std::size_t>(pt)], f = pointStart_[static_cast<std::size_t>(pt + 1)];
      double sum = 0.0;
      for (auto i = b; i < f; ++i) sum += E(entryLevel_[i]);
      if (sum > 1e-250) {
        out(pt) = scale * std::pow(sum, alpha);
        continue;
      }
      double localTop = kNegInf;
      for (auto i = b; i < f; ++i) localTop = std::max(localTop, e(entryLevel_[i]));
      if (localTop == kNegInf) continue;
      double acc = 0.0;
      for (auto i = b; i < f; ++i) acc += std::exp(e(entryLevel_[i]) - localTop);
      out(pt) = std::exp(alpha * (localTop + std::log(acc)));
    }
    return out;
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(q);
  std::vector<Index> J;
  for (Index j = 0; j < d; ++j)
    if (theta.A(j, s) > 0.0) J.push_back(j);
  if (J.empty()) return out;
  const auto m = static_cast<Index>(J.size());
  Eigen::VectorXd a(m);
  Eigen::MatrixXd G(m, m);
  const Eigen::MatrixXd& Gs = theta.gamma_for(s);
  for (Index u = 0; u < m; ++u) {
    a(u) = theta.A(J[static_cast<std::size_t>(u)], s);
    for (Index v = 0; v < m; ++v) G(u, v) = Gs(J[static_cast<std::size_t>(u)], J[static_cast<std::size_t>(v)]);
  }
  Eigen::VectorXd x(m);
  for (Index pt = 0; pt < q; ++pt) {
    for (Index u = 0; u < m; ++u) x(u) = grid_(pt, J[static_cast<std::size_t>(u)]);
    out(pt) = stdf_hr_factor(x, a, G, mvn_);
  }
  return out;
}

Eigen::VectorXd GridStdf::CachedEvaluator::evaluate(const MixtureParams& theta) {
  const Index r = theta.columns();
  if (static_cast<Index>(keys_.size()) != r) {
    keys_.assign(static_cast<std::size_t>(r), Eigen::VectorXd());
    values_.assign(static_cast<std::size_t>(r), Eigen::VectorXd());
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(model_.size());
  for (Index s = 0; s < r; ++s) {
    const auto i = static_cast<std::size_t>(s);
    Eigen::VectorXd key;
    if (theta.family == Family::Logistic) {
      key.resize(theta.dim() + 1);
      key << theta.A.col(s), theta.alpha_for(s);
    } else {
      const Eigen::MatrixXd& G = theta.gamma_for(s);
      key.resize(theta.dim() + G.size());
      key << theta.A.col(s), G.reshaped();
    }
    if (values_[i].size() == 0 || key.size() != keys_[i].size() || key != keys_[i]) {
      values_[i] = model_.column(theta, s);
      keys_[i] = std::move(key);
    }
    out += values_[i];
  }
  return out;
}

LossParts ls_loss(const MixtureParams& theta, const Eigen::VectorXd& ellHat, const GridStdf& model,
                  const PenaltySpec& pen) {
  if (ellHat.size() != model.size()) throw std::invalid_argument("ls_loss: ellHat not aligned with grid");
  if (!(pen.lambda >= 0.0)) throw std::invalid_argument("ls_loss: lambda must be >= 0");
  LossParts parts;
  parts.data = (ellHat - model.evaluate(theta)).squaredNorm();
  parts.penalty = penalty(theta.A, pen.p);
  parts.total = parts.data + pen.lambda * parts.penalty;
  return parts;
}

LossParts ls_loss(const MixtureParams& theta, const Eigen::VectorXd& ellHat, const Eigen::MatrixXd& grid,
                  const PenaltySpec& pen, const MvnOptions& mvn) {
  return ls_loss(theta, ellHat, GridStdf(grid, mvn), pen);
}

// ---------------------------------------------------------------------------
// Parameter packing

void FitConfig::validate() const {
  if (grid.rows() == 0) throw std::invalid_argument("FitConfig: grid is empty");
  if (!(penalty.p > 0.0 && penalty.p <= 1.0)) throw std::invalid_argument("FitConfig: p must lie in (0,1]");
  if (!(penalty.lambda >= 0.0)) throw std::invalid_argument("FitConfig: lambda must be >= 0");
  if (!(stopEps > 0.0)) throw std::invalid_argument("FitConfig: stopEps must be > 0");
  if (maxAltIters < 1) throw std::invalid_argument("FitConfig: maxAltIters must be >= 1");
  if (starts < 1) throw std::invalid_argument("FitConfig: starts must be >= 1");
  if (kmeansRestarts < 1) throw std::invalid_argument("FitConfig: kmeansRestarts must be >= 1");
  if (!(zeroTol >= 0.0)) throw std::invalid_argument("FitConfig: zeroTol must be >= 0");
  if (!(alphaLower > 0.0 && alphaLower < alphaUpper && alphaUpper < 1.0))
    throw std::invalid_argument("FitConfig: alpha bounds must satisfy 0 < lower < upper < 1");
  if (!(gammaLower > 0.0 && gammaLower < gammaUpper)) throw std::invalid_argument("FitConfig: bad gamma bounds");
}

namespace {

enum class Block { Joint, Coefficients, Dependence };

// Maps a MixtureParams onto the optimiser's vector: A row-stacked, then
// alpha (1 or r entries) or the free upper-triangular variogram entries.
class Layout {
 public:
  Layout(const MixtureParams& ref, Block block) : d_(ref.dim()), r_(ref.columns()), family_(ref.family) {
    withA_ = block != Block::Dependence;
    withZ_ = block != Block::Coefficients;
    if (!withZ_) return;
    if (family_ == Family::Logistic) {
      nAlpha_ = ref.alpha.size();
      return;
    }
    // Variogram entries for pairs that never share a signature do not enter
    // the stdf and stay frozen.
    const auto sigs = signatures(ref.A);
    const auto nG = static_cast<Index>(ref.gamma.size());
    for (Index g = 0; g < nG; ++g) {
      for (Index t = 0; t < d_; ++t) {
        for (Index u = t + 1; u < d_; ++u) {
          bool used = false;
          for (Index s = 0; s < r_ && !used; ++s) {
            if (nG > 1 && s != g) continue;
            const auto& J = sigs[static_cast<std::size_t>(s)];
            used = std::find(J.begin(), J.end(), t) != J.end() && std::find(J.begin(), J.end(), u) != J.end();
          }
          if (used) slots_.emplace_back(g, t, u);
        }
      }
    }
  }

  Index size() const {
    return (withA_ ? d_ * r_ : 0) + (withZ_ ? (family_ == Family::Logistic ? nAlpha_ : static_cast<Index>(slots_.size())) : 0);
  }

  Eigen::VectorXd pack(const MixtureParams& theta) const {
    Eigen::VectorXd x(size());
    Index pos = 0;
    if (withA_)
      for (Index j = 0; j < d_; ++j)
        for (Index s = 0; s < r_; ++s) x(pos++) = theta.A(j, s);
    if (withZ_) {
      if (family_ == Family::Logistic) {
        for (Index i = 0; i < nAlpha_; ++i) x(pos++) = theta.alpha(i);
      } else {
        for (const auto& [g, t, u] : slots_) x(pos++) = theta.gamma[static_cast<std::size_t>(g)](t, u);
      }
    }
    return x;
  }

  void unpack(const Eigen::VectorXd& x, MixtureParams& theta) const {
    Index pos = 0;
    if (withA_)
      for (Index j = 0; j < d_; ++j)
        for (Index s = 0; s < r_; ++s) theta.A(j, s) = x(pos++);
    if (withZ_) {
      if (family_ == Family::Logistic) {
        for (Index i = 0; i < nAlpha_; ++i) theta.alpha(i) = x(pos++);
      } else {
        for (const auto& [g, t, u] : slots_) {
          auto& G = theta.gamma[static_cast<std::size_t>(g)];
          G(t, u) = G(u, t) = x(pos++);
        }
      }
    }
  }

  BoxBounds bounds(const FitConfig& cfg) const {
    BoxBounds b{Eigen::VectorXd(size()), Eigen::VectorXd(size())};
    Index pos = 0;
    if (withA_)
      for (Index i = 0; i < d_ * r_; ++i, ++pos) {
        b.lower(pos) = 0.0;
        b.upper(pos) = 1.0;
      }
    const Index nz = size() - pos;
    const double lo = family_ == Family::Logistic ? cfg.alphaLower : cfg.gammaLower;
    const double hi = family_ == Family::Logistic ? cfg.alphaUpper : cfg.gammaUpper;
    b.lower.tail(nz).setConstant(lo);
    b.upper.tail(nz).setConstant(hi);
    return b;
  }

 private:
  Index d_, r_;
  Family family_;
  bool withA_ = true, withZ_ = true;
  Index nAlpha_ = 0;
  std::vector<std::tuple<Index, Index, Index>> slots_;
};

// Every parameter of the model as one vector (all variogram upper triangles).
Eigen::VectorXd flatten(const MixtureParams& theta) {
  std::vector<double> v;
  for (Index j = 0; j < theta.dim(); ++j)
    for (Index s = 0; s < theta.columns(); ++s) v.push_back(theta.A(j, s));
  for (Index i = 0; i < theta.alpha.size(); ++i) v.push_back(theta.alpha(i));
  for (const auto& G : theta.gamma)
    for (Index t = 0; t < G.rows(); ++t)
      for (Index u = t + 1; u < G.cols(); ++u) v.push_back(G(t, u));
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

struct StageResult {
  MixtureParams theta;
  OptimResult optim;
};

StageResult run_stage(const Eigen::VectorXd& ellHat, const GridStdf& model, const MixtureParams& start, Block block,
                      const FitConfig& cfg) {
  const Layout layout(start, block);
  MixtureParams work = start;
  GridStdf::CachedEvaluator cache(model);
  Objective objective = [&](const Eigen::VectorXd& x) {
    layout.unpack(x, work);
    try {
      const double data = (ellHat - cache.evaluate(work)).squaredNorm();
      return data + cfg.penalty.lambda * penalty(work.A, cfg.penalty.p);
    } catch (const std::domain_error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  OptimResult opt = minimize_box(objective, layout.pack(start), layout.bounds(cfg), cfg.optim);
  MixtureParams out = start;
  layout.unpack(opt.x, out);
  return {std::move(out), std::move(opt)};
}

void check_start(const MixtureParams& theta0, const FitConfig& cfg) {
  try {
    validate(theta0);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("starting parameters infeasible: ") + e.what());
  }
  if (theta0.dim() != cfg.grid.cols()) throw std::invalid_argument("starting parameters have wrong dimension");
  if (theta0.family != cfg.family) throw std::invalid_argument("starting parameters have the wrong family");
  if (theta0.family == Family::Logistic) {
    for (Index i = 0; i < theta0.alpha.size(); ++i)
      if (theta0.alpha(i) < cfg.alphaLower || theta0.alpha(i) > cfg.alphaUpper)
        throw std::invalid_argument("starting alpha outside its box");
  } else {
    for (const auto& G : theta0.gamma)
      for (Index t = 0; t < G.rows(); ++t)
        for (Index u = t + 1; u < G.cols(); ++u)
          if (G(t, u) < cfg.gammaLower || G(t, u) > cfg.gammaUpper)
            throw std::invalid_argument("starting variogram entry outside its box");
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

MixtureParams pnpls_fit(const Eigen::VectorXd& ellHat, const Eigen::MatrixXd& grid, const MixtureParams& theta0,
                        const FitConfig& config) {
  config.validate();
  check_start(theta0, config);
  const GridStdf model(grid, config.mvn);
  return run_stage(ellHat, model, theta0, Block::Joint, config).theta;
}

StandardizeResult standardize_rows(const Eigen::MatrixXd& A, double zeroTol) {
  if ((A.array() < 0.0).any()) throw std::invalid_argument("standardize_rows: negative entry");
  StandardizeResult res{A, {}};
  for (Index j = 0; j < A.rows(); ++j) {
    const double sum = A.row(j).sum();
    if (sum < zeroTol || sum <= 0.0) {
      Index arg = 0;
      A.row(j).maxCoeff(&arg);  // first maximal entry on ties
      res.A.row(j).setZero();
      res.A(j, arg) = 1.0;
      res.repairedRows.push_back(j);
    } else {
      res.A.row(j) /= sum;
    }
  }
  return res;
}

KmeansStart kmeans_start(const Eigen::MatrixXd& sample, int t, std::uint64_t seed, bool angular, int restarts) {
  if (t < 1) throw std::invalid_argument("kmeans_start: t must be >= 1");
  const Index n = sample.rows(), d = sample.cols();
  if (t == 1) return {Eigen::MatrixXd::Ones(d, 1), false};

  const Eigen::MatrixXi R = ranks(sample);
  const Eigen::ArrayXXd pareto = static_cast<double>(n) / (static_cast<double>(n) + 1.0 - R.cast<double>().array());
  const Eigen::VectorXd sums = pareto.rowwise().sum();
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return sums(a) > sums(b); });
  const auto keep = static_cast<Index>(std::ceil(0.1 * static_cast<double>(n)));
  if (keep < t) return {Eigen::MatrixXd::Constant(d, t, 1.0 / t), true};

  Eigen::MatrixXd points(keep, d);
  for (Index i = 0; i < keep; ++i) {
    points.row(i) = pareto.row(idx[static_cast<std::size_t>(i)]).matrix();
    if (angular) points.row(i) /= sums(idx[static_cast<std::size_t>(i)]);
  }
  KMeansResult km = kmeans(points, t, seed);
  for (int rep = 1; rep < restarts; ++rep) {
    KMeansResult alt = kmeans(points, t, derive_seed(seed, {static_cast<std::uint64_t>(rep)}));
    if (alt.inertia < km.inertia) km = std::move(alt);
  }
  Eigen::MatrixXd A(d, t);
  for (int s = 0; s < t; ++s) {
    Eigen::VectorXd c = km.centers.row(s).transpose().cwiseMax(0.0);
    const double top = c.maxCoeff();
    A.col(s) = top > 0.0 ? Eigen::VectorXd(c / top) : Eigen::VectorXd::Constant(d, 1.0 / t);
  }
  return {standardize_rows(A, 0.0).A, false};
}

MixtureParams initial_params(const Eigen::MatrixXd& A, const FitConfig& cfg) {
  const Index d = A.rows(), r = A.cols();
  std::mt19937_64 rng(cfg.seed ^ 0xa5a5a5a5ULL);
  MixtureParams theta;
  theta.family = cfg.family;
  theta.A = A;
  const Index nz = cfg.perColumnDependence ? r : 1;
  if (cfg.family == Family::Logistic) {
    theta.alpha.resize(nz);
    std::uniform_real_distribution<double> u(cfg.alphaLower, cfg.alphaUpper);
    for (Index i = 0; i < nz; ++i) theta.alpha(i) = cfg.randomDependenceStart ? u(rng) : std::clamp(cfg.alphaStart, cfg.alphaLower, cfg.alphaUpper);
  } else {
    // Constant off-diagonal variograms are always valid.
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (Index i = 0; i < nz; ++i) {
      const double c = cfg.randomDependenceStart ? u(rng) : cfg.gammaStart;
      Eigen::MatrixXd G = Eigen::MatrixXd::Constant(d, d, std::clamp(c, cfg.gammaLower, cfg.gammaUpper));
      G.diagonal().setZero();
      theta.gamma.push_back(std::move(G));
    }
  }
  return theta;
}

FitReport fit_from_stdf(const Eigen::VectorXd& ellHat, const MixtureParams& theta0, const FitConfig& config) {
  config.validate();
  check_start(theta0, config);
  if (ellHat.size() != config.grid.rows()) throw std::invalid_argument("fit: ellHat not aligned with grid");
  const GridStdf model(config.grid, config.mvn);

  FitReport report;
  report.ellHat = ellHat;
  report.lambda = config.penalty.lambda;
  report.theta = theta0;

  auto stage = [&](const std::string& name, const MixtureParams& start, Block block) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      StageResult res = run_stage(ellHat, model, start, block, config);
      report.stages.push_back({name, res.optim.status, res.optim.evals, res.optim.f, seconds_since(t0)});
      return res.theta;
    } catch (const std::exception& e) {
      throw FitError(name, e.what(), report);
    }
  };

  MixtureParams old = stage("pnpls", theta0, Block::Joint);
  report.theta = old;
  report.lossTrace.push_back(ls_loss(old, ellHat, model, config.penalty).total);

  for (int it = 1; it <= config.maxAltIters; ++it) {
    const std::string tag = "alternation " + std::to_string(it);
    MixtureParams next = stage(tag + " / coefficients", old, Block::Coefficients);
    StandardizeResult std = standardize_rows(next.A, config.zeroTol);
    report.repairedRows.insert(report.repairedRows.end(), std.repairedRows.begin(), std.repairedRows.end());
    next.A = std::move(std.A);
    next = stage(tag + " / dependence", next, Block::Dependence);
    const double change = (flatten(next) - flatten(old)).norm();
    report.alternations = it;
    report.lossTrace.push_back(ls_loss(next, ellHat, model, config.penalty).total);
    old = std::move(next);
    report.theta = old;
    if (change < config.stopEps) {
      report.stopCriterionMet = true;
      break;
    }
  }

  // Exact zeros, unit row sums, canonical column order.
  MixtureParams fin = old;
  fin.A = (fin.A.array() <= config.zeroTol).select(0.0, fin.A);
  StandardizeResult std = standardize_rows(fin.A, config.zeroTol);
  report.repairedRows.insert(report.repairedRows.end(), std.repairedRows.begin(), std.repairedRows.end());
  fin.A = std::move(std.A);
  fin = lex_ordered(fin);
  report.theta = fin;
  report.signatures = signatures(fin.A);
  report.finalLoss = ls_loss(fin, ellHat, model, config.penalty);
  return report;
}

FitReport fit_known_r(const Eigen::MatrixXd& sample, int r, const FitConfig& config,
                      const std::optional<MixtureParams>& theta0) {
  if (r < 1) throw std::invalid_argument("fit_known_r: r must be >= 1");
  config.validate();
  if (sample.cols() != config.grid.cols()) throw std::invalid_argument("fit_known_r: sample and grid dimensions differ");
  const Eigen::MatrixXi R = ranks(sample);
  const Eigen::VectorXd ellHat = empirical_stdf_grid(R, config.k, config.grid);
  if (theta0) {
    if (theta0->columns() != r) throw std::invalid_argument("fit_known_r: theta0 has wrong number of columns");
    FitReport rep = fit_from_stdf(ellHat, *theta0, config);
    return config.mergeDuplicates ? merge_duplicate_columns(ellHat, std::move(rep), config) : rep;
  }
  const int starts = r == 1 ? 1 : config.starts;
  std::optional<FitReport> best;
  std::vector<double> losses;
  for (int i = 0; i < starts; ++i) {
    const KmeansStart ks = i == 0 ? kmeans_start(sample, r, config.seed, config.angularKmeans, config.kmeansRestarts)
                                  : kmeans_start(sample, r, derive_seed(config.seed, {static_cast<std::uint64_t>(i)}),
                                                 config.angularKmeans, 1);
    FitReport rep = fit_from_stdf(ellHat, initial_params(ks.A, config), config);
    if (config.mergeDuplicates) rep = merge_duplicate_columns(ellHat, std::move(rep), config);
    losses.push_back(rep.finalLoss.total);
    if (!best || rep.finalLoss.total < best->finalLoss.total) {
      rep.startIndex = i;
      best = std::move(rep);
    }
  }
  best->startLosses = std::move(losses);
  return *best;
}

FitReport merge_duplicate_columns(const Eigen::VectorXd& ellHat, FitReport report, const FitConfig& config) {
  for (;;) {
    bool merged = false;
    const auto& sig = report.signatures;
    for (std::size_t s = 0; s < sig.size() && !merged; ++s) {
      for (std::size_t u = s + 1; u < sig.size() && !merged; ++u) {
        if (sig[s].empty() || sig[s] != sig[u]) continue;
        MixtureParams cand = report.theta;
        cand.A.col(static_cast<Index>(s)) += cand.A.col(static_cast<Index>(u));
        cand.A.col(static_cast<Index>(u)).setZero();
        FitReport next = fit_from_stdf(ellHat, cand, config);
        if (next.finalLoss.total < report.finalLoss.total) {
          next.merges = report.merges + 1;
          report = std::move(next);
          merged = true;
        }
      }
    }
    if (!merged) return report;
  }
}

Eigen::MatrixXd generate_grid(Index d, const std::vector<double>& values, const std::vector<int>& nonzeroCounts) {
  if (d < 1) throw std::invalid_argument("generate_grid: d must be >= 1");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) throw std::invalid_argument("generate_grid: values must be positive");
    for (std::size_t j = 0; j < i; ++j)
      if (values[i] == values[j]) throw std::invalid_argument("generate_grid: values must be distinct");
  }
  std::vector<Eigen::VectorXd> pts;
  const auto nv = static_cast<int>(values.size());
  for (int c : nonzeroCounts) {
    if (c < 1 || c > d) throw std::invalid_argument("generate_grid: support size outside 1..d");
    if (nv == 0) continue;
    std::vector<int> comb(static_cast<std::size_t>(c));
    std::iota(comb.begin(), comb.end(), 0);
    for (;;) {
      std::vector<int> digit(static_cast<std::size_t>(c), 0);
      for (;;) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
        for (int i = 0; i < c; ++i) x(comb[static_cast<std::size_t>(i)]) = values[static_cast<std::size_t>(digit[static_cast<std::size_t>(i)])];
        pts.push_back(std::move(x));
        int pos = c - 1;
        while (pos >= 0 && ++digit[static_cast<std::size_t>(pos)] == nv) digit[static_cast<std::size_t>(pos--)] = 0;
        if (pos < 0) break;
      }
      int i = c - 1;
      while (i >= 0 && comb[static_cast<std::size_t>(i)] == d - c + i) --i;
      if (i < 0) break;
      ++comb[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < c; ++j) comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  if (pts.empty()) throw std::invalid_argument("generate_grid: no points generated");
  Eigen::MatrixXd grid(static_cast<Index>(pts.size()), d);
  for (std::size_t i = 0; i < pts.size(); ++i) grid.row(static_cast<Index>(i)) = pts[i].transpose();
  return grid;
}

}  // namespace mixstdf
