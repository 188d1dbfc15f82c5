#include "mixstdf/optimize.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace mixstdf {

BoxBounds BoxBounds::unbounded(Index n) {
  const double inf = std::numeric_limits<double>::infinity();
  return {Eigen::VectorXd::Constant(n, -inf), Eigen::VectorXd::Constant(n, inf)};
}

BoxBounds BoxBounds::constant(Index n, double lo, double hi) {
  return {Eigen::VectorXd::Constant(n, lo), Eigen::VectorXd::Constant(n, hi)};
}

std::string to_string(OptimStatus s) {
  switch (s) {
    case OptimStatus::Converged:
      return "converged";
    case OptimStatus::MaxEvals:
      return "maxEvals";
    case OptimStatus::Stalled:
      return "stalled";
  }
  return "unknown";
}

Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x, const BoxBounds& bounds, double step,
                            double fx, int* evals) {
  const Index n = x.size();
  Eigen::VectorXd g(n);
  Eigen::VectorXd xp = x;
  int count = 0;
  auto eval = [&](Index i, double v) {
    xp(i) = v;
    const double out = f(xp);
    xp(i) = x(i);
    ++count;
    return out;
  };
  auto base = [&]() {
    if (std::isnan(fx)) {
      fx = f(x);
      ++count;
    }
    return fx;
  };

  for (Index i = 0; i < n; ++i) {
    const double h = step * std::max(std::abs(x(i)), 1.0);
    const double roomUp = bounds.upper(i) - x(i);
    const double roomDown = x(i) - bounds.lower(i);
    const bool canUp = roomUp >= h;
    const bool canDown = roomDown >= h;

    if (canUp && canDown) {
      const double fu = eval(i, x(i) + h);
      const double fd = eval(i, x(i) - h);
      if (std::isfinite(fu) && std::isfinite(fd)) {
        g(i) = (fu - fd) / (2.0 * h);
        continue;
      }
      const double f0 = base();
      if (std::isfinite(fu) && std::isfinite(f0)) {
        g(i) = (fu - f0) / h;
      } else if (std::isfinite(fd) && std::isfinite(f0)) {
        g(i) = (f0 - fd) / h;
      } else {
        throw std::runtime_error("fd_gradient: objective not finite on either side of coordinate " + std::to_string(i));
      }
      continue;
    }

    const double f0 = base();
    if (!std::isfinite(f0)) throw std::runtime_error("fd_gradient: objective not finite at x");
    // Prefer the side with room; shrink the step if the box is narrower than h.
    double hu = canUp ? h : roomUp;
    double hd = canDown ? h : roomDown;
    double gi = std::numeric_limits<double>::quiet_NaN();
    if (hu >= hd && hu > 0.0) {
      const double fu = eval(i, x(i) + hu);
      if (std::isfinite(fu)) gi = (fu - f0) / hu;
    }
    if (std::isnan(gi) && hd > 0.0) {
      const double fd = eval(i, x(i) - hd);
      if (std::isfinite(fd)) gi = (f0 - fd) / hd;
    }
    if (std::isnan(gi) && hu > 0.0 && hu < hd) {
      const double fu = eval(i, x(i) + hu);
      if (std::isfinite(fu)) gi = (fu - f0) / hu;
    }
    if (std::isnan(gi)) {
      if (hu <= 0.0 && hd <= 0.0) {
        gi = 0.0;  // degenerate coordinate: lower == upper
      } else {
        throw std::runtime_error("fd_gradient: objective not finite near coordinate " + std::to_string(i));
      }
    }
    g(i) = gi;
  }
  if (evals) *evals += count;
  return g;
}

namespace {

struct CurvaturePair {
  Eigen::VectorXd s, y;
  double rho;
};

// Two-loop recursion: returns H * q for the L-BFGS inverse Hessian estimate.
Eigen::VectorXd apply_inverse_hessian(const std::deque<CurvaturePair>& mem, Eigen::VectorXd q) {
  std::vector<double> alpha(mem.size());
  for (std::size_t k = mem.size(); k-- > 0;) {
    alpha[k] = mem[k].rho * mem[k].s.dot(q);
    q -= alpha[k] * mem[k].y;
  }
  if (!mem.empty()) {
    const auto& last = mem.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t k = 0; k < mem.size(); ++k) {
    const double beta = mem[k].rho * mem[k].y.dot(q);
    q += (alpha[k] - beta) * mem[k].s;
  }
  return q;
}

}  // namespace

OptimResult minimize_box(const Objective& f, const Eigen::VectorXd& x0, const BoxBounds& bounds,
                         const OptimOptions& opts) {
  const Index n = x0.size();
  if (bounds.size() != n) throw std::invalid_argument("minimize_box: bounds have wrong size");
  if ((bounds.lower.array() > bounds.upper.array()).any()) throw std::invalid_argument("minimize_box: lower > upper");

  OptimResult res;
  res.x = bounds.project(x0);
  res.f = f(res.x);
  res.evals = 1;
  if (!std::isfinite(res.f)) throw std::domain_error("minimize_box: objective is not finite at the starting point");
  res.trace.push_back(res.f);
  if (n == 0) {
    res.status = OptimStatus::Converged;
    return res;
  }

  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 40;
  std::deque<CurvaturePair> mem;
  Eigen::VectorXd g = fd_gradient(f, res.x, bounds, opts.gradStep, res.f, &res.evals);

  for (;;) {
    const Eigen::VectorXd pg = res.x - bounds.project(res.x - g);
    if (pg.lpNorm<Eigen::Infinity>() <= opts.tolGrad) {
      res.status = OptimStatus::Converged;
      return res;
    }
    if (res.evals >= opts.maxEvals) {
      res.status = OptimStatus::MaxEvals;
      return res;
    }

    // Coordinates pinned at a bound with the gradient pushing outward stay fixed.
    Eigen::VectorXd gFree = g;
    for (Index i = 0; i < n; ++i) {
      const bool pinnedLow = res.x(i) <= bounds.lower(i) && g(i) > 0.0;
      const bool pinnedHigh = res.x(i) >= bounds.upper(i) && g(i) < 0.0;
      if (pinnedLow || pinnedHigh) gFree(i) = 0.0;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      Eigen::VectorXd dir;
      if (!mem.empty()) {
        dir = -apply_inverse_hessian(mem, gFree);
        for (Index i = 0; i < n; ++i)
          if (gFree(i) == 0.0 && g(i) != 0.0) dir(i) = 0.0;
        if (!(dir.dot(g) < 0.0) || !dir.allFinite()) dir = -gFree;
      } else {
        dir = -gFree;
      }
      double t = 1.0;
      if (mem.empty()) {
        const double gn = gFree.lpNorm<Eigen::Infinity>();
        if (gn > 0.0) t = std::min(1.0, 1.0 / gn);
      }

      for (int bt = 0; bt < kMaxBacktracks; ++bt, t *= 0.5) {
        if (res.evals >= opts.maxEvals) break;
        const Eigen::VectorXd xt = bounds.project(res.x + t * dir);
        const Eigen::VectorXd step = xt - res.x;
        if (step.lpNorm<Eigen::Infinity>() == 0.0) break;
        const double ft = f(xt);
        ++res.evals;
        if (!std::isfinite(ft)) continue;
        if (ft <= res.f + kArmijo * g.dot(step)) {
          const double fOld = res.f;
          Eigen::VectorXd gNew = fd_gradient(f, xt, bounds, opts.gradStep, ft, &res.evals);
          const Eigen::VectorXd y = gNew - g;
          const double sy = step.dot(y);
          if (sy > 1e-12) {
            mem.push_back({step, y, 1.0 / sy});
            if (static_cast<int>(mem.size()) > opts.memory) mem.pop_front();
          }
          res.x = xt;
          res.f = ft;
          g = std::move(gNew);
          ++res.iterations;
          res.trace.push_back(ft);
          accepted = true;
          if (fOld - ft <= opts.tolF * std::max({std::abs(fOld), std::abs(ft), 1.0})) {
            res.status = OptimStatus::Converged;
            return res;
          }
          break;
        }
      }
      if (!accepted) {
        if (res.evals >= opts.maxEvals) {
          res.status = OptimStatus::MaxEvals;
          return res;
        }
        if (mem.empty()) break;
        mem.clear();  // retry once along the projected steepest descent
      }
    }
    if (!accepted) {
      res.status = OptimStatus::Stalled;
      return res;
    }
  }
}

}  // namespace mixstdf
