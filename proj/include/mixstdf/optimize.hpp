#pragma once

// Box-constrained limited-memory quasi-Newton minimisation with
// finite-difference gradients (projected L-BFGS with an Armijo search along
// the projection arc).

#include <Eigen/Core>

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace mixstdf {

using Eigen::Index;

struct BoxBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static BoxBounds unbounded(Index n);
  static BoxBounds constant(Index n, double lo, double hi);

  Index size() const { return lower.size(); }
  Eigen::VectorXd project(const Eigen::VectorXd& x) const { return x.cwiseMax(lower).cwiseMin(upper); }
  bool contains(const Eigen::VectorXd& x) const {
    return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
  }
};

struct OptimOptions {
  int memory = 10;
  int maxEvals = 5000;
  double gradStep = 1e-7;   // relative: h_i = gradStep * max(|x_i|, 1)
  double tolGrad = 1e-8;    // sup-norm of the projected gradient
  double tolF = 1e-10;      // relative decrease between accepted iterates
};

enum class OptimStatus { Converged, MaxEvals, Stalled };

std::string to_string(OptimStatus s);

struct OptimResult {
  Eigen::VectorXd x;
  double f = std::numeric_limits<double>::quiet_NaN();
  OptimStatus status = OptimStatus::Stalled;
  int evals = 0;
  int iterations = 0;
  std::vector<double> trace;  // objective at every accepted iterate, starting with x0
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Central differences, switching to a one-sided difference when the
/// central stencil would leave the box or hit a non-finite value. Throws
/// std::runtime_error when neither side gives a finite value.
/// `fx` is f(x) if already known (NaN otherwise); `evals` counts calls.
Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x, const BoxBounds& bounds, double step,
                            double fx = std::numeric_limits<double>::quiet_NaN(), int* evals = nullptr);

/// Minimises f over the box starting from x0 (projected onto the box first).
/// Every evaluated point lies inside the box and accepted iterates never
/// increase f. Throws std::domain_error if f(x0) is not finite.
OptimResult minimize_box(const Objective& f, const Eigen::VectorXd& x0, const BoxBounds& bounds,
                         const OptimOptions& opts = {});

}  // namespace mixstdf
