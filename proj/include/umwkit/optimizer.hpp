#pragma once

// Bound-constrained limited-memory BFGS (projected-gradient variant) for small
// smooth problems. Minimizes; callers maximizing a log-likelihood pass its
// negative.

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace umw {

struct Bounds {
  Eigen::VectorXd lower;  // -inf for no bound
  Eigen::VectorXd upper;  // +inf for no bound

  static Bounds unbounded(Eigen::Index n);
  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
};

struct LbfgsbOptions {
  int history = 10;
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;  // on the projected gradient, infinity norm
  double relative_tolerance = 1e-10;  // on successive objective values
  int max_line_search = 60;
};

struct LbfgsbResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string reason;
};

/// Objective returns f(x) and fills grad. Non-finite values mark x as
/// infeasible; the line search then backtracks.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Infinity norm of the gradient with components that push against an active
/// bound removed.
double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                               const Bounds& bounds);

LbfgsbResult minimize_lbfgsb(const Objective& f, const Eigen::VectorXd& x0, const Bounds& bounds,
                             const LbfgsbOptions& options = {});

}  // namespace umw
