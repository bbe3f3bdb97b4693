#include "umwkit/optimizer.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "umwkit/errors.hpp"

namespace umw {
namespace {

constexpr double kArmijo = 1e-4;

bool at_lower(const Bounds& b, const Eigen::VectorXd& x, Eigen::Index i) {
  return std::isfinite(b.lower[i]) && x[i] <= b.lower[i];
}

bool at_upper(const Bounds& b, const Eigen::VectorXd& x, Eigen::Index i) {
  return std::isfinite(b.upper[i]) && x[i] >= b.upper[i];
}

// Variables held at a bound because the gradient pushes them outward.
Eigen::Array<bool, Eigen::Dynamic, 1> active_set(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                                 const Bounds& b) {
  Eigen::Array<bool, Eigen::Dynamic, 1> active(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    active[i] = (at_lower(b, x, i) && g[i] > 0.0) || (at_upper(b, x, i) && g[i] < 0.0);
  }
  return active;
}

struct Pair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

Eigen::VectorXd two_loop(const std::deque<Pair>& mem, const Eigen::VectorXd& g) {
  Eigen::VectorXd q = g;
  std::vector<double> a(mem.size());
  for (std::size_t k = mem.size(); k-- > 0;) {
    a[k] = mem[k].rho * mem[k].s.dot(q);
    q -= a[k] * mem[k].y;
  }
  if (!mem.empty()) {
    const auto& last = mem.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t k = 0; k < mem.size(); ++k) {
    const double b = mem[k].rho * mem[k].y.dot(q);
    q += (a[k] - b) * mem[k].s;
  }
  return q;
}

}  // namespace

Bounds Bounds::unbounded(Eigen::Index n) {
  const double inf = std::numeric_limits<double>::infinity();
  return {Eigen::VectorXd::Constant(n, -inf), Eigen::VectorXd::Constant(n, inf)};
}

Eigen::VectorXd Bounds::project(const Eigen::VectorXd& x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                               const Bounds& bounds) {
  const auto active = active_set(x, grad, bounds);
  double norm = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!active[i]) norm = std::max(norm, std::abs(grad[i]));
  }
  return norm;
}

LbfgsbResult minimize_lbfgsb(const Objective& f, const Eigen::VectorXd& x0, const Bounds& bounds,
                             const LbfgsbOptions& options) {
  const Eigen::Index n = x0.size();
  if (bounds.lower.size() != n || bounds.upper.size() != n) {
    throw DomainError("minimize_lbfgsb: bounds dimension mismatch");
  }

  LbfgsbResult res;
  res.x = bounds.project(x0);
  res.gradient.resize(n);
  res.value = f(res.x, res.gradient);
  ++res.evaluations;
  if (!std::isfinite(res.value) || !res.gradient.allFinite()) {
    res.reason = "objective not finite at the starting point";
    return res;
  }

  std::deque<Pair> mem;
  Eigen::VectorXd g_trial(n);

  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    if (projected_gradient_norm(res.x, res.gradient, bounds) < options.gradient_tolerance) {
      res.converged = true;
      res.reason = "projected gradient below tolerance";
      return res;
    }

    const auto active = active_set(res.x, res.gradient, bounds);
    Eigen::VectorXd g_free = res.gradient;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (active[i]) g_free[i] = 0.0;
    }

    Eigen::VectorXd d = -two_loop(mem, g_free);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (active[i]) d[i] = 0.0;
    }
    if (!(d.dot(g_free) < 0.0) || !d.allFinite()) {
      mem.clear();
      d = -g_free;
    }

    // Projected backtracking line search with an Armijo condition measured
    // along the actual (projected) step.
    double t = 1.0;
    if (mem.empty()) t = std::min(1.0, 1.0 / std::max(d.lpNorm<Eigen::Infinity>(), 1e-300));
    bool accepted = false;
    Eigen::VectorXd x_trial;
    double f_trial = 0.0;
    for (int ls = 0; ls < options.max_line_search; ++ls) {
      x_trial = bounds.project(res.x + t * d);
      const Eigen::VectorXd step = x_trial - res.x;
      if (step.lpNorm<Eigen::Infinity>() == 0.0) break;
      f_trial = f(x_trial, g_trial);
      ++res.evaluations;
      if (std::isfinite(f_trial) && g_trial.allFinite() &&
          f_trial <= res.value + kArmijo * res.gradient.dot(step)) {
        accepted = true;
        break;
      }
      t *= (std::isfinite(f_trial) ? 0.5 : 0.1);
    }

    if (!accepted) {
      if (!mem.empty()) {
        // Stale curvature information; retry from steepest descent.
        mem.clear();
        continue;
      }
      res.reason = "line search failed";
      return res;
    }

    const Eigen::VectorXd s = x_trial - res.x;
    const Eigen::VectorXd y = g_trial - res.gradient;
    const double sy = s.dot(y);
    const double f_old = res.value;
    res.x = x_trial;
    res.value = f_trial;
    res.gradient = g_trial;

    if (sy > 1e-12 * y.squaredNorm() && sy > 0.0) {
      mem.push_back({s, y, 1.0 / sy});
      if (static_cast<int>(mem.size()) > options.history) mem.pop_front();
    }

    const double scale = std::max({std::abs(f_old), std::abs(res.value), 1.0});
    if (std::abs(f_old - res.value) <= options.relative_tolerance * scale) {
      ++res.iterations;
      res.converged = projected_gradient_norm(res.x, res.gradient, bounds) < options.gradient_tolerance;
      res.reason = "relative objective change below tolerance";
      return res;
    }
  }
  res.converged = projected_gradient_norm(res.x, res.gradient, bounds) < options.gradient_tolerance;
  res.reason = res.converged ? "projected gradient below tolerance" : "iteration limit reached";
  return res;
}

}  // namespace umw
