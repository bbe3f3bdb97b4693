#include <doctest.h>

#include <cmath>
#include <set>

#include "umwkit/optimizer.hpp"
#include "umwkit/rng.hpp"

using namespace umw;

TEST_SUITE("rng") {
  TEST_CASE("derived seeds are distinct and stable") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t c = 0; c < 20; ++c) {
      for (std::uint64_t b = 0; b < 500; ++b) seen.insert(derive_seed(7, {c, b}));
    }
    CHECK(seen.size() == 20 * 500);
    CHECK(derive_seed(7, {1, 2}) == derive_seed(7, {1, 2}));
    CHECK(derive_seed(7, {1, 2}) != derive_seed(7, {2, 1}));
    CHECK(derive_seed(7, {1, 2}) != derive_seed(8, {1, 2}));
    CHECK(derive_seed(7, {}) != derive_seed(7, {0}));
  }

  TEST_CASE("uniform_open stays inside (0,1)") {
    Rng r = make_rng(3);
    double lo = 1, hi = 0, sum = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double u = uniform_open(r);
      lo = std::min(lo, u);
      hi = std::max(hi, u);
      sum += u;
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));
  }
}

TEST_SUITE("optimizer") {
  TEST_CASE("Rosenbrock, unbounded") {
    const Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
      g.resize(2);
      g[0] = -2 * (1 - x[0]) - 400 * x[0] * (x[1] - x[0] * x[0]);
      g[1] = 200 * (x[1] - x[0] * x[0]);
      return (1 - x[0]) * (1 - x[0]) + 100 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]);
    };
    LbfgsbOptions o;
    o.gradient_tolerance = 1e-9;
    o.relative_tolerance = 0;
    const LbfgsbResult r = minimize_lbfgsb(f, Eigen::Vector2d(-1.2, 1.0), Bounds::unbounded(2), o);
    CHECK(r.converged);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("active lower bound") {
    // min (x-(-2))^2 + (y-3)^2 subject to x >= 0: solution (0, 3), gradient 4 on x at the bound.
    const Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
      g = Eigen::Vector2d(2 * (x[0] + 2), 2 * (x[1] - 3));
      return (x[0] + 2) * (x[0] + 2) + (x[1] - 3) * (x[1] - 3);
    };
    Bounds b = Bounds::unbounded(2);
    b.lower[0] = 0.0;
    const LbfgsbResult r = minimize_lbfgsb(f, Eigen::Vector2d(5, 5), b);
    CHECK(r.converged);
    CHECK(r.x[0] == 0.0);
    CHECK(r.x[1] == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(projected_gradient_norm(r.x, r.gradient, b) < 1e-6);
    CHECK(r.gradient[0] == doctest::Approx(4.0));
  }

  TEST_CASE("projection and infeasible region") {
    Bounds b{Eigen::Vector2d(0, -1), Eigen::Vector2d(1, 1)};
    const Eigen::VectorXd p = b.project(Eigen::Vector2d(-3, 4));
    CHECK(p[0] == 0.0);
    CHECK(p[1] == 1.0);
    // Objective undefined for x < 0.5; the minimizer 0.5 + 1e-3 sits near the edge.
    const Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
      g.resize(1);
      if (x[0] <= 0.5) return std::numeric_limits<double>::infinity();
      const double t = x[0] - 0.5;
      g[0] = 1.0 - 1e-3 / t;
      return t - 1e-3 * std::log(t);
    };
    const LbfgsbResult r = minimize_lbfgsb(f, Eigen::VectorXd::Constant(1, 3.0), Bounds::unbounded(1));
    CHECK(r.converged);
    CHECK(r.x[0] == doctest::Approx(0.501).epsilon(1e-6));
  }

  TEST_CASE("iteration cap reports non-convergence") {
    const Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
      g.resize(2);
      g[0] = -2 * (1 - x[0]) - 400 * x[0] * (x[1] - x[0] * x[0]);
      g[1] = 200 * (x[1] - x[0] * x[0]);
      return (1 - x[0]) * (1 - x[0]) + 100 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]);
    };
    LbfgsbOptions o;
    o.max_iterations = 3;
    o.relative_tolerance = 0;
    const LbfgsbResult r = minimize_lbfgsb(f, Eigen::Vector2d(-1.2, 1.0), Bounds::unbounded(2), o);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 3);
  }
}
