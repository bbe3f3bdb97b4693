#pragma once

// Independent reference computations used only by the tests.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using Big = boost::multiprecision::cpp_bin_float_50;

/// F(y) = exp(-alpha (-ln y)^gamma y^-lambda) in 50-digit arithmetic.
inline double umw_cdf(double alpha, double gamma, double lambda, double y) {
  const Big Y(y);
  const Big u = -log(Y);
  return static_cast<double>(exp(-Big(alpha) * pow(u, Big(gamma)) * pow(Y, -Big(lambda))));
}

/// Density by differentiating the CDF symbolically, evaluated in 50 digits:
/// f = F * alpha * u^(gamma-1) y^(-lambda-1) (gamma + lambda u).
inline double umw_pdf(double alpha, double gamma, double lambda, double y) {
  const Big Y(y);
  const Big u = -log(Y);
  const Big H = Big(alpha) * pow(u, Big(gamma)) * pow(Y, -Big(lambda));
  return static_cast<double>(exp(-H) * Big(alpha) * pow(u, Big(gamma) - 1) * pow(Y, -Big(lambda) - 1) *
                             (Big(gamma) + Big(lambda) * u));
}

/// Five-point central difference gradient.
inline Eigen::VectorXd gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-3 * std::max(1.0, std::abs(x[i]));
    auto at = [&](double s) {
      Eigen::VectorXd y = x;
      y[i] += s * h;
      return f(y);
    };
    g[i] = (at(-2) - 8 * at(-1) + 8 * at(1) - at(2)) / (12 * h);
  }
  return g;
}

/// Five-point central difference Jacobian of a vector function (columns = d/dx_j).
inline Eigen::MatrixXd jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                const Eigen::VectorXd& x) {
  const Eigen::Index m = f(x).size();
  Eigen::MatrixXd J(m, x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = 1e-3 * std::max(1.0, std::abs(x[j]));
    auto at = [&](double s) {
      Eigen::VectorXd y = x;
      y[j] += s * h;
      return f(y);
    };
    J.col(j) = (at(-2) - 8 * at(-1) + 8 * at(1) - at(2)) / (12 * h);
  }
  return J;
}

/// max_i |a_i - b_i| / max_i |b_i| (b is the reference).
inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

struct UnitWeibullMle {
  double alpha;
  double gamma;
};

/// Unit-Weibull (lambda = 0) MLE: alpha(gamma) = n / sum u^gamma, and gamma
/// solves n/gamma + sum ln u - n sum u^gamma ln u / sum u^gamma = 0 (decreasing in gamma).
inline UnitWeibullMle unit_weibull_mle(const std::vector<double>& y) {
  const double n = static_cast<double>(y.size());
  std::vector<double> lu;
  for (double v : y) lu.push_back(std::log(-std::log(v)));
  auto eq = [&](double g) {
    double s = 0.0, sl = 0.0, sum_lu = 0.0;
    for (double l : lu) {
      const double w = std::exp(g * l);
      s += w;
      sl += w * l;
      sum_lu += l;
    }
    return n / g + sum_lu - n * sl / s;
  };
  double lo = 1e-3, hi = 1.0;
  while (eq(hi) > 0) hi *= 2.0;
  boost::math::tools::eps_tolerance<double> tol(52);
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(eq, lo, hi, tol, iters);
  const double g = 0.5 * (a + b);
  double s = 0.0;
  for (double l : lu) s += std::exp(g * l);
  return {n / s, g};
}

}  // namespace oracle
