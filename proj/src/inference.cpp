#include "umwkit/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

namespace umw {
namespace {

constexpr double kPositiveFloor = 1e-8;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

// -log y and log(-log y) for every observation.
struct NegLogData {
  std::vector<double> u;
  std::vector<double> log_u;

  explicit NegLogData(const Dataset& d) : u(d.size()), log_u(d.size()) {
    for (std::size_t t = 0; t < d.size(); ++t) {
      u[t] = -std::log(d[t]);
      log_u[t] = std::log(u[t]);
    }
  }
};

double loglik_kernel(double a, double g, double l, const NegLogData& nd) {
  const double log_a = std::log(a);
  double sum = 0.0;
  for (std::size_t t = 0; t < nd.u.size(); ++t) {
    const double u = nd.u[t];
    const double lu = nd.log_u[t];
    sum += log_a + std::log(g + l * u) + (l + 1.0) * u + (g - 1.0) * lu - std::exp(log_a + l * u + g * lu);
  }
  return sum;
}

Eigen::Vector3d score_kernel(double a, double g, double l, const NegLogData& nd) {
  Eigen::Vector3d s = Eigen::Vector3d::Zero();
  for (std::size_t t = 0; t < nd.u.size(); ++t) {
    const double u = nd.u[t];
    const double lu = nd.log_u[t];
    const double h = std::exp(l * u + g * lu);  // y^(-lambda) (-log y)^gamma
    const double inv = 1.0 / (g + l * u);
    s[0] += 1.0 / a - h;
    s[1] += inv - a * h * lu + lu;
    s[2] += u * inv - a * h * u + u;
  }
  return s;
}

Eigen::Matrix3d info_kernel(double a, double g, double l, const NegLogData& nd) {
  double saa = 0, sgg = 0, sll = 0, sag = 0, sal = 0, sgl = 0;
  for (std::size_t t = 0; t < nd.u.size(); ++t) {
    const double u = nd.u[t];
    const double lu = nd.log_u[t];
    const double h = std::exp(l * u + g * lu);
    const double inv2 = 1.0 / ((g + l * u) * (g + l * u));
    saa += -1.0 / (a * a);
    sgg += -inv2 - a * h * lu * lu;
    sll += -u * u * inv2 - a * h * u * u;
    sag += -h * lu;
    sal += -h * u;
    sgl += -u * inv2 - a * h * u * lu;
  }
  Eigen::Matrix3d hess;
  hess << saa, sag, sal, sag, sgg, sgl, sal, sgl, sll;
  return -hess;
}

double profile_alpha_kernel(double g, double l, const NegLogData& nd) {
  double sum = 0.0;
  for (std::size_t t = 0; t < nd.u.size(); ++t) sum += std::exp(l * nd.u[t] + g * nd.log_u[t]);
  return static_cast<double>(nd.u.size()) / sum;
}

}  // namespace

Dataset::Dataset(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DomainError("Dataset: at least one observation is required");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double y = values_[i];
    if (!(y > 0.0 && y < 1.0)) {
      throw DomainError("Dataset: observation " + std::to_string(i) + " (" + std::to_string(y) +
                        ") is outside the open interval (0,1)");
    }
  }
}

bool FitResult::se_available(std::size_t index) const {
  return index < static_cast<std::size_t>(std_errors.size()) && std::isfinite(std_errors[index]);
}

bool FitResult::all_se_available() const { return std_errors.size() > 0 && std_errors.allFinite(); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

InfoCriteria info_criteria(double loglik, int q, int n) {
  if (q < 1 || n < 1) throw DomainError("info_criteria: q and n must be positive");
  if (n <= q + 1) throw DomainError("info_criteria: AICc requires n > q + 1");
  InfoCriteria c;
  c.aic = 2.0 * q - 2.0 * loglik;
  c.bic = q * std::log(static_cast<double>(n)) - 2.0 * loglik;
  c.aicc = c.aic + (2.0 * q * q + 2.0 * q) / static_cast<double>(n - q - 1);
  return c;
}

Interval confidence_interval(double estimate, double se, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0,1)");
  if (!(se >= 0.0) || !std::isfinite(se)) throw SingularInformation("standard error unavailable");
  const double z = normal_quantile(0.5 + 0.5 * level);
  return {estimate - z * se, estimate + z * se};
}

std::vector<Interval> confidence_intervals(const FitResult& fit, double level) {
  std::vector<Interval> out;
  out.reserve(fit.estimates.size());
  for (Eigen::Index i = 0; i < fit.estimates.size(); ++i) {
    out.push_back(confidence_interval(fit.estimates[i], fit.std_errors[i], level));
  }
  return out;
}

WaldResult wald_test(double estimate, double se, double null_value, std::size_t index) {
  if (!(se > 0.0) || !std::isfinite(se)) throw SingularInformation("wald_test: standard error unavailable");
  const double w = (estimate - null_value) / se;
  return {w, std::min(1.0, 2.0 * normal_cdf(-std::abs(w))), null_value, index};
}

WaldResult wald_test(const FitResult& fit, std::size_t index, double null_value) {
  if (index >= static_cast<std::size_t>(fit.estimates.size())) {
    throw DomainError("wald_test: parameter index out of range");
  }
  return wald_test(fit.estimates[index], fit.std_errors[index], null_value, index);
}

double loglik_umw(const UmwParams& p, const Dataset& d) {
  return loglik_kernel(p.alpha(), p.gamma(), p.lambda(), NegLogData(d));
}

ScoreWorkspace score_workspace(const UmwParams& p, const Dataset& d) {
  const double a = p.alpha(), g = p.gamma(), l = p.lambda();
  const auto n = static_cast<Eigen::Index>(d.size());
  ScoreWorkspace w;
  for (auto* v : {&w.r, &w.s, &w.u, &w.rstar, &w.sstar, &w.ustar, &w.vstar, &w.zstar, &w.dstar}) {
    v->resize(n);
  }
  for (Eigen::Index t = 0; t < n; ++t) {
    const double u = -std::log(d[t]);
    const double lu = std::log(u);
    const double h = std::exp(l * u + g * lu);
    const double inv = 1.0 / (g + l * u);
    w.r[t] = 1.0 / a - h;
    w.s[t] = inv - a * h * lu + lu;
    w.u[t] = u * inv - a * h * u + u;
    w.rstar[t] = -1.0 / (a * a);
    w.sstar[t] = -inv * inv - a * h * lu * lu;
    w.ustar[t] = -u * u * inv * inv - a * h * u * u;
    w.vstar[t] = -h * lu;
    w.zstar[t] = -h * u;
    w.dstar[t] = -u * inv * inv - a * h * u * lu;
  }
  return w;
}

Eigen::Vector3d score_umw(const UmwParams& p, const Dataset& d) {
  return score_kernel(p.alpha(), p.gamma(), p.lambda(), NegLogData(d));
}

Eigen::Matrix3d observed_info_umw(const UmwParams& p, const Dataset& d) {
  return info_kernel(p.alpha(), p.gamma(), p.lambda(), NegLogData(d));
}

double alpha_profile_mle(double gamma, double lambda, const Dataset& d) {
  if (!(gamma > 0.0) || !(lambda >= 0.0)) throw DomainError("alpha_profile_mle: invalid shape parameters");
  return profile_alpha_kernel(gamma, lambda, NegLogData(d));
}

UmwParams fitted_params(const FitResult& fit) {
  return UmwParams(fit.estimates[0], fit.estimates[1], fit.estimates[2]);
}

namespace detail {

double kkt_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& score, const Bounds& bounds,
                    const std::vector<bool>& free) {
  double norm = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!free[i]) continue;
    // Maximizing: a negative score at a lower bound (or positive at an upper) is inactive.
    if (std::isfinite(bounds.lower[i]) && x[i] <= bounds.lower[i] && score[i] < 0.0) continue;
    if (std::isfinite(bounds.upper[i]) && x[i] >= bounds.upper[i] && score[i] > 0.0) continue;
    norm = std::max(norm, std::abs(score[i]));
  }
  return norm;
}

int newton_polish(const LikelihoodModel& model, Eigen::VectorXd& x, const Bounds& bounds,
                  const std::vector<bool>& free, double tolerance, int max_steps) {
  double ll = model.loglik(x);
  int steps = 0;
  for (; steps < max_steps; ++steps) {
    const Eigen::VectorXd g = model.score(x);
    if (!g.allFinite() || kkt_residual(x, g, bounds, free) < tolerance) break;

    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (!free[i]) continue;
      if (std::isfinite(bounds.lower[i]) && x[i] <= bounds.lower[i] && g[i] < 0.0) continue;
      if (std::isfinite(bounds.upper[i]) && x[i] >= bounds.upper[i] && g[i] > 0.0) continue;
      idx.push_back(i);
    }
    if (idx.empty()) break;

    const Eigen::MatrixXd info = model.information(x);
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd sub(k, k);
    Eigen::VectorXd rhs(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      rhs[a] = g[idx[a]];
      for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = info(idx[a], idx[b]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(sub);
    if (llt.info() != Eigen::Success) break;
    const Eigen::VectorXd delta = llt.solve(rhs);
    if (!delta.allFinite()) break;

    bool accepted = false;
    double t = 1.0;
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      Eigen::VectorXd trial = x;
      for (Eigen::Index a = 0; a < k; ++a) trial[idx[a]] += t * delta[a];
      trial = bounds.project(trial);
      const double ll_trial = model.loglik(trial);
      if (std::isfinite(ll_trial) && ll_trial >= ll - 1e-12 * std::max(1.0, std::abs(ll))) {
        const Eigen::VectorXd g_trial = model.score(trial);
        // Near the optimum the objective is flat to rounding; insist that the
        // first-order residual does not grow.
        if (g_trial.allFinite() && (ll_trial > ll || kkt_residual(trial, g_trial, bounds, free) <=
                                                         kkt_residual(x, g, bounds, free))) {
          x = trial;
          ll = ll_trial;
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) break;
  }
  return steps;
}

Eigen::MatrixXd numeric_information(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& score,
                                    const Eigen::VectorXd& x, const Bounds& bounds) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd jac(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
    Eigen::VectorXd plus = x, minus = x;
    plus[i] += h;
    minus[i] -= h;
    if (std::isfinite(bounds.lower[i]) && minus[i] < bounds.lower[i]) {
      jac.col(i) = (score(plus) - score(x)) / h;
    } else {
      jac.col(i) = (score(plus) - score(minus)) / (2.0 * h);
    }
  }
  return -0.5 * (jac + jac.transpose());
}

void attach_covariance(FitResult& fit, const Eigen::MatrixXd& info,
                       const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& score,
                       const Bounds& bounds) {
  const Eigen::Index p = fit.estimates.size();
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < p; ++i) {
    if (!fit.fixed[i]) idx.push_back(i);
  }
  const auto k = static_cast<Eigen::Index>(idx.size());

  auto restrict = [&](const Eigen::MatrixXd& m) {
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = m(idx[a], idx[b]);
    return sub;
  };
  auto try_invert = [&](const Eigen::MatrixXd& m, Eigen::MatrixXd& out) {
    if (!m.allFinite()) return false;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    lu.setThreshold(1e-13);
    if (!lu.isInvertible()) return false;
    out = lu.inverse();
    out = 0.5 * (out + out.transpose());
    return out.allFinite();
  };

  fit.vcov = Eigen::MatrixXd::Zero(p, p);
  fit.std_errors = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd inv;
  if (try_invert(restrict(info), inv)) {
    fit.info_source = InfoSource::Analytic;
  } else if (try_invert(restrict(numeric_information(score, fit.estimates, bounds)), inv)) {
    fit.info_source = InfoSource::FiniteDifference;
  } else {
    fit.info_source = InfoSource::Unavailable;
    for (Eigen::Index a = 0; a < k; ++a) fit.std_errors[idx[a]] = kNaN;
    fit.vcov.setConstant(kNaN);
    return;
  }
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) fit.vcov(idx[a], idx[b]) = inv(a, b);
    const double var = inv(a, a);
    fit.std_errors[idx[a]] = var >= 0.0 ? std::sqrt(var) : kNaN;
  }
}

}  // namespace detail

FitResult fit_umw(const Dataset& d, const FitOptions& opts) {
  if (d.size() < 4) throw DomainError("fit_umw: at least 4 observations are required");
  const NegLogData nd(d);
  const double inf = std::numeric_limits<double>::infinity();

  Bounds bounds{Eigen::Vector3d(kPositiveFloor, kPositiveFloor, 0.0), Eigen::Vector3d::Constant(inf)};
  std::vector<bool> free{true, true, !opts.fixed_lambda.has_value()};
  if (opts.fixed_lambda && !(*opts.fixed_lambda >= 0.0)) {
    throw DomainError("fit_umw: fixed lambda must be >= 0");
  }

  Eigen::Vector3d x(1.0, 1.0, 1.0);
  if (opts.start) x = Eigen::Vector3d(opts.start->alpha(), opts.start->gamma(), opts.start->lambda());
  if (opts.fixed_lambda) x[2] = *opts.fixed_lambda;

  // Coordinates handed to the quasi-Newton solver.
  std::vector<Eigen::Index> active_coords;
  for (Eigen::Index i = opts.profile_alpha ? 1 : 0; i < 3; ++i) {
    if (free[i]) active_coords.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(active_coords.size());

  auto expand = [&](const Eigen::VectorXd& z) {
    Eigen::Vector3d full = x;
    for (Eigen::Index a = 0; a < m; ++a) full[active_coords[a]] = z[a];
    if (opts.profile_alpha) full[0] = profile_alpha_kernel(full[1], full[2], nd);
    return full;
  };

  Objective objective = [&](const Eigen::VectorXd& z, Eigen::VectorXd& grad) {
    const Eigen::Vector3d full = expand(z);
    const double ll = loglik_kernel(full[0], full[1], full[2], nd);
    const Eigen::Vector3d s = score_kernel(full[0], full[1], full[2], nd);
    grad.resize(m);
    for (Eigen::Index a = 0; a < m; ++a) grad[a] = -s[active_coords[a]];
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
  };

  Bounds sub_bounds{Eigen::VectorXd(m), Eigen::VectorXd(m)};
  Eigen::VectorXd z0(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    sub_bounds.lower[a] = bounds.lower[active_coords[a]];
    sub_bounds.upper[a] = bounds.upper[active_coords[a]];
    z0[a] = x[active_coords[a]];
  }

  LbfgsbOptions lopts;
  lopts.history = opts.history;
  lopts.max_iterations = opts.max_iterations;
  lopts.gradient_tolerance = opts.gradient_tolerance;
  lopts.relative_tolerance = opts.relative_tolerance;
  const LbfgsbResult opt = minimize_lbfgsb(objective, z0, sub_bounds, lopts);

  Eigen::VectorXd theta = expand(opt.x);

  detail::LikelihoodModel model{
      [&](const Eigen::VectorXd& v) { return loglik_kernel(v[0], v[1], v[2], nd); },
      [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return score_kernel(v[0], v[1], v[2], nd); },
      [&](const Eigen::VectorXd& v) -> Eigen::MatrixXd { return info_kernel(v[0], v[1], v[2], nd); }};
  // Newton steps share the iteration budget.
  const int polish_budget = std::min(50, std::max(0, opts.max_iterations - opt.iterations));
  const int polish =
      detail::newton_polish(model, theta, bounds, free, 1e-3 * opts.gradient_tolerance, polish_budget);

  FitResult fit;
  fit.names = {"alpha", "gamma", "lambda"};
  fit.estimates = theta;
  fit.fixed = {false, false, opts.fixed_lambda.has_value()};
  fit.n = static_cast<int>(d.size());
  fit.q = opts.fixed_lambda ? 2 : 3;
  fit.iterations = opt.iterations + polish;
  fit.evaluations = opt.evaluations;
  fit.loglik = model.loglik(theta);
  fit.score = model.score(theta);
  fit.converged = std::isfinite(fit.loglik) &&
                  detail::kkt_residual(theta, fit.score, bounds, free) < opts.gradient_tolerance;
  fit.message = opt.reason;
  if (fit.n > fit.q + 1) {
    fit.criteria = info_criteria(fit.loglik, fit.q, fit.n);
  } else {
    fit.criteria = {2.0 * fit.q - 2.0 * fit.loglik, fit.q * std::log(double(fit.n)) - 2.0 * fit.loglik, kNaN};
  }
  detail::attach_covariance(fit, info_kernel(theta[0], theta[1], theta[2], nd), model.score, bounds);

  if (!fit.converged) {
    throw FitConvergenceFailure("fit_umw: first-order condition not met (" + opt.reason + ")", fit);
  }
  return fit;
}

}  // namespace umw
