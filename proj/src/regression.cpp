#include "umwkit/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "umwkit/errors.hpp"
#include "umwkit/optimizer.hpp"
#include "umwkit/umw.hpp"

namespace umw {
namespace {

constexpr double kMuFloor = 1e-12;
constexpr double kPositiveFloor = 1e-8;

enum class Order { Value, Gradient, Hessian };

struct Evaluation {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd hessian;  // of the log-likelihood (not negated)
  int saturated = 0;
};

// Fills the workspace (when requested) and the summed derivatives.
Evaluation evaluate(double g, double l, const Eigen::VectorXd& beta, const RegressionSpec& spec,
                    Order order, RegressionWorkspace* ws = nullptr) {
  const Eigen::Index n = spec.n();
  const Eigen::Index k = spec.k();
  const Eigen::MatrixXd& X = spec.design();
  const Eigen::VectorXd& uu = spec.neg_log_response();
  const Eigen::VectorXd& luu = spec.log_neg_log_response();
  const double L = std::log(spec.tau());
  const double log_neg_L = std::log(-L);
  const LinkFunction& link = spec.link();

  const Eigen::VectorXd eta = X * beta;
  const bool need_grad = order != Order::Value;
  const bool need_hess = order == Order::Hessian;

  Evaluation ev;
  Eigen::VectorXd Tw, Tv, Tz, Mdiag;
  if (need_grad) {
    ev.score = Eigen::VectorXd::Zero(2 + k);
    Tw.resize(n);
  }
  if (need_hess) {
    ev.hessian = Eigen::MatrixXd::Zero(2 + k, 2 + k);
    Tv.resize(n);
    Tz.resize(n);
    Mdiag.resize(n);
  }
  if (ws) {
    for (auto* v : {&ws->mu, &ws->A, &ws->B, &ws->v, &ws->z, &ws->w, &ws->rdia, &ws->sdia, &ws->udia,
                    &ws->vdia, &ws->zdia, &ws->wdia, &ws->T, &ws->Tdia, &ws->loglik}) {
      v->setZero(n);
    }
  }

  double hgg = 0.0, hll = 0.0, hgl = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    double mu = link.inverse(eta[t]);
    if (!(mu >= kMuFloor && mu <= 1.0 - kMuFloor)) {
      mu = std::clamp(std::isnan(mu) ? 0.5 : mu, kMuFloor, 1.0 - kMuFloor);
      ++ev.saturated;
    }
    const double u = uu[t];
    const double lu = luu[t];
    const double m = -std::log(mu);
    const double lm = std::log(m);
    const double B = lu - lm;
    const double E = std::exp(g * B + l * (u - m));  // (u/m)^gamma exp(lambda (u - m))
    const double K = L * E;                          // A_t / (y^lambda m^gamma)
    const double inv = 1.0 / (g + l * u);

    const double lt = log_neg_L - l * m - g * lm + std::log(g + l * u) + (l + 1.0) * u + (g - 1.0) * lu + K;
    ev.loglik += lt;

    if (!need_grad && !ws) continue;

    const double c = l + g / m;  // -(lambda log mu - gamma) / log mu
    const double v = K * B + inv + B;
    const double z = K * (u - m) + u * inv + u - m;
    const double w = (1.0 + K) * c / mu;
    const LinkValues lv = link.eval(mu);
    const double T = 1.0 / lv.d1;

    if (need_grad) {
      ev.score[0] += v;
      ev.score[1] += z;
      Tw[t] = T * w;
    }

    const double rdia = K * B * B - inv * inv;
    const double sdia = K * (u - m) * (u - m) - u * u * inv * inv;
    const double udia = -u * inv * inv + K * B * (u - m);
    const double vdia = (K * (c * B + 1.0 / m) + 1.0 / m) / mu;
    const double zdia = (1.0 + K + K * c * (u - m)) / mu;
    const double wdia = (g * (1.0 + K) / (m * m) + K * c * c - c * (1.0 + K)) / (mu * mu);
    const double Tdia = -lv.d2 / (lv.d1 * lv.d1);

    if (need_hess) {
      hgg += rdia;
      hll += sdia;
      hgl += udia;
      Tv[t] = T * vdia;
      Tz[t] = T * zdia;
      Mdiag[t] = (wdia * T + w * Tdia) * T;
    }

    if (ws) {
      ws->mu[t] = mu;
      ws->A[t] = std::exp(-l * m) * L * std::exp(g * lu);
      ws->B[t] = B;
      ws->v[t] = v;
      ws->z[t] = z;
      ws->w[t] = w;
      ws->rdia[t] = rdia;
      ws->sdia[t] = sdia;
      ws->udia[t] = udia;
      ws->vdia[t] = vdia;
      ws->zdia[t] = zdia;
      ws->wdia[t] = wdia;
      ws->T[t] = T;
      ws->Tdia[t] = Tdia;
      ws->loglik[t] = lt;
    }
  }

  if (need_grad) ev.score.tail(k) = X.transpose() * Tw;
  if (need_hess) {
    ev.hessian(0, 0) = hgg;
    ev.hessian(1, 1) = hll;
    ev.hessian(0, 1) = ev.hessian(1, 0) = hgl;
    const Eigen::VectorXd hgb = X.transpose() * Tv;
    const Eigen::VectorXd hlb = X.transpose() * Tz;
    ev.hessian.block(0, 2, 1, k) = hgb.transpose();
    ev.hessian.block(2, 0, k, 1) = hgb;
    ev.hessian.block(1, 2, 1, k) = hlb.transpose();
    ev.hessian.block(2, 1, k, 1) = hlb;
    ev.hessian.bottomRightCorner(k, k) = X.transpose() * Mdiag.asDiagonal() * X;
  }
  if (ws) ws->saturated = ev.saturated;
  return ev;
}

Evaluation evaluate(const Eigen::VectorXd& x, const RegressionSpec& spec, Order order) {
  return evaluate(x[0], x[1], x.tail(x.size() - 2), spec, order);
}

void check_theta(const RegressionTheta& theta, const RegressionSpec& spec) {
  if (!(std::isfinite(theta.gamma) && theta.gamma > 0.0)) throw DomainError("regression: gamma must be > 0");
  if (!(std::isfinite(theta.lambda) && theta.lambda >= 0.0)) throw DomainError("regression: lambda must be >= 0");
  if (theta.beta.size() != spec.k()) throw DomainError("regression: beta has the wrong dimension");
  if (!theta.beta.allFinite()) throw DomainError("regression: beta must be finite");
}

}  // namespace

RegressionSpec::RegressionSpec(Eigen::MatrixXd design, Dataset response, double tau, LinkFunction link,
                               std::vector<std::string> column_names)
    : design_(std::move(design)),
      response_(std::move(response)),
      tau_(tau),
      link_(link),
      names_(std::move(column_names)) {
  if (!(tau_ > 0.0 && tau_ < 1.0)) throw DomainError("RegressionSpec: tau must lie in (0,1)");
  if (design_.rows() != static_cast<Eigen::Index>(response_.size())) {
    throw DomainError("RegressionSpec: design rows do not match the response length");
  }
  if (design_.cols() < 1) throw DomainError("RegressionSpec: design needs at least one column");
  if (design_.cols() >= design_.rows()) throw DomainError("RegressionSpec: need more observations than covariates");
  if (!design_.allFinite()) throw DomainError("RegressionSpec: design contains non-finite values");
  if (names_.empty()) {
    for (Eigen::Index j = 0; j < design_.cols(); ++j) names_.push_back("beta" + std::to_string(j));
  } else if (static_cast<Eigen::Index>(names_.size()) != design_.cols()) {
    throw DomainError("RegressionSpec: column name count does not match the design");
  }
  u_.resize(design_.rows());
  log_u_.resize(design_.rows());
  for (Eigen::Index t = 0; t < design_.rows(); ++t) {
    u_[t] = -std::log(response_[t]);
    log_u_[t] = std::log(u_[t]);
  }
}

RegressionSpec RegressionSpec::with_response(Dataset response) const {
  return RegressionSpec(design_, std::move(response), tau_, link_, names_);
}

RegressionSpec RegressionSpec::with_tau(double tau) const {
  return RegressionSpec(design_, response_, tau, link_, names_);
}

Eigen::VectorXd RegressionTheta::to_vector() const {
  Eigen::VectorXd v(2 + beta.size());
  v << gamma, lambda, beta;
  return v;
}

RegressionTheta RegressionTheta::from_vector(const Eigen::VectorXd& v) {
  if (v.size() < 3) throw DomainError("RegressionTheta: vector too short");
  return {v[0], v[1], v.tail(v.size() - 2)};
}

RegressionWorkspace regression_workspace(const RegressionTheta& theta, const RegressionSpec& spec) {
  check_theta(theta, spec);
  RegressionWorkspace ws;
  evaluate(theta.gamma, theta.lambda, theta.beta, spec, Order::Value, &ws);
  return ws;
}

double loglik_rq(const RegressionTheta& theta, const RegressionSpec& spec) {
  check_theta(theta, spec);
  const Evaluation ev = evaluate(theta.gamma, theta.lambda, theta.beta, spec, Order::Value);
  if (ev.saturated > 0) {
    throw DomainError("loglik_rq: " + std::to_string(ev.saturated) +
                      " linear predictor(s) saturate the link function");
  }
  return ev.loglik;
}

Eigen::VectorXd score_rq(const RegressionTheta& theta, const RegressionSpec& spec) {
  check_theta(theta, spec);
  return evaluate(theta.gamma, theta.lambda, theta.beta, spec, Order::Gradient).score;
}

Eigen::MatrixXd observed_info_rq(const RegressionTheta& theta, const RegressionSpec& spec) {
  check_theta(theta, spec);
  return -evaluate(theta.gamma, theta.lambda, theta.beta, spec, Order::Hessian).hessian;
}

void check_full_rank(const Eigen::MatrixXd& design) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < design.cols()) {
    throw RankDeficientDesign("design matrix has rank " + std::to_string(qr.rank()) + " < " +
                              std::to_string(design.cols()) + " columns");
  }
}

RegressionTheta ols_init(const RegressionSpec& spec) {
  check_full_rank(spec.design());
  Eigen::VectorXd gy(spec.n());
  for (Eigen::Index t = 0; t < spec.n(); ++t) gy[t] = spec.link().link(spec.response()[t]);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(spec.design());
  return {1.0, 1.0, qr.solve(gy)};
}

RegressionFit fit_rq(const RegressionSpec& spec, const FitOptions& opts,
                     const std::optional<RegressionTheta>& start) {
  if (spec.n() <= spec.k() + 2) throw DomainError("fit_rq: need n > k + 2 observations");
  RegressionTheta init = start ? *start : ols_init(spec);
  if (start) check_full_rank(spec.design());
  if (opts.fixed_lambda) {
    if (!(*opts.fixed_lambda >= 0.0)) throw DomainError("fit_rq: fixed lambda must be >= 0");
    init.lambda = *opts.fixed_lambda;
  }
  check_theta(init, spec);

  const Eigen::Index p = 2 + spec.k();
  const double inf = std::numeric_limits<double>::infinity();
  Bounds bounds = Bounds::unbounded(p);
  bounds.lower[0] = kPositiveFloor;
  bounds.lower[1] = 0.0;
  std::vector<bool> free(p, true);
  if (opts.fixed_lambda) free[1] = false;
  (void)inf;

  Eigen::VectorXd x = init.to_vector();
  std::vector<Eigen::Index> coords;
  for (Eigen::Index i = 0; i < p; ++i) {
    if (free[i]) coords.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(coords.size());
  auto expand = [&](const Eigen::VectorXd& zv) {
    Eigen::VectorXd full = x;
    for (Eigen::Index a = 0; a < m; ++a) full[coords[a]] = zv[a];
    return full;
  };

  Objective objective = [&](const Eigen::VectorXd& zv, Eigen::VectorXd& grad) {
    const Evaluation ev = evaluate(expand(zv), spec, Order::Gradient);
    grad.resize(m);
    for (Eigen::Index a = 0; a < m; ++a) grad[a] = -ev.score[coords[a]];
    return std::isfinite(ev.loglik) ? -ev.loglik : inf;
  };

  Bounds sub{Eigen::VectorXd(m), Eigen::VectorXd(m)};
  Eigen::VectorXd z0(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    sub.lower[a] = bounds.lower[coords[a]];
    sub.upper[a] = bounds.upper[coords[a]];
    z0[a] = x[coords[a]];
  }
  LbfgsbOptions lopts;
  lopts.history = opts.history;
  lopts.max_iterations = opts.max_iterations;
  lopts.gradient_tolerance = opts.gradient_tolerance;
  lopts.relative_tolerance = opts.relative_tolerance;
  const LbfgsbResult opt = minimize_lbfgsb(objective, z0, sub, lopts);

  Eigen::VectorXd theta = expand(opt.x);
  detail::LikelihoodModel model{
      [&](const Eigen::VectorXd& v) { return evaluate(v, spec, Order::Value).loglik; },
      [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return evaluate(v, spec, Order::Gradient).score; },
      [&](const Eigen::VectorXd& v) -> Eigen::MatrixXd { return -evaluate(v, spec, Order::Hessian).hessian; }};
  // Newton steps share the iteration budget.
  const int polish_budget = std::min(50, std::max(0, opts.max_iterations - opt.iterations));
  const int polish =
      detail::newton_polish(model, theta, bounds, free, 1e-3 * opts.gradient_tolerance, polish_budget);

  const Evaluation final_eval = evaluate(theta, spec, Order::Hessian);

  RegressionFit out;
  out.tau = spec.tau();
  out.link = spec.link();
  out.theta = RegressionTheta::from_vector(theta);
  out.saturated = final_eval.saturated;

  FitResult& fit = out.result;
  fit.names = {"gamma", "lambda"};
  for (const auto& nm : spec.column_names()) fit.names.push_back(nm);
  fit.estimates = theta;
  fit.fixed.assign(p, false);
  fit.fixed[1] = opts.fixed_lambda.has_value();
  fit.n = static_cast<int>(spec.n());
  fit.q = static_cast<int>(m);
  fit.iterations = opt.iterations + polish;
  fit.evaluations = opt.evaluations;
  fit.loglik = final_eval.loglik;
  fit.score = final_eval.score;
  fit.converged = std::isfinite(fit.loglik) &&
                  detail::kkt_residual(theta, fit.score, bounds, free) < opts.gradient_tolerance;
  fit.message = opt.reason;
  if (out.saturated > 0) fit.message += "; " + std::to_string(out.saturated) + " fitted quantile(s) clamped";
  if (fit.n > fit.q + 1) {
    fit.criteria = info_criteria(fit.loglik, fit.q, fit.n);
  } else {
    fit.criteria = {2.0 * fit.q - 2.0 * fit.loglik, fit.q * std::log(double(fit.n)) - 2.0 * fit.loglik,
                    std::numeric_limits<double>::quiet_NaN()};
  }
  detail::attach_covariance(fit, -final_eval.hessian, model.score, bounds);

  if (!fit.converged) {
    throw FitConvergenceFailure("fit_rq: first-order condition not met (" + opt.reason + ")", fit);
  }
  return out;
}

double predict_quantile(const RegressionTheta& theta, const LinkFunction& link, double fitted_tau,
                        std::span<const double> x_new, std::optional<double> tau_new) {
  if (static_cast<Eigen::Index>(x_new.size()) != theta.beta.size()) {
    throw DomainError("predict_quantile: covariate vector has dimension " + std::to_string(x_new.size()) +
                      ", expected " + std::to_string(theta.beta.size()));
  }
  double eta = 0.0;
  for (std::size_t j = 0; j < x_new.size(); ++j) eta += x_new[j] * theta.beta[static_cast<Eigen::Index>(j)];
  const double mu = link.inverse(eta);
  if (!tau_new || *tau_new == fitted_tau) return mu;
  const ReparamParams r(mu, theta.gamma, theta.lambda, fitted_tau);
  return quantile(r.natural(), *tau_new);
}

double predict_quantile(const RegressionFit& fit, std::span<const double> x_new, std::optional<double> tau_new) {
  return predict_quantile(fit.theta, fit.link, fit.tau, x_new, tau_new);
}

std::vector<double> simulate_rq(const RegressionTheta& theta, const LinkFunction& link, double tau,
                                const Eigen::MatrixXd& design, Rng& rng) {
  if (design.cols() != theta.beta.size()) throw DomainError("simulate_rq: design/beta dimension mismatch");
  const Eigen::VectorXd eta = design * theta.beta;
  std::vector<double> y(static_cast<std::size_t>(design.rows()));
  for (Eigen::Index t = 0; t < design.rows(); ++t) {
    const double mu = std::clamp(link.inverse(eta[t]), kMuFloor, 1.0 - kMuFloor);
    y[static_cast<std::size_t>(t)] = draw(ReparamParams(mu, theta.gamma, theta.lambda, tau).natural(), rng);
  }
  return y;
}

std::vector<double> fitted_cdf(const RegressionTheta& theta, const RegressionSpec& spec) {
  const RegressionWorkspace ws = regression_workspace(theta, spec);
  std::vector<double> out(static_cast<std::size_t>(spec.n()));
  for (Eigen::Index t = 0; t < spec.n(); ++t) {
    out[static_cast<std::size_t>(t)] =
        reparam_cdf(ReparamParams(ws.mu[t], theta.gamma, theta.lambda, spec.tau()), spec.response()[t]);
  }
  return out;
}

}  // namespace umw
