#pragma once

// Quantile regression with UMW responses: the tau-quantile mu_t of y_t obeys
// g(mu_t) = x_t' beta, with alpha_t recovered from (mu_t, gamma, lambda, tau).

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "umwkit/inference.hpp"
#include "umwkit/link.hpp"
#include "umwkit/rng.hpp"

namespace umw {

class RegressionSpec {
 public:
  RegressionSpec(Eigen::MatrixXd design, Dataset response, double tau,
                 LinkFunction link = LinkFunction(LinkKind::Logit),
                 std::vector<std::string> column_names = {});

  const Eigen::MatrixXd& design() const noexcept { return design_; }
  const Dataset& response() const noexcept { return response_; }
  double tau() const noexcept { return tau_; }
  const LinkFunction& link() const noexcept { return link_; }
  const std::vector<std::string>& column_names() const noexcept { return names_; }
  Eigen::Index n() const noexcept { return design_.rows(); }
  Eigen::Index k() const noexcept { return design_.cols(); }
  /// -log y_t and log(-log y_t), cached at construction.
  const Eigen::VectorXd& neg_log_response() const noexcept { return u_; }
  const Eigen::VectorXd& log_neg_log_response() const noexcept { return log_u_; }

  /// Same design and link with a different response or quantile level.
  RegressionSpec with_response(Dataset response) const;
  RegressionSpec with_tau(double tau) const;

 private:
  Eigen::MatrixXd design_;
  Dataset response_;
  double tau_;
  LinkFunction link_;
  std::vector<std::string> names_;
  Eigen::VectorXd u_;
  Eigen::VectorXd log_u_;
};

struct RegressionTheta {
  double gamma = 1.0;
  double lambda = 1.0;
  Eigen::VectorXd beta;

  /// Packed as (gamma, lambda, beta_0, ..., beta_{k-1}).
  Eigen::VectorXd to_vector() const;
  static RegressionTheta from_vector(const Eigen::VectorXd& v);
};

/// Per-observation quantities of the regression log-likelihood and its derivatives.
struct RegressionWorkspace {
  Eigen::VectorXd mu;          // fitted quantiles (clamped to [1e-12, 1 - 1e-12])
  Eigen::VectorXd A, B;        // mu^lambda log(tau) (-log y)^gamma and log(-log y) - log(-log mu)
  Eigen::VectorXd v, z, w;     // d/dgamma, d/dlambda, d/dmu
  Eigen::VectorXd rdia, sdia, udia;  // gamma^2, lambda^2, gamma-lambda second derivatives
  Eigen::VectorXd vdia, zdia, wdia;  // mu-gamma, mu-lambda, mu^2 second derivatives
  Eigen::VectorXd T;           // 1 / g'(mu)
  Eigen::VectorXd Tdia;        // -g''(mu) / g'(mu)^2
  Eigen::VectorXd loglik;      // per-observation contributions
  int saturated = 0;           // observations whose mu was clamped
};

RegressionWorkspace regression_workspace(const RegressionTheta& theta, const RegressionSpec& spec);

/// Throws DomainError if any linear predictor saturates the link numerically.
double loglik_rq(const RegressionTheta& theta, const RegressionSpec& spec);
/// (V_gamma, V_lambda, X' T w).
Eigen::VectorXd score_rq(const RegressionTheta& theta, const RegressionSpec& spec);
/// Negative Hessian, with the beta block X' M T X.
Eigen::MatrixXd observed_info_rq(const RegressionTheta& theta, const RegressionSpec& spec);

/// Least squares of g(y) on X, with gamma = lambda = 1. Throws RankDeficientDesign.
RegressionTheta ols_init(const RegressionSpec& spec);

/// Throws RankDeficientDesign when the column-pivoted QR rank is below k.
void check_full_rank(const Eigen::MatrixXd& design);

struct RegressionFit {
  FitResult result;
  RegressionTheta theta;
  double tau = 0.5;
  LinkFunction link;
  int saturated = 0;  // observations clamped at the estimate
};

/// Maximizes the regression log-likelihood over gamma >= 1e-8, lambda >= 0
/// and unrestricted beta, starting from ols_init unless opts provides nothing
/// else. Throws FitConvergenceFailure / RankDeficientDesign.
RegressionFit fit_rq(const RegressionSpec& spec, const FitOptions& opts = {},
                     const std::optional<RegressionTheta>& start = std::nullopt);

/// g^{-1}(x' beta); for a different tau_new, converts through alpha and solves
/// for the tau_new quantile.
double predict_quantile(const RegressionTheta& theta, const LinkFunction& link, double fitted_tau,
                        std::span<const double> x_new, std::optional<double> tau_new = std::nullopt);
double predict_quantile(const RegressionFit& fit, std::span<const double> x_new,
                        std::optional<double> tau_new = std::nullopt);

/// One response per design row from the model at theta: y_t ~ UMW with
/// tau-quantile g^{-1}(x_t' beta). Quantiles are clamped like the likelihood.
std::vector<double> simulate_rq(const RegressionTheta& theta, const LinkFunction& link, double tau,
                                const Eigen::MatrixXd& design, Rng& rng);

/// Fitted UMW CDF of each observation, F(y_t; mu_t, gamma, lambda, tau).
std::vector<double> fitted_cdf(const RegressionTheta& theta, const RegressionSpec& spec);

}  // namespace umw
