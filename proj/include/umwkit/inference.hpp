#pragma once

// Maximum-likelihood inference for the three-parameter UMW distribution and
// the model-agnostic pieces shared with the regression model (FitResult,
// intervals, Wald tests, information criteria).

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "umwkit/errors.hpp"
#include "umwkit/optimizer.hpp"
#include "umwkit/umw.hpp"

namespace umw {

/// Observations strictly inside (0,1).
class Dataset {
 public:
  explicit Dataset(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

 private:
  std::vector<double> values_;
};

struct FitOptions {
  double gradient_tolerance = 1e-6;
  double relative_tolerance = 1e-10;
  int max_iterations = 500;
  int history = 10;
  /// Optimize (gamma, lambda) only, with alpha replaced by its closed-form
  /// conditional maximizer.
  bool profile_alpha = false;
  /// Hold lambda at this value (lambda = 0 gives the unit-Weibull submodel).
  std::optional<double> fixed_lambda;
  /// Starting point; defaults to (1, 1, 1).
  std::optional<UmwParams> start;
};

struct InfoCriteria {
  double aic = 0.0;
  double bic = 0.0;
  double aicc = 0.0;  // NaN when n <= q + 1
};

/// Where the covariance matrix came from.
enum class InfoSource { Analytic, FiniteDifference, Unavailable };

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd estimates;
  Eigen::VectorXd std_errors;  // NaN where unavailable; 0 for fixed parameters
  Eigen::MatrixXd vcov;        // inverse observed information (zero rows for fixed parameters)
  std::vector<bool> fixed;
  double loglik = 0.0;
  int n = 0;
  int q = 0;  // number of free parameters
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  InfoCriteria criteria;
  InfoSource info_source = InfoSource::Unavailable;
  Eigen::VectorXd score;  // gradient of the log-likelihood at the estimate
  std::string message;

  bool se_available(std::size_t index) const;
  bool all_se_available() const;
};

struct Interval {
  double lower;
  double upper;
};

struct WaldResult {
  double statistic;
  double p_value;
  double null_value;
  std::size_t index;
};

/// AIC = 2q - 2l, BIC = q log n - 2l, AICc = AIC + (2q^2 + 2q)/(n - q - 1).
/// Throws DomainError when n <= q + 1.
InfoCriteria info_criteria(double loglik, int q, int n);

/// theta_i -/+ z_{(1-level)/2} se_i. Throws SingularInformation if an SE is unavailable.
std::vector<Interval> confidence_intervals(const FitResult& fit, double level);
Interval confidence_interval(double estimate, double se, double level);

/// W = (theta_i - theta0)/se_i with a two-sided normal p-value.
WaldResult wald_test(const FitResult& fit, std::size_t index, double null_value);
WaldResult wald_test(double estimate, double se, double null_value, std::size_t index = 0);

/// Standard normal helpers shared across modules.
double normal_cdf(double z);
double normal_quantile(double p);

/// Per-observation derivative terms of the UMW log-likelihood.
struct ScoreWorkspace {
  Eigen::VectorXd r, s, u;  // d/dalpha, d/dgamma, d/dlambda
  Eigen::VectorXd rstar, sstar, ustar;  // second derivatives: alpha^2, gamma^2, lambda^2
  Eigen::VectorXd vstar, zstar, dstar;  // cross terms: alpha-gamma, alpha-lambda, gamma-lambda
};

double loglik_umw(const UmwParams& p, const Dataset& d);
ScoreWorkspace score_workspace(const UmwParams& p, const Dataset& d);
/// (U_alpha, U_gamma, U_lambda).
Eigen::Vector3d score_umw(const UmwParams& p, const Dataset& d);
/// Negative Hessian of the log-likelihood.
Eigen::Matrix3d observed_info_umw(const UmwParams& p, const Dataset& d);

/// n / sum (-log y_t)^gamma y_t^(-lambda): the root of U_alpha for fixed (gamma, lambda).
double alpha_profile_mle(double gamma, double lambda, const Dataset& d);

/// Raised when a fit does not reach the first-order condition; carries the
/// last iterate.
class FitConvergenceFailure : public ConvergenceFailure {
 public:
  FitConvergenceFailure(const std::string& what, FitResult partial)
      : ConvergenceFailure(what), partial_(std::move(partial)) {}
  const FitResult& partial() const noexcept { return partial_; }

 private:
  FitResult partial_;
};

/// Maximizes the log-likelihood over alpha, gamma >= 1e-8 and lambda >= 0.
/// Throws ConvergenceFailure if the first-order condition is not met within
/// the iteration budget. Singular information does not throw: SEs are NaN and
/// info_source is Unavailable.
FitResult fit_umw(const Dataset& d, const FitOptions& opts = {});

UmwParams fitted_params(const FitResult& fit);

// Covariance assembly shared by the distribution and regression fits.
namespace detail {

/// Fills vcov, std_errors and info_source from an analytic information matrix,
/// falling back to a central-difference Hessian of `score` when the analytic
/// matrix cannot be inverted. Only coordinates with fit.fixed == false enter.
void attach_covariance(FitResult& fit, const Eigen::MatrixXd& info,
                       const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& score,
                       const Bounds& bounds);

/// Symmetric central-difference Jacobian of a score function, negated.
/// One-sided differences are used for coordinates sitting on a lower bound.
Eigen::MatrixXd numeric_information(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& score,
                                    const Eigen::VectorXd& x, const Bounds& bounds);

/// Callbacks describing a log-likelihood over a full parameter vector.
struct LikelihoodModel {
  std::function<double(const Eigen::VectorXd&)> loglik;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> score;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> information;
};

/// Safeguarded projected Newton steps on the free, non-active coordinates,
/// used to tighten a quasi-Newton solution. Returns the number of steps taken.
int newton_polish(const LikelihoodModel& model, Eigen::VectorXd& x, const Bounds& bounds,
                  const std::vector<bool>& free, double tolerance, int max_steps = 50);

/// Infinity norm of the score over free coordinates, ignoring components that
/// push a coordinate through its bound.
double kkt_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& score, const Bounds& bounds,
                    const std::vector<bool>& free);

}  // namespace detail

}  // namespace umw
