#pragma once

// Unit-Modified Weibull distribution on (0,1):
//   F(y) = exp(-alpha * (-log y)^gamma * y^(-lambda)),  alpha, gamma > 0, lambda >= 0.
// Internally everything is evaluated in terms of u = -log y > 0, where the
// cumulative hazard is alpha * exp(lambda*u + gamma*log u).

#include <cstdint>
#include <vector>

#include "umwkit/rng.hpp"

namespace umw {

/// Natural parameterization (alpha, gamma, lambda).
class UmwParams {
 public:
  UmwParams(double alpha, double gamma, double lambda);

  double alpha() const noexcept { return alpha_; }
  double gamma() const noexcept { return gamma_; }
  double lambda() const noexcept { return lambda_; }

  friend bool operator==(const UmwParams&, const UmwParams&) = default;

 private:
  double alpha_;
  double gamma_;
  double lambda_;
};

/// Quantile parameterization: mu_tau is the tau-quantile of the distribution.
class ReparamParams {
 public:
  ReparamParams(double mu_tau, double gamma, double lambda, double tau);

  double mu_tau() const noexcept { return mu_tau_; }
  double gamma() const noexcept { return gamma_; }
  double lambda() const noexcept { return lambda_; }
  double tau() const noexcept { return tau_; }

  /// The equivalent natural parameters (alpha recovered by alpha_from_quantile).
  UmwParams natural() const;

 private:
  double mu_tau_;
  double gamma_;
  double lambda_;
  double tau_;
};

struct ShapeCoefficients {
  double bowley_s;  // quantile skewness
  double moors_k;   // octile kurtosis
};

double cdf(const UmwParams& p, double y);
double pdf(const UmwParams& p, double y);
double log_pdf(const UmwParams& p, double y);

/// Log density written directly in u = -log y; valid for any u > 0, including
/// values whose y = exp(-u) would underflow.
double log_pdf_neglog(const UmwParams& p, double u);
/// CDF as a function of u = -log y.
double cdf_neglog(const UmwParams& p, double u);

/// Solves mu^(-lambda) (-log mu)^gamma = -log(tau)/alpha for mu.
double quantile(const UmwParams& p, double tau);
/// The same root expressed as u = -log(mu). Full relative precision in u even
/// where mu itself rounds to 0 or 1.
double neg_log_quantile(const UmwParams& p, double tau);

/// One inverse-transform draw.
double draw(const UmwParams& p, Rng& rng);
/// n inverse-transform draws from a generator seeded with `seed`.
std::vector<double> sample(const UmwParams& p, std::size_t n, std::uint64_t seed);

/// f(y) / (1 - F(y)); throws OverflowError when the survival underflows.
double hazard(const UmwParams& p, double y);

/// Density of the r-th smallest of n iid draws (1 <= r <= n).
double order_stat_pdf(const UmwParams& p, int n, int r, double y);

ShapeCoefficients shape_coefficients(const UmwParams& p);

/// alpha = -log(tau) * mu^lambda / (-log mu)^gamma.
double alpha_from_quantile(const ReparamParams& r);
double reparam_cdf(const ReparamParams& r, double y);
double reparam_log_pdf(const ReparamParams& r, double y);

}  // namespace umw
