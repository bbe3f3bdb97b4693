#pragma once

// Post-fit checks: quantile residuals, residual normality, simulated
// envelopes, generalized R^2 and EDF goodness-of-fit statistics.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "umwkit/inference.hpp"
#include "umwkit/regression.hpp"
#include "umwkit/umw.hpp"

namespace umw {

/// Fitted CDF values are clamped to [kCdfClamp, 1 - kCdfClamp] before the normal quantile.
inline constexpr double kCdfClamp = 1e-15;

struct NormalityTest {
  double statistic = 0.0;  // modified A*^2
  double p_value = 1.0;
};

/// Anderson-Darling normality test with mean and variance estimated from x.
/// Requires at least 8 finite values.
NormalityTest anderson_darling_normal(std::span<const double> x);

/// Names the normality-test variant written into reports.
inline constexpr const char* kAdVariant =
    "Anderson-Darling, normal with estimated mean and variance, A*=A^2(1+0.75/n+2.25/n^2), "
    "D'Agostino-Stephens p-value";

struct ResidualReport {
  std::vector<double> residuals;
  double ad_statistic = 0.0;
  double ad_p_value = 1.0;
  int clamped = 0;  // CDF values that hit the clamp
  std::string variant = kAdVariant;
};

/// Normal quantiles of the given fitted CDF values plus the normality test.
ResidualReport residuals_from_cdf(std::span<const double> cdf_values);
ResidualReport quantile_residuals(const UmwParams& p, const Dataset& d);
ResidualReport quantile_residuals(const RegressionFit& fit, const RegressionSpec& spec);

/// 1 - exp(-(2/n)(l_full - l_null)); negative when the nesting is violated.
double r2_generalized(double loglik_full, double loglik_null, int n);

struct GofReport {
  double ks = 0.0;
  double ad = 0.0;
  double cvm = 0.0;
};

/// KS, AD and CvM of d against UMW(p). Throws DomainError if some F(y) is 0 or 1.
GofReport gof_stats(const UmwParams& p, const Dataset& d);
/// Same statistics from precomputed CDF values (any order).
GofReport gof_from_cdf(std::vector<double> cdf_values);

struct EnvelopeOptions {
  int n_sim = 100;
  double level = 0.95;
  std::uint64_t seed = 1;
  int threads = 0;
  FitOptions fit;
};

struct EnvelopeBands {
  std::vector<double> sorted_residuals;
  std::vector<double> lower, median, upper;
  double coverage_level = 0.95;
  int n_sim = 0;      // requested replicates
  int n_skipped = 0;  // replicates whose refit failed

  /// Share of sorted observed residuals inside [lower, upper].
  double fraction_inside() const;
};

/// Percentile bands of sorted quantile residuals from n_sim responses simulated
/// at the fitted model and refit from ols_init. Requires n_sim >= 20; throws
/// ConvergenceFailure if more than 10% of refits fail.
EnvelopeBands simulated_envelope(const RegressionFit& fit, const RegressionSpec& spec,
                                 const EnvelopeOptions& opts = {});

/// Per-position bands from replicate rows (each already sorted).
EnvelopeBands envelope_from_replicates(std::vector<double> observed_sorted,
                                       const std::vector<std::vector<double>>& replicates, double level);

}  // namespace umw
