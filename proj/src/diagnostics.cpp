#include "umwkit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "umwkit/errors.hpp"
#include "umwkit/parallel.hpp"
#include "umwkit/rng.hpp"

namespace umw {

NormalityTest anderson_darling_normal(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 8) throw DomainError("anderson_darling_normal: need at least 8 observations");
  std::vector<double> z(x.begin(), x.end());
  for (double v : z) {
    if (!std::isfinite(v)) throw DomainError("anderson_darling_normal: non-finite value");
  }
  const double nd = static_cast<double>(n);
  const double mean = std::accumulate(z.begin(), z.end(), 0.0) / nd;
  double ss = 0.0;
  for (double v : z) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (nd - 1.0));
  if (!(sd > 0.0)) throw DomainError("anderson_darling_normal: zero variance");
  for (double& v : z) v = (v - mean) / sd;
  std::sort(z.begin(), z.end());

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = std::log(normal_cdf(z[i]));
    const double hi = std::log(normal_cdf(-z[n - 1 - i]));
    sum += (2.0 * static_cast<double>(i) + 1.0) * (lo + hi);
  }
  const double a2 = -nd - sum / nd;
  const double a = a2 * (1.0 + 0.75 / nd + 2.25 / (nd * nd));

  double p;
  if (a >= 0.6) {
    p = std::exp(1.2937 - 5.709 * a + 0.0186 * a * a);
  } else if (a >= 0.34) {
    p = std::exp(0.9177 - 4.279 * a - 1.38 * a * a);
  } else if (a >= 0.2) {
    p = 1.0 - std::exp(-8.318 + 42.796 * a - 59.938 * a * a);
  } else {
    p = 1.0 - std::exp(-13.436 + 101.14 * a - 223.73 * a * a);
  }
  if (!std::isfinite(a)) p = 0.0;
  return {a, std::clamp(p, 0.0, 1.0)};
}

ResidualReport residuals_from_cdf(std::span<const double> cdf_values) {
  ResidualReport rep;
  rep.residuals.reserve(cdf_values.size());
  for (double f : cdf_values) {
    if (std::isnan(f)) throw DomainError("quantile residuals: fitted CDF is NaN");
    if (f < kCdfClamp || f > 1.0 - kCdfClamp) {
      ++rep.clamped;
      f = std::clamp(f, kCdfClamp, 1.0 - kCdfClamp);
    }
    rep.residuals.push_back(normal_quantile(f));
  }
  if (rep.residuals.size() >= 8) {
    const NormalityTest t = anderson_darling_normal(rep.residuals);
    rep.ad_statistic = t.statistic;
    rep.ad_p_value = t.p_value;
  } else {
    rep.ad_statistic = std::numeric_limits<double>::quiet_NaN();
    rep.ad_p_value = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

ResidualReport quantile_residuals(const UmwParams& p, const Dataset& d) {
  std::vector<double> f(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) f[i] = cdf(p, d[i]);
  return residuals_from_cdf(f);
}

ResidualReport quantile_residuals(const RegressionFit& fit, const RegressionSpec& spec) {
  return residuals_from_cdf(fitted_cdf(fit.theta, spec));
}

double r2_generalized(double loglik_full, double loglik_null, int n) {
  if (n <= 0) throw DomainError("r2_generalized: n must be positive");
  return -std::expm1(-(2.0 / n) * (loglik_full - loglik_null));
}

GofReport gof_from_cdf(std::vector<double> f) {
  const std::size_t n = f.size();
  if (n == 0) throw DomainError("gof_stats: empty sample");
  for (double v : f) {
    if (!(v > 0.0 && v < 1.0)) throw DomainError("gof_stats: degenerate fitted CDF value (0 or 1)");
  }
  std::sort(f.begin(), f.end());
  const double nd = static_cast<double>(n);
  GofReport g;
  double ad_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double i = static_cast<double>(k + 1);
    g.ks = std::max({g.ks, i / nd - f[k], f[k] - (i - 1.0) / nd});
    ad_sum += (2.0 * i - 1.0) * (std::log(f[k]) + std::log1p(-f[n - 1 - k]));
    const double dev = f[k] - (2.0 * i - 1.0) / (2.0 * nd);
    g.cvm += dev * dev;
  }
  g.ad = -nd - ad_sum / nd;
  g.cvm += 1.0 / (12.0 * nd);
  return g;
}

GofReport gof_stats(const UmwParams& p, const Dataset& d) {
  std::vector<double> f(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) f[i] = cdf(p, d[i]);
  return gof_from_cdf(std::move(f));
}

double EnvelopeBands::fraction_inside() const {
  if (sorted_residuals.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t inside = 0;
  for (std::size_t i = 0; i < sorted_residuals.size(); ++i) {
    if (sorted_residuals[i] >= lower[i] && sorted_residuals[i] <= upper[i]) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(sorted_residuals.size());
}

EnvelopeBands envelope_from_replicates(std::vector<double> observed_sorted,
                                       const std::vector<std::vector<double>>& replicates, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("envelope: level must lie in (0,1)");
  if (replicates.empty()) throw DomainError("envelope: no replicates");
  const std::size_t n = observed_sorted.size();
  const std::size_t B = replicates.size();
  for (const auto& r : replicates) {
    if (r.size() != n) throw DomainError("envelope: replicate length mismatch");
  }
  const double p = 0.5 * (1.0 - level);
  // floor(pB) and ceil((1-p)B)-1: B = 20 at 95% gives the extremes.
  const auto lo_idx = static_cast<std::size_t>(std::floor(p * static_cast<double>(B)));
  const auto hi_idx = static_cast<std::size_t>(
      std::max(0.0, std::ceil((1.0 - p) * static_cast<double>(B) - 1e-9) - 1.0));

  EnvelopeBands bands;
  bands.sorted_residuals = std::move(observed_sorted);
  bands.coverage_level = level;
  bands.lower.resize(n);
  bands.median.resize(n);
  bands.upper.resize(n);
  std::vector<double> col(B);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t b = 0; b < B; ++b) col[b] = replicates[b][i];
    std::sort(col.begin(), col.end());
    bands.lower[i] = col[std::min(lo_idx, B - 1)];
    bands.upper[i] = col[std::min(hi_idx, B - 1)];
    bands.median[i] = B % 2 == 1 ? col[B / 2] : 0.5 * (col[B / 2 - 1] + col[B / 2]);
  }
  return bands;
}

EnvelopeBands simulated_envelope(const RegressionFit& fit, const RegressionSpec& spec, const EnvelopeOptions& opts) {
  if (opts.n_sim < 20) throw DomainError("simulated_envelope: n_sim must be at least 20");
  const auto B = static_cast<std::size_t>(opts.n_sim);
  std::vector<std::vector<double>> reps(B);
  std::vector<char> ok(B, 0);

  parallel_for(B, opts.threads, [&](std::size_t b) {
    Rng rng = make_rng(opts.seed, {static_cast<std::uint64_t>(b)});
    try {
      const RegressionSpec sim =
          spec.with_response(Dataset(simulate_rq(fit.theta, spec.link(), spec.tau(), spec.design(), rng)));
      const RegressionFit refit = fit_rq(sim, opts.fit);
      std::vector<double> r = quantile_residuals(refit, sim).residuals;
      std::sort(r.begin(), r.end());
      reps[b] = std::move(r);
      ok[b] = 1;
    } catch (const Error&) {
    }
  });

  std::vector<std::vector<double>> kept;
  for (std::size_t b = 0; b < B; ++b) {
    if (ok[b]) kept.push_back(std::move(reps[b]));
  }
  const int skipped = opts.n_sim - static_cast<int>(kept.size());
  if (skipped * 10 > opts.n_sim) {
    throw ConvergenceFailure("simulated_envelope: " + std::to_string(skipped) + " of " +
                             std::to_string(opts.n_sim) + " refits failed");
  }
  std::vector<double> observed = quantile_residuals(fit, spec).residuals;
  std::sort(observed.begin(), observed.end());
  EnvelopeBands bands = envelope_from_replicates(std::move(observed), kept, opts.level);
  bands.n_sim = opts.n_sim;
  bands.n_skipped = skipped;
  return bands;
}

}  // namespace umw
