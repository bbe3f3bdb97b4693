#include "umwkit/umw.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "umwkit/errors.hpp"

namespace umw {
namespace {

constexpr int kMaxQuantileIterations = 200;

void require_unit(double y, const char* what) {
  if (!(y > 0.0 && y < 1.0)) {
    throw DomainError(std::string(what) + ": argument " + std::to_string(y) +
                      " is outside the open interval (0,1)");
  }
}

void require_positive_neglog(double u, const char* what) {
  if (!(u > 0.0) || !std::isfinite(u)) {
    throw DomainError(std::string(what) + ": -log(y) must be positive and finite");
  }
}

// log of alpha * y^(-lambda) * (-log y)^gamma.
double log_cum_hazard(const UmwParams& p, double u) {
  return std::log(p.alpha()) + p.lambda() * u + p.gamma() * std::log(u);
}

// Maps a root in u back to y while staying strictly inside (0,1).
double to_unit(double u) {
  double y = std::exp(-u);
  if (y <= 0.0) return std::numeric_limits<double>::denorm_min();
  if (y >= 1.0) return std::nextafter(1.0, 0.0);
  return y;
}

}  // namespace

UmwParams::UmwParams(double alpha, double gamma, double lambda)
    : alpha_(alpha), gamma_(gamma), lambda_(lambda) {
  if (!(std::isfinite(alpha) && std::isfinite(gamma) && std::isfinite(lambda))) {
    throw DomainError("UmwParams: parameters must be finite");
  }
  if (!(alpha > 0.0)) throw DomainError("UmwParams: alpha must be > 0");
  if (!(gamma > 0.0)) throw DomainError("UmwParams: gamma must be > 0");
  if (!(lambda >= 0.0)) throw DomainError("UmwParams: lambda must be >= 0");
}

ReparamParams::ReparamParams(double mu_tau, double gamma, double lambda, double tau)
    : mu_tau_(mu_tau), gamma_(gamma), lambda_(lambda), tau_(tau) {
  if (!(mu_tau > 0.0 && mu_tau < 1.0)) throw DomainError("ReparamParams: mu_tau must lie in (0,1)");
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("ReparamParams: tau must lie in (0,1)");
  if (!(std::isfinite(gamma) && gamma > 0.0)) throw DomainError("ReparamParams: gamma must be > 0");
  if (!(std::isfinite(lambda) && lambda >= 0.0)) throw DomainError("ReparamParams: lambda must be >= 0");
}

UmwParams ReparamParams::natural() const {
  return UmwParams(alpha_from_quantile(*this), gamma_, lambda_);
}

double cdf_neglog(const UmwParams& p, double u) {
  require_positive_neglog(u, "cdf");
  return std::exp(-std::exp(log_cum_hazard(p, u)));
}

double cdf(const UmwParams& p, double y) {
  require_unit(y, "cdf");
  return cdf_neglog(p, -std::log(y));
}

double log_pdf_neglog(const UmwParams& p, double u) {
  require_positive_neglog(u, "log_pdf");
  const double g = p.gamma();
  const double l = p.lambda();
  const double log_u = std::log(u);
  // log(gamma - lambda*log y) with -log y = u; the argument is >= gamma > 0.
  return std::log(p.alpha()) + std::log(g + l * u) + (l + 1.0) * u + (g - 1.0) * log_u -
         std::exp(log_cum_hazard(p, u));
}

double log_pdf(const UmwParams& p, double y) {
  require_unit(y, "log_pdf");
  return log_pdf_neglog(p, -std::log(y));
}

double pdf(const UmwParams& p, double y) { return std::exp(log_pdf(p, y)); }

double neg_log_quantile(const UmwParams& p, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw DomainError("quantile: tau " + std::to_string(tau) + " is outside (0,1)");
  }
  // Solve h(v) = lambda*e^v + gamma*v - c = 0 in v = log u. h is strictly
  // increasing and convex, and the lambda = 0 root v0 = c/gamma has h(v0) >= 0.
  const double g = p.gamma();
  const double l = p.lambda();
  const double c = std::log(-std::log(tau)) - std::log(p.alpha());
  auto h = [&](double v) { return l * std::exp(v) + g * v - c; };
  auto dh = [&](double v) { return l * std::exp(v) + g; };

  double hi = c / g;
  if (l == 0.0) return std::exp(hi);

  // Keep lambda*e^v finite while preserving h(hi) >= 0.
  const double cap = std::log(std::max(std::abs(c), 1.0) / l) + 2.0;
  if (hi > cap) hi = cap;
  while (h(hi) < 0.0) hi += std::max(1.0, std::abs(hi));

  double lo = hi - 1.0;
  double step = 1.0;
  while (h(lo) > 0.0) {
    step *= 2.0;
    lo = hi - step;
  }

  double v = hi;
  for (int it = 0; it < kMaxQuantileIterations; ++it) {
    const double hv = h(v);
    if (hv == 0.0) return std::exp(v);
    if (hv > 0.0) hi = v; else lo = v;
    double next = v - hv / dh(v);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double dv = std::abs(next - v);
    v = next;
    if (dv <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(v)) ||
        hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(v))) {
      return std::exp(v);
    }
  }
  throw ConvergenceFailure("quantile: root solver did not converge");
}

double quantile(const UmwParams& p, double tau) { return to_unit(neg_log_quantile(p, tau)); }

double draw(const UmwParams& p, Rng& rng) { return quantile(p, uniform_open(rng)); }

std::vector<double> sample(const UmwParams& p, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("sample: n must be >= 1");
  Rng rng = make_rng(seed);
  std::vector<double> out(n);
  for (auto& y : out) y = draw(p, rng);
  return out;
}

double hazard(const UmwParams& p, double y) {
  require_unit(y, "hazard");
  const double u = -std::log(y);
  const double cum = std::exp(log_cum_hazard(p, u));
  const double survival = -std::expm1(-cum);
  if (!(survival >= std::numeric_limits<double>::min())) {
    throw OverflowError("hazard: survival function underflows at y = " + std::to_string(y));
  }
  return std::exp(log_pdf_neglog(p, u) - std::log(survival));
}

double order_stat_pdf(const UmwParams& p, int n, int r, double y) {
  if (n < 1) throw DomainError("order_stat_pdf: n must be >= 1");
  if (r < 1 || r > n) throw DomainError("order_stat_pdf: r must lie in [1, n]");
  require_unit(y, "order_stat_pdf");
  const double u = -std::log(y);
  const double cum = std::exp(log_cum_hazard(p, u));
  const double log_f = -cum;                      // log F
  const double log_s = std::log(-std::expm1(-cum));  // log(1 - F)
  const double log_binom = std::lgamma(n + 1.0) - std::lgamma(double(r)) - std::lgamma(double(n - r + 1));
  double out = log_binom + log_pdf_neglog(p, u);
  if (r > 1) out += (r - 1) * log_f;
  if (n > r) out += (n - r) * log_s;
  return std::exp(out);
}

ShapeCoefficients shape_coefficients(const UmwParams& p) {
  auto q = [&](double t) { return quantile(p, t); };
  const double q1 = q(0.25), q2 = q(0.5), q3 = q(0.75);
  const double spread = q3 - q1;
  return {(q3 + q1 - 2.0 * q2) / spread, (q(0.875) + q(0.375) - q(0.625) - q(0.125)) / spread};
}

double alpha_from_quantile(const ReparamParams& r) {
  const double m = -std::log(r.mu_tau());
  return std::exp(std::log(-std::log(r.tau())) - r.lambda() * m - r.gamma() * std::log(m));
}

double reparam_cdf(const ReparamParams& r, double y) {
  require_unit(y, "reparam_cdf");
  const double u = -std::log(y);
  const double m = -std::log(r.mu_tau());
  // (u/m)^gamma * exp(lambda (u - m)) equals 1 at y = mu_tau, so F = tau there.
  const double ratio = std::exp(r.gamma() * (std::log(u) - std::log(m)) + r.lambda() * (u - m));
  return std::exp(std::log(r.tau()) * ratio);
}

double reparam_log_pdf(const ReparamParams& r, double y) {
  require_unit(y, "reparam_log_pdf");
  const double g = r.gamma();
  const double l = r.lambda();
  const double u = -std::log(y);
  const double m = -std::log(r.mu_tau());
  const double log_tau = std::log(r.tau());
  const double log_u = std::log(u);
  const double log_m = std::log(m);
  const double ratio = std::exp(g * (log_u - log_m) + l * (u - m));
  return std::log(-log_tau) - l * m - g * log_m + std::log(g + l * u) + (l + 1.0) * u +
         (g - 1.0) * log_u + log_tau * ratio;
}

}  // namespace umw
