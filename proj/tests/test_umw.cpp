#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "oracles.hpp"
#include "umwkit/errors.hpp"
#include "umwkit/umw.hpp"

using namespace umw;

namespace {

UmwParams random_params(std::mt19937_64& g, double gmin = 0.2) {
  std::uniform_real_distribution<double> A(0.05, 5.0), G(gmin, 4.0), L(0.0, 4.0);
  const double a = A(g), gg = G(g), l = L(g);
  return {a, gg, l};
}

// Mass of [eps, 1-eps] by Gauss-Kronrod plus both tails from the 50-digit CDF.
double total_mass(const UmwParams& p, double eps) {
  auto f = [&](double y) { return pdf(p, y); };
  double err = 0.0;
  const double inner = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, eps, 1.0 - eps, 25, 1e-12, &err);
  const double lower_tail = oracle::umw_cdf(p.alpha(), p.gamma(), p.lambda(), eps);
  const double upper_tail = 1.0 - oracle::umw_cdf(p.alpha(), p.gamma(), p.lambda(), 1.0 - eps);
  return lower_tail + inner + upper_tail;
}

}  // namespace

TEST_SUITE("umw") {
  TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(UmwParams(0.0, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(UmwParams(1.0, -1.0, 0.0), DomainError);
    CHECK_THROWS_AS(UmwParams(1.0, 1.0, -0.1), DomainError);
    CHECK_THROWS_AS(UmwParams(INFINITY, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(UmwParams(1.0, NAN, 0.0), DomainError);
    CHECK_NOTHROW(UmwParams(1.0, 1.0, 0.0));
    CHECK_THROWS_AS(ReparamParams(1.0, 1.0, 0.0, 0.5), DomainError);
    CHECK_THROWS_AS(ReparamParams(0.5, 1.0, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(ReparamParams(0.5, 0.0, 0.0, 0.5), DomainError);
  }

  TEST_CASE("endpoints are rejected") {
    const UmwParams p(1, 1, 0);
    for (double y : {0.0, 1.0, -0.1, 1.5, std::nan("")}) {
      CHECK_THROWS_AS(cdf(p, y), DomainError);
      CHECK_THROWS_AS(pdf(p, y), DomainError);
      CHECK_THROWS_AS(log_pdf(p, y), DomainError);
      CHECK_THROWS_AS(hazard(p, y), DomainError);
    }
    for (double t : {0.0, 1.0, -0.5}) CHECK_THROWS_AS(quantile(p, t), DomainError);
  }

  TEST_CASE("uniform identity") {
    const UmwParams p(1, 1, 0);
    CHECK(cdf(p, 0.3) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(cdf(p, std::exp(-1.0)) == doctest::Approx(0.36787944117144233).epsilon(1e-15));
    for (double y : {1e-9, 0.01, 0.42, 0.77, 0.999999}) {
      CHECK(pdf(p, y) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(std::abs(log_pdf(p, y)) < 1e-14);
      CHECK(cdf(p, y) == doctest::Approx(y).epsilon(1e-14));
    }
    CHECK(quantile(p, 0.25) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(hazard(p, 0.5) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(hazard(p, 0.9) == doctest::Approx(10.0).epsilon(1e-12));
    const ShapeCoefficients s = shape_coefficients(p);
    CHECK(std::abs(s.bowley_s) < 1e-12);
    CHECK(s.moors_k == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("cdf and pdf match the 50-digit oracle") {
    std::mt19937_64 g(11);
    std::uniform_real_distribution<double> Y(0.0, 1.0);
    // Tiny alpha with large gamma, then random triples.
    CHECK(cdf(UmwParams(0.006, 3.213, 0.622), 0.09) ==
          doctest::Approx(oracle::umw_cdf(0.006, 3.213, 0.622, 0.09)).epsilon(1e-13));
    for (int i = 0; i < 200; ++i) {
      const UmwParams p = random_params(g);
      const double y = std::clamp(Y(g), 1e-6, 1 - 1e-6);
      const double F = oracle::umw_cdf(p.alpha(), p.gamma(), p.lambda(), y);
      const double f = oracle::umw_pdf(p.alpha(), p.gamma(), p.lambda(), y);
      // exp(-H) has condition number H.
      const double H = std::max(1.0, -std::log(std::max(F, 1e-300)));
      if (F > 1e-290) CHECK(std::abs(cdf(p, y) - F) <= 1e-14 * H * F);
      if (f > 1e-250) CHECK(pdf(p, y) == doctest::Approx(f).epsilon(1e-11));
    }
  }

  TEST_CASE("log_pdf far in the left tail stays finite") {
    const UmwParams p(1.3, 1.1, 0.6);
    const double lp = log_pdf(p, 1e-8);
    CHECK(std::isfinite(lp));
    // Oracle in log form: ln f = ln a + ln(g + l u) + (l+1) u + (g-1) ln u - a u^g e^{l u}.
    const oracle::Big u = -log(oracle::Big(1e-8));
    const oracle::Big ref = log(oracle::Big(1.3)) + log(oracle::Big(1.1) + oracle::Big(0.6) * u) +
                            oracle::Big(1.6) * u + oracle::Big(0.1) * log(u) -
                            oracle::Big(1.3) * pow(u, oracle::Big(1.1)) * exp(oracle::Big(0.6) * u);
    CHECK(lp == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
    // Well beyond where y underflows.
    CHECK(std::isfinite(log_pdf_neglog(p, 800.0)));
  }

  TEST_CASE("exp(log_pdf) equals pdf and pdf equals dF/dy") {
    const UmwParams p(0.3, 0.8, 1.2);
    CHECK(log_pdf(p, 0.6) == doctest::Approx(std::log(pdf(p, 0.6))).epsilon(1e-12));
    std::mt19937_64 g(3);
    for (int i = 0; i < 100; ++i) {
      const UmwParams q = random_params(g);
      for (double y : {0.05, 0.2, 0.5, 0.8, 0.95}) {
        const double h = 1e-6;
        const double fd = (cdf(q, y + h) - cdf(q, y - h)) / (2 * h);
        const double f = pdf(q, y);
        if (f > 1e-6) CHECK(std::abs(fd - f) / f < 1e-5);
      }
    }
    const UmwParams r(0.7, 1.3, 0.5);
    CHECK(pdf(r, 0.5) == doctest::Approx((cdf(r, 0.5 + 1e-6) - cdf(r, 0.5 - 1e-6)) / 2e-6).epsilon(1e-6));
  }

  TEST_CASE("unit-Weibull submodel closed form") {
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> A(0.1, 4), G(0.3, 3), Y(0.001, 0.999);
    for (int i = 0; i < 100; ++i) {
      const double a = A(g), gg = G(g), y = Y(g);
      const double u = -std::log(y);
      const double ref = a * gg * std::pow(u, gg - 1) / y * std::exp(-a * std::pow(u, gg));
      CHECK(pdf(UmwParams(a, gg, 0), y) == doctest::Approx(ref).epsilon(1e-12));
    }
    // exp(-(ln 2 / 2)^(1/3))
    CHECK(quantile(UmwParams(2, 3, 0), 0.5) == doctest::Approx(std::exp(-std::cbrt(std::log(2.0) / 2))).epsilon(1e-13));
  }

  TEST_CASE("cdf is strictly increasing") {
    std::mt19937_64 g(17);
    for (int i = 0; i < 100; ++i) {
      const UmwParams p = random_params(g);
      double prev = -1.0;
      bool ok = true;
      for (int k = 1; k < 1000; ++k) {
        const double F = cdf(p, k / 1000.0);
        ok = ok && F >= prev;
        prev = F;
      }
      CHECK(ok);
    }
  }

  TEST_CASE("quantile round trip") {
    CHECK(std::abs(cdf(UmwParams(0.5, 0.9, 0.8), quantile(UmwParams(0.5, 0.9, 0.8), 0.5)) - 0.5) < 1e-10);
    std::mt19937_64 g(23);
    int y_space_misses = 0;
    for (int i = 0; i < 200; ++i) {
      const UmwParams p = random_params(g);
      double prev = 0.0;
      for (int k = 1; k <= 999; ++k) {
        const double t = k / 1000.0;
        // Log-space pair: full relative precision everywhere.
        CHECK(std::abs(cdf_neglog(p, neg_log_quantile(p, t)) - t) < 1e-12);
        const double q = quantile(p, t);
        CHECK(q > 0.0);
        CHECK(q < 1.0);
        CHECK(q >= prev);
        prev = q;
        y_space_misses += std::abs(cdf(p, q) - t) >= 1e-9;
      }
    }
    // y-space misses occur only where the quantile is within an ulp of 1.
    CHECK(y_space_misses < 200);
  }

  TEST_CASE("y-space misses are representation limited") {
    // gamma small, alpha large, tau near 1: mu_tau lies within 1e-16 of 1.
    const UmwParams p(4.8, 0.22, 0.1);
    const double t = 0.999;
    const double u = neg_log_quantile(p, t);
    CHECK(u < 1e-15);
    const double q = quantile(p, t);
    const double below = std::nextafter(q, 0.0);
    // Neither neighbour of the returned double reaches 1e-9.
    CHECK(std::abs(cdf(p, q) - t) > 1e-9);
    CHECK(std::abs(cdf(p, below) - t) > 1e-9);
  }

  TEST_CASE("normalization including bathtub shapes") {
    CHECK(total_mass(UmwParams(0.4, 0.5, 0.3), 1e-10) == doctest::Approx(1.0).epsilon(1e-6));
    std::mt19937_64 g(29);
    for (int i = 0; i < 30; ++i) {
      const UmwParams p = random_params(g);
      CHECK(total_mass(p, 1e-9) == doctest::Approx(1.0).epsilon(1e-6));
    }
  }

  TEST_CASE("hazard") {
    const UmwParams p(2.0, 0.6, 0.0);
    CHECK(hazard(p, 0.5) == doctest::Approx(pdf(p, 0.5) / (1 - cdf(p, 0.5))).epsilon(1e-10));
    CHECK(hazard(UmwParams(0.7, 1.3, 0.5), 1e-3) > 0.0);
    // Cumulative hazard e^{-829} underflows the survival.
    CHECK_THROWS_AS(hazard(UmwParams(1.0, 60.0, 0.0), 0.999999), OverflowError);
  }

  TEST_CASE("order statistics") {
    const UmwParams u(1, 1, 0);
    CHECK(order_stat_pdf(u, 3, 3, 0.5) == doctest::Approx(0.75).epsilon(1e-13));
    CHECK(order_stat_pdf(u, 4, 1, 0.5) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK_THROWS_AS(order_stat_pdf(u, 3, 0, 0.5), DomainError);
    CHECK_THROWS_AS(order_stat_pdf(u, 3, 4, 0.5), DomainError);
    const UmwParams p(0.7, 1.3, 0.5);
    for (double y : {0.1, 0.4, 0.8}) {
      const double F = cdf(p, y), f = pdf(p, y);
      CHECK(order_stat_pdf(p, 6, 1, y) == doctest::Approx(6 * f * std::pow(1 - F, 5)).epsilon(1e-12));
      CHECK(order_stat_pdf(p, 6, 6, y) == doctest::Approx(6 * f * std::pow(F, 5)).epsilon(1e-12));
    }
    auto f = [&](double y) { return order_stat_pdf(p, 5, 2, y); };
    const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 1e-12, 1 - 1e-12, 20, 1e-12);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("shape coefficients from quantiles") {
    const UmwParams p(0.4, 1.2, 0.7);
    auto Q = [&](double t) { return quantile(p, t); };
    const double iqr = Q(0.75) - Q(0.25);
    const ShapeCoefficients s = shape_coefficients(p);
    CHECK(s.bowley_s == doctest::Approx((Q(0.75) + Q(0.25) - 2 * Q(0.5)) / iqr).epsilon(1e-12));
    CHECK(s.moors_k == doctest::Approx((Q(0.875) + Q(0.375) - Q(0.625) - Q(0.125)) / iqr).epsilon(1e-12));
    std::mt19937_64 g(31);
    for (int i = 0; i < 100; ++i) {
      const ShapeCoefficients r = shape_coefficients(random_params(g, 0.3));
      CHECK(r.bowley_s >= -1.0);
      CHECK(r.bowley_s <= 1.0);
    }
  }

  TEST_CASE("reparameterization") {
    CHECK(alpha_from_quantile(ReparamParams(std::exp(-1.0), 1, 0, std::exp(-1.0))) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(alpha_from_quantile(ReparamParams(0.5, 2, 1, 0.5)) == doctest::Approx(0.5 / std::log(2.0)).epsilon(1e-14));
    std::mt19937_64 g(37);
    std::uniform_real_distribution<double> U(0.02, 0.98), G(0.3, 3), L(0, 3);
    for (int i = 0; i < 200; ++i) {
      const ReparamParams r(U(g), G(g), L(g), U(g));
      const UmwParams nat = r.natural();
      CHECK(nat.alpha() == doctest::Approx(alpha_from_quantile(r)).epsilon(1e-15));
      CHECK(quantile(nat, r.tau()) == doctest::Approx(r.mu_tau()).epsilon(1e-10));
      CHECK(reparam_cdf(r, r.mu_tau()) == doctest::Approx(r.tau()).epsilon(1e-13));
      const double y = U(g);
      CHECK(reparam_cdf(r, y) == doctest::Approx(cdf(nat, y)).epsilon(1e-12));
      CHECK(std::abs(reparam_log_pdf(r, y) - log_pdf(nat, y)) < 1e-12 * std::max(1.0, std::abs(log_pdf(nat, y))));
    }
    CHECK(reparam_cdf(ReparamParams(0.5, 1, 0, 0.5), 0.25) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(reparam_cdf(ReparamParams(0.3, 1.2, 0.4, 0.7), 1 - 1e-15) == doctest::Approx(1.0).epsilon(1e-12));
    const ReparamParams unif(std::exp(-1.0), 1, 0, std::exp(-1.0));
    for (double y : {0.1, 0.5, 0.9}) CHECK(std::abs(reparam_log_pdf(unif, y)) < 1e-14);

    // 50-digit oracle of the reparameterized log density.
    const ReparamParams r(0.7, 1.5, 0.3, 0.5);
    using oracle::Big;
    const Big mu(0.7), Y(0.4), tau(0.5), gm(1.5), lm(0.3);
    const Big alpha = -log(tau) * pow(mu, lm) / pow(-log(mu), gm);
    const Big u = -log(Y);
    const Big ref = log(alpha) + log(gm + lm * u) + (lm + 1) * u + (gm - 1) * log(u) - alpha * pow(u, gm) * exp(lm * u);
    CHECK(reparam_log_pdf(r, 0.4) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-13));
  }

  TEST_CASE("sampling") {
    const std::vector<double> u = sample(UmwParams(1, 1, 0), 100000, 99);
    const double mean = std::accumulate(u.begin(), u.end(), 0.0) / u.size();
    CHECK(mean > 0.497);
    CHECK(mean < 0.503);
    CHECK(sample(UmwParams(0.7, 1.3, 0.5), 50, 4) == sample(UmwParams(0.7, 1.3, 0.5), 50, 4));
    CHECK(sample(UmwParams(0.7, 1.3, 0.5), 50, 4) != sample(UmwParams(0.7, 1.3, 0.5), 50, 5));

    // One-sample KS against the CDF; 1% critical value ~ 1.628 / sqrt(n).
    const UmwParams p(0.7, 1.3, 0.5);
    std::vector<double> y = sample(p, 100000, 7);
    std::sort(y.begin(), y.end());
    double d = 0.0;
    const double n = static_cast<double>(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double F = cdf(p, y[i]);
      d = std::max({d, (i + 1) / n - F, F - i / n});
    }
    CHECK(d < 1.628 / std::sqrt(n));
    for (double v : y) {
      if (!(v > 0.0 && v < 1.0)) FAIL("draw outside (0,1)");
    }
  }
}
