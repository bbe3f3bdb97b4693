#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "umwkit/errors.hpp"
#include "umwkit/montecarlo.hpp"
#include "umwkit/regression.hpp"

using namespace umw;

namespace {

RegressionSpec simulated_spec(const RegressionTheta& th, const LinkFunction& link, double tau, int n,
                              std::uint64_t seed) {
  const Eigen::MatrixXd X = uniform_design(n, static_cast<int>(th.beta.size()), seed);
  Rng rng = make_rng(seed, {1});
  return RegressionSpec(X, Dataset(simulate_rq(th, link, tau, X, rng)), tau, link);
}

std::function<double(const Eigen::VectorXd&)> loglik_of(const RegressionSpec& s) {
  return [&s](const Eigen::VectorXd& x) { return loglik_rq(RegressionTheta::from_vector(x), s); };
}

std::function<Eigen::VectorXd(const Eigen::VectorXd&)> score_of(const RegressionSpec& s) {
  return [&s](const Eigen::VectorXd& x) { return score_rq(RegressionTheta::from_vector(x), s); };
}

const RegressionTheta kScenario1{2.7, 1.8, Eigen::Vector3d(0.2, -0.4, 0.5)};

}  // namespace

TEST_SUITE("regression") {
  TEST_CASE("spec validation") {
    const Eigen::MatrixXd X = uniform_design(10, 2, 1);
    const Dataset y(sample(UmwParams(1, 1, 0), 10, 1));
    CHECK_THROWS_AS(RegressionSpec(X, y, 1.0), DomainError);
    CHECK_THROWS_AS(RegressionSpec(X.topRows(5), y, 0.5), DomainError);
    CHECK_THROWS_AS(RegressionSpec(X, y, 0.5, LinkFunction(), {"only-one"}), DomainError);
    const RegressionSpec s(X, y, 0.5);
    CHECK(s.column_names() == std::vector<std::string>{"beta0", "beta1"});
    CHECK(s.with_tau(0.3).tau() == 0.3);
  }

  TEST_CASE("intercept-only log-likelihood equals the natural-parameter one") {
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> U(0.05, 0.95), G(0.3, 3), L(0, 3);
    for (int i = 0; i < 50; ++i) {
      const double mu = U(g), gm = G(g), lm = L(g), tau = U(g);
      const Dataset d(sample(UmwParams(1.0, gm, lm), 40, i));
      const LinkFunction link(LinkKind::Logit);
      const RegressionSpec s(Eigen::MatrixXd::Ones(40, 1), d, tau, link);
      const RegressionTheta th{gm, lm, Eigen::VectorXd::Constant(1, link.link(mu))};
      const double alpha = alpha_from_quantile(ReparamParams(link.inverse(th.beta[0]), gm, lm, tau));
      const double ref = loglik_umw(UmwParams(alpha, gm, lm), d);
      CHECK(std::abs(loglik_rq(th, s) - ref) < 1e-10 * std::max(1.0, std::abs(ref)));
    }
  }

  TEST_CASE("single observation equals reparam_log_pdf") {
    Eigen::MatrixXd X(2, 1);
    X << 1.0, 1.0;
    const RegressionSpec s(X, Dataset({0.3, 0.3}), 0.4, LinkFunction(LinkKind::Probit));
    const RegressionTheta th{1.5, 0.7, Eigen::VectorXd::Constant(1, 0.2)};
    const double mu = LinkFunction(LinkKind::Probit).inverse(0.2);
    CHECK(loglik_rq(th, s) == doctest::Approx(2 * reparam_log_pdf(ReparamParams(mu, 1.5, 0.7, 0.4), 0.3)).epsilon(1e-13));
  }

  TEST_CASE("score and information against finite differences for every link, 50 configurations each") {
    for (const auto& name : LinkFunction::names()) {
      const LinkFunction link = LinkFunction::from_name(name);
      std::mt19937_64 g(std::hash<std::string>{}(name));
      std::uniform_real_distribution<double> G(0.3, 3.0), L(0.05, 3.0), B(-1.0, 1.0), T(0.1, 0.9);
      double worst_s = 0, worst_h = 0;
      for (int i = 0; i < 50; ++i) {
        const RegressionTheta th{G(g), L(g), Eigen::Vector3d(B(g), B(g), B(g))};
        const RegressionSpec s = simulated_spec(th, link, T(g), 60, 700 + i);
        const Eigen::VectorXd x = th.to_vector();
        const double es = oracle::rel_err(score_rq(th, s), oracle::gradient(loglik_of(s), x));
        const double eh = oracle::rel_err(observed_info_rq(th, s), -oracle::jacobian(score_of(s), x));
        worst_s = std::max(worst_s, es);
        worst_h = std::max(worst_h, eh);
      }
      INFO(name << " score " << worst_s << " info " << worst_h);
      CHECK(worst_s < 1e-5);
      CHECK(worst_h < 1e-4);
    }
  }

  TEST_CASE("workspace collapses for k = 1") {
    const LinkFunction link(LinkKind::Cloglog);
    const RegressionTheta th{1.2, 0.8, Eigen::VectorXd::Constant(1, -0.3)};
    const RegressionSpec s = simulated_spec(th, link, 0.6, 30, 4);
    const RegressionWorkspace ws = regression_workspace(th, s);
    const double g1 = link.eval(ws.mu[0]).d1;
    CHECK(score_rq(th, s)[2] == doctest::Approx(ws.w.sum() / g1).epsilon(1e-12));
    const double lbb = ((ws.wdia.array() * ws.T.array() + ws.w.array() * ws.Tdia.array()) * ws.T.array()).sum();
    CHECK(-observed_info_rq(th, s)(2, 2) == doctest::Approx(lbb).epsilon(1e-12));
    const Eigen::MatrixXd L = observed_info_rq(th, s);
    CHECK(L == L.transpose());
  }

  TEST_CASE("ols_init") {
    const LinkFunction link(LinkKind::Logit);
    const RegressionSpec flat(Eigen::MatrixXd::Ones(8, 1), Dataset(std::vector<double>(8, link.inverse(0.37))), 0.5);
    CHECK(ols_init(flat).beta[0] == doctest::Approx(0.37).epsilon(1e-13));
    CHECK(ols_init(flat).gamma == 1.0);
    CHECK(ols_init(flat).lambda == 1.0);

    // Orthonormal columns: beta = X' g(y).
    Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(uniform_design(6, 2, 3)).householderQ() *
                        Eigen::MatrixXd::Identity(6, 2);
    const std::vector<double> y{0.1, 0.2, 0.35, 0.5, 0.7, 0.9};
    Eigen::VectorXd gy(6);
    for (int i = 0; i < 6; ++i) gy[i] = link.link(y[i]);
    const RegressionSpec orth(Q, Dataset(y), 0.5);
    CHECK((ols_init(orth).beta - Q.transpose() * gy).cwiseAbs().maxCoeff() < 1e-12);

    // Normal equations solved independently.
    Eigen::MatrixXd X(6, 2);
    X << 1, 0.0, 1, 1.0, 1, 2.0, 1, 3.0, 1, 4.0, 1, 5.0;
    const RegressionSpec six(X, Dataset(y), 0.5);
    const Eigen::VectorXd ref = (X.transpose() * X).ldlt().solve(X.transpose() * gy);
    CHECK((ols_init(six).beta - ref).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::MatrixXd R(6, 3);
    R << X, 2 * X.col(1);
    CHECK_THROWS_AS(ols_init(RegressionSpec(R, Dataset(y), 0.5)), RankDeficientDesign);
    CHECK_THROWS_AS(check_full_rank(R), RankDeficientDesign);
  }

  TEST_CASE("saturated predictors") {
    Eigen::MatrixXd X = uniform_design(20, 2, 1);
    const RegressionSpec s(X, Dataset(sample(UmwParams(1, 1, 1), 20, 2)), 0.5);
    const RegressionTheta th{1.0, 1.0, Eigen::Vector2d(60.0, 0.0)};
    CHECK_THROWS_AS(loglik_rq(th, s), DomainError);
    CHECK(regression_workspace(th, s).saturated == 20);
  }

  TEST_CASE("fit: first-order condition, determinism, 3-SE calibration") {
    int inside = 0, total = 0;
    for (int seed = 0; seed < 100; ++seed) {
      const RegressionSpec s = simulated_spec(kScenario1, LinkFunction(), 0.5, 500, 9000 + seed);
      const RegressionFit f = fit_rq(s);
      CHECK(f.result.converged);
      if (seed == 0) {
        CHECK(f.result.q == 5);
        CHECK(f.result.names[0] == "gamma");
        if (f.theta.lambda > 0) CHECK(score_rq(f.theta, s).cwiseAbs().maxCoeff() < 1e-6);
        const RegressionFit g = fit_rq(s);
        CHECK(g.result.estimates == f.result.estimates);
        CHECK(g.result.std_errors == f.result.std_errors);
        CHECK(f.result.loglik >= loglik_rq(kScenario1, s));
      }
      if (!f.result.all_se_available()) continue;
      ++total;
      bool ok = true;
      for (int j = 0; j < 3; ++j) {
        ok = ok && std::abs(f.theta.beta[j] - kScenario1.beta[j]) < 3 * f.result.std_errors[2 + j];
      }
      inside += ok;
    }
    INFO(inside << " of " << total);
    CHECK(total >= 98);
    CHECK(inside >= 0.97 * total);
  }

  TEST_CASE("fitted quantiles are calibrated") {
    for (double tau : {0.1, 0.5, 0.9}) {
      const RegressionSpec s = simulated_spec(kScenario1, LinkFunction(), tau, 500, 42);
      const RegressionFit f = fit_rq(s);
      const RegressionWorkspace ws = regression_workspace(f.theta, s);
      int below = 0;
      for (Eigen::Index t = 0; t < s.n(); ++t) below += s.response()[t] <= ws.mu[t];
      CHECK(std::abs(below / 500.0 - tau) < 0.05);
    }
  }

  TEST_CASE("recentring a covariate leaves the maximum unchanged") {
    const RegressionSpec s = simulated_spec(kScenario1, LinkFunction(), 0.5, 300, 5);
    Eigen::MatrixXd X = s.design();
    X.col(1).array() -= 0.5;
    const RegressionFit a = fit_rq(s), b = fit_rq(RegressionSpec(X, s.response(), 0.5));
    CHECK(b.result.loglik == doctest::Approx(a.result.loglik).epsilon(1e-8));
    CHECK(b.theta.beta[1] == doctest::Approx(a.theta.beta[1]).epsilon(1e-5));
  }

  TEST_CASE("fixed lambda") {
    const RegressionSpec s = simulated_spec(kScenario1, LinkFunction(), 0.5, 200, 6);
    FitOptions o;
    o.fixed_lambda = 0.0;
    const RegressionFit f = fit_rq(s, o);
    CHECK(f.result.converged);
    CHECK(f.theta.lambda == 0.0);
    CHECK(f.result.q == 4);
    CHECK(f.result.std_errors[1] == 0.0);
  }

  TEST_CASE("prediction") {
    const RegressionTheta th{1.3, 0.4, Eigen::VectorXd::Constant(1, 0.0)};
    const double x[1] = {1.0};
    CHECK(predict_quantile(th, LinkFunction(), 0.5, x) == 0.5);
    CHECK(predict_quantile(th, LinkFunction(), 0.5, x, 0.5) == 0.5);
    const double q9 = predict_quantile(th, LinkFunction(), 0.5, x, 0.9);
    CHECK(q9 > 0.5);
    // The converted distribution has median 0.5 and tau=0.9 quantile q9.
    const UmwParams nat = ReparamParams(0.5, 1.3, 0.4, 0.5).natural();
    CHECK(cdf(nat, q9) == doctest::Approx(0.9).epsilon(1e-10));
    const double bad[2] = {1.0, 2.0};
    CHECK_THROWS_AS(predict_quantile(th, LinkFunction(), 0.5, bad), DomainError);
  }

  TEST_CASE("fitted_cdf equals reparam_cdf at fitted quantiles") {
    const RegressionSpec s = simulated_spec(kScenario1, LinkFunction(LinkKind::Loglog), 0.3, 50, 8);
    const std::vector<double> F = fitted_cdf(kScenario1, s);
    const RegressionWorkspace ws = regression_workspace(kScenario1, s);
    for (Eigen::Index t = 0; t < s.n(); ++t) {
      const UmwParams nat = ReparamParams(ws.mu[t], 2.7, 1.8, 0.3).natural();
      CHECK(F[static_cast<std::size_t>(t)] == doctest::Approx(cdf(nat, s.response()[t])).epsilon(1e-12));
    }
  }
}
