#include "umwkit/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "umwkit/errors.hpp"
#include "umwkit/parallel.hpp"
#include "umwkit/rng.hpp"

namespace umw {
namespace {

// Tag separating design streams from replicate streams.
constexpr std::uint64_t kDesignStream = 0x64657369676eULL;

struct Outcome {
  bool ok = false;
  Eigen::VectorXd estimates;
  Eigen::VectorXd std_errors;
};

Outcome outcome_of(const FitResult& fit) {
  Outcome o;
  o.estimates = fit.estimates;
  o.std_errors = fit.std_errors;
  o.ok = fit.converged && fit.all_se_available();
  return o;
}

void summarize_cell(MonteCarloReport& report, const std::string& scenario, int n, double tau,
                    const Eigen::VectorXd& truth, const std::vector<Outcome>& outcomes, double level,
                    const StudyOptions& opts) {
  const int R = static_cast<int>(outcomes.size());
  int failed = 0;
  for (const auto& o : outcomes) failed += o.ok ? 0 : 1;
  if (failed > opts.max_failure_share * R || failed == R) {
    std::ostringstream msg;
    msg << "Monte Carlo cell " << scenario << " n=" << n;
    if (!std::isnan(tau)) msg << " tau=" << tau;
    msg << ": " << failed << " of " << R << " replicates failed";
    throw ConvergenceFailure(msg.str());
  }
  const double z = normal_quantile(0.5 + 0.5 * level);
  for (Eigen::Index j = 0; j < truth.size(); ++j) {
    std::vector<ReplicateRecord> recs;
    recs.reserve(outcomes.size());
    for (const auto& o : outcomes) {
      if (!o.ok) continue;
      const double est = o.estimates[j];
      const double half = z * o.std_errors[j];
      recs.push_back({est - truth[j], est - half <= truth[j] && truth[j] <= est + half});
    }
    const Aggregate a = aggregate_metrics(recs);
    report.cells.push_back({scenario, report.parameter_names[static_cast<std::size_t>(j)], n, tau, a.bias, a.mse,
                            a.coverage, failed, static_cast<int>(recs.size())});
  }
  if (opts.keep_estimates) {
    for (int b = 0; b < R; ++b) {
      const auto& o = outcomes[static_cast<std::size_t>(b)];
      EstimateRow row{scenario, n, tau, b, o.ok, {}};
      if (o.estimates.size() > 0) row.estimates.assign(o.estimates.data(), o.estimates.data() + o.estimates.size());
      report.estimates.push_back(std::move(row));
    }
  }
}

void check_common(const std::vector<int>& ns, int replicates, double level) {
  if (ns.empty()) throw DomainError("scenario: empty sample-size list");
  for (int n : ns) {
    if (n <= 0) throw DomainError("scenario: sample sizes must be positive");
  }
  if (replicates < 1) throw DomainError("scenario: replicates must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("scenario: coverage level must lie in (0,1)");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& s, int line) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw DomainError("scenario line " + std::to_string(line) + ": not a number: '" + s + "'");
  }
  if (trim(s.substr(pos)).size() != 0) {
    throw DomainError("scenario line " + std::to_string(line) + ": not a number: '" + s + "'");
  }
  return v;
}

std::vector<double> parse_list(const std::string& s, int line) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(trim(item), line));
  if (out.empty()) throw DomainError("scenario line " + std::to_string(line) + ": empty list");
  return out;
}

int as_int(double v, int line) {
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw DomainError("scenario line " + std::to_string(line) + ": expected an integer");
  }
  return static_cast<int>(v);
}

}  // namespace

Aggregate aggregate_metrics(std::span<const ReplicateRecord> records) {
  if (records.empty()) throw DomainError("aggregate_metrics: no records");
  double s = 0.0, s2 = 0.0;
  std::size_t covered = 0;
  for (const auto& r : records) {
    s += r.error;
    s2 += r.error * r.error;
    covered += r.covered ? 1 : 0;
  }
  const double n = static_cast<double>(records.size());
  return {s / n, s2 / n, static_cast<double>(covered) / n};
}

void MonteCarloReport::write_csv(std::ostream& os) const {
  os << "scenario,parameter,n,tau,bias,mse,coverage,n_failed\n";
  for (const auto& c : cells) {
    os << c.scenario << ',' << c.parameter << ',' << c.n << ',' << format_double(c.tau) << ','
       << format_double(c.bias) << ',' << format_double(c.mse) << ',' << format_double(c.coverage) << ','
       << c.n_failed << '\n';
  }
}

std::string MonteCarloReport::to_csv() const {
  std::ostringstream os;
  write_csv(os);
  return os.str();
}

void MonteCarloReport::write_estimates_csv(std::ostream& os) const {
  os << "scenario,n,tau,replicate,converged";
  for (const auto& p : parameter_names) os << ',' << p;
  os << '\n';
  for (const auto& r : estimates) {
    os << r.scenario << ',' << r.n << ',' << format_double(r.tau) << ',' << r.replicate << ','
       << (r.converged ? 1 : 0);
    for (std::size_t j = 0; j < parameter_names.size(); ++j) {
      os << ',' << (j < r.estimates.size() ? format_double(r.estimates[j]) : "NA");
    }
    os << '\n';
  }
}

MonteCarloReport run_dist_study(const DistScenario& s, const StudyOptions& opts) {
  check_common(s.sample_sizes, s.replicates, s.coverage_level);
  MonteCarloReport report;
  report.parameter_names = {"alpha", "gamma", "lambda"};
  const Eigen::Vector3d truth(s.truth.alpha(), s.truth.gamma(), s.truth.lambda());
  const auto R = static_cast<std::size_t>(s.replicates);

  for (std::size_t c = 0; c < s.sample_sizes.size(); ++c) {
    const int n = s.sample_sizes[c];
    std::vector<Outcome> outcomes(R);
    parallel_for(R, opts.threads, [&](std::size_t b) {
      const std::uint64_t seed = derive_seed(s.base_seed, {c, b});
      try {
        outcomes[b] = outcome_of(fit_umw(Dataset(sample(s.truth, static_cast<std::size_t>(n), seed)), opts.fit));
      } catch (const FitConvergenceFailure& e) {
        outcomes[b].estimates = e.partial().estimates;
      } catch (const Error&) {
      }
    });
    summarize_cell(report, s.name, n, std::numeric_limits<double>::quiet_NaN(), truth, outcomes,
                   s.coverage_level, opts);
  }
  return report;
}

Eigen::MatrixXd uniform_design(int n, int k, std::uint64_t seed) {
  if (n <= 0 || k <= 0) throw DomainError("uniform_design: n and k must be positive");
  Rng rng = make_rng(seed);
  Eigen::MatrixXd X(n, k);
  for (int t = 0; t < n; ++t) {
    X(t, 0) = 1.0;
    for (int j = 1; j < k; ++j) X(t, j) = uniform_open(rng);
  }
  return X;
}

MonteCarloReport run_reg_study(const RegScenario& s, const StudyOptions& opts) {
  check_common(s.sample_sizes, s.replicates, s.coverage_level);
  if (s.taus.empty()) throw DomainError("scenario: empty tau list");
  for (double t : s.taus) {
    if (!(t > 0.0 && t < 1.0)) throw DomainError("scenario: tau values must lie in (0,1)");
  }
  const auto k = static_cast<int>(s.truth.beta.size());
  if (k < 1) throw DomainError("scenario: beta must have at least one entry");

  MonteCarloReport report;
  report.parameter_names = {"gamma", "lambda"};
  for (int j = 0; j < k; ++j) report.parameter_names.push_back("beta" + std::to_string(j));
  const Eigen::VectorXd truth = s.truth.to_vector();
  const auto R = static_cast<std::size_t>(s.replicates);

  std::uint64_t cell = 0;
  for (int n : s.sample_sizes) {
    const Eigen::MatrixXd X =
        uniform_design(n, k, derive_seed(s.base_seed, {kDesignStream, static_cast<std::uint64_t>(n)}));
    for (double tau : s.taus) {
      std::vector<Outcome> outcomes(R);
      parallel_for(R, opts.threads, [&](std::size_t b) {
        Rng rng = make_rng(s.base_seed, {cell, b});
        try {
          const RegressionSpec spec(X, Dataset(simulate_rq(s.truth, s.link, tau, X, rng)), tau, s.link);
          outcomes[b] = outcome_of(fit_rq(spec, opts.fit).result);
        } catch (const FitConvergenceFailure& e) {
          outcomes[b].estimates = e.partial().estimates;
        } catch (const Error&) {
        }
      });
      summarize_cell(report, s.name, n, tau, truth, outcomes, s.coverage_level, opts);
      ++cell;
    }
  }
  return report;
}

MonteCarloReport run_study(const Scenario& s, const StudyOptions& opts) {
  return std::visit(
      [&](const auto& sc) -> MonteCarloReport {
        using T = std::decay_t<decltype(sc)>;
        if constexpr (std::is_same_v<T, DistScenario>) {
          return run_dist_study(sc, opts);
        } else {
          return run_reg_study(sc, opts);
        }
      },
      s);
}

std::vector<std::string> preset_names() {
  return {"table1-scenario1", "table1-scenario2", "table1-scenario3", "table1-scenario4",
          "table2-scenario1", "table2-scenario2"};
}

Scenario preset(const std::string& name) {
  auto dist = [&](double a, double g, double l) {
    DistScenario s;
    s.name = name;
    s.truth = UmwParams(a, g, l);
    s.sample_sizes = {40, 80, 120, 160, 200};
    return Scenario(s);
  };
  auto reg = [&](double g, double l, Eigen::Vector3d beta) {
    RegScenario s;
    s.name = name;
    s.truth = RegressionTheta{g, l, beta};
    s.sample_sizes = {50, 150, 300, 500};
    s.taus = {0.1, 0.5, 0.9};
    return Scenario(s);
  };
  if (name == "table1-scenario1") return dist(0.7, 1.3, 0.5);
  if (name == "table1-scenario2") return dist(0.3, 0.8, 1.2);
  if (name == "table1-scenario3") return dist(1.3, 1.1, 0.6);
  if (name == "table1-scenario4") return dist(0.5, 0.9, 0.8);
  if (name == "table2-scenario1") return reg(2.7, 1.8, {0.2, -0.4, 0.5});
  if (name == "table2-scenario2") return reg(1.5, 2.3, {0.5, -0.6, 0.2});
  throw DomainError("unknown preset '" + name + "'");
}

Scenario parse_scenario(const std::string& text) {
  std::map<std::string, std::pair<std::string, int>> kv;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string body = trim(raw.substr(0, raw.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw DomainError("scenario line " + std::to_string(line) + ": expected key = value");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    static const char* known[] = {"model", "name", "alpha", "gamma", "lambda", "beta",
                                  "n", "tau", "replicates", "seed", "level", "link", "preset"};
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw DomainError("scenario line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
    if (value.empty()) throw DomainError("scenario line " + std::to_string(line) + ": empty value");
    if (kv.count(key)) throw DomainError("scenario line " + std::to_string(line) + ": duplicate key '" + key + "'");
    kv[key] = {value, line};
  }

  auto has = [&](const char* k) { return kv.count(k) > 0; };
  auto num = [&](const char* k) { return parse_number(kv.at(k).first, kv.at(k).second); };
  auto ints = [&](const char* k) {
    std::vector<int> out;
    for (double v : parse_list(kv.at(k).first, kv.at(k).second)) out.push_back(as_int(v, kv.at(k).second));
    return out;
  };

  Scenario sc;
  if (has("preset")) {
    sc = preset(kv.at("preset").first);
  } else {
    if (!has("model")) throw DomainError("scenario: missing 'model' (dist or reg) or 'preset'");
    const std::string model = kv.at("model").first;
    if (model == "dist") {
      sc = DistScenario{};
    } else if (model == "reg") {
      sc = RegScenario{};
    } else {
      throw DomainError("scenario line " + std::to_string(kv.at("model").second) + ": model must be dist or reg");
    }
  }

  std::visit(
      [&](auto& s) {
        using T = std::decay_t<decltype(s)>;
        if (has("name")) s.name = kv.at("name").first;
        if (has("n")) s.sample_sizes = ints("n");
        if (has("replicates")) s.replicates = as_int(num("replicates"), kv.at("replicates").second);
        if (has("seed")) {
          const double v = num("seed");
          if (v < 0 || v != std::floor(v) || v > 9.007199254740992e15) {
            throw DomainError("scenario line " + std::to_string(kv.at("seed").second) + ": bad seed");
          }
          s.base_seed = static_cast<std::uint64_t>(v);
        }
        if (has("level")) s.coverage_level = num("level");
        if constexpr (std::is_same_v<T, DistScenario>) {
          for (const char* k : {"beta", "tau", "link"}) {
            if (has(k)) throw DomainError(std::string("scenario: key '") + k + "' applies to reg models only");
          }
          const double a = has("alpha") ? num("alpha") : s.truth.alpha();
          const double g = has("gamma") ? num("gamma") : s.truth.gamma();
          const double l = has("lambda") ? num("lambda") : s.truth.lambda();
          s.truth = UmwParams(a, g, l);
        } else {
          if (has("alpha")) throw DomainError("scenario: 'alpha' applies to dist models only");
          if (has("gamma")) s.truth.gamma = num("gamma");
          if (has("lambda")) s.truth.lambda = num("lambda");
          if (has("beta")) {
            const auto b = parse_list(kv.at("beta").first, kv.at("beta").second);
            s.truth.beta = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
          }
          if (s.truth.beta.size() == 0) throw DomainError("scenario: reg model needs 'beta'");
          if (has("tau")) s.taus = parse_list(kv.at("tau").first, kv.at("tau").second);
          if (has("link")) s.link = LinkFunction::from_name(kv.at("link").first);
          if (!(s.truth.gamma > 0.0) || !(s.truth.lambda >= 0.0)) {
            throw DomainError("scenario: need gamma > 0 and lambda >= 0");
          }
        }
        check_common(s.sample_sizes, s.replicates, s.coverage_level);
      },
      sc);
  return sc;
}

}  // namespace umw
