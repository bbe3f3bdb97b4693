#pragma once

// Bias / MSE / coverage studies for the distribution and regression estimators.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "umwkit/inference.hpp"
#include "umwkit/link.hpp"
#include "umwkit/regression.hpp"
#include "umwkit/umw.hpp"

namespace umw {

struct DistScenario {
  std::string name = "custom";
  UmwParams truth{1.0, 1.0, 1.0};
  std::vector<int> sample_sizes{200};
  int replicates = 5000;
  std::uint64_t base_seed = 1;
  double coverage_level = 0.95;
};

/// Design: an intercept plus beta.size()-1 covariates drawn U(0,1) once per
/// sample size and held fixed across replicates and quantile levels.
struct RegScenario {
  std::string name = "custom";
  RegressionTheta truth;
  LinkFunction link{LinkKind::Logit};
  std::vector<int> sample_sizes{500};
  std::vector<double> taus{0.5};
  int replicates = 5000;
  std::uint64_t base_seed = 1;
  double coverage_level = 0.95;
};

using Scenario = std::variant<DistScenario, RegScenario>;

struct ReplicateRecord {
  double error;  // estimate - truth
  bool covered;  // Wald interval contains the truth
};

struct Aggregate {
  double bias;
  double mse;
  double coverage;
};

/// Throws DomainError on empty input.
Aggregate aggregate_metrics(std::span<const ReplicateRecord> records);

struct CellMetrics {
  std::string scenario;
  std::string parameter;
  int n = 0;
  double tau = 0.0;  // NaN for distribution studies
  double bias = 0.0;
  double mse = 0.0;
  double coverage = 0.0;
  int n_failed = 0;
  int n_used = 0;
};

/// Estimates of one replicate, kept when StudyOptions::keep_estimates is set.
struct EstimateRow {
  std::string scenario;
  int n = 0;
  double tau = 0.0;
  int replicate = 0;
  bool converged = false;
  std::vector<double> estimates;
};

struct MonteCarloReport {
  std::vector<CellMetrics> cells;
  std::vector<std::string> parameter_names;
  std::vector<EstimateRow> estimates;

  /// Columns scenario,parameter,n,tau,bias,mse,coverage,n_failed.
  void write_csv(std::ostream& os) const;
  std::string to_csv() const;
  /// Columns scenario,n,tau,replicate,converged,<parameter names>.
  void write_estimates_csv(std::ostream& os) const;
};

struct StudyOptions {
  int threads = 0;
  bool keep_estimates = false;
  /// A cell whose failure share exceeds this throws ConvergenceFailure.
  double max_failure_share = 0.05;
  FitOptions fit;
};

MonteCarloReport run_dist_study(const DistScenario& s, const StudyOptions& opts = {});
MonteCarloReport run_reg_study(const RegScenario& s, const StudyOptions& opts = {});
MonteCarloReport run_study(const Scenario& s, const StudyOptions& opts = {});

/// Intercept column followed by k-1 U(0,1) columns.
Eigen::MatrixXd uniform_design(int n, int k, std::uint64_t seed);

/// table1-scenario1..4 and table2-scenario1..2. Throws DomainError for other names.
Scenario preset(const std::string& name);
std::vector<std::string> preset_names();

/// Key=value scenario text; '#' starts a comment. Keys: model (dist|reg), name,
/// alpha, gamma, lambda, beta, n, tau, replicates, seed, level, link, preset.
/// Comma-separated lists for beta, n and tau. Throws DomainError with the line number.
Scenario parse_scenario(const std::string& text);

}  // namespace umw
