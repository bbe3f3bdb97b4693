#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "formula.hpp"
#include "umwkit/diagnostics.hpp"
#include "umwkit/errors.hpp"
#include "umwkit/inference.hpp"
#include "umwkit/montecarlo.hpp"
#include "umwkit/parallel.hpp"
#include "umwkit/regression.hpp"
#include "umwkit/umw.hpp"
#include "umwkit/version.hpp"

namespace umw::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Common {
  std::string input;
  std::string output;
  std::string response;
  std::string format = "json";
  bool drop_invalid = false;
  std::string plot_dir;
  int threads = 0;
  double level = 0.95;
  std::optional<double> fix_lambda;
};

struct RegOptions {
  std::string formula;
  double tau = 0.5;
  std::string tau_grid;
  std::string link = "logit";
  std::uint64_t seed = 1;
  int envelope = 0;
  double envelope_level = 0.95;
  std::string envelope_output;
};

struct SimOptions {
  std::string preset;
  std::string scenario_file;
  std::vector<int> n;
  std::vector<double> tau;
  std::optional<int> replicates;
  std::optional<std::uint64_t> seed;
  std::optional<double> level;
  std::string output;
  std::string estimates_output;
  int threads = 0;
};

struct SampleOptions {
  double alpha = 1.0, gamma = 1.0, lambda = 0.0;
  long long n = 0;
  std::uint64_t seed = 1;
  std::string output;
};

// ---------------------------------------------------------------- I/O

CsvTable read_table(const std::string& path) {
  if (path.empty()) throw UsageError("--input is required");
  if (path == "-") return parse_csv(std::cin);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input file '" + path + "'");
  return parse_csv(in);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to `path`, or to `fallback` when path is empty.
void emit(const std::string& path, std::ostream& fallback, const std::string& content) {
  if (path.empty()) {
    fallback << content;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open output file '" + path + "'");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

fs::path plot_path(const std::string& dir, const std::string& stem, const std::string& suffix) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
  return fs::path(dir) / (stem + suffix + ".csv");
}

std::string num(double v) {
  if (!std::isfinite(v)) return "NA";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------- data

struct Rows {
  std::vector<std::size_t> kept;  // indices into the table rows
  int dropped = 0;
};

// Selects rows whose response lies in (0,1) and whose covariates are numeric.
Rows select_rows(const CsvTable& t, const std::string& response, const std::vector<std::string>& covariates,
                 bool drop_invalid, std::ostream& err) {
  const std::size_t ry = t.column(response);
  std::vector<std::size_t> cx;
  for (const auto& c : covariates) cx.push_back(t.column(c));
  Rows r;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const int line = t.lines[i];
    const std::string where = "row " + std::to_string(i + 1) + " (line " + std::to_string(line) + ")";
    std::string problem;
    try {
      const auto y = parse_cell(t.rows[i][ry], line, response);
      if (!y) {
        problem = where + ": response '" + response + "' is missing";
      } else if (!(*y > 0.0 && *y < 1.0)) {
        problem = where + ": response '" + response + "' = " + num(*y) + " is outside (0,1)";
      }
      for (std::size_t k = 0; k < cx.size() && problem.empty(); ++k) {
        if (!parse_cell(t.rows[i][cx[k]], line, covariates[k])) {
          problem = where + ": covariate '" + covariates[k] + "' is missing";
        }
      }
    } catch (const ParseError& e) {
      if (!drop_invalid) throw;
      problem = where + ": " + e.what();
    }
    if (problem.empty()) {
      r.kept.push_back(i);
    } else if (drop_invalid) {
      err << "dropped " << problem << '\n';
      ++r.dropped;
    } else {
      throw ValidationError(problem + " (use --drop-invalid to skip such rows)");
    }
  }
  if (r.kept.empty()) throw ValidationError("no valid rows");
  return r;
}

Eigen::VectorXd column_values(const CsvTable& t, const Rows& rows, const std::string& name) {
  const std::size_t j = t.column(name);
  Eigen::VectorXd v(static_cast<Eigen::Index>(rows.kept.size()));
  for (std::size_t k = 0; k < rows.kept.size(); ++k) {
    const std::size_t i = rows.kept[k];
    v[static_cast<Eigen::Index>(k)] = *parse_cell(t.rows[i][j], t.lines[i], name);
  }
  return v;
}

std::string default_response(const CsvTable& t, const std::string& given) {
  if (!given.empty()) return given;
  if (t.header.size() == 1) return t.header.front();
  throw UsageError("--response is required when the input has more than one column");
}

// ---------------------------------------------------------------- reports

json info_source_name(InfoSource s) {
  switch (s) {
    case InfoSource::Analytic: return "analytic";
    case InfoSource::FiniteDifference: return "finite-difference";
    case InfoSource::Unavailable: return "unavailable";
  }
  return "unavailable";
}

json parameter_block(const FitResult& fit, double level, json& report) {
  json est = json::object(), se = json::object(), ci = json::object(), wald = json::object();
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    const std::string& name = fit.names[i];
    est[name] = fit.estimates[idx];
    se[name] = jnum(fit.std_errors[idx]);
    if (fit.fixed[i]) {
      ci[name] = {{"lower", fit.estimates[idx]}, {"upper", fit.estimates[idx]}};
      wald[name] = nullptr;
    } else if (fit.se_available(i)) {
      const Interval iv = confidence_interval(fit.estimates[idx], fit.std_errors[idx], level);
      ci[name] = {{"lower", iv.lower}, {"upper", iv.upper}};
      const WaldResult w = wald_test(fit, i, 0.0);
      wald[name] = {{"statistic", w.statistic}, {"p_value", w.p_value}};
    } else {
      ci[name] = nullptr;
      wald[name] = nullptr;
    }
  }
  report["parameters"] = fit.names;
  report["estimates"] = est;
  report["std_errors"] = se;
  report["ci"] = ci;
  report["ci_level"] = level;
  report["wald"] = wald;
  report["loglik"] = fit.loglik;
  report["criteria"] = {{"aic", jnum(fit.criteria.aic)}, {"bic", jnum(fit.criteria.bic)},
                        {"aicc", jnum(fit.criteria.aicc)}};
  report["convergence"] = {{"converged", fit.converged},
                           {"iterations", fit.iterations},
                           {"evaluations", fit.evaluations},
                           {"message", fit.message},
                           {"information", info_source_name(fit.info_source)}};
  return report;
}

void attach_residuals(json& report, const ResidualReport& rr) {
  report["residual_ad_p"] = jnum(rr.ad_p_value);
  report["residual_ad_statistic"] = jnum(rr.ad_statistic);
  report["residual_ad_variant"] = rr.variant;
  report["residual_clamped"] = rr.clamped;
}

std::string fmt3(double v) {
  if (!std::isfinite(v)) return "NA";
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v;
  std::string s = os.str();
  if (s == "-0.000") s = "0.000";
  return s;
}

// Rounded human-readable table of one report.
std::string table_of(const json& r) {
  std::ostringstream os;
  os << r.value("command", "") << "  n=" << r.value("n", 0);
  if (r.contains("tau")) os << "  tau=" << fmt3(r["tau"].get<double>()) << "  link=" << r.value("link", "");
  os << '\n';
  os << std::left << std::setw(18) << "parameter" << std::right << std::setw(11) << "estimate" << std::setw(11)
     << "std.error" << std::setw(11) << "ci.lower" << std::setw(11) << "ci.upper" << std::setw(11) << "p.value"
     << '\n';
  auto d = [](const json& j) { return j.is_number() ? j.get<double>() : std::nan(""); };
  for (const auto& name : r["parameters"]) {
    const std::string nm = name.get<std::string>();
    const json& ci = r["ci"][nm];
    const json& w = r["wald"][nm];
    os << std::left << std::setw(18) << nm << std::right << std::setw(11) << fmt3(d(r["estimates"][nm]))
       << std::setw(11) << fmt3(d(r["std_errors"][nm])) << std::setw(11)
       << fmt3(ci.is_object() ? d(ci["lower"]) : std::nan("")) << std::setw(11)
       << fmt3(ci.is_object() ? d(ci["upper"]) : std::nan("")) << std::setw(11)
       << fmt3(w.is_object() ? d(w["p_value"]) : std::nan("")) << '\n';
  }
  os << "loglik " << fmt3(d(r["loglik"])) << "  AIC " << fmt3(d(r["criteria"]["aic"])) << "  BIC "
     << fmt3(d(r["criteria"]["bic"])) << "  AICc " << fmt3(d(r["criteria"]["aicc"])) << '\n';
  if (r.contains("gof") && r["gof"].is_object()) {
    os << "KS " << fmt3(d(r["gof"]["ks"])) << "  AD " << fmt3(d(r["gof"]["ad"])) << "  CvM "
       << fmt3(d(r["gof"]["cvm"])) << '\n';
  }
  if (r.contains("r2_generalized")) os << "R2_G " << fmt3(d(r["r2_generalized"])) << '\n';
  os << "residual AD p-value " << fmt3(d(r["residual_ad_p"])) << '\n';
  return os.str();
}

std::string render(const json& report, const std::string& format) {
  if (format == "table") {
    if (report.contains("reports")) {
      std::string s;
      for (const auto& r : report["reports"]) s += table_of(r) + "\n";
      return s;
    }
    return table_of(report);
  }
  return report.dump(2) + "\n";
}

void write_qq(const fs::path& path, std::vector<double> residuals) {
  std::sort(residuals.begin(), residuals.end());
  std::ostringstream os;
  os << "theoretical,sample\n";
  const double n = static_cast<double>(residuals.size());
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    os << num(normal_quantile((static_cast<double>(i) + 0.5) / n)) << ',' << num(residuals[i]) << '\n';
  }
  emit(path.string(), std::cout, os.str());
}

FitOptions fit_options(const Common& c) {
  FitOptions o;
  o.fixed_lambda = c.fix_lambda;
  return o;
}

// ---------------------------------------------------------------- commands

int cmd_fit_dist(const Common& c, std::ostream& out, std::ostream& err) {
  const CsvTable t = read_table(c.input);
  const std::string response = default_response(t, c.response);
  const Rows rows = select_rows(t, response, {}, c.drop_invalid, err);
  const Eigen::VectorXd yv = column_values(t, rows, response);
  const Dataset d(std::vector<double>(yv.data(), yv.data() + yv.size()));

  const FitResult fit = fit_umw(d, fit_options(c));
  const UmwParams p = fitted_params(fit);
  json report;
  report["command"] = "fit-dist";
  report["model"] = c.fix_lambda ? "UMW (lambda fixed)" : "UMW";
  report["version"] = kVersion;
  report["response"] = response;
  report["n"] = d.size();
  report["dropped_rows"] = rows.dropped;
  parameter_block(fit, c.level, report);
  const GofReport g = gof_stats(p, d);
  report["gof"] = {{"ks", g.ks}, {"ad", g.ad}, {"cvm", g.cvm}};
  const ResidualReport rr = quantile_residuals(p, d);
  attach_residuals(report, rr);

  if (!c.plot_dir.empty()) {
    std::ostringstream dens;
    dens << "y,pdf\n";
    for (int i = 1; i < 400; ++i) {
      const double y = i / 400.0;
      dens << num(y) << ',' << num(pdf(p, y)) << '\n';
    }
    emit(plot_path(c.plot_dir, "density", "").string(), out, dens.str());
    std::ostringstream res;
    res << "row,y,cdf,residual\n";
    for (std::size_t k = 0; k < d.size(); ++k) {
      res << rows.kept[k] + 1 << ',' << num(d[k]) << ',' << num(cdf(p, d[k])) << ',' << num(rr.residuals[k])
          << '\n';
    }
    emit(plot_path(c.plot_dir, "residuals", "").string(), out, res.str());
    write_qq(plot_path(c.plot_dir, "qq", ""), rr.residuals);
  }

  emit(c.output, out, render(report, c.format));
  return kExitOk;
}

std::string tau_suffix(double tau, bool grid) {
  if (!grid) return "";
  std::ostringstream os;
  os << "_tau" << tau;
  return os.str();
}

json fit_reg_one(const Common& c, const RegOptions& ro, const Formula& f, const CsvTable& t, const Rows& rows,
                 double tau, bool grid, std::ostream& out, std::ostream& err) {
  const Eigen::VectorXd yv = column_values(t, rows, f.response);
  const auto n = static_cast<Eigen::Index>(rows.kept.size());
  const Eigen::MatrixXd X = build_design(f, n, [&](const std::string& col) { return column_values(t, rows, col); });
  const LinkFunction link = LinkFunction::from_name(ro.link);
  const Dataset d(std::vector<double>(yv.data(), yv.data() + yv.size()));
  const RegressionSpec spec(X, d, tau, link, f.column_names());

  const FitOptions fo = fit_options(c);
  const RegressionFit fit = fit_rq(spec, fo);
  if (fit.saturated > 0) err << "warning: " << fit.saturated << " fitted quantile(s) clamped at tau=" << tau << '\n';

  json report;
  report["command"] = "fit-reg";
  report["model"] = "RQ-UMW";
  report["version"] = kVersion;
  report["formula"] = ro.formula;
  report["response"] = f.response;
  report["tau"] = tau;
  report["link"] = std::string(link.name());
  report["n"] = d.size();
  report["dropped_rows"] = rows.dropped;
  parameter_block(fit.result, c.level, report);

  json coefs = json::array();
  for (std::size_t i = 0; i < fit.result.names.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    json row = {{"name", fit.result.names[i]},
                {"estimate", fit.result.estimates[idx]},
                {"std_error", jnum(fit.result.std_errors[idx])}};
    const json& w = report["wald"][fit.result.names[i]];
    row["z"] = w.is_object() ? w["statistic"] : json(nullptr);
    row["p_value"] = w.is_object() ? w["p_value"] : json(nullptr);
    coefs.push_back(row);
  }
  report["coefficients"] = coefs;
  report["saturated"] = fit.saturated;

  // Null model: intercept only, same tau and link.
  try {
    const RegressionSpec null_spec(Eigen::MatrixXd::Ones(n, 1), d, tau, link, {"(Intercept)"});
    const RegressionFit null_fit = fit_rq(null_spec, fo);
    report["loglik_null"] = null_fit.result.loglik;
    report["r2_generalized"] = jnum(r2_generalized(fit.result.loglik, null_fit.result.loglik, static_cast<int>(n)));
  } catch (const Error& e) {
    err << "warning: null model fit failed (" << e.what() << "); r2_generalized omitted\n";
    report["loglik_null"] = nullptr;
    report["r2_generalized"] = nullptr;
  }

  const std::vector<double> F = fitted_cdf(fit.theta, spec);
  try {
    const GofReport g = gof_from_cdf(F);
    report["gof"] = {{"ks", g.ks}, {"ad", g.ad}, {"cvm", g.cvm}};
  } catch (const DomainError&) {
    report["gof"] = nullptr;
  }
  const ResidualReport rr = residuals_from_cdf(F);
  attach_residuals(report, rr);

  std::optional<EnvelopeBands> env;
  if (ro.envelope > 0) {
    EnvelopeOptions eo;
    eo.n_sim = ro.envelope;
    eo.level = ro.envelope_level;
    eo.seed = ro.seed;
    eo.threads = c.threads;
    eo.fit = fo;
    env = simulated_envelope(fit, spec, eo);
    report["envelope"] = {{"n_sim", env->n_sim},
                          {"n_skipped", env->n_skipped},
                          {"level", env->coverage_level},
                          {"fraction_inside", env->fraction_inside()}};
    std::ostringstream os;
    os << "position,residual,lower,median,upper\n";
    for (std::size_t i = 0; i < env->sorted_residuals.size(); ++i) {
      os << i + 1 << ',' << num(env->sorted_residuals[i]) << ',' << num(env->lower[i]) << ','
         << num(env->median[i]) << ',' << num(env->upper[i]) << '\n';
    }
    if (!ro.envelope_output.empty()) {
      std::string path = ro.envelope_output;
      if (grid) {
        const fs::path p(path);
        path = (p.parent_path() / (p.stem().string() + tau_suffix(tau, true) + p.extension().string())).string();
      }
      emit(path, out, os.str());
    }
    if (!c.plot_dir.empty()) emit(plot_path(c.plot_dir, "envelope", tau_suffix(tau, grid)).string(), out, os.str());
  }

  if (!c.plot_dir.empty()) {
    const RegressionWorkspace ws = regression_workspace(fit.theta, spec);
    std::ostringstream res;
    res << "row,y,mu,cdf,residual\n";
    for (std::size_t k = 0; k < d.size(); ++k) {
      res << rows.kept[k] + 1 << ',' << num(d[k]) << ',' << num(ws.mu[static_cast<Eigen::Index>(k)]) << ','
          << num(F[k]) << ',' << num(rr.residuals[k]) << '\n';
    }
    emit(plot_path(c.plot_dir, "residuals", tau_suffix(tau, grid)).string(), out, res.str());
    write_qq(plot_path(c.plot_dir, "qq", tau_suffix(tau, grid)), rr.residuals);
  }
  return report;
}

int cmd_fit_reg(const Common& c, const RegOptions& ro, std::ostream& out, std::ostream& err) {
  if (ro.formula.empty()) throw UsageError("--formula is required");
  const Formula f = parse_formula(ro.formula);
  if (!c.response.empty() && c.response != f.response) {
    throw UsageError("--response '" + c.response + "' disagrees with the formula response '" + f.response + "'");
  }
  LinkFunction::from_name(ro.link);
  const CsvTable t = read_table(c.input);
  const Rows rows = select_rows(t, f.response, f.covariates(), c.drop_invalid, err);

  if (ro.tau_grid.empty()) {
    if (!(ro.tau > 0.0 && ro.tau < 1.0)) throw ValidationError("--tau must lie in (0,1)");
    const json report = fit_reg_one(c, ro, f, t, rows, ro.tau, false, out, err);
    emit(c.output, out, render(report, c.format));
    return kExitOk;
  }
  json all;
  all["command"] = "fit-reg";
  all["version"] = kVersion;
  all["reports"] = json::array();
  for (double tau : parse_tau_grid(ro.tau_grid)) {
    all["reports"].push_back(fit_reg_one(c, ro, f, t, rows, tau, true, out, err));
  }
  emit(c.output, out, render(all, c.format));
  return kExitOk;
}

int cmd_simulate(const SimOptions& so, std::ostream& out, std::ostream&) {
  if (so.preset.empty() == so.scenario_file.empty()) {
    throw UsageError("give exactly one of --preset or --scenario");
  }
  Scenario sc = so.preset.empty() ? parse_scenario(read_text(so.scenario_file)) : preset(so.preset);
  std::visit(
      [&](auto& s) {
        using T = std::decay_t<decltype(s)>;
        if (!so.n.empty()) s.sample_sizes = so.n;
        if (so.replicates) s.replicates = *so.replicates;
        if (so.seed) s.base_seed = *so.seed;
        if (so.level) s.coverage_level = *so.level;
        if constexpr (std::is_same_v<T, RegScenario>) {
          if (!so.tau.empty()) s.taus = so.tau;
        } else {
          if (!so.tau.empty()) throw UsageError("--tau applies to regression scenarios only");
        }
      },
      sc);
  StudyOptions opts;
  opts.threads = so.threads;
  opts.keep_estimates = !so.estimates_output.empty();
  const MonteCarloReport rep = run_study(sc, opts);
  emit(so.output, out, rep.to_csv());
  if (opts.keep_estimates) {
    std::ostringstream os;
    rep.write_estimates_csv(os);
    emit(so.estimates_output, out, os.str());
  }
  return kExitOk;
}

int cmd_sample(const SampleOptions& so, std::ostream& out) {
  if (so.n <= 0) throw UsageError("--n must be positive");
  const UmwParams p(so.alpha, so.gamma, so.lambda);
  const std::vector<double> y = sample(p, static_cast<std::size_t>(so.n), so.seed);
  std::string buf = "y\n";
  buf.reserve(y.size() * 24);
  for (double v : y) buf += num(v) + '\n';
  emit(so.output, out, buf);
  return kExitOk;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--input,-i", c.input, "CSV input file ('-' for stdin)")->required();
  app->add_option("--output,-o", c.output, "Report path (default: stdout)");
  app->add_option("--response", c.response, "Response column");
  app->add_option("--format", c.format, "json or table")->check(CLI::IsMember({"json", "table"}));
  app->add_flag("--drop-invalid", c.drop_invalid, "Skip rows with a missing or out-of-range response");
  app->add_option("--emit-plot-data", c.plot_dir, "Directory for density/QQ/residual CSV files");
  app->add_option("--level", c.level, "Confidence level for intervals")->check(CLI::Range(0.5, 0.999999));
  app->add_option("--fix-lambda", c.fix_lambda, "Hold lambda at this value")->check(CLI::NonNegativeNumber);
}

}  // namespace

std::vector<double> parse_tau_grid(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) {
    std::size_t pos = 0;
    double v;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      throw UsageError("--tau-grid expects start:stop:step, got '" + spec + "'");
    }
    if (pos != item.size()) throw UsageError("--tau-grid expects start:stop:step, got '" + spec + "'");
    parts.push_back(v);
  }
  if (parts.size() != 3) throw UsageError("--tau-grid expects start:stop:step, got '" + spec + "'");
  const double a = parts[0], b = parts[1], step = parts[2];
  if (!(step > 0.0) || b < a) throw UsageError("--tau-grid needs step > 0 and stop >= start");
  const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
  if (count > 10000) throw UsageError("--tau-grid has too many points");
  std::vector<double> out;
  for (long i = 0; i < count; ++i) {
    const double v = std::round((a + static_cast<double>(i) * step) * 1e12) / 1e12;
    if (!(v > 0.0 && v < 1.0)) throw ValidationError("--tau-grid value " + num(v) + " is outside (0,1)");
    out.push_back(v);
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"UMW distribution and quantile regression toolkit", "umwkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: UMWKIT_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);

  Common dist_c, reg_c;
  RegOptions ro;
  SimOptions so;
  SampleOptions sp;

  auto* fd = app.add_subcommand("fit-dist", "Fit UMW(alpha, gamma, lambda) to one response column");
  add_common(fd, dist_c);
  fd->add_option("--threads", dist_c.threads, "Worker threads")->check(CLI::NonNegativeNumber);

  auto* fr = app.add_subcommand("fit-reg", "Fit the UMW quantile regression model");
  add_common(fr, reg_c);
  fr->add_option("--formula,-f", ro.formula, "Model formula, e.g. 'y ~ x1 + x2^2 + x1:x2'")->required();
  fr->add_option("--tau", ro.tau, "Quantile level");
  fr->add_option("--tau-grid", ro.tau_grid, "start:stop:step; one report per tau");
  fr->add_option("--link", ro.link, "logit, probit, cloglog, loglog or cauchit")
      ->check(CLI::IsMember(LinkFunction::names()));
  fr->add_option("--seed", ro.seed, "Seed for the simulated envelope");
  fr->add_option("--envelope", ro.envelope, "Simulated envelope replicates (0 disables; at least 20)")
      ->check(CLI::NonNegativeNumber);
  fr->add_option("--envelope-level", ro.envelope_level, "Envelope band level")->check(CLI::Range(0.5, 0.999999));
  fr->add_option("--envelope-output", ro.envelope_output, "Envelope CSV path");
  fr->add_option("--threads", reg_c.threads, "Worker threads")->check(CLI::NonNegativeNumber);

  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo study and write the CSV summary");
  sim->add_option("--preset", so.preset, "Built-in scenario")->check(CLI::IsMember(preset_names()));
  sim->add_option("--scenario", so.scenario_file, "Scenario file (key = value lines)");
  sim->add_option("--n", so.n, "Sample sizes (comma separated)")->delimiter(',');
  sim->add_option("--tau", so.tau, "Quantile levels (comma separated)")->delimiter(',');
  sim->add_option("--replicates", so.replicates, "Replicates per cell")->check(CLI::PositiveNumber);
  sim->add_option("--seed", so.seed, "Base seed");
  sim->add_option("--level", so.level, "Coverage level")->check(CLI::Range(0.5, 0.999999));
  sim->add_option("--output,-o", so.output, "CSV path (default: stdout)");
  sim->add_option("--estimates-output", so.estimates_output, "Per-replicate estimates CSV");
  sim->add_option("--threads", so.threads, "Worker threads")->check(CLI::NonNegativeNumber);

  auto* smp = app.add_subcommand("sample", "Draw from UMW(alpha, gamma, lambda)");
  smp->add_option("--alpha", sp.alpha, "alpha > 0")->required();
  smp->add_option("--gamma", sp.gamma, "gamma > 0")->required();
  smp->add_option("--lambda", sp.lambda, "lambda >= 0")->required();
  smp->add_option("--n", sp.n, "Number of draws")->required();
  smp->add_option("--seed", sp.seed, "Seed");
  smp->add_option("--output,-o", sp.output, "CSV path (default: stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "umwkit: " << e.what() << '\n';
    if (!app.get_subcommands().empty()) {
      err << "run 'umwkit " << app.get_subcommands().front()->get_name() << " --help' for usage\n";
    }
    return kExitUsage;
  }

  auto pick = [&](int local) { return resolve_threads(local > 0 ? local : threads); };
  try {
    if (fd->parsed()) {
      dist_c.threads = pick(dist_c.threads);
      return cmd_fit_dist(dist_c, out, err);
    }
    if (fr->parsed()) {
      reg_c.threads = pick(reg_c.threads);
      return cmd_fit_reg(reg_c, ro, out, err);
    }
    if (sim->parsed()) {
      so.threads = pick(so.threads);
      return cmd_simulate(so, out, err);
    }
    return cmd_sample(sp, out);
  } catch (const UsageError& e) {
    err << "umwkit: usage: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "umwkit: I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParseError& e) {
    err << "umwkit: parse error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "umwkit: invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ConvergenceFailure& e) {
    err << "umwkit: convergence failure: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const SingularInformation& e) {
    err << "umwkit: convergence failure: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const Error& e) {
    err << "umwkit: invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "umwkit: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace umw::cli
