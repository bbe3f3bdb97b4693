#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "umwkit/diagnostics.hpp"
#include "umwkit/errors.hpp"
#include "umwkit/inference.hpp"
#include "umwkit/montecarlo.hpp"
#include "umwkit/regression.hpp"
#include "umwkit/umw.hpp"
#include "umwkit/version.hpp"

namespace py = pybind11;
using namespace umw;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Elementwise map over any array shape; the GIL is released for the loop.
template <class F>
py::array_t<double> vectorize(const Array& x, F f) {
  py::array_t<double> out(std::vector<py::ssize_t>(x.shape(), x.shape() + x.ndim()));
  const double* in = x.data();
  double* o = out.mutable_data();
  const py::ssize_t n = x.size();
  {
    py::gil_scoped_release release;
    for (py::ssize_t i = 0; i < n; ++i) o[i] = f(in[i]);
  }
  return out;
}

std::vector<double> to_vector(const Array& y) { return {y.data(), y.data() + y.size()}; }

py::dict fit_dict(const FitResult& f) {
  py::dict d;
  d["names"] = f.names;
  d["estimates"] = f.estimates;
  d["std_errors"] = f.std_errors;
  d["vcov"] = f.vcov;
  d["loglik"] = f.loglik;
  d["n"] = f.n;
  d["q"] = f.q;
  d["converged"] = f.converged;
  d["iterations"] = f.iterations;
  d["message"] = f.message;
  d["aic"] = f.criteria.aic;
  d["bic"] = f.criteria.bic;
  d["aicc"] = f.criteria.aicc;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Unit-Modified Weibull distribution, quantile regression and diagnostics";
  m.attr("__version__") = std::string(kVersion);

  auto base = py::register_exception<Error>(m, "UmwError", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConvergenceFailure>(m, "ConvergenceFailure", base.ptr());
  py::register_exception<OverflowError>(m, "UmwOverflowError", base.ptr());
  py::register_exception<RankDeficientDesign>(m, "RankDeficientDesign", base.ptr());
  py::register_exception<SingularInformation>(m, "SingularInformation", base.ptr());

  py::class_<UmwParams>(m, "UmwParams")
      .def(py::init<double, double, double>(), py::arg("alpha"), py::arg("gamma"), py::arg("lambda_"))
      .def_property_readonly("alpha", &UmwParams::alpha)
      .def_property_readonly("gamma", &UmwParams::gamma)
      .def_property_readonly("lambda_", &UmwParams::lambda)
      .def("__repr__", [](const UmwParams& p) {
        std::ostringstream os;
        os << "UmwParams(alpha=" << p.alpha() << ", gamma=" << p.gamma() << ", lambda_=" << p.lambda() << ")";
        return os.str();
      });

  m.def("cdf", [](const UmwParams& p, const Array& y) { return vectorize(y, [&](double v) { return cdf(p, v); }); },
        py::arg("params"), py::arg("y"));
  m.def("pdf", [](const UmwParams& p, const Array& y) { return vectorize(y, [&](double v) { return pdf(p, v); }); },
        py::arg("params"), py::arg("y"));
  m.def("log_pdf",
        [](const UmwParams& p, const Array& y) { return vectorize(y, [&](double v) { return log_pdf(p, v); }); },
        py::arg("params"), py::arg("y"));
  m.def("quantile",
        [](const UmwParams& p, const Array& t) { return vectorize(t, [&](double v) { return quantile(p, v); }); },
        py::arg("params"), py::arg("tau"));
  m.def("hazard",
        [](const UmwParams& p, const Array& y) { return vectorize(y, [&](double v) { return hazard(p, v); }); },
        py::arg("params"), py::arg("y"));
  m.def(
      "sample",
      [](const UmwParams& p, std::size_t n, std::uint64_t seed) {
        std::vector<double> v = sample(p, n, seed);
        return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
      },
      py::arg("params"), py::arg("n"), py::arg("seed") = 1);

  m.def("loglik", [](const UmwParams& p, const Array& y) { return loglik_umw(p, Dataset(to_vector(y))); },
        py::arg("params"), py::arg("y"));
  m.def("score", [](const UmwParams& p, const Array& y) { return Eigen::VectorXd(score_umw(p, Dataset(to_vector(y)))); },
        py::arg("params"), py::arg("y"));
  m.def("observed_information",
        [](const UmwParams& p, const Array& y) { return Eigen::MatrixXd(observed_info_umw(p, Dataset(to_vector(y)))); },
        py::arg("params"), py::arg("y"));

  m.def(
      "fit",
      [](const Array& y, std::optional<double> fixed_lambda, int max_iterations) {
        FitOptions o;
        o.fixed_lambda = fixed_lambda;
        o.max_iterations = max_iterations;
        const Dataset d(to_vector(y));
        FitResult f;
        {
          py::gil_scoped_release release;
          f = fit_umw(d, o);
        }
        return fit_dict(f);
      },
      py::arg("y"), py::arg("fixed_lambda") = py::none(), py::arg("max_iterations") = 500,
      "Maximum likelihood fit; returns a dict with estimates (alpha, gamma, lambda), std_errors, loglik, criteria.");

  m.def(
      "fit_regression",
      [](const Eigen::MatrixXd& X, const Array& y, double tau, const std::string& link,
         std::optional<double> fixed_lambda) {
        FitOptions o;
        o.fixed_lambda = fixed_lambda;
        const RegressionSpec spec(X, Dataset(to_vector(y)), tau, LinkFunction::from_name(link));
        RegressionFit f;
        {
          py::gil_scoped_release release;
          f = fit_rq(spec, o);
        }
        py::dict d = fit_dict(f.result);
        d["tau"] = f.tau;
        d["link"] = std::string(f.link.name());
        d["saturated"] = f.saturated;
        const ResidualReport r = quantile_residuals(f, spec);
        d["residuals"] = r.residuals;
        d["residual_ad_p"] = r.ad_p_value;
        return d;
      },
      py::arg("X"), py::arg("y"), py::arg("tau") = 0.5, py::arg("link") = "logit",
      py::arg("fixed_lambda") = py::none(),
      "Quantile regression fit; estimates are packed as (gamma, lambda, beta_0, ..., beta_{k-1}).");

  m.def(
      "gof",
      [](const UmwParams& p, const Array& y) {
        const GofReport g = gof_stats(p, Dataset(to_vector(y)));
        py::dict d;
        d["ks"] = g.ks;
        d["ad"] = g.ad;
        d["cvm"] = g.cvm;
        return d;
      },
      py::arg("params"), py::arg("y"));
  m.def(
      "quantile_residuals",
      [](const UmwParams& p, const Array& y) {
        const ResidualReport r = quantile_residuals(p, Dataset(to_vector(y)));
        py::dict d;
        d["residuals"] = r.residuals;
        d["ad_statistic"] = r.ad_statistic;
        d["ad_p_value"] = r.ad_p_value;
        d["clamped"] = r.clamped;
        return d;
      },
      py::arg("params"), py::arg("y"));
  m.def(
      "info_criteria",
      [](double loglik, int q, int n) {
        const InfoCriteria c = info_criteria(loglik, q, n);
        return py::make_tuple(c.aic, c.bic, c.aicc);
      },
      py::arg("loglik"), py::arg("q"), py::arg("n"), "Returns (AIC, BIC, AICc).");
  m.def(
      "wald_test",
      [](double estimate, double se, double null_value) {
        const WaldResult w = wald_test(estimate, se, null_value);
        return py::make_tuple(w.statistic, w.p_value);
      },
      py::arg("estimate"), py::arg("se"), py::arg("null_value") = 0.0, "Returns (statistic, two-sided p-value).");
  m.def("r2_generalized", &r2_generalized, py::arg("loglik_full"), py::arg("loglik_null"), py::arg("n"));

  m.def(
      "simulate",
      [](const std::string& preset_name, const std::vector<int>& n, int replicates, std::uint64_t seed, int threads) {
        Scenario s = preset(preset_name);
        std::visit(
            [&](auto& sc) {
              if (!n.empty()) sc.sample_sizes = n;
              sc.replicates = replicates;
              sc.base_seed = seed;
            },
            s);
        StudyOptions o;
        o.threads = threads;
        MonteCarloReport r;
        {
          py::gil_scoped_release release;
          r = run_study(s, o);
        }
        return r.to_csv();
      },
      py::arg("preset"), py::arg("n") = std::vector<int>{}, py::arg("replicates") = 1000, py::arg("seed") = 1,
      py::arg("threads") = 0, "Monte Carlo study for a built-in scenario; returns the summary CSV text.");
  m.def("presets", &preset_names);
}
