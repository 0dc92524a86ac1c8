#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "pairmix/data.hpp"
#include "pairmix/estimate.hpp"
#include "pairmix/gauss.hpp"
#include "pairmix/model.hpp"
#include "pairmix/report.hpp"
#include "pairmix/serialize.hpp"
#include "pairmix/simulate.hpp"

namespace py = pybind11;

namespace {

std::vector<pairmix::ResponseKind> kinds_from_strings(
    const std::vector<std::string>& types) {
  std::vector<pairmix::ResponseKind> kinds;
  for (const auto& t : types) {
    if (t == "ordinal") {
      kinds.push_back(pairmix::ResponseKind::kOrdinal);
    } else if (t == "gaussian") {
      kinds.push_back(pairmix::ResponseKind::kGaussian);
    } else {
      throw std::invalid_argument("response kinds must be 'ordinal' or 'gaussian'");
    }
  }
  return kinds;
}

std::string fit_csv(const std::string& data_path, const std::string& formula_text,
                    const std::vector<std::string>& types, const std::string& na,
                    const std::string& solver, bool standardize, bool se,
                    int threads, int max_iter, double tol, std::uint64_t seed) {
  const pairmix::FormulaSpec formula = pairmix::parse_formula(formula_text);
  if (types.size() != formula.responses.size()) {
    throw std::invalid_argument("types must list one kind per response");
  }
  const pairmix::NaPolicy policy =
      na == "pass" ? pairmix::NaPolicy::kPass : pairmix::NaPolicy::kFail;
  pairmix::LoadedData loaded =
      pairmix::load_csv(data_path, formula, kinds_from_strings(types), policy);
  if (standardize) {
    const auto warned = pairmix::standardize(&loaded.data);
    loaded.warnings.insert(loaded.warnings.end(), warned.begin(), warned.end());
  }

  pairmix::FitConfig config;
  config.solver = solver == "cg" ? pairmix::SolverKind::kConjugateGradient
                                 : pairmix::SolverKind::kBfgs;
  config.max_iterations = max_iter;
  config.gradient_tolerance = tol;
  config.compute_se = se;
  config.seed = seed;
  config.threads =
      threads > 0 ? threads
                  : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  pairmix::FitResult result = pairmix::fit(loaded.spec, loaded.data, config);
  result.formula_text = formula.text();
  result.warnings.insert(result.warnings.begin(), loaded.warnings.begin(),
                         loaded.warnings.end());
  return pairmix::json_to_string(pairmix::fit_result_to_json(result));
}

void simulate_to_csv(const std::string& config_json, const std::string& out_path) {
  const pairmix::SimConfig config =
      pairmix::sim_config_from_json(nlohmann::json::parse(config_json));
  const pairmix::SimOutput sim = pairmix::simulate(config);
  pairmix::write_csv(out_path, sim.data, config.spec);
}

std::string toy_config_json() {
  return pairmix::json_to_string(pairmix::sim_config_to_json(pairmix::toy_config()));
}

std::string render_report_str(const std::string& fit_json) {
  return pairmix::render_report(nlohmann::json::parse(fit_json));
}

py::dict parse_formula_dict(const std::string& text) {
  const pairmix::FormulaSpec f = pairmix::parse_formula(text);
  py::dict d;
  d["responses"] = f.responses;
  d["covariates"] = f.covariates;
  d["intercept_suppressed"] = f.intercept_suppressed;
  d["text"] = f.text();
  return d;
}

int count_parameters_json(const std::string& model_json) {
  const pairmix::ModelSpec spec =
      pairmix::model_from_json(nlohmann::json::parse(model_json));
  return static_cast<int>(pairmix::count_parameters(spec));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pairwise-likelihood engine for mixed ordinal and Gaussian responses";

  m.def("std_normal_pdf", &pairmix::std_normal_pdf, py::arg("x"));
  m.def("std_normal_cdf", &pairmix::std_normal_cdf, py::arg("x"));
  m.def("std_normal_quantile", &pairmix::std_normal_quantile, py::arg("p"));
  m.def(
      "bvn_cdf",
      [](double x, double y, double rho) { return pairmix::bvn_cdf(x, y, rho); },
      py::arg("x"), py::arg("y"), py::arg("rho"),
      "P(X <= x, Y <= y) for standard bivariate normals with correlation rho");
  m.def(
      "bvn_pdf",
      [](double x, double y, double rho) { return pairmix::bvn_pdf(x, y, rho); },
      py::arg("x"), py::arg("y"), py::arg("rho"));

  m.def("parse_formula", &parse_formula_dict, py::arg("text"),
        "Split a formula into response and covariate name lists");
  m.def("count_parameters", &count_parameters_json, py::arg("model_json"));

  m.def("fit_csv", &fit_csv, py::arg("data_path"), py::arg("formula"),
        py::arg("types"), py::arg("na") = "fail", py::arg("solver") = "bfgs",
        py::arg("standardize") = true, py::arg("se") = true, py::arg("threads") = 1,
        py::arg("max_iter") = 500, py::arg("tol") = 1e-5, py::arg("seed") = 1,
        "Fit a model to a CSV file; returns the fit as a JSON string");
  m.def("simulate_to_csv", &simulate_to_csv, py::arg("config_json"),
        py::arg("out_path"), "Draw a dataset and write it as CSV");
  m.def("toy_config_json", &toy_config_json,
        "Config for the built-in demonstration model, as a JSON string");
  m.def("render_report", &render_report_str, py::arg("fit_json"),
        "Render the text report for a stored fit");
}
