#include "pairmix/serialize.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pairmix {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j,
                                 const std::string& what) {
  if (!j.is_array()) {
    throw std::runtime_error("parameters: '" + what + "' must be an array");
  }
  Eigen::VectorXd v(j.size());
  Eigen::Index at = 0;
  for (const auto& item : j) {
    v[at++] = item.is_number() ? item.get<double>() : kNaN;
  }
  return v;
}

double number_or_nan(const nlohmann::json& j) {
  return j.is_number() ? j.get<double>() : kNaN;
}

}  // namespace

nlohmann::json model_to_json(const ModelSpec& spec) {
  nlohmann::json responses = nlohmann::json::array();
  for (const auto& r : spec.responses) {
    nlohmann::json item;
    item["name"] = r.name;
    if (r.kind == ResponseKind::kOrdinal) {
      item["kind"] = "ordinal";
      item["categories"] = r.category_labels.empty()
                               ? nlohmann::json(r.n_categories)
                               : nlohmann::json(r.category_labels);
    } else {
      item["kind"] = "gaussian";
    }
    responses.push_back(item);
  }
  return {{"responses", responses},
          {"covariates", spec.covariates},
          {"intercept_suppressed", spec.intercept_suppressed}};
}

ModelSpec model_from_json(const nlohmann::json& j) {
  ModelSpec spec;
  if (!j.contains("responses") || !j["responses"].is_array() ||
      j["responses"].empty()) {
    throw std::runtime_error("model: needs a non-empty 'responses' array");
  }
  for (const auto& item : j["responses"]) {
    ResponseSpec r;
    r.name = item.at("name").get<std::string>();
    const std::string kind = item.at("kind").get<std::string>();
    if (kind == "ordinal") {
      r.kind = ResponseKind::kOrdinal;
      const auto& cats = item.at("categories");
      if (cats.is_array()) {
        r.category_labels = cats.get<std::vector<std::string>>();
        r.n_categories = static_cast<Eigen::Index>(r.category_labels.size());
      } else {
        r.n_categories = cats.get<Eigen::Index>();
        for (Eigen::Index s = 1; s <= r.n_categories; ++s) {
          r.category_labels.push_back(std::to_string(s));
        }
      }
      if (r.n_categories < 2) {
        throw std::runtime_error("model: ordinal response '" + r.name +
                                 "' needs at least 2 categories");
      }
    } else if (kind == "gaussian") {
      r.kind = ResponseKind::kGaussian;
    } else {
      throw std::runtime_error("model: unknown response kind '" + kind + "'");
    }
    spec.responses.push_back(std::move(r));
  }
  if (j.contains("covariates")) {
    spec.covariates = j["covariates"].get<std::vector<std::string>>();
  }
  spec.intercept_suppressed = j.value("intercept_suppressed", true);
  return spec;
}

nlohmann::json params_to_json(const ModelSpec& spec,
                              const ParameterSet& params) {
  validate(spec, params);
  nlohmann::json thresholds = nlohmann::json::object();
  nlohmann::json coefficients = nlohmann::json::object();
  nlohmann::json intercepts = nlohmann::json::object();
  nlohmann::json sigmas = nlohmann::json::object();
  for (Eigen::Index j = 0; j < spec.q(); ++j) {
    const auto& r = spec.responses[j];
    coefficients[r.name] = vector_to_json(params.coefficients[j]);
    if (r.kind == ResponseKind::kOrdinal) {
      thresholds[r.name] = vector_to_json(params.thresholds[j]);
    } else {
      intercepts[r.name] = params.intercepts[j];
      sigmas[r.name] = params.sigmas[j];
    }
  }
  nlohmann::json correlations = nlohmann::json::array();
  for (Eigen::Index k = 0; k < spec.q(); ++k) {
    for (Eigen::Index l = k + 1; l < spec.q(); ++l) {
      correlations.push_back({{"first", spec.responses[k].name},
                              {"second", spec.responses[l].name},
                              {"value", params.correlation(k, l)}});
    }
  }
  return {{"thresholds", thresholds},
          {"coefficients", coefficients},
          {"intercepts", intercepts},
          {"sigmas", sigmas},
          {"correlations", correlations}};
}

ParameterSet params_from_json(const ModelSpec& spec, const nlohmann::json& j) {
  const Eigen::Index q = spec.q();
  const Eigen::Index p = spec.p();
  ParameterSet params;
  params.thresholds.resize(q);
  params.coefficients.resize(q);
  params.intercepts.assign(q, kNaN);
  params.sigmas.assign(q, kNaN);
  params.correlation = Eigen::MatrixXd::Identity(q, q);
  for (Eigen::Index idx = 0; idx < q; ++idx) {
    const auto& r = spec.responses[idx];
    if (p > 0) {
      params.coefficients[idx] = vector_from_json(
          j.at("coefficients").at(r.name), "coefficients." + r.name);
    } else {
      params.coefficients[idx].resize(0);
      if (j.contains("coefficients") && j["coefficients"].contains(r.name)) {
        params.coefficients[idx] =
            vector_from_json(j["coefficients"][r.name], r.name);
      }
    }
    if (r.kind == ResponseKind::kOrdinal) {
      params.thresholds[idx] = vector_from_json(
          j.at("thresholds").at(r.name), "thresholds." + r.name);
    } else {
      params.intercepts[idx] = j.at("intercepts").at(r.name).get<double>();
      params.sigmas[idx] = j.at("sigmas").at(r.name).get<double>();
    }
  }
  if (q > 1) {
    if (!j.contains("correlations") || !j["correlations"].is_array()) {
      throw std::runtime_error("parameters: missing 'correlations' array");
    }
    auto find_response = [&](const std::string& name) {
      for (Eigen::Index idx = 0; idx < q; ++idx) {
        if (spec.responses[idx].name == name) return idx;
      }
      throw std::runtime_error("parameters: correlation names unknown response '" +
                               name + "'");
    };
    for (const auto& item : j["correlations"]) {
      const Eigen::Index k = find_response(item.at("first").get<std::string>());
      const Eigen::Index l = find_response(item.at("second").get<std::string>());
      const double value = item.at("value").get<double>();
      params.correlation(k, l) = value;
      params.correlation(l, k) = value;
    }
  }
  validate(spec, params);
  return params;
}

nlohmann::json sim_config_to_json(const SimConfig& config) {
  return {{"model", model_to_json(config.spec)},
          {"parameters", params_to_json(config.spec, config.params)},
          {"n", config.n},
          {"seed", config.seed},
          {"missing_rate", config.missing_rate}};
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
  SimConfig config;
  config.spec = model_from_json(j.at("model"));
  config.params = params_from_json(config.spec, j.at("parameters"));
  config.n = j.value("n", static_cast<Eigen::Index>(1000));
  config.seed = j.value("seed", static_cast<std::uint64_t>(1));
  if (j.contains("missing_rate")) {
    config.missing_rate = j["missing_rate"].get<std::vector<double>>();
  }
  return config;
}

nlohmann::json fit_result_to_json(const FitResult& fit) {
  nlohmann::json out;
  out["model"] = model_to_json(fit.spec);
  out["formula"] = fit.formula_text;
  out["parameters"] = params_to_json(fit.spec, fit.params);
  out["parameter_names"] = parameter_names(fit.spec);
  out["estimates"] = vector_to_json(fit.estimates);
  out["se"] = vector_to_json(fit.se);
  if (fit.vcov.size() > 0) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < fit.vcov.rows(); ++i) {
      rows.push_back(vector_to_json(fit.vcov.row(i)));
    }
    out["vcov"] = rows;
  } else {
    out["vcov"] = nullptr;
  }
  out["log_pl"] = fit.log_pl;
  out["claic"] = fit.claic;
  out["clbic"] = fit.clbic;
  out["n_units"] = fit.n_units;
  out["n_all_missing_units"] = fit.n_all_missing_units;
  out["converged"] = fit.converged;
  out["iterations"] = fit.iterations;
  out["gradient_norm"] = fit.gradient_norm;
  out["min_eigen_correlation"] = fit.min_eigen_correlation;
  out["solver"] = fit.solver == SolverKind::kBfgs ? "bfgs" : "cg";
  if (!fit.x_sd.empty()) {
    out["standardization"] = {{"mean", fit.x_mean}, {"sd", fit.x_sd}};
  } else {
    out["standardization"] = nullptr;
  }
  out["warnings"] = fit.warnings;
  return out;
}

std::string json_to_string(const nlohmann::json& j) {
  return j.dump(2) + "\n";
}

double json_number_or_nan(const nlohmann::json& j) { return number_or_nan(j); }

}  // namespace pairmix
