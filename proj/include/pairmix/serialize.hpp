#pragma once

#include <string>

#include "json.hpp"
#include "pairmix/estimate.hpp"
#include "pairmix/model.hpp"
#include "pairmix/simulate.hpp"

namespace pairmix {

nlohmann::json model_to_json(const ModelSpec& spec);
ModelSpec model_from_json(const nlohmann::json& j);

nlohmann::json params_to_json(const ModelSpec& spec, const ParameterSet& params);
ParameterSet params_from_json(const ModelSpec& spec, const nlohmann::json& j);

// Simulation configs serialize the model and parameters plus n / seed /
// missing_rate; absent fields keep their defaults.
nlohmann::json sim_config_to_json(const SimConfig& config);
SimConfig sim_config_from_json(const nlohmann::json& j);

// Self-contained fit record: model, formula, flat estimates with names,
// standard errors and covariance, likelihood summaries, convergence state
// and warnings.  Reports are rendered from this document alone.
nlohmann::json fit_result_to_json(const FitResult& fit);

// Round-trips doubles exactly (shortest decimal that re-reads to the same
// bits), with NaN serialized as null.
std::string json_to_string(const nlohmann::json& j);

// null (how NaN serializes) read back as NaN.
double json_number_or_nan(const nlohmann::json& j);

}  // namespace pairmix
