#pragma once

#include <string>

#include "json.hpp"

namespace pairmix {

// Renders the fixed-layout text summary of a serialized fit: formula and
// size/likelihood header, then Wald tables for thresholds, intercepts,
// coefficients (grouped by covariate), Gaussian standard deviations and
// correlation parameters, with significance stars.  A pure function of the
// JSON document, so re-rendering a stored fit reproduces the report byte
// for byte.
std::string render_report(const nlohmann::json& fit);

}  // namespace pairmix
