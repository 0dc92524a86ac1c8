#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pairmix/data.hpp"
#include "pairmix/model.hpp"

namespace pairmix {

struct SimConfig {
  ModelSpec spec;
  ParameterSet params;
  Eigen::Index n = 1000;
  std::uint64_t seed = 1;
  // Per-response probability of deleting a simulated response cell; empty
  // means fully observed.
  std::vector<double> missing_rate;
};

struct SimOutput {
  Dataset data;
  // Correlated latent errors before thresholding/missingness (n x q), kept
  // for diagnostics of the latent dependence structure.
  Eigen::MatrixXd latent_errors;
};

// Draws covariates iid standard normal and responses from the latent model.
// Each unit uses its own RNG substream keyed by (seed, row) with a fixed
// in-row draw order (p covariate normals, q error normals, q missingness
// uniforms), so any row's data is independent of n and of other rows.
// Latents exactly on a threshold fall into the lower category.  Throws
// std::invalid_argument when the correlation matrix is not positive
// definite or a missing rate is outside [0, 1).
SimOutput simulate(const SimConfig& config);

// Built-in demonstration model: two 3-category ordinal and two Gaussian
// responses on three standard normal covariates, with a dense positive
// definite latent correlation.
SimConfig toy_config(Eigen::Index n = 1000, std::uint64_t seed = 1);

}  // namespace pairmix
