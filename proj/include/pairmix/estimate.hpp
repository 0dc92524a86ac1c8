#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "pairmix/data.hpp"
#include "pairmix/model.hpp"
#include "pairmix/optim.hpp"

namespace pairmix {

struct FitConfig {
  SolverKind solver = SolverKind::kBfgs;
  int max_iterations = 500;
  double gradient_tolerance = 1e-5;
  bool compute_se = true;
  int threads = 1;
  std::uint64_t seed = 1;  // only used if the closed-form start fails
};

struct FitResult {
  ModelSpec spec;
  ParameterSet params;
  Eigen::VectorXd estimates;  // flat constrained vector

  // Sandwich standard errors; NaN-filled (and vcov 0x0) when disabled or
  // when the bread matrix is numerically singular.
  Eigen::VectorXd se;
  Eigen::MatrixXd vcov;
  bool se_ok = false;

  double log_pl = 0.0;  // maximized log pairwise likelihood
  double claic = 0.0;
  double clbic = 0.0;

  Eigen::Index n_units = 0;
  Eigen::Index n_all_missing_units = 0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  double min_eigen_correlation = 0.0;
  SolverKind solver = SolverKind::kBfgs;

  // Carried along for self-contained serialized results.
  std::string formula_text;
  std::vector<double> x_mean;
  std::vector<double> x_sd;
  std::vector<std::string> warnings;
};

// Moment-based starting values: per-response least squares for Gaussian
// responses, quantile-inverted thresholds plus a short univariate refinement
// for ordinal ones, and residual correlations (generalized residuals for
// ordinal responses) for the correlation block.
ParameterSet initial_values(const ModelSpec& spec, const Dataset& data,
                            std::uint64_t seed);

// Sandwich covariance of the flat constrained estimates: bread from central
// finite differences of the analytic gradient, variability from per-unit
// score cross-products.  H and J are returned when requested.  Throws
// std::runtime_error with a condition diagnostic when the bread matrix is
// numerically singular.
Eigen::MatrixXd godambe_vcov(const ModelSpec& spec, const ParameterSet& params,
                             const Dataset& data, int threads = 1,
                             Eigen::MatrixXd* hessian_out = nullptr,
                             Eigen::MatrixXd* variability_out = nullptr);

// Composite-likelihood information criteria with effective dimension
// tr(J H^{-1}): first CLAIC (factor 2), then CLBIC (factor log n).
std::pair<double, double> information_criteria(double log_pl,
                                               const Eigen::MatrixXd& hessian,
                                               const Eigen::MatrixXd& variability,
                                               Eigen::Index n_units);

struct WaldRow {
  std::string label;
  double estimate = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p = 0.0;
};

// One row per parameter in flat order; z and p are NaN when no usable
// standard error is available.
std::vector<WaldRow> wald_table(const FitResult& fit);

FitResult fit(const ModelSpec& spec, const Dataset& data,
              const FitConfig& config = {});

}  // namespace pairmix
