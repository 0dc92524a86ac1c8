#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "pairmix/data.hpp"
#include "pairmix/model.hpp"

namespace pairmix {

// Probabilities are floored here before taking logs; gradients keep the
// analytic numerators but divide by the floored value, so both stay finite
// when a cell probability underflows.
inline constexpr double kProbFloor = 1e-300;

// Latent interval (L, U] implied by an observed ordinal category; either end
// may be infinite (lowest / highest category).
struct OrdinalBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Factored form of the extended design vector that maps a bound to the
// response's parameter block: U = theta_{r} - beta'x differentiates to a
// one-hot selector on the threshold entries and -x on the coefficients.
struct ExtendedDesign {
  int upper_threshold = -1;  // index into the threshold sub-block; -1 = +inf
  int lower_threshold = -1;  // index into the threshold sub-block; -1 = -inf
  const Eigen::VectorXd* x = nullptr;  // covariate row (may be null if p = 0)
};

// Mean and sd of one latent coordinate given the other's standardized value.
struct ConditionalMoments {
  double mean = 0.0;
  double sd = 1.0;
};

ConditionalMoments conditional_moments(double rho, double z_other);

// Offsets of one response's parameters inside the flat layout.
struct BlockRef {
  Eigen::Index psi_offset = 0;  // start of the response block
  Eigen::Index n_thresh = 0;    // K - 1 (0 for Gaussian)
  bool gaussian = false;
  Eigen::Index sigma_index = -1;  // flat index of sigma; -1 for ordinal
};

// One observed ordinal cell, prepared for the likelihood terms.
struct OrdinalObs {
  OrdinalBounds bounds;
  ExtendedDesign design;
  BlockRef ref;
};

// One observed Gaussian cell: residual e = y - beta0 - beta'x and sigma.
struct GaussObs {
  double residual = 0.0;
  double sigma = 1.0;
  const Eigen::VectorXd* x = nullptr;
  BlockRef ref;
};

// Negative log contribution of one pair (or singleton) together with its
// gradient, sparse over the flat constrained parameter vector.
struct PairTerm {
  double value = 0.0;
  std::vector<std::pair<Eigen::Index, double>> grad;
};

// Both ordinal: rectangle probability from four bivariate normal
// distribution function evaluations.
PairTerm case1_ord_ord(const OrdinalObs& k, const OrdinalObs& l, double rho,
                       Eigen::Index rho_index);

// Both Gaussian: bivariate normal density of the two residuals, including
// the 1/(sigma_k sigma_l) change-of-variables factor.
PairTerm case2_gauss_gauss(const GaussObs& k, const GaussObs& l, double rho,
                           Eigen::Index rho_index);

// Ordinal paired with Gaussian: interval probability of the ordinal latent
// conditional on the Gaussian residual, times the Gaussian density.
PairTerm case3_ord_gauss(const OrdinalObs& k, const GaussObs& l, double rho,
                         Eigen::Index rho_index);

// Marginal contributions for units with exactly one observed response.
PairTerm uni_ordinal(const OrdinalObs& k);
PairTerm uni_gaussian(const GaussObs& k);

struct EvalOptions {
  int threads = 1;  // unit chunks are reduced in fixed order, so results are
                    // identical for every thread count
};

// Sum over units of summed pairwise (or singleton) negative log terms.
// When grad is non-null it receives the gradient w.r.t. the flat constrained
// vector.  Units with no observed response contribute nothing and are
// counted into n_all_missing when provided.
double pairwise_neglog(const ModelSpec& spec, const ParameterSet& params,
                       const Dataset& data, Eigen::VectorXd* grad = nullptr,
                       const EvalOptions& options = {},
                       Eigen::Index* n_all_missing = nullptr);

// Per-unit gradient rows (n x d) of the negative log contribution; the
// cross-product of these rows is the variability part of the sandwich.
Eigen::MatrixXd per_unit_scores(const ModelSpec& spec,
                                const ParameterSet& params,
                                const Dataset& data,
                                const EvalOptions& options = {});

}  // namespace pairmix
