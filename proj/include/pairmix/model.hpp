#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace pairmix {

enum class ResponseKind { kOrdinal, kGaussian };

struct ResponseSpec {
  std::string name;
  ResponseKind kind = ResponseKind::kGaussian;
  // Ordinal responses only: number of categories K >= 2 and their display
  // labels (size K).  Category codes used internally are 1..K.
  Eigen::Index n_categories = 0;
  std::vector<std::string> category_labels;
};

struct ModelSpec {
  std::vector<ResponseSpec> responses;  // q >= 1
  std::vector<std::string> covariates;  // p >= 0, shared across responses
  // Formula metadata only: the latent means always carry free location
  // terms (thresholds for ordinal responses, an intercept for Gaussian
  // ones), so no explicit intercept column is ever added to the design.
  bool intercept_suppressed = true;

  Eigen::Index q() const { return static_cast<Eigen::Index>(responses.size()); }
  Eigen::Index p() const { return static_cast<Eigen::Index>(covariates.size()); }
};

// Model parameters on their natural (constrained) scale.  Entries are
// indexed by response; slots that do not apply to a response's kind are left
// empty (thresholds) or unused (intercepts, sigmas).
struct ParameterSet {
  std::vector<Eigen::VectorXd> thresholds;    // per response, size K_j - 1
  std::vector<double> intercepts;             // per response (Gaussian only)
  std::vector<Eigen::VectorXd> coefficients;  // per response, size p
  std::vector<double> sigmas;                 // per response (Gaussian only)
  Eigen::MatrixXd correlation;                // q x q, symmetric, unit diagonal
};

// Flat ordering of the parameter vector: for each response in model order a
// contiguous block (thresholds then coefficients for ordinal; intercept then
// coefficients for Gaussian), then one sigma per Gaussian response in model
// order, then correlations rho_{kl} for k < l in lexicographic order.
struct ParameterLayout {
  struct Block {
    Eigen::Index offset = 0;
    Eigen::Index n_thresh = 0;  // K_j - 1, or 0 for Gaussian
    bool gaussian = false;      // Gaussian blocks start with the intercept
    Eigen::Index size = 0;      // n_thresh + (gaussian ? 1 : 0) + p
  };
  std::vector<Block> blocks;
  std::vector<Eigen::Index> sigma_slot;  // per response; -1 for ordinal
  Eigen::Index p = 0;
  Eigen::Index q = 0;
  Eigen::Index sigma_offset = 0;
  Eigen::Index corr_offset = 0;
  Eigen::Index total = 0;

  // Index of rho_{kl} (k < l) within the flat vector.
  Eigen::Index corr_index(Eigen::Index k, Eigen::Index l) const;
};

ParameterLayout make_layout(const ModelSpec& spec);
Eigen::Index count_parameters(const ModelSpec& spec);

// Display labels in flat order, e.g. "y1 1|2", "beta0.z1", "y1X1",
// "sigma.z1", "corr_y1_y2".
std::vector<std::string> parameter_names(const ModelSpec& spec);

// Throws std::invalid_argument when sizes or invariants are violated
// (thresholds not strictly increasing, sigma <= 0, |rho| >= 1, ...).
void validate(const ModelSpec& spec, const ParameterSet& params);

// Constrained flat vector <-> structured parameters (no transform).
Eigen::VectorXd flatten(const ModelSpec& spec, const ParameterSet& params);
ParameterSet unflatten(const ModelSpec& spec, const Eigen::VectorXd& flat);

// Unconstrained encoding used by the optimizer:
//   thresholds: theta_1 kept, log-increments after (ordering preserved by
//               construction, with a nextafter guard against collapse);
//   sigma:      log sigma (decoded value floored at 1e-300);
//   rho:        Fisher z = atanh(rho) (decoded value clamped to
//               |rho| <= 1 - 1e-10);
//   intercepts and coefficients: identity.
Eigen::VectorXd encode(const ModelSpec& spec, const ParameterSet& params);
ParameterSet decode(const ModelSpec& spec, const Eigen::VectorXd& free);

// Pulls a gradient taken w.r.t. the constrained vector back to the
// unconstrained coordinates at the given parameter values.
Eigen::VectorXd chain_rule_gradient(const ModelSpec& spec,
                                    const ParameterSet& params,
                                    const Eigen::VectorXd& grad_constrained);

// Smallest eigenvalue of the latent correlation matrix.
double min_correlation_eigenvalue(const Eigen::MatrixXd& correlation);

}  // namespace pairmix
