#include "pairmix/simulate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pairmix/rng.hpp"

namespace pairmix {

SimOutput simulate(const SimConfig& config) {
  const ModelSpec& spec = config.spec;
  validate(spec, config.params);
  const Eigen::Index q = spec.q();
  const Eigen::Index p = spec.p();
  if (config.n < 1) {
    throw std::invalid_argument("simulate: n must be at least 1");
  }
  if (!config.missing_rate.empty() &&
      static_cast<Eigen::Index>(config.missing_rate.size()) != q) {
    throw std::invalid_argument(
        "simulate: missing_rate needs one entry per response");
  }
  for (const double rate : config.missing_rate) {
    if (!(rate >= 0.0 && rate < 1.0)) {
      throw std::invalid_argument(
          "simulate: missing rates must lie in [0, 1)");
    }
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(config.params.correlation);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(
        "simulate: correlation matrix is not positive definite (smallest "
        "eigenvalue " +
        std::to_string(
            min_correlation_eigenvalue(config.params.correlation)) +
        ")");
  }
  const Eigen::MatrixXd chol = llt.matrixL();

  SimOutput out;
  out.data.y.resize(config.n, q);
  out.data.x.resize(config.n, p);
  out.data.observed.resize(config.n, q);
  out.latent_errors.resize(config.n, q);

  Eigen::VectorXd white(q), eps(q);
  for (Eigen::Index i = 0; i < config.n; ++i) {
    // Per-unit substream with a fixed in-row draw order, so a row's values
    // depend only on (seed, i) and not on n or other rows.
    Xoshiro256pp rng = Xoshiro256pp::substream(
        config.seed, static_cast<std::uint64_t>(i));
    for (Eigen::Index m = 0; m < p; ++m) out.data.x(i, m) = rng.normal();
    for (Eigen::Index j = 0; j < q; ++j) white[j] = rng.normal();
    eps.noalias() = chol * white;
    out.latent_errors.row(i) = eps;
    for (Eigen::Index j = 0; j < q; ++j) {
      const double eta =
          p > 0 ? out.data.x.row(i).dot(config.params.coefficients[j]) : 0.0;
      if (spec.responses[j].kind == ResponseKind::kGaussian) {
        out.data.y(i, j) = config.params.intercepts[j] + eta +
                           config.params.sigmas[j] * eps[j];
      } else {
        // Category r has latent interval (theta_{r-1}, theta_r]; ties on a
        // threshold therefore fall into the lower category.
        const double latent = eta + eps[j];
        const auto& th = config.params.thresholds[j];
        Eigen::Index code = 1;
        for (Eigen::Index s = 0; s < th.size(); ++s) {
          if (latent > th[s]) ++code;
        }
        out.data.y(i, j) = static_cast<double>(code);
      }
      out.data.observed(i, j) = true;
    }
    for (Eigen::Index j = 0; j < q; ++j) {
      const double u = rng.uniform();
      if (!config.missing_rate.empty() && u < config.missing_rate[j]) {
        out.data.y(i, j) = std::numeric_limits<double>::quiet_NaN();
        out.data.observed(i, j) = false;
      }
    }
  }
  return out;
}

SimConfig toy_config(Eigen::Index n, std::uint64_t seed) {
  SimConfig config;
  config.n = n;
  config.seed = seed;
  ModelSpec& spec = config.spec;
  for (const char* name : {"y1", "y2"}) {
    ResponseSpec r;
    r.name = name;
    r.kind = ResponseKind::kOrdinal;
    r.n_categories = 3;
    r.category_labels = {"1", "2", "3"};
    spec.responses.push_back(r);
  }
  for (const char* name : {"z1", "z2"}) {
    ResponseSpec r;
    r.name = name;
    r.kind = ResponseKind::kGaussian;
    spec.responses.push_back(r);
  }
  spec.covariates = {"X1", "X2", "X3"};
  spec.intercept_suppressed = true;

  ParameterSet& params = config.params;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  params.thresholds = {Eigen::Vector2d(-1.0, 1.0), Eigen::Vector2d(-2.0, 2.0),
                       Eigen::VectorXd(), Eigen::VectorXd()};
  params.intercepts = {nan, nan, -1.0, 1.0};
  params.sigmas = {nan, nan, 1.0, 2.0};
  params.coefficients.assign(4, Eigen::Vector3d(2.0, 0.0, -2.0));
  params.correlation = Eigen::MatrixXd::Identity(4, 4);
  const double lower[6] = {0.6363705, 0.7799013, 0.6542121,
                           0.9188427, 0.8011830, 0.8962955};
  int at = 0;
  for (Eigen::Index k = 0; k < 4; ++k) {
    for (Eigen::Index l = k + 1; l < 4; ++l) {
      params.correlation(k, l) = lower[at];
      params.correlation(l, k) = lower[at];
      ++at;
    }
  }
  return config;
}

}  // namespace pairmix
