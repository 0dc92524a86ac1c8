#include "pairmix/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pairmix/gauss.hpp"

namespace pairmix {

namespace {

constexpr double kSigmaFloor = 1e-300;

void check_spec(const ModelSpec& spec) {
  if (spec.responses.empty()) {
    throw std::invalid_argument("model: at least one response is required");
  }
  for (const auto& r : spec.responses) {
    if (r.name.empty()) {
      throw std::invalid_argument("model: response names must be non-empty");
    }
    if (r.kind == ResponseKind::kOrdinal) {
      if (r.n_categories < 2) {
        throw std::invalid_argument("model: ordinal response '" + r.name +
                                    "' needs at least 2 categories");
      }
      if (!r.category_labels.empty() &&
          static_cast<Eigen::Index>(r.category_labels.size()) !=
              r.n_categories) {
        throw std::invalid_argument("model: category labels of '" + r.name +
                                    "' do not match the category count");
      }
    }
  }
}

}  // namespace

Eigen::Index ParameterLayout::corr_index(Eigen::Index k, Eigen::Index l) const {
  if (k > l) std::swap(k, l);
  if (k == l || l >= q) {
    throw std::invalid_argument("layout: invalid correlation pair");
  }
  // Pairs (0,1), (0,2), ..., (0,q-1), (1,2), ... in lexicographic order.
  const Eigen::Index before = k * q - k - k * (k - 1) / 2;
  return corr_offset + before + (l - k - 1);
}

ParameterLayout make_layout(const ModelSpec& spec) {
  check_spec(spec);
  ParameterLayout layout;
  layout.p = spec.p();
  layout.q = spec.q();
  Eigen::Index offset = 0;
  for (const auto& r : spec.responses) {
    ParameterLayout::Block b;
    b.offset = offset;
    b.gaussian = (r.kind == ResponseKind::kGaussian);
    b.n_thresh = b.gaussian ? 0 : (r.n_categories - 1);
    b.size = b.n_thresh + (b.gaussian ? 1 : 0) + layout.p;
    layout.blocks.push_back(b);
    offset += b.size;
  }
  layout.sigma_offset = offset;
  layout.sigma_slot.assign(spec.responses.size(), -1);
  for (Eigen::Index j = 0; j < layout.q; ++j) {
    if (layout.blocks[j].gaussian) {
      layout.sigma_slot[j] = offset++;
    }
  }
  layout.corr_offset = offset;
  layout.total = offset + layout.q * (layout.q - 1) / 2;
  return layout;
}

Eigen::Index count_parameters(const ModelSpec& spec) {
  return make_layout(spec).total;
}

std::vector<std::string> parameter_names(const ModelSpec& spec) {
  const ParameterLayout layout = make_layout(spec);
  std::vector<std::string> names(layout.total);
  for (Eigen::Index j = 0; j < layout.q; ++j) {
    const auto& r = spec.responses[j];
    const auto& b = layout.blocks[j];
    Eigen::Index at = b.offset;
    if (b.gaussian) {
      names[at++] = "beta0." + r.name;
    } else {
      for (Eigen::Index s = 1; s < r.n_categories; ++s) {
        names[at++] =
            r.name + " " + std::to_string(s) + "|" + std::to_string(s + 1);
      }
    }
    for (const auto& cov : spec.covariates) {
      names[at++] = r.name + cov;
    }
    if (b.gaussian) {
      names[layout.sigma_slot[j]] = "sigma." + r.name;
    }
  }
  for (Eigen::Index k = 0; k < layout.q; ++k) {
    for (Eigen::Index l = k + 1; l < layout.q; ++l) {
      names[layout.corr_index(k, l)] =
          "corr_" + spec.responses[k].name + "_" + spec.responses[l].name;
    }
  }
  return names;
}

void validate(const ModelSpec& spec, const ParameterSet& params) {
  const ParameterLayout layout = make_layout(spec);
  const auto q = static_cast<std::size_t>(layout.q);
  if (params.thresholds.size() != q || params.coefficients.size() != q ||
      params.intercepts.size() != q || params.sigmas.size() != q) {
    throw std::invalid_argument(
        "parameters: per-response containers must all have length q");
  }
  for (Eigen::Index j = 0; j < layout.q; ++j) {
    const auto& r = spec.responses[j];
    if (params.coefficients[j].size() != layout.p) {
      throw std::invalid_argument("parameters: coefficient vector of '" +
                                  r.name + "' must have length p");
    }
    if (r.kind == ResponseKind::kOrdinal) {
      const auto& th = params.thresholds[j];
      if (th.size() != r.n_categories - 1) {
        throw std::invalid_argument("parameters: '" + r.name + "' needs " +
                                    std::to_string(r.n_categories - 1) +
                                    " thresholds");
      }
      for (Eigen::Index s = 1; s < th.size(); ++s) {
        if (!(th[s] > th[s - 1])) {
          throw std::invalid_argument(
              "parameters: thresholds of '" + r.name +
              "' must be strictly increasing");
        }
      }
    } else {
      if (!(params.sigmas[j] > 0.0) || !std::isfinite(params.sigmas[j])) {
        throw std::invalid_argument("parameters: sigma of '" + r.name +
                                    "' must be positive and finite");
      }
      if (!std::isfinite(params.intercepts[j])) {
        throw std::invalid_argument("parameters: intercept of '" + r.name +
                                    "' must be finite");
      }
    }
  }
  const auto& R = params.correlation;
  if (R.rows() != layout.q || R.cols() != layout.q) {
    throw std::invalid_argument("parameters: correlation matrix must be q x q");
  }
  for (Eigen::Index k = 0; k < layout.q; ++k) {
    if (R(k, k) != 1.0) {
      throw std::invalid_argument(
          "parameters: correlation matrix needs a unit diagonal");
    }
    for (Eigen::Index l = k + 1; l < layout.q; ++l) {
      if (R(k, l) != R(l, k)) {
        throw std::invalid_argument(
            "parameters: correlation matrix must be symmetric");
      }
      if (!(std::fabs(R(k, l)) < 1.0)) {
        throw std::invalid_argument(
            "parameters: correlations must lie strictly inside (-1, 1)");
      }
    }
  }
}

Eigen::VectorXd flatten(const ModelSpec& spec, const ParameterSet& params) {
  const ParameterLayout layout = make_layout(spec);
  Eigen::VectorXd flat(layout.total);
  for (Eigen::Index j = 0; j < layout.q; ++j) {
    const auto& b = layout.blocks[j];
    Eigen::Index at = b.offset;
    if (b.gaussian) {
      flat[at++] = params.intercepts[j];
    } else {
      flat.segment(at, b.n_thresh) = params.thresholds[j];
      at += b.n_thresh;
    }
    flat.segment(at, layout.p) = params.coefficients[j];
    if (b.gaussian) flat[layout.sigma_slot[j]] = params.sigmas[j];
  }
  for (Eigen::Index k = 0; k < layout.q; ++k) {
    for (Eigen::Index l = k + 1; l < layout.q; ++l) {
      flat[layout.corr_index(k, l)] = params.correlation(k, l);
    }
  }
  return flat;
}

ParameterSet unflatten(const ModelSpec& spec, const Eigen::VectorXd& flat) {
  const ParameterLayout layout = make_layout(spec);
  if (flat.size() != layout.total) {
    throw std::invalid_argument("parameters: flat vector has length " +
                                std::to_string(flat.size()) + ", expected " +
                                std::to_string(layout.total));
  }
  ParameterSet params;
  params.thresholds.resize(layout.q);
  params.coefficients.resize(layout.q);
  params.intercepts.assign(layout.q, std::numeric_limits<double>::quiet_NaN());
  params.sigmas.assign(layout.q, std::numeric_limits<double>::quiet_NaN());
  params.correlation = Eigen::MatrixXd::Identity(layout.q, layout.q);
  for (Eigen::Index j = 0; j < layout.q; ++j) {
    const auto& b = layout.blocks[j];
    Eigen::Index at = b.offset;
    if (b.gaussian) {
      params.intercepts[j] = flat[at++];
      params.sigmas[j] = flat[layout.sigma_slot[j]];
    } else {
      params.thresholds[j] = flat.segment(at, b.n_thresh);
      at += b.n_thresh;
    }
    params.coefficients[j] = flat.segment(at, layout.p);
  }
  for (Eigen::Index k = 0; k < layout.q; ++k) {
    for (Eigen::Index l = k + 1; l < layout.q; ++l) {
      const double rho = flat[layout.corr_index(k, l)];
      params.correlation(k, l) = rho;
      params.correlation(l, k) = rho;
    }
  }
  return params;
}

Eigen::VectorXd encode(const ModelSpec& spec, const ParameterSet& params) {
  validate(spec, params);
  const ParameterLayout layout = make_layout(spec);
  Eigen::VectorXd free = flatten(spec, params);
  for (Eigen::Index j = 0; j < layout.q; ++j) {
    const auto& b = layout.blocks[j];
    if (b.gaussian) {
      free[layout.sigma_slot[j]] = std::log(params.sigmas[j]);
    } else {
      const auto& th = params.thresholds[j];
      for (Eigen::Index s = b.n_thresh - 1; s >= 1; --s) {
        free[b.offset + s] = std::log(th[s] - th[s - 1]);
      }
    }
  }
  for (Eigen::Index k = 0; k < layout.q; ++k) {
    for (Eigen::Index l = k + 1; l < layout.q; ++l) {
      free[layout.corr_index(k, l)] = std::atanh(params.correlation(k, l));
    }
  }
  return free;
}

ParameterSet decode(const ModelSpec& spec, const Eigen::VectorXd& free) {
  const ParameterLayout layout = make_layout(spec);
  if (free.size() != layout.total) {
    throw std::invalid_argument("decode: free vector has length " +
                                std::to_string(free.size()) + ", expected " +
                                std::to_string(layout.total));
  }
  Eigen::VectorXd flat = free;
  for (Eigen::Index j = 0; j < layout.q; ++j) {
    const auto& b = layout.blocks[j];
    if (b.gaussian) {
      flat[layout.sigma_slot[j]] =
          std::max(std::exp(free[layout.sigma_slot[j]]), kSigmaFloor);
    } else {
      for (Eigen::Index s = 1; s < b.n_thresh; ++s) {
        double next = flat[b.offset + s - 1] + std::exp(free[b.offset + s]);
        // exp() of a very negative increment can round the sum back onto the
        // previous threshold; keep the ordering strict.
        if (next <= flat[b.offset + s - 1]) {
          next = std::nextafter(flat[b.offset + s - 1], kInf);
        }
        flat[b.offset + s] = next;
      }
    }
  }
  const double rho_cap = 1.0 - kRhoEps;
  for (Eigen::Index k = 0; k < layout.q; ++k) {
    for (Eigen::Index l = k + 1; l < layout.q; ++l) {
      const Eigen::Index at = layout.corr_index(k, l);
      flat[at] = std::clamp(std::tanh(free[at]), -rho_cap, rho_cap);
    }
  }
  return unflatten(spec, flat);
}

Eigen::VectorXd chain_rule_gradient(const ModelSpec& spec,
                                    const ParameterSet& params,
                                    const Eigen::VectorXd& grad_constrained) {
  const ParameterLayout layout = make_layout(spec);
  if (grad_constrained.size() != layout.total) {
    throw std::invalid_argument("chain rule: gradient has length " +
                                std::to_string(grad_constrained.size()) +
                                ", expected " + std::to_string(layout.total));
  }
  Eigen::VectorXd out = grad_constrained;
  for (Eigen::Index j = 0; j < layout.q; ++j) {
    const auto& b = layout.blocks[j];
    if (b.gaussian) {
      // d/d log(sigma) = sigma * d/d sigma.
      out[layout.sigma_slot[j]] *= params.sigmas[j];
    } else {
      // theta_s = t_1 + sum_{2<=u<=s} exp(t_u): the free intercept collects
      // every threshold gradient, each log-increment collects the tail sum
      // scaled by its increment.
      const auto& th = params.thresholds[j];
      double tail = 0.0;
      for (Eigen::Index s = b.n_thresh - 1; s >= 1; --s) {
        tail += grad_constrained[b.offset + s];
        out[b.offset + s] = (th[s] - th[s - 1]) * tail;
      }
      out[b.offset] = tail + grad_constrained[b.offset];
    }
  }
  for (Eigen::Index k = 0; k < layout.q; ++k) {
    for (Eigen::Index l = k + 1; l < layout.q; ++l) {
      // d/dz = (1 - rho^2) d/drho at rho = tanh(z).
      const Eigen::Index at = layout.corr_index(k, l);
      const double rho = params.correlation(k, l);
      out[at] *= (1.0 - rho) * (1.0 + rho);
    }
  }
  return out;
}

double min_correlation_eigenvalue(const Eigen::MatrixXd& correlation) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(correlation);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("correlation eigenvalues failed to converge");
  }
  return solver.eigenvalues().minCoeff();
}

}  // namespace pairmix
