#include "pairmix/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pairmix/gauss.hpp"
#include "pairmix/pairwise.hpp"
#include "pairmix/rng.hpp"

namespace pairmix {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Least squares of one response column on [1, X] over its observed rows;
// sigma is the maximum-likelihood residual sd (1/n denominator).
void gaussian_start(const Dataset& data, Eigen::Index j, double* intercept,
                    Eigen::VectorXd* beta, double* sigma) {
  const Eigen::Index p = data.x.cols();
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (data.observed(i, j)) rows.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(rows.size());
  *intercept = 0.0;
  beta->setZero(p);
  *sigma = 1.0;
  if (m == 0) return;
  Eigen::MatrixXd design(m, p + 1);
  Eigen::VectorXd yv(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    design(r, 0) = 1.0;
    design.row(r).tail(p) = data.x.row(rows[r]);
    yv[r] = data.y(rows[r], j);
  }
  Eigen::VectorXd coef;
  if (m > p) {
    coef = design.colPivHouseholderQr().solve(yv);
  } else {
    coef = Eigen::VectorXd::Zero(p + 1);
    coef[0] = yv.mean();
  }
  const double rss = (yv - design * coef).squaredNorm();
  *intercept = coef[0];
  *beta = coef.tail(p);
  *sigma = std::max(std::sqrt(rss / static_cast<double>(m)), 1e-6);
}

// Thresholds from inverted cumulative category frequencies, followed by a
// short univariate refinement of (thresholds, beta) on the single-response
// objective.
void ordinal_start(const ModelSpec& spec, const Dataset& data, Eigen::Index j,
                   Eigen::VectorXd* thresholds, Eigen::VectorXd* beta) {
  const auto& r = spec.responses[j];
  const Eigen::Index n_cat = r.n_categories;
  const Eigen::Index p = data.x.cols();
  std::vector<double> counts(n_cat, 0.0);
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (!data.observed(i, j)) continue;
    counts[static_cast<Eigen::Index>(data.y(i, j)) - 1] += 1.0;
    total += 1.0;
  }
  thresholds->resize(n_cat - 1);
  beta->setZero(p);
  double cum = 0.0;
  for (Eigen::Index s = 0; s + 1 < n_cat; ++s) {
    cum += counts[s];
    const double prop =
        total > 0.0 ? std::clamp(cum / total, 1e-6, 1.0 - 1e-6) : 0.5;
    double value = std_normal_quantile(prop);
    if (s > 0 && value <= (*thresholds)[s - 1]) {
      value = (*thresholds)[s - 1] + 1e-4;  // empty category: keep ordering
    }
    (*thresholds)[s] = value;
  }

  // Single-response model reusing the full machinery (q = 1 means only the
  // univariate terms are active).
  ModelSpec mini;
  mini.responses.push_back(r);
  mini.covariates = spec.covariates;
  Dataset mdata;
  mdata.y = data.y.col(j);
  mdata.x = data.x;
  mdata.observed = data.observed.col(j);
  ParameterSet mp;
  mp.thresholds = {*thresholds};
  mp.coefficients = {*beta};
  mp.intercepts = {kNaN};
  mp.sigmas = {kNaN};
  mp.correlation = Eigen::MatrixXd::Identity(1, 1);
  const Objective fn = [&](const Eigen::VectorXd& v, Eigen::VectorXd* grad) {
    const ParameterSet cur = decode(mini, v);
    if (grad == nullptr) return pairwise_neglog(mini, cur, mdata);
    Eigen::VectorXd gc;
    const double f = pairwise_neglog(mini, cur, mdata, &gc);
    *grad = chain_rule_gradient(mini, cur, gc);
    return f;
  };
  MinimizeOptions opts;
  opts.max_iterations = 60;
  opts.gradient_tolerance = 1e-3;
  const MinimizeResult res = minimize(fn, encode(mini, mp), opts);
  const ParameterSet refined = decode(mini, res.x);
  *thresholds = refined.thresholds[0];
  *beta = refined.coefficients[0];
}

// Latent-scale residuals used for the correlation start: standardized
// residuals for Gaussian responses, conditional means of a truncated
// standard normal for ordinal ones.
Eigen::VectorXd latent_residuals(const ModelSpec& spec, const Dataset& data,
                                 const ParameterSet& params, Eigen::Index j) {
  const Eigen::Index n = data.n();
  Eigen::VectorXd out = Eigen::VectorXd::Constant(n, kNaN);
  const bool gaussian = spec.responses[j].kind == ResponseKind::kGaussian;
  const Eigen::VectorXd eta =
      data.x.cols() > 0
          ? Eigen::VectorXd(data.x * params.coefficients[j])
          : Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!data.observed(i, j)) continue;
    if (gaussian) {
      out[i] =
          (data.y(i, j) - params.intercepts[j] - eta[i]) / params.sigmas[j];
    } else {
      const auto code = static_cast<Eigen::Index>(data.y(i, j));
      const auto& th = params.thresholds[j];
      const double upper = (code <= th.size()) ? th[code - 1] - eta[i] : kInf;
      const double lower = (code > 1) ? th[code - 2] - eta[i] : -kInf;
      const double mass = std::max(
          std_normal_cdf(upper) - std_normal_cdf(lower), kProbFloor);
      // E[eps | lower < eps <= upper] for a standard normal.
      out[i] = (std_normal_pdf(lower) - std_normal_pdf(upper)) / mass;
    }
  }
  return out;
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  Eigen::Index m = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) continue;
    ++m;
    sa += a[i];
    sb += b[i];
    saa += a[i] * a[i];
    sbb += b[i] * b[i];
    sab += a[i] * b[i];
  }
  if (m < 2) return 0.0;
  const double n = static_cast<double>(m);
  const double cov = sab - sa * sb / n;
  const double va = saa - sa * sa / n;
  const double vb = sbb - sb * sb / n;
  if (!(va > 0.0) || !(vb > 0.0)) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace

ParameterSet initial_values(const ModelSpec& spec, const Dataset& data,
                            std::uint64_t seed) {
  const ParameterLayout layout = make_layout(spec);
  const Eigen::Index q = layout.q;
  ParameterSet init;
  init.thresholds.resize(q);
  init.coefficients.resize(q);
  init.intercepts.assign(q, kNaN);
  init.sigmas.assign(q, kNaN);
  init.correlation = Eigen::MatrixXd::Identity(q, q);
  for (Eigen::Index j = 0; j < q; ++j) {
    init.coefficients[j].setZero(layout.p);
    if (spec.responses[j].kind == ResponseKind::kGaussian) {
      gaussian_start(data, j, &init.intercepts[j], &init.coefficients[j],
                     &init.sigmas[j]);
    } else {
      ordinal_start(spec, data, j, &init.thresholds[j],
                    &init.coefficients[j]);
    }
  }
  std::vector<Eigen::VectorXd> resid(q);
  for (Eigen::Index j = 0; j < q; ++j) {
    resid[j] = latent_residuals(spec, data, init, j);
  }
  for (Eigen::Index k = 0; k < q; ++k) {
    for (Eigen::Index l = k + 1; l < q; ++l) {
      const double rho = std::clamp(pearson(resid[k], resid[l]), -0.95, 0.95);
      init.correlation(k, l) = rho;
      init.correlation(l, k) = rho;
    }
  }

  // Any non-finite start (degenerate data) falls back to a neutral point
  // with a seeded jitter so repeated fits stay reproducible.
  bool bad = false;
  for (Eigen::Index j = 0; j < q && !bad; ++j) {
    if (!init.coefficients[j].allFinite()) bad = true;
    if (spec.responses[j].kind == ResponseKind::kGaussian) {
      if (!std::isfinite(init.intercepts[j]) ||
          !std::isfinite(init.sigmas[j]) || init.sigmas[j] <= 0.0) {
        bad = true;
      }
    } else if (!init.thresholds[j].allFinite()) {
      bad = true;
    }
  }
  if (bad) {
    Xoshiro256pp rng(seed);
    for (Eigen::Index j = 0; j < q; ++j) {
      init.coefficients[j].setZero(layout.p);
      for (Eigen::Index m = 0; m < layout.p; ++m) {
        init.coefficients[j][m] = 0.01 * rng.normal();
      }
      if (spec.responses[j].kind == ResponseKind::kGaussian) {
        init.intercepts[j] = 0.01 * rng.normal();
        init.sigmas[j] = 1.0;
      } else {
        const Eigen::Index k = spec.responses[j].n_categories - 1;
        init.thresholds[j].resize(k);
        for (Eigen::Index s = 0; s < k; ++s) {
          init.thresholds[j][s] =
              (k == 1) ? 0.0 : -1.0 + 2.0 * static_cast<double>(s) /
                                          static_cast<double>(k - 1);
        }
      }
    }
    init.correlation = Eigen::MatrixXd::Identity(q, q);
  }
  return init;
}

Eigen::MatrixXd godambe_vcov(const ModelSpec& spec, const ParameterSet& params,
                             const Dataset& data, int threads,
                             Eigen::MatrixXd* hessian_out,
                             Eigen::MatrixXd* variability_out) {
  const ParameterLayout layout = make_layout(spec);
  const Eigen::Index d = layout.total;
  EvalOptions eopts;
  eopts.threads = threads;

  const Eigen::MatrixXd scores = per_unit_scores(spec, params, data, eopts);
  const Eigen::MatrixXd variability = scores.transpose() * scores;

  const Eigen::VectorXd flat = flatten(spec, params);
  Eigen::MatrixXd hessian(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double h = 1e-5 * (1.0 + std::fabs(flat[j]));
    // Keep the perturbed point inside the parameter space: stay clear of
    // neighbouring thresholds, zero sigmas and the correlation boundary.
    if (j >= layout.corr_offset) {
      h = std::min(h, 0.49 * (1.0 - std::fabs(flat[j])));
    } else if (j >= layout.sigma_offset) {
      h = std::min(h, 0.49 * flat[j]);
    } else {
      for (Eigen::Index r = 0; r < layout.q; ++r) {
        const auto& b = layout.blocks[r];
        const Eigen::Index s = j - b.offset;
        if (s < 0 || s >= b.n_thresh) continue;
        if (s > 0) h = std::min(h, 0.49 * (flat[j] - flat[j - 1]));
        if (s + 1 < b.n_thresh) h = std::min(h, 0.49 * (flat[j + 1] - flat[j]));
      }
    }
    if (!(h > 0.0)) {
      throw std::runtime_error(
          "sandwich: estimate sits on the parameter boundary; the bread "
          "matrix cannot be differenced");
    }
    Eigen::VectorXd plus = flat, minus = flat;
    plus[j] += h;
    minus[j] -= h;
    Eigen::VectorXd g_plus, g_minus;
    pairwise_neglog(spec, unflatten(spec, plus), data, &g_plus, eopts);
    pairwise_neglog(spec, unflatten(spec, minus), data, &g_minus, eopts);
    hessian.col(j) = (g_plus - g_minus) / (2.0 * h);
  }
  hessian = 0.5 * (hessian + hessian.transpose()).eval();

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
  const double rcond = ldlt.rcond();
  if (ldlt.info() != Eigen::Success || !(rcond > 1e-14)) {
    throw std::runtime_error(
        "sandwich: bread matrix is numerically singular (reciprocal "
        "condition number " +
        std::to_string(rcond) + ")");
  }
  const Eigen::MatrixXd hinv_j = ldlt.solve(variability);
  Eigen::MatrixXd vcov = ldlt.solve(hinv_j.transpose()).transpose();
  vcov = 0.5 * (vcov + vcov.transpose()).eval();
  if (hessian_out != nullptr) *hessian_out = hessian;
  if (variability_out != nullptr) *variability_out = variability;
  return vcov;
}

std::pair<double, double> information_criteria(
    double log_pl, const Eigen::MatrixXd& hessian,
    const Eigen::MatrixXd& variability, Eigen::Index n_units) {
  if (hessian.rows() != hessian.cols() ||
      variability.rows() != variability.cols() ||
      hessian.rows() != variability.rows()) {
    throw std::invalid_argument("information criteria: matrix shapes disagree");
  }
  if (n_units < 1) {
    throw std::invalid_argument("information criteria: need at least one unit");
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14)) {
    throw std::runtime_error(
        "information criteria: sensitivity matrix is numerically singular");
  }
  const double dim = ldlt.solve(variability).trace();
  const double claic = -2.0 * log_pl + 2.0 * dim;
  const double clbic =
      -2.0 * log_pl + std::log(static_cast<double>(n_units)) * dim;
  return {claic, clbic};
}

std::vector<WaldRow> wald_table(const FitResult& fit) {
  const std::vector<std::string> names = parameter_names(fit.spec);
  const Eigen::Index d = fit.estimates.size();
  std::vector<WaldRow> rows(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    rows[j].label = names[j];
    rows[j].estimate = fit.estimates[j];
    const double se = (fit.se.size() == d) ? fit.se[j] : kNaN;
    rows[j].se = se;
    if (std::isfinite(se) && se > 0.0) {
      rows[j].z = fit.estimates[j] / se;
      rows[j].p = std::erfc(std::fabs(rows[j].z) * 0.70710678118654752440);
    } else {
      rows[j].z = kNaN;
      rows[j].p = kNaN;
    }
  }
  return rows;
}

FitResult fit(const ModelSpec& spec, const Dataset& data,
              const FitConfig& config) {
  const ParameterLayout layout = make_layout(spec);
  FitResult out;
  out.spec = spec;
  out.solver = config.solver;
  out.n_units = data.n();
  out.x_mean = data.x_mean;
  out.x_sd = data.x_sd;

  EvalOptions eopts;
  eopts.threads = config.threads;
  const ParameterSet init = initial_values(spec, data, config.seed);
  Eigen::Index all_missing = 0;
  const Objective fn = [&](const Eigen::VectorXd& v, Eigen::VectorXd* grad) {
    const ParameterSet cur = decode(spec, v);
    if (grad == nullptr) {
      return pairwise_neglog(spec, cur, data, nullptr, eopts, &all_missing);
    }
    Eigen::VectorXd gc;
    const double f = pairwise_neglog(spec, cur, data, &gc, eopts, &all_missing);
    *grad = chain_rule_gradient(spec, cur, gc);
    return f;
  };
  MinimizeOptions mopts;
  mopts.solver = config.solver;
  mopts.max_iterations = config.max_iterations;
  mopts.gradient_tolerance = config.gradient_tolerance;
  const MinimizeResult res = minimize(fn, encode(spec, init), mopts);

  out.params = decode(spec, res.x);
  out.estimates = flatten(spec, out.params);
  out.log_pl = -res.f;
  out.converged = res.converged;
  out.iterations = res.iterations;
  out.gradient_norm = res.grad.lpNorm<Eigen::Infinity>();
  out.n_all_missing_units = all_missing;
  out.min_eigen_correlation =
      min_correlation_eigenvalue(out.params.correlation);
  if (!res.converged) {
    out.warnings.push_back("optimizer did not converge: " + res.message);
  }
  if (out.min_eigen_correlation < 1e-8) {
    out.warnings.push_back(
        "estimated latent correlation matrix is nearly singular");
  }

  out.se = Eigen::VectorXd::Constant(layout.total, kNaN);
  out.claic = kNaN;
  out.clbic = kNaN;
  if (config.compute_se && data.n() >= 2) {
    try {
      Eigen::MatrixXd hessian, variability;
      out.vcov = godambe_vcov(spec, out.params, data, config.threads,
                              &hessian, &variability);
      bool diag_ok = true;
      for (Eigen::Index j = 0; j < layout.total; ++j) {
        const double v = out.vcov(j, j);
        out.se[j] = v > 0.0 ? std::sqrt(v) : kNaN;
        if (!(v > 0.0)) diag_ok = false;
      }
      if (!diag_ok) {
        out.warnings.push_back(
            "sandwich covariance has non-positive diagonal entries");
      }
      const auto ic = information_criteria(out.log_pl, hessian, variability,
                                           data.n());
      out.claic = ic.first;
      out.clbic = ic.second;
      out.se_ok = true;
    } catch (const std::exception& e) {
      out.warnings.push_back(std::string("standard errors unavailable: ") +
                             e.what());
    }
  } else if (config.compute_se) {
    out.warnings.push_back(
        "standard errors need at least two units; skipped");
  }
  return out;
}

}  // namespace pairmix
