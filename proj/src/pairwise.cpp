#include "pairmix/pairwise.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "pairmix/gauss.hpp"

namespace pairmix {

namespace {

constexpr Eigen::Index kChunk = 256;

// dvalue/dU and dvalue/dL scattered to the ordinal block: U = theta_u - b'x
// gives a unit selector on the threshold and -x on the coefficients.  An
// infinite bound has no parameter dependence, so its weight is dropped.
void push_ordinal(PairTerm* t, const OrdinalObs& o, double g_upper,
                  double g_lower) {
  double coef_weight = 0.0;
  if (o.design.upper_threshold >= 0) {
    t->grad.emplace_back(o.ref.psi_offset + o.design.upper_threshold, g_upper);
    coef_weight += g_upper;
  }
  if (o.design.lower_threshold >= 0) {
    t->grad.emplace_back(o.ref.psi_offset + o.design.lower_threshold, g_lower);
    coef_weight += g_lower;
  }
  if (o.design.x != nullptr && coef_weight != 0.0) {
    const auto& x = *o.design.x;
    for (Eigen::Index m = 0; m < x.size(); ++m) {
      t->grad.emplace_back(o.ref.psi_offset + o.ref.n_thresh + m,
                           -coef_weight * x[m]);
    }
  }
}

// dvalue/de (residual e = y - beta0 - b'x) and dvalue/dsigma scattered to
// the Gaussian block: de/dbeta0 = -1, de/dbeta_m = -x_m.
void push_gauss(PairTerm* t, const GaussObs& o, double g_resid,
                double g_sigma) {
  t->grad.emplace_back(o.ref.psi_offset, -g_resid);
  if (o.x != nullptr) {
    const auto& x = *o.x;
    for (Eigen::Index m = 0; m < x.size(); ++m) {
      t->grad.emplace_back(o.ref.psi_offset + 1 + m, -g_resid * x[m]);
    }
  }
  t->grad.emplace_back(o.ref.sigma_index, g_sigma);
}

}  // namespace

ConditionalMoments conditional_moments(double rho, double z_other) {
  return {rho * z_other, std::sqrt((1.0 - rho) * (1.0 + rho))};
}

PairTerm case1_ord_ord(const OrdinalObs& k, const OrdinalObs& l, double rho,
                       Eigen::Index rho_index) {
  const double uk = k.bounds.upper, lk = k.bounds.lower;
  const double ul = l.bounds.upper, ll = l.bounds.lower;
  const double p = bvn_cdf({uk, ul, rho}) - bvn_cdf({lk, ul, rho}) -
                   bvn_cdf({uk, ll, rho}) + bvn_cdf({lk, ll, rho});
  const double pf = std::max(p, kProbFloor);

  PairTerm t;
  t.value = -std::log(pf);
  const double inv = -1.0 / pf;
  double g_uk = 0.0, g_lk = 0.0, g_ul = 0.0, g_ll = 0.0;
  if (std::isfinite(uk)) {
    g_uk = inv * (bvn_cdf_dx({uk, ul, rho}) - bvn_cdf_dx({uk, ll, rho}));
  }
  if (std::isfinite(lk)) {
    g_lk = inv * (bvn_cdf_dx({lk, ll, rho}) - bvn_cdf_dx({lk, ul, rho}));
  }
  if (std::isfinite(ul)) {
    g_ul = inv * (bvn_cdf_dx({ul, uk, rho}) - bvn_cdf_dx({ul, lk, rho}));
  }
  if (std::isfinite(ll)) {
    g_ll = inv * (bvn_cdf_dx({ll, lk, rho}) - bvn_cdf_dx({ll, uk, rho}));
  }
  push_ordinal(&t, k, g_uk, g_lk);
  push_ordinal(&t, l, g_ul, g_ll);
  const double dp_drho =
      bvn_cdf_drho({uk, ul, rho}) - bvn_cdf_drho({lk, ul, rho}) -
      bvn_cdf_drho({uk, ll, rho}) + bvn_cdf_drho({lk, ll, rho});
  t.grad.emplace_back(rho_index, inv * dp_drho);
  return t;
}

PairTerm case2_gauss_gauss(const GaussObs& k, const GaussObs& l, double rho,
                           Eigen::Index rho_index) {
  const double zk = k.residual / k.sigma;
  const double zl = l.residual / l.sigma;
  const double omr2 = (1.0 - rho) * (1.0 + rho);
  const double quad = zk * zk - 2.0 * rho * zk * zl + zl * zl;

  PairTerm t;
  t.value = kLogTwoPi + std::log(k.sigma) + std::log(l.sigma) +
            0.5 * std::log(omr2) + 0.5 * quad / omr2;
  const double g_zk = (zk - rho * zl) / omr2;
  const double g_zl = (zl - rho * zk) / omr2;
  push_gauss(&t, k, g_zk / k.sigma, (1.0 - zk * g_zk) / k.sigma);
  push_gauss(&t, l, g_zl / l.sigma, (1.0 - zl * g_zl) / l.sigma);
  const double g_rho = -rho / omr2 + rho * quad / (omr2 * omr2) -
                       zk * zl / omr2;
  t.grad.emplace_back(rho_index, g_rho);
  return t;
}

PairTerm case3_ord_gauss(const OrdinalObs& k, const GaussObs& l, double rho,
                         Eigen::Index rho_index) {
  const double zl = l.residual / l.sigma;
  const ConditionalMoments cm = conditional_moments(rho, zl);
  const double s = cm.sd;
  const double eta_u = (k.bounds.upper - cm.mean) / s;  // +-inf pass through
  const double eta_l = (k.bounds.lower - cm.mean) / s;
  const double p = std_normal_cdf(eta_u) - std_normal_cdf(eta_l);
  const double pf = std::max(p, kProbFloor);
  const double phi_u = std_normal_pdf(eta_u);
  const double phi_l = std_normal_pdf(eta_l);

  PairTerm t;
  t.value = -std::log(pf) + 0.5 * kLogTwoPi + std::log(l.sigma) +
            0.5 * zl * zl;
  push_ordinal(&t, k, -phi_u / (pf * s), phi_l / (pf * s));
  // Full derivative w.r.t. the standardized residual (bounds move through
  // the conditional mean, plus the marginal density term).
  const double g_z = (rho / s) * (phi_u - phi_l) / pf + zl;
  push_gauss(&t, l, g_z / l.sigma, (1.0 - zl * g_z) / l.sigma);
  // d eta/d rho = -z/s + rho*eta/s^2; an infinite bound contributes nothing
  // (its density weight is exactly zero, but eta itself is infinite).
  double g_rho = 0.0;
  if (std::isfinite(eta_u)) {
    g_rho -= phi_u * (-zl / s + rho * eta_u / (s * s));
  }
  if (std::isfinite(eta_l)) {
    g_rho += phi_l * (-zl / s + rho * eta_l / (s * s));
  }
  t.grad.emplace_back(rho_index, g_rho / pf);
  return t;
}

PairTerm uni_ordinal(const OrdinalObs& k) {
  const double p =
      std_normal_cdf(k.bounds.upper) - std_normal_cdf(k.bounds.lower);
  const double pf = std::max(p, kProbFloor);
  PairTerm t;
  t.value = -std::log(pf);
  push_ordinal(&t, k, -std_normal_pdf(k.bounds.upper) / pf,
               std_normal_pdf(k.bounds.lower) / pf);
  return t;
}

PairTerm uni_gaussian(const GaussObs& k) {
  const double z = k.residual / k.sigma;
  PairTerm t;
  t.value = 0.5 * kLogTwoPi + std::log(k.sigma) + 0.5 * z * z;
  push_gauss(&t, k, z / k.sigma, (1.0 - z * z) / k.sigma);
  return t;
}

namespace {

struct Slot {
  Eigen::Index j = 0;
  bool gaussian = false;
  OrdinalObs ord;
  GaussObs gau;
};

struct ChunkResult {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::Index all_missing = 0;
};

// Shared driver for the objective and the per-unit scores.  Work is split
// into fixed chunks of units; chunk results are reduced in chunk order, so
// the floating-point result is identical for every thread count.
double eval_units(const ModelSpec& spec, const ParameterSet& params,
                  const Dataset& data, Eigen::VectorXd* grad,
                  Eigen::MatrixXd* scores, const EvalOptions& options,
                  Eigen::Index* n_all_missing) {
  validate(spec, params);
  const ParameterLayout layout = make_layout(spec);
  const Eigen::Index n = data.n();
  const Eigen::Index q = layout.q;
  const Eigen::Index p = layout.p;
  if (data.y.cols() != q || data.observed.rows() != n ||
      data.observed.cols() != q || data.x.cols() != p ||
      data.x.rows() != n) {
    throw std::invalid_argument("likelihood: dataset shape does not match the model");
  }
  if (n < 1) {
    throw std::invalid_argument("likelihood: dataset has no rows");
  }

  std::vector<BlockRef> refs(q);
  for (Eigen::Index j = 0; j < q; ++j) {
    refs[j] = {layout.blocks[j].offset, layout.blocks[j].n_thresh,
               layout.blocks[j].gaussian, layout.sigma_slot[j]};
  }
  // Check category codes up front so the chunk workers below cannot throw.
  for (Eigen::Index j = 0; j < q; ++j) {
    if (refs[j].gaussian) continue;
    const auto n_cat = static_cast<double>(params.thresholds[j].size() + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!data.observed(i, j)) continue;
      const double code = data.y(i, j);
      if (!(code >= 1.0 && code <= n_cat && code == std::floor(code))) {
        throw std::invalid_argument(
            "likelihood: row " + std::to_string(i + 1) +
            " has an invalid category code for response '" +
            spec.responses[j].name + "'");
      }
    }
  }
  // Linear predictors X * beta_j for all responses at once.
  Eigen::MatrixXd coef(p, q);
  for (Eigen::Index j = 0; j < q; ++j) coef.col(j) = params.coefficients[j];
  const Eigen::MatrixXd linpred = data.x * coef;

  const bool want_grad = grad != nullptr;
  if (want_grad) grad->setZero(layout.total);
  if (scores != nullptr) scores->setZero(n, layout.total);

  const Eigen::Index n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<ChunkResult> results(n_chunks);

  auto run_chunk = [&](Eigen::Index c) {
    ChunkResult& res = results[c];
    if (want_grad) res.grad.setZero(layout.total);
    Eigen::VectorXd xrow(p);
    std::vector<Slot> slots;
    slots.reserve(q);
    const Eigen::Index lo = c * kChunk;
    const Eigen::Index hi = std::min(n, lo + kChunk);
    for (Eigen::Index i = lo; i < hi; ++i) {
      xrow = data.x.row(i);
      slots.clear();
      for (Eigen::Index j = 0; j < q; ++j) {
        if (!data.observed(i, j)) continue;
        Slot slot;
        slot.j = j;
        slot.gaussian = refs[j].gaussian;
        if (slot.gaussian) {
          slot.gau.residual =
              data.y(i, j) - params.intercepts[j] - linpred(i, j);
          slot.gau.sigma = params.sigmas[j];
          slot.gau.x = p > 0 ? &xrow : nullptr;
          slot.gau.ref = refs[j];
        } else {
          const auto code = static_cast<Eigen::Index>(data.y(i, j));
          const auto& th = params.thresholds[j];
          const Eigen::Index n_cat = th.size() + 1;
          const double eta = linpred(i, j);
          slot.ord.bounds.upper = (code < n_cat) ? th[code - 1] - eta : kInf;
          slot.ord.bounds.lower = (code > 1) ? th[code - 2] - eta : -kInf;
          slot.ord.design.upper_threshold =
              (code < n_cat) ? static_cast<int>(code - 1) : -1;
          slot.ord.design.lower_threshold =
              (code > 1) ? static_cast<int>(code - 2) : -1;
          slot.ord.design.x = p > 0 ? &xrow : nullptr;
          slot.ord.ref = refs[j];
        }
        slots.push_back(slot);
      }
      if (slots.empty()) {
        ++res.all_missing;
        continue;
      }
      auto absorb = [&](const PairTerm& term) {
        res.value += term.value;
        if (want_grad) {
          for (const auto& [idx, val] : term.grad) res.grad[idx] += val;
        }
        if (scores != nullptr) {
          for (const auto& [idx, val] : term.grad) (*scores)(i, idx) += val;
        }
      };
      if (slots.size() == 1) {
        const Slot& a = slots[0];
        absorb(a.gaussian ? uni_gaussian(a.gau) : uni_ordinal(a.ord));
        continue;
      }
      for (std::size_t ai = 0; ai + 1 < slots.size(); ++ai) {
        for (std::size_t bi = ai + 1; bi < slots.size(); ++bi) {
          const Slot& a = slots[ai];
          const Slot& b = slots[bi];
          const double rho = params.correlation(a.j, b.j);
          const Eigen::Index ridx = layout.corr_index(a.j, b.j);
          if (!a.gaussian && !b.gaussian) {
            absorb(case1_ord_ord(a.ord, b.ord, rho, ridx));
          } else if (a.gaussian && b.gaussian) {
            absorb(case2_gauss_gauss(a.gau, b.gau, rho, ridx));
          } else if (a.gaussian) {
            absorb(case3_ord_gauss(b.ord, a.gau, rho, ridx));
          } else {
            absorb(case3_ord_gauss(a.ord, b.gau, rho, ridx));
          }
        }
      }
    }
  };

  int n_threads = std::max(1, options.threads);
  n_threads = static_cast<int>(
      std::min<Eigen::Index>(n_threads, n_chunks));
  if (n_threads <= 1) {
    for (Eigen::Index c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<Eigen::Index> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&]() {
        for (Eigen::Index c = next.fetch_add(1); c < n_chunks;
             c = next.fetch_add(1)) {
          run_chunk(c);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  double value = 0.0;
  Eigen::Index all_missing = 0;
  for (Eigen::Index c = 0; c < n_chunks; ++c) {
    value += results[c].value;
    all_missing += results[c].all_missing;
    if (want_grad) *grad += results[c].grad;
  }
  if (n_all_missing != nullptr) *n_all_missing = all_missing;
  return value;
}

}  // namespace

double pairwise_neglog(const ModelSpec& spec, const ParameterSet& params,
                       const Dataset& data, Eigen::VectorXd* grad,
                       const EvalOptions& options,
                       Eigen::Index* n_all_missing) {
  return eval_units(spec, params, data, grad, nullptr, options, n_all_missing);
}

Eigen::MatrixXd per_unit_scores(const ModelSpec& spec,
                                const ParameterSet& params,
                                const Dataset& data,
                                const EvalOptions& options) {
  Eigen::MatrixXd scores;
  eval_units(spec, params, data, nullptr, &scores, options, nullptr);
  return scores;
}

}  // namespace pairmix
