#include "pairmix/pairwise.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "pairmix/gauss.hpp"
#include "pairmix/rng.hpp"
#include "pairmix/simulate.hpp"

using namespace pairmix;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ModelSpec make_spec(const std::vector<ResponseKind>& kinds, Eigen::Index p,
                    Eigen::Index n_categories = 3) {
  ModelSpec spec;
  for (std::size_t j = 0; j < kinds.size(); ++j) {
    ResponseSpec r;
    r.kind = kinds[j];
    r.name = (kinds[j] == ResponseKind::kOrdinal ? "y" : "z") + std::to_string(j + 1);
    if (r.kind == ResponseKind::kOrdinal) {
      r.n_categories = n_categories;
      for (Eigen::Index c = 1; c <= n_categories; ++c) {
        r.category_labels.push_back(std::to_string(c));
      }
    }
    spec.responses.push_back(r);
  }
  for (Eigen::Index m = 0; m < p; ++m) {
    spec.covariates.push_back("X" + std::to_string(m + 1));
  }
  return spec;
}

// Interior parameter values with comfortable margins, so finite-difference
// steps never leave the parameter space.
ParameterSet random_params(const ModelSpec& spec, Xoshiro256pp& rng) {
  const Eigen::Index q = spec.q();
  const Eigen::Index p = spec.p();
  ParameterSet ps;
  ps.thresholds.resize(q);
  ps.intercepts.assign(q, 0.0);
  ps.coefficients.resize(q);
  ps.sigmas.assign(q, 1.0);
  for (Eigen::Index j = 0; j < q; ++j) {
    const ResponseSpec& r = spec.responses[j];
    if (r.kind == ResponseKind::kOrdinal) {
      Eigen::VectorXd th(r.n_categories - 1);
      double level = -1.4 + 0.6 * rng.uniform();
      for (Eigen::Index s = 0; s < th.size(); ++s) {
        th[s] = level;
        level += 0.7 + 0.8 * rng.uniform();
      }
      ps.thresholds[j] = th;
    } else {
      ps.thresholds[j] = Eigen::VectorXd();
      ps.intercepts[j] = 1.2 * rng.uniform() - 0.6;
      ps.sigmas[j] = 0.6 + 1.4 * rng.uniform();
    }
    Eigen::VectorXd beta(p);
    for (Eigen::Index m = 0; m < p; ++m) beta[m] = 1.2 * rng.uniform() - 0.6;
    ps.coefficients[j] = beta;
  }
  // Random correlation matrix from a normalized Wishart-style product.
  Eigen::MatrixXd b(q, q + 3);
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) b(i, j) = rng.normal();
  }
  Eigen::MatrixXd s = b * b.transpose();
  Eigen::VectorXd d = s.diagonal().cwiseSqrt().cwiseInverse();
  ps.correlation = d.asDiagonal() * s * d.asDiagonal();
  ps.correlation = 0.5 * (ps.correlation + ps.correlation.transpose()).eval();
  ps.correlation.diagonal().setOnes();
  validate(spec, ps);
  return ps;
}

Dataset random_dataset(const ModelSpec& spec, Eigen::Index n, Xoshiro256pp& rng,
                       double missing_prob = 0.0) {
  Dataset data;
  data.y.resize(n, spec.q());
  data.x.resize(n, spec.p());
  data.observed.resize(n, spec.q());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index m = 0; m < spec.p(); ++m) data.x(i, m) = rng.normal();
    for (Eigen::Index j = 0; j < spec.q(); ++j) {
      if (missing_prob > 0.0 && rng.uniform() < missing_prob) {
        data.y(i, j) = kNaN;
        data.observed(i, j) = false;
        continue;
      }
      data.observed(i, j) = true;
      if (spec.responses[j].kind == ResponseKind::kOrdinal) {
        const auto k = spec.responses[j].n_categories;
        data.y(i, j) = 1.0 + static_cast<double>(rng.next() % static_cast<std::uint64_t>(k));
      } else {
        data.y(i, j) = 2.0 * rng.normal();
      }
    }
  }
  return data;
}

double rect_prob(double lk, double uk, double ll, double ul, double rho) {
  return oracle::bvn_cdf_cond(uk, ul, rho) - oracle::bvn_cdf_cond(lk, ul, rho) -
         oracle::bvn_cdf_cond(uk, ll, rho) + oracle::bvn_cdf_cond(lk, ll, rho);
}

// Latent interval of an ordinal cell after shifting by the linear predictor.
std::pair<double, double> latent_interval(const Eigen::VectorXd& thresholds,
                                          Eigen::Index category1, double linpred) {
  const double lower = category1 == 1 ? -std::numeric_limits<double>::infinity()
                                      : thresholds[category1 - 2] - linpred;
  const double upper = category1 == thresholds.size() + 1
                           ? std::numeric_limits<double>::infinity()
                           : thresholds[category1 - 1] - linpred;
  return {lower, upper};
}

}  // namespace

TEST_CASE("analytic gradients match finite differences for every pair case") {
  Xoshiro256pp rng(123);
  const std::vector<std::vector<ResponseKind>> compositions = {
      {ResponseKind::kOrdinal, ResponseKind::kOrdinal},
      {ResponseKind::kGaussian, ResponseKind::kGaussian},
      {ResponseKind::kOrdinal, ResponseKind::kGaussian},
      {ResponseKind::kGaussian, ResponseKind::kOrdinal},
      {ResponseKind::kOrdinal},
      {ResponseKind::kGaussian},
      {ResponseKind::kOrdinal, ResponseKind::kGaussian, ResponseKind::kOrdinal}};

  for (const auto& kinds : compositions) {
    const ModelSpec spec = make_spec(kinds, 2);
    for (int trial = 0; trial < 5; ++trial) {
      const ParameterSet params = random_params(spec, rng);
      const Dataset data = random_dataset(spec, 4, rng, trial >= 3 ? 0.35 : 0.0);

      const auto f = [&](const Eigen::VectorXd& flat) {
        return pairwise_neglog(spec, unflatten(spec, flat), data);
      };
      const Eigen::VectorXd flat = flatten(spec, params);
      Eigen::VectorXd grad(flat.size());
      pairwise_neglog(spec, params, data, &grad);
      const Eigen::VectorXd fd = oracle::fd_gradient(f, flat, 1e-6);
      for (Eigen::Index i = 0; i < flat.size(); ++i) {
        CAPTURE(i);
        CHECK(oracle::rel_err(grad[i], fd[i]) < 1e-6);
      }
    }
  }
}

TEST_CASE("ordinal-ordinal value equals the rectangle probability") {
  Xoshiro256pp rng(7);
  const ModelSpec spec = make_spec({ResponseKind::kOrdinal, ResponseKind::kOrdinal}, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const ParameterSet params = random_params(spec, rng);
    Dataset data = random_dataset(spec, 1, rng);

    const double value = pairwise_neglog(spec, params, data);
    const double lp0 = params.coefficients[0].dot(data.x.row(0));
    const double lp1 = params.coefficients[1].dot(data.x.row(0));
    const auto [l0, u0] = latent_interval(params.thresholds[0],
                                          static_cast<Eigen::Index>(data.y(0, 0)), lp0);
    const auto [l1, u1] = latent_interval(params.thresholds[1],
                                          static_cast<Eigen::Index>(data.y(0, 1)), lp1);
    const double expected = rect_prob(l0, u0, l1, u1, params.correlation(0, 1));
    CHECK(std::exp(-value) == doctest::Approx(expected).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("gaussian-gaussian value equals the bivariate density") {
  Xoshiro256pp rng(8);
  const ModelSpec spec = make_spec({ResponseKind::kGaussian, ResponseKind::kGaussian}, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const ParameterSet params = random_params(spec, rng);
    Dataset data = random_dataset(spec, 1, rng);

    const double value = pairwise_neglog(spec, params, data);
    const double z0 = (data.y(0, 0) - params.intercepts[0] -
                       params.coefficients[0].dot(data.x.row(0))) /
                      params.sigmas[0];
    const double z1 = (data.y(0, 1) - params.intercepts[1] -
                       params.coefficients[1].dot(data.x.row(0))) /
                      params.sigmas[1];
    const double expected = oracle::phi2(z0, z1, params.correlation(0, 1)) /
                            (params.sigmas[0] * params.sigmas[1]);
    CHECK(std::exp(-value) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("ordinal-gaussian value equals interval probability times density") {
  Xoshiro256pp rng(9);
  const ModelSpec spec = make_spec({ResponseKind::kOrdinal, ResponseKind::kGaussian}, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const ParameterSet params = random_params(spec, rng);
    Dataset data = random_dataset(spec, 1, rng);

    const double value = pairwise_neglog(spec, params, data);
    const double lp0 = params.coefficients[0].dot(data.x.row(0));
    const auto [l0, u0] = latent_interval(params.thresholds[0],
                                          static_cast<Eigen::Index>(data.y(0, 0)), lp0);
    const double z1 = (data.y(0, 1) - params.intercepts[1] -
                       params.coefficients[1].dot(data.x.row(0))) /
                      params.sigmas[1];
    const double expected =
        oracle::interval_times_density(l0, u0, z1, params.correlation(0, 1)) /
        params.sigmas[1];
    CHECK(std::exp(-value) == doctest::Approx(expected).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("single observed response falls back to the marginal") {
  Xoshiro256pp rng(10);
  const ModelSpec spec = make_spec({ResponseKind::kOrdinal, ResponseKind::kGaussian}, 1);
  const ParameterSet params = random_params(spec, rng);

  Dataset data = random_dataset(spec, 1, rng);
  data.y(0, 1) = kNaN;
  data.observed(0, 1) = false;
  const double v_ord = pairwise_neglog(spec, params, data);
  const double lp0 = params.coefficients[0].dot(data.x.row(0));
  const auto [l0, u0] = latent_interval(params.thresholds[0],
                                        static_cast<Eigen::Index>(data.y(0, 0)), lp0);
  CHECK(std::exp(-v_ord) ==
        doctest::Approx(oracle::Phi(u0) - oracle::Phi(l0)).epsilon(1e-12));

  Dataset data2 = random_dataset(spec, 1, rng);
  data2.y(0, 0) = kNaN;
  data2.observed(0, 0) = false;
  const double v_gauss = pairwise_neglog(spec, params, data2);
  const double z1 = (data2.y(0, 1) - params.intercepts[1] -
                     params.coefficients[1].dot(data2.x.row(0))) /
                    params.sigmas[1];
  CHECK(std::exp(-v_gauss) ==
        doctest::Approx(oracle::phi(z1) / params.sigmas[1]).epsilon(1e-12));
}

TEST_CASE("category probabilities normalize") {
  Xoshiro256pp rng(11);

  // Both ordinal: the K x K cell probabilities sum to one.
  {
    const ModelSpec spec =
        make_spec({ResponseKind::kOrdinal, ResponseKind::kOrdinal}, 1, 4);
    const ParameterSet params = random_params(spec, rng);
    Dataset data = random_dataset(spec, 1, rng);
    double total = 0.0;
    for (Eigen::Index a = 1; a <= 4; ++a) {
      for (Eigen::Index b = 1; b <= 4; ++b) {
        data.y(0, 0) = static_cast<double>(a);
        data.y(0, 1) = static_cast<double>(b);
        total += std::exp(-pairwise_neglog(spec, params, data));
      }
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }

  // Ordinal next to Gaussian: summing out the categories leaves the
  // Gaussian marginal density.
  {
    const ModelSpec spec =
        make_spec({ResponseKind::kOrdinal, ResponseKind::kGaussian}, 1, 5);
    const ParameterSet params = random_params(spec, rng);
    Dataset data = random_dataset(spec, 1, rng);
    double total = 0.0;
    for (Eigen::Index a = 1; a <= 5; ++a) {
      data.y(0, 0) = static_cast<double>(a);
      total += std::exp(-pairwise_neglog(spec, params, data));
    }
    const double z1 = (data.y(0, 1) - params.intercepts[1] -
                       params.coefficients[1].dot(data.x.row(0))) /
                      params.sigmas[1];
    const double marginal = oracle::phi(z1) / params.sigmas[1];
    CHECK(total == doctest::Approx(marginal).epsilon(1e-12));
  }
}

TEST_CASE("units with no observed response contribute nothing") {
  const SimConfig config = toy_config(150, 3);
  const SimOutput sim = simulate(config);

  Eigen::VectorXd grad1(count_parameters(config.spec));
  Eigen::Index missing1 = 0;
  const double v1 = pairwise_neglog(config.spec, config.params, sim.data, &grad1,
                                    {}, &missing1);
  CHECK(missing1 == 0);

  // Append one all-missing unit: value and gradient must not move.
  Dataset extended = sim.data;
  const Eigen::Index n = extended.n();
  extended.y.conservativeResize(n + 1, Eigen::NoChange);
  extended.x.conservativeResize(n + 1, Eigen::NoChange);
  extended.observed.conservativeResize(n + 1, Eigen::NoChange);
  extended.y.row(n).setConstant(kNaN);
  extended.x.row(n).setZero();
  extended.observed.row(n).setConstant(false);

  Eigen::VectorXd grad2(grad1.size());
  Eigen::Index missing2 = 0;
  const double v2 = pairwise_neglog(config.spec, config.params, extended, &grad2,
                                    {}, &missing2);
  CHECK(missing2 == 1);
  CHECK(v2 == v1);
  CHECK((grad2 - grad1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("evaluation is identical for every thread count") {
  const SimConfig config = toy_config(700, 21);
  const SimOutput sim = simulate(config);

  EvalOptions serial;
  serial.threads = 1;
  Eigen::VectorXd g1(count_parameters(config.spec));
  const double v1 = pairwise_neglog(config.spec, config.params, sim.data, &g1, serial);

  for (int threads : {2, 3, 8}) {
    EvalOptions parallel;
    parallel.threads = threads;
    Eigen::VectorXd gt(g1.size());
    const double vt =
        pairwise_neglog(config.spec, config.params, sim.data, &gt, parallel);
    CHECK(vt == v1);  // bit-identical, not merely close
    CHECK((gt - g1).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("per-unit scores sum to the total gradient") {
  Xoshiro256pp rng(31);
  const ModelSpec spec = make_spec(
      {ResponseKind::kOrdinal, ResponseKind::kGaussian, ResponseKind::kGaussian}, 2);
  const ParameterSet params = random_params(spec, rng);
  const Dataset data = random_dataset(spec, 60, rng, 0.2);

  Eigen::VectorXd grad(count_parameters(spec));
  pairwise_neglog(spec, params, data, &grad);
  const Eigen::MatrixXd scores = per_unit_scores(spec, params, data);
  REQUIRE(scores.rows() == 60);
  REQUIRE(scores.cols() == grad.size());
  const Eigen::VectorXd colsum = scores.colwise().sum();
  for (Eigen::Index i = 0; i < grad.size(); ++i) {
    CHECK(colsum[i] == doctest::Approx(grad[i]).epsilon(1e-10).scale(1.0));
  }
}
