#include "pairmix/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "pairmix/model.hpp"

using namespace pairmix;

TEST_CASE("simulation is reproducible") {
  const SimConfig config = toy_config(120, 99);
  const SimOutput a = simulate(config);
  const SimOutput b = simulate(config);
  CHECK((a.data.x - b.data.x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.data.y - b.data.y).cwiseAbs().maxCoeff() == 0.0);  // fully observed
  CHECK((a.latent_errors - b.latent_errors).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("row draws do not depend on the total number of rows") {
  const SimOutput big = simulate(toy_config(100, 5));
  const SimOutput small = simulate(toy_config(40, 5));
  CHECK((big.data.x.topRows(40) - small.data.x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((big.latent_errors.topRows(40) - small.latent_errors).cwiseAbs().maxCoeff() ==
        0.0);
  for (Eigen::Index i = 0; i < 40; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      CHECK(big.data.y(i, j) == small.data.y(i, j));
    }
  }
}

TEST_CASE("observed values are unchanged when missingness is switched on") {
  SimConfig with = toy_config(400, 17);
  with.missing_rate = {0.25, 0.25, 0.25, 0.25};
  const SimOutput full = simulate(toy_config(400, 17));
  const SimOutput thinned = simulate(with);

  Eigen::Index n_missing = 0;
  for (Eigen::Index i = 0; i < 400; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      if (!thinned.data.observed(i, j)) {
        ++n_missing;
        CHECK(std::isnan(thinned.data.y(i, j)));
      } else {
        // The same latent draws produce the same observed values: the
        // missingness uniforms come from a reserved slice of each row's
        // stream.
        CHECK(thinned.data.y(i, j) == full.data.y(i, j));
      }
    }
  }
  // About a quarter of 1600 cells, with a wide guard band.
  CHECK(n_missing > 280);
  CHECK(n_missing < 520);
}

TEST_CASE("latent errors track the requested correlation") {
  const Eigen::Index n = 20000;
  const SimConfig config = toy_config(n, 31);
  const SimOutput sim = simulate(config);
  REQUIRE(sim.latent_errors.rows() == n);

  const Eigen::MatrixXd centered =
      sim.latent_errors.rowwise() - sim.latent_errors.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered / double(n - 1);
  Eigen::VectorXd d = cov.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd corr = d.asDiagonal() * cov * d.asDiagonal();

  const double guard = 4.0 / std::sqrt(double(n));
  for (Eigen::Index k = 0; k < 4; ++k) {
    for (Eigen::Index l = k + 1; l < 4; ++l) {
      CHECK(std::abs(corr(k, l) - config.params.correlation(k, l)) < guard);
    }
  }
}

TEST_CASE("ordinal cells hold category codes in range") {
  const SimOutput sim = simulate(toy_config(500, 8));
  for (Eigen::Index i = 0; i < 500; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) {  // first two responses are ordinal
      const double code = sim.data.y(i, j);
      CHECK(code >= 1.0);
      CHECK(code <= 3.0);
      CHECK(code == std::floor(code));
    }
  }
}

TEST_CASE("simulation validates its inputs") {
  SimConfig config = toy_config(10, 1);
  config.missing_rate = {0.5, 0.5, 0.5, 1.0};  // a rate of 1 deletes everything
  CHECK_THROWS_AS(simulate(config), std::invalid_argument);

  config = toy_config(10, 1);
  config.params.correlation.setOnes();  // singular latent correlation
  CHECK_THROWS_AS(simulate(config), std::invalid_argument);

  config = toy_config(10, 1);
  config.missing_rate = {0.5};  // wrong arity
  CHECK_THROWS_AS(simulate(config), std::invalid_argument);
}
