#include "pairmix/report.hpp"

#include <limits>
#include <string>

#include "doctest.h"
#include "pairmix/estimate.hpp"
#include "pairmix/serialize.hpp"

using namespace pairmix;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// One ordinal and one Gaussian response on a single covariate; estimates and
// standard errors picked so every formatting branch shows up.
FitResult small_fit() {
  FitResult res;
  ResponseSpec y1;
  y1.name = "y1";
  y1.kind = ResponseKind::kOrdinal;
  y1.n_categories = 3;
  y1.category_labels = {"1", "2", "3"};
  ResponseSpec z1;
  z1.name = "z1";
  z1.kind = ResponseKind::kGaussian;
  res.spec.responses = {y1, z1};
  res.spec.covariates = {"X1"};

  res.estimates = Eigen::VectorXd(7);
  res.estimates << -1.0, 1.0, 2.0, -1.0, 0.5, 1.5, 0.6;
  res.se = Eigen::VectorXd(7);
  res.se << 0.1, 0.2, 0.05, 0.5, kNaN, 0.3, 0.02;
  res.se_ok = true;
  res.params = unflatten(res.spec, res.estimates);

  res.log_pl = -1234.56789;
  res.claic = 2493.1358;
  res.clbic = 2520.0;
  res.n_units = 200;
  res.converged = true;
  res.iterations = 12;
  res.gradient_norm = 1e-7;
  res.min_eigen_correlation = 0.64;
  res.formula_text = "y1 + z1 ~ 0 + X1";
  res.warnings = {"example warning text"};
  return res;
}

}  // namespace

TEST_CASE("report layout and formatting") {
  const std::string report = render_report(fit_result_to_json(small_fit()));

  CHECK(report.find("Formula: y1 + z1 ~ 0 + X1\n") != std::string::npos);

  // Right-aligned size/likelihood header with %.7g numbers.
  CHECK(report.find("nunits ndim    logLik\n"
                    "   200    2 -1234.568\n") != std::string::npos);
  CHECK(report.find("CLAIC: 2493.136  CLBIC: 2520\n") != std::string::npos);

  // Thresholds table: fixed six-decimal estimates and standard errors, four
  // decimals for z, the R-style p floor, and significance stars.
  CHECK(report.find("Thresholds:\n"
                    "        Estimate Std. Error  z value  Pr(>|z|)\n"
                    "y1 1|2 -1.000000   0.100000 -10.0000 < 2.2e-16 ***\n"
                    "y1 2|3  1.000000   0.200000   5.0000 5.733e-07 ***\n") !=
        std::string::npos);

  // Coefficient rows are covariate-major and carry the NA cascade when no
  // usable standard error exists.
  CHECK(report.find("Coefficients:\n"
                    "     Estimate Std. Error z value  Pr(>|z|)\n"
                    "y1X1 2.000000   0.050000 40.0000 < 2.2e-16 ***\n"
                    "z1X1 0.500000         NA      NA        NA\n") !=
        std::string::npos);

  CHECK(report.find("Intercept for normals:") != std::string::npos);
  CHECK(report.find("beta0.z1") != std::string::npos);
  CHECK(report.find("Standard deviation of the Gaussian response variables:") !=
        std::string::npos);
  CHECK(report.find("sigma.z1") != std::string::npos);
  CHECK(report.find("Correlation params:") != std::string::npos);
  CHECK(report.find("corr_y1_z1") != std::string::npos);

  // 0.0455 earns a single star; the legend follows the tables.
  CHECK(report.find("beta0.z1 -1.000000   0.500000 -2.0000   0.0455 *\n") !=
        std::string::npos);
  CHECK(report.find("---\nSignif. codes:  "
                    "0 '***' 0.001 '**' 0.01 '*' 0.05 '.' 0.1 ' ' 1\n") !=
        std::string::npos);

  CHECK(report.find("Warning: example warning text\n") != std::string::npos);
}

TEST_CASE("report omits the legend when nothing is starred") {
  FitResult res = small_fit();
  res.se.setConstant(kNaN);
  res.se_ok = false;
  res.warnings.clear();
  const std::string report = render_report(fit_result_to_json(res));
  CHECK(report.find("Signif. codes") == std::string::npos);
  CHECK(report.find("Warning:") == std::string::npos);
  CHECK(report.find("NA") != std::string::npos);
}

TEST_CASE("report is a pure function of the serialized document") {
  const nlohmann::json doc = fit_result_to_json(small_fit());
  const std::string a = render_report(doc);
  const std::string b = render_report(doc);
  CHECK(a == b);

  // Round-tripping the document through text changes nothing.
  const nlohmann::json reparsed = nlohmann::json::parse(json_to_string(doc));
  CHECK(render_report(reparsed) == a);
}
