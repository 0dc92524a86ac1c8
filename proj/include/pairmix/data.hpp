#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "pairmix/model.hpp"

namespace pairmix {

// Parsed model formula: `y1 + y2 ~ 0 + X1 + X2`.  The right-hand side may
// start with "0 +" (suppressed intercept), may be a bare "0" or "1", and a
// trailing "| 1" group marker is accepted and ignored.
struct FormulaSpec {
  std::vector<std::string> responses;
  std::vector<std::string> covariates;
  bool intercept_suppressed = false;

  // Canonical single-spaced rendering used in reports.
  std::string text() const;
};

// Parse failure with the byte offset of the offending token.
class FormulaError : public std::runtime_error {
 public:
  FormulaError(const std::string& what, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

FormulaSpec parse_formula(const std::string& text);

enum class NaPolicy { kFail, kPass };

// Rectangular data for one model: n units, q response columns and p
// covariate columns.  Ordinal cells hold the 1-based category code; missing
// cells hold NaN with observed(i, j) == false.
struct Dataset {
  Eigen::MatrixXd y;  // n x q
  Eigen::MatrixXd x;  // n x p
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> observed;  // n x q

  // Standardization record (per covariate); empty when x is on its raw
  // scale.  Kept so reported coefficients can be mapped back.
  std::vector<double> x_mean;
  std::vector<double> x_sd;

  Eigen::Index n_dropped_rows = 0;  // rows removed for missing covariates

  Eigen::Index n() const { return y.rows(); }
  bool standardized() const { return !x_sd.empty(); }
};

struct LoadedData {
  Dataset data;
  ModelSpec spec;
  std::vector<std::string> warnings;
};

// Reads an RFC-4180-style CSV (header row required; quoted fields with ""
// escapes; "NA" or an empty field is missing).  `types` gives the kind of
// each formula response, in order.  Ordinal category codes are assigned by
// sorting the distinct observed values (numerically when every value parses
// as a number, lexicographically otherwise).  Rows with missing covariates
// are dropped and counted; missing responses follow `na`.
//
// Throws std::runtime_error with row/column context on malformed input.
LoadedData load_csv(const std::string& path, const FormulaSpec& formula,
                    const std::vector<ResponseKind>& types, NaPolicy na);

// Centers and scales each covariate column to mean 0 / sample sd 1 (sd with
// n-1 denominator), recording (mean, sd).  Constant columns are left
// unscaled and reported back as warnings.
std::vector<std::string> standardize(Dataset* data);

// Writes the dataset back to CSV: ordinal cells as their category labels,
// Gaussian cells in shortest round-trip decimal form, missing cells as NA.
void write_csv(const std::string& path, const Dataset& data,
               const ModelSpec& spec);

}  // namespace pairmix
