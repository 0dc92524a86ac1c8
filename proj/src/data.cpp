#include "pairmix/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

namespace pairmix {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool parse_double(const std::string& field, double* out) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  // Tolerate leading spaces and an explicit plus, which from_chars rejects.
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  if (begin < end && *begin == '+') ++begin;
  const auto result = std::from_chars(begin, end, *out);
  return result.ec == std::errc() && result.ptr == end;
}

bool is_missing(const std::string& field) {
  return field.empty() || field == "NA";
}

// RFC-4180-style reader: comma separated, optional CRLF line ends, quoted
// fields with "" escapes (which may span lines).
std::vector<std::vector<std::string>> read_records(const std::string& content,
                                                   const std::string& path) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  const std::size_t size = content.size();
  auto end_field = [&]() {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&]() {
    end_field();
    // Skip records that are completely empty (e.g. a trailing newline).
    if (!(record.size() == 1 && record[0].empty())) {
      records.push_back(std::move(record));
    }
    record.clear();
  };
  while (i < size) {
    const char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < size && content[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      ++i;
      continue;
    }
    switch (c) {
      case '"':
        if (field.empty() && !field_started) {
          in_quotes = true;
          field_started = true;
        } else {
          throw std::runtime_error(path +
                                   ": stray quote inside unquoted field (record " +
                                   std::to_string(records.size() + 1) + ")");
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < size && content[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field += c;
        field_started = true;
        break;
    }
    ++i;
  }
  if (in_quotes) {
    throw std::runtime_error(path + ": unterminated quoted field");
  }
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

Eigen::Index find_column(const std::vector<std::string>& header,
                         const std::string& name, const std::string& path) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw std::runtime_error(path + ": column '" + name +
                             "' not found in header");
  }
  return static_cast<Eigen::Index>(it - header.begin());
}

std::string quote_if_needed(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_double(double value) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

}  // namespace

LoadedData load_csv(const std::string& path, const FormulaSpec& formula,
                    const std::vector<ResponseKind>& types, NaPolicy na) {
  if (types.size() != formula.responses.size()) {
    throw std::runtime_error(
        "response types: expected " + std::to_string(formula.responses.size()) +
        " entries to match the formula, got " + std::to_string(types.size()));
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open data file: " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto records = read_records(buffer.str(), path);
  if (records.size() < 2) {
    throw std::runtime_error(path + ": need a header row and at least one data row");
  }
  const auto& header = records[0];
  const auto q = static_cast<Eigen::Index>(formula.responses.size());
  const auto p = static_cast<Eigen::Index>(formula.covariates.size());
  std::vector<Eigen::Index> response_cols(q), covariate_cols(p);
  for (Eigen::Index j = 0; j < q; ++j) {
    response_cols[j] = find_column(header, formula.responses[j], path);
  }
  for (Eigen::Index m = 0; m < p; ++m) {
    covariate_cols[m] = find_column(header, formula.covariates[m], path);
  }

  // First pass: keep rows with complete covariates, holding response fields
  // as raw strings so ordinal levels can be collected over retained rows.
  std::vector<std::vector<std::string>> y_raw;
  std::vector<Eigen::VectorXd> x_rows;
  Eigen::Index dropped = 0;
  for (std::size_t rec = 1; rec < records.size(); ++rec) {
    const auto& row = records[rec];
    if (row.size() != header.size()) {
      throw std::runtime_error(path + ": data row " + std::to_string(rec) +
                               " has " + std::to_string(row.size()) +
                               " fields, header has " +
                               std::to_string(header.size()));
    }
    Eigen::VectorXd xs(p);
    bool covariate_missing = false;
    for (Eigen::Index m = 0; m < p; ++m) {
      const auto& field = row[covariate_cols[m]];
      if (is_missing(field)) {
        covariate_missing = true;
        break;
      }
      if (!parse_double(field, &xs[m])) {
        throw std::runtime_error(path + ": data row " + std::to_string(rec) +
                                 ", column '" + formula.covariates[m] +
                                 "': cannot parse '" + field + "' as a number");
      }
    }
    if (covariate_missing) {
      ++dropped;
      continue;
    }
    std::vector<std::string> ys(q);
    for (Eigen::Index j = 0; j < q; ++j) {
      ys[j] = row[response_cols[j]];
      if (na == NaPolicy::kFail && is_missing(ys[j])) {
        throw std::runtime_error(path + ": data row " + std::to_string(rec) +
                                 ": response '" + formula.responses[j] +
                                 "' is missing and the policy is 'fail'");
      }
    }
    y_raw.push_back(std::move(ys));
    x_rows.push_back(std::move(xs));
  }
  const auto n = static_cast<Eigen::Index>(y_raw.size());
  if (n == 0) {
    throw std::runtime_error(path + ": no usable rows after dropping rows with missing covariates");
  }

  LoadedData out;
  out.spec.covariates = formula.covariates;
  out.spec.intercept_suppressed = formula.intercept_suppressed;
  out.data.y.resize(n, q);
  out.data.x.resize(n, p);
  out.data.observed.resize(n, q);
  out.data.n_dropped_rows = dropped;
  for (Eigen::Index i = 0; i < n; ++i) out.data.x.row(i) = x_rows[i];

  for (Eigen::Index j = 0; j < q; ++j) {
    ResponseSpec r;
    r.name = formula.responses[j];
    r.kind = types[j];
    if (r.kind == ResponseKind::kOrdinal) {
      // Category codes follow the sorted distinct observed values: numeric
      // order when every level parses as a number, lexicographic otherwise.
      std::vector<std::string> levels;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!is_missing(y_raw[i][j])) levels.push_back(y_raw[i][j]);
      }
      std::sort(levels.begin(), levels.end());
      levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
      bool all_numeric = !levels.empty();
      std::map<std::pair<double, std::string>, std::string> by_value;
      for (const auto& level : levels) {
        double value;
        if (!parse_double(level, &value)) {
          all_numeric = false;
          break;
        }
        by_value.emplace(std::make_pair(value, level), level);
      }
      if (all_numeric) {
        levels.clear();
        for (const auto& [key, level] : by_value) levels.push_back(level);
      }
      if (levels.size() < 2) {
        throw std::runtime_error(path + ": ordinal response '" + r.name +
                                 "' has fewer than 2 observed categories");
      }
      std::unordered_map<std::string, Eigen::Index> code;
      for (std::size_t s = 0; s < levels.size(); ++s) {
        code[levels[s]] = static_cast<Eigen::Index>(s) + 1;
      }
      r.n_categories = static_cast<Eigen::Index>(levels.size());
      r.category_labels = levels;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (is_missing(y_raw[i][j])) {
          out.data.y(i, j) = kNaN;
          out.data.observed(i, j) = false;
        } else {
          out.data.y(i, j) = static_cast<double>(code[y_raw[i][j]]);
          out.data.observed(i, j) = true;
        }
      }
    } else {
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& field = y_raw[i][j];
        if (is_missing(field)) {
          out.data.y(i, j) = kNaN;
          out.data.observed(i, j) = false;
        } else if (!parse_double(field, &out.data.y(i, j))) {
          throw std::runtime_error(path + ": response '" + r.name +
                                   "': cannot parse '" + field +
                                   "' as a number");
        } else {
          out.data.observed(i, j) = true;
        }
      }
    }
    out.spec.responses.push_back(std::move(r));
  }
  if (dropped > 0) {
    out.warnings.push_back("dropped " + std::to_string(dropped) +
                           " rows with missing covariate values");
  }
  return out;
}

std::vector<std::string> standardize(Dataset* data) {
  std::vector<std::string> warnings;
  const Eigen::Index n = data->x.rows();
  const Eigen::Index p = data->x.cols();
  data->x_mean.assign(p, 0.0);
  data->x_sd.assign(p, 1.0);
  for (Eigen::Index m = 0; m < p; ++m) {
    const double mean = data->x.col(m).mean();
    double sd = 1.0;
    if (n > 1) {
      sd = std::sqrt((data->x.col(m).array() - mean).square().sum() /
                     static_cast<double>(n - 1));
    }
    if (!(sd > 0.0)) {
      warnings.push_back("covariate column " + std::to_string(m + 1) +
                         " is constant; centered but not scaled");
      sd = 1.0;
    }
    data->x.col(m) = (data->x.col(m).array() - mean) / sd;
    data->x_mean[m] = mean;
    data->x_sd[m] = sd;
  }
  return warnings;
}

void write_csv(const std::string& path, const Dataset& data,
               const ModelSpec& spec) {
  const Eigen::Index n = data.n();
  const Eigen::Index q = spec.q();
  const Eigen::Index p = spec.p();
  if (data.y.cols() != q || data.x.cols() != p) {
    throw std::invalid_argument("write_csv: dataset does not match the model");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + path);
  }
  std::string line;
  for (Eigen::Index j = 0; j < q; ++j) {
    if (j) line += ',';
    line += quote_if_needed(spec.responses[j].name);
  }
  for (Eigen::Index m = 0; m < p; ++m) {
    line += ',';
    line += quote_if_needed(spec.covariates[m]);
  }
  out << line << '\n';
  for (Eigen::Index i = 0; i < n; ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < q; ++j) {
      if (j) line += ',';
      if (!data.observed(i, j)) {
        line += "NA";
      } else if (spec.responses[j].kind == ResponseKind::kOrdinal) {
        const auto code = static_cast<std::size_t>(data.y(i, j));
        const auto& labels = spec.responses[j].category_labels;
        line += quote_if_needed(code >= 1 && code <= labels.size()
                                    ? labels[code - 1]
                                    : std::to_string(code));
      } else {
        line += format_double(data.y(i, j));
      }
    }
    for (Eigen::Index m = 0; m < p; ++m) {
      line += ',';
      line += format_double(data.x(i, m));
    }
    out << line << '\n';
  }
  if (!out) {
    throw std::runtime_error("failed while writing: " + path);
  }
}

}  // namespace pairmix
