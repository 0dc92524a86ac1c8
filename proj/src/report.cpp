#include "pairmix/report.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "pairmix/model.hpp"
#include "pairmix/serialize.hpp"

namespace pairmix {

namespace {

std::string fmt(const char* spec, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, value);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string format_p(double p) {
  if (std::isnan(p)) return "NA";
  if (p < 2.2e-16) return "< 2.2e-16";
  return p >= 1e-4 ? fmt("%.4f", p) : fmt("%.3e", p);
}

std::string stars_for(double p) {
  if (std::isnan(p)) return "";
  if (p <= 0.001) return "***";
  if (p <= 0.01) return "**";
  if (p <= 0.05) return "*";
  if (p <= 0.1) return ".";
  return "";
}

struct TableRow {
  std::string label, est, se, z, p, stars;
};

TableRow make_row(const std::string& label, double est, double se) {
  TableRow row;
  row.label = label;
  row.est = fmt("%.6f", est);
  if (std::isnan(se) || !(se > 0.0)) {
    row.se = "NA";
    row.z = "NA";
    row.p = "NA";
    return row;
  }
  const double z = est / se;
  const double p = std::erfc(std::fabs(z) * 0.70710678118654752440);
  row.se = fmt("%.6f", se);
  row.z = fmt("%.4f", z);
  row.p = format_p(p);
  row.stars = stars_for(p);
  return row;
}

void append_table(std::string* out, const std::string& title,
                  const std::vector<TableRow>& rows) {
  if (rows.empty()) return;
  std::size_t w_label = 0, w_est = 8, w_se = 10, w_z = 7, w_p = 8;
  for (const auto& row : rows) {
    w_label = std::max(w_label, row.label.size());
    w_est = std::max(w_est, row.est.size());
    w_se = std::max(w_se, row.se.size());
    w_z = std::max(w_z, row.z.size());
    w_p = std::max(w_p, row.p.size());
  }
  *out += title;
  *out += '\n';
  *out += std::string(w_label, ' ') + " " + pad_left("Estimate", w_est) + " " +
          pad_left("Std. Error", w_se) + " " + pad_left("z value", w_z) + " " +
          pad_left("Pr(>|z|)", w_p) + '\n';
  for (const auto& row : rows) {
    *out += pad_right(row.label, w_label) + " " + pad_left(row.est, w_est) +
            " " + pad_left(row.se, w_se) + " " + pad_left(row.z, w_z) + " " +
            pad_left(row.p, w_p);
    if (!row.stars.empty()) *out += " " + row.stars;
    *out += '\n';
  }
  *out += '\n';
}

}  // namespace

std::string render_report(const nlohmann::json& fit) {
  const ModelSpec spec = model_from_json(fit.at("model"));
  const ParameterLayout layout = make_layout(spec);
  const auto& names = fit.at("parameter_names");
  const auto& est = fit.at("estimates");
  const auto& se = fit.at("se");
  if (static_cast<Eigen::Index>(est.size()) != layout.total ||
      static_cast<Eigen::Index>(se.size()) != layout.total ||
      static_cast<Eigen::Index>(names.size()) != layout.total) {
    throw std::runtime_error("report: estimate arrays do not match the model");
  }
  auto row_at = [&](Eigen::Index idx) {
    return make_row(names[idx].get<std::string>(),
                    json_number_or_nan(est[idx]), json_number_or_nan(se[idx]));
  };

  std::string out;
  const std::string formula = fit.value("formula", std::string());
  if (!formula.empty()) {
    out += "Formula: " + formula + "\n\n";
  }

  // Size and likelihood header, right-aligned per column.
  {
    const std::string n_str =
        std::to_string(fit.at("n_units").get<long long>());
    const std::string q_str = std::to_string(spec.q());
    const double log_pl = json_number_or_nan(fit.at("log_pl"));
    const std::string ll_str =
        std::isnan(log_pl) ? "NA" : fmt("%.7g", log_pl);
    const std::size_t w_n = std::max<std::size_t>(6, n_str.size());
    const std::size_t w_q = std::max<std::size_t>(4, q_str.size());
    const std::size_t w_ll = std::max<std::size_t>(6, ll_str.size());
    out += pad_left("nunits", w_n) + " " + pad_left("ndim", w_q) + " " +
           pad_left("logLik", w_ll) + '\n';
    out += pad_left(n_str, w_n) + " " + pad_left(q_str, w_q) + " " +
           pad_left(ll_str, w_ll) + '\n';
    const double claic = json_number_or_nan(fit.at("claic"));
    const double clbic = json_number_or_nan(fit.at("clbic"));
    out += "CLAIC: " + (std::isnan(claic) ? "NA" : fmt("%.7g", claic)) +
           "  CLBIC: " + (std::isnan(clbic) ? "NA" : fmt("%.7g", clbic)) +
           "\n\n";
  }

  bool any_stars = false;
  auto collect = [&](const std::vector<Eigen::Index>& idx) {
    std::vector<TableRow> rows;
    rows.reserve(idx.size());
    for (const Eigen::Index i : idx) {
      rows.push_back(row_at(i));
      if (!rows.back().stars.empty()) any_stars = true;
    }
    return rows;
  };

  std::vector<Eigen::Index> thresholds, intercepts, coefficients, sigmas,
      correlations;
  for (Eigen::Index j = 0; j < layout.q; ++j) {
    const auto& b = layout.blocks[j];
    if (b.gaussian) {
      intercepts.push_back(b.offset);
    } else {
      for (Eigen::Index s = 0; s < b.n_thresh; ++s) {
        thresholds.push_back(b.offset + s);
      }
    }
    if (layout.sigma_slot[j] >= 0) sigmas.push_back(layout.sigma_slot[j]);
  }
  // Coefficients grouped by covariate across responses.
  for (Eigen::Index m = 0; m < layout.p; ++m) {
    for (Eigen::Index j = 0; j < layout.q; ++j) {
      const auto& b = layout.blocks[j];
      coefficients.push_back(b.offset + b.n_thresh + (b.gaussian ? 1 : 0) + m);
    }
  }
  for (Eigen::Index i = layout.corr_offset; i < layout.total; ++i) {
    correlations.push_back(i);
  }

  append_table(&out, "Thresholds:", collect(thresholds));
  append_table(&out, "Intercept for normals:", collect(intercepts));
  append_table(&out, "Coefficients:", collect(coefficients));
  append_table(&out,
               "Standard deviation of the Gaussian response variables:",
               collect(sigmas));
  append_table(&out, "Correlation params:", collect(correlations));

  if (any_stars) {
    out +=
        "---\n"
        "Signif. codes:  0 '***' 0.001 '**' 0.01 '*' 0.05 '.' 0.1 ' ' 1\n";
  }
  if (fit.contains("warnings")) {
    for (const auto& w : fit.at("warnings")) {
      out += "Warning: " + w.get<std::string>() + "\n";
    }
  }
  return out;
}

}  // namespace pairmix
