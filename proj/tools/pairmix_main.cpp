#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pairmix/data.hpp"
#include "pairmix/estimate.hpp"
#include "pairmix/report.hpp"
#include "pairmix/serialize.hpp"
#include "pairmix/simulate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitNotConverged = 3;

struct FitArgs {
  std::string data_path;
  std::string formula;
  std::string types;
  std::string na = "fail";
  std::string solver = "bfgs";
  std::string out_path;
  std::string report_path;
  bool no_se = false;
  bool no_standardize = false;
  int threads = 0;
  int max_iter = 500;
  double tol = 1e-5;
  std::uint64_t seed = 1;
};

struct SimArgs {
  std::string params_path;
  bool toy = false;
  std::string out_path;
  std::int64_t n = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string missing;
};

struct SummaryArgs {
  std::string in_path;
  std::string report_path;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ',')) parts.push_back(item);
  return parts;
}

std::vector<pairmix::ResponseKind> parse_types(const std::string& text,
                                               std::size_t n_responses) {
  std::vector<pairmix::ResponseKind> kinds;
  for (const auto& part : split_list(text)) {
    if (part == "ordinal") {
      kinds.push_back(pairmix::ResponseKind::kOrdinal);
    } else if (part == "gaussian") {
      kinds.push_back(pairmix::ResponseKind::kGaussian);
    } else {
      throw std::runtime_error("--types entries must be 'ordinal' or 'gaussian', got '" +
                               part + "'");
    }
  }
  if (kinds.size() != n_responses) {
    throw std::runtime_error("--types lists " + std::to_string(kinds.size()) +
                             " kinds but the formula has " +
                             std::to_string(n_responses) + " responses");
  }
  return kinds;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << content;
  if (!out) throw std::runtime_error("failed while writing: " + path);
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

int run_fit(const FitArgs& args) {
  const pairmix::FormulaSpec formula = pairmix::parse_formula(args.formula);
  const auto types = parse_types(args.types, formula.responses.size());
  const pairmix::NaPolicy na =
      args.na == "pass" ? pairmix::NaPolicy::kPass : pairmix::NaPolicy::kFail;
  pairmix::LoadedData loaded =
      pairmix::load_csv(args.data_path, formula, types, na);
  if (!args.no_standardize) {
    const auto warned = pairmix::standardize(&loaded.data);
    loaded.warnings.insert(loaded.warnings.end(), warned.begin(), warned.end());
  }

  pairmix::FitConfig config;
  config.solver = args.solver == "cg" ? pairmix::SolverKind::kConjugateGradient
                                      : pairmix::SolverKind::kBfgs;
  config.max_iterations = args.max_iter;
  config.gradient_tolerance = args.tol;
  config.compute_se = !args.no_se;
  config.seed = args.seed;
  config.threads = args.threads > 0
                       ? args.threads
                       : static_cast<int>(std::max(
                             1u, std::thread::hardware_concurrency()));

  pairmix::FitResult result = pairmix::fit(loaded.spec, loaded.data, config);
  result.formula_text = formula.text();
  result.warnings.insert(result.warnings.begin(), loaded.warnings.begin(),
                         loaded.warnings.end());

  const nlohmann::json doc = pairmix::fit_result_to_json(result);
  const std::string report = pairmix::render_report(doc);
  if (!args.out_path.empty()) {
    write_text(args.out_path, pairmix::json_to_string(doc));
  }
  if (!args.report_path.empty()) {
    write_text(args.report_path, report);
  }
  std::cout << report;
  return result.converged ? kExitOk : kExitNotConverged;
}

int run_simulate(const SimArgs& args) {
  if (!args.toy && args.params_path.empty()) {
    throw std::runtime_error("simulate needs either --toy or --params FILE");
  }
  if (args.toy && !args.params_path.empty()) {
    throw std::runtime_error("--toy and --params are mutually exclusive");
  }
  pairmix::SimConfig config =
      args.toy ? pairmix::toy_config()
               : pairmix::sim_config_from_json(read_json(args.params_path));
  if (args.n >= 0) config.n = args.n;
  if (args.seed_set) config.seed = args.seed;
  if (!args.missing.empty()) {
    std::vector<double> rates;
    for (const auto& part : split_list(args.missing)) {
      try {
        rates.push_back(std::stod(part));
      } catch (const std::exception&) {
        throw std::runtime_error("--missing-rate entries must be numbers, got '" +
                                 part + "'");
      }
    }
    if (rates.size() == 1) {
      rates.assign(static_cast<std::size_t>(config.spec.q()), rates[0]);
    }
    config.missing_rate = rates;
  }
  const pairmix::SimOutput sim = pairmix::simulate(config);
  pairmix::write_csv(args.out_path, sim.data, config.spec);
  return kExitOk;
}

int run_summary(const SummaryArgs& args) {
  const nlohmann::json doc = read_json(args.in_path);
  const std::string report = pairmix::render_report(doc);
  if (!args.report_path.empty()) {
    write_text(args.report_path, report);
  }
  std::cout << report;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Pairwise-likelihood models for mixed ordinal and Gaussian responses"};
  app.set_version_flag("--version", "pairmix 0.1.0");
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit_cmd =
      app.add_subcommand("fit", "Estimate a model from a CSV file");
  fit_cmd->add_option("--data", fit_args.data_path, "CSV file with one row per unit")
      ->required();
  fit_cmd->add_option("--formula", fit_args.formula,
                      "Model formula, e.g. 'y1 + z1 ~ 0 + X1 + X2'")
      ->required();
  fit_cmd->add_option("--types", fit_args.types,
                      "Comma list of response kinds (ordinal|gaussian)")
      ->required();
  fit_cmd->add_option("--na", fit_args.na, "Missing-response policy")
      ->check(CLI::IsMember({"fail", "pass"}))
      ->capture_default_str();
  fit_cmd->add_option("--solver", fit_args.solver, "Optimizer")
      ->check(CLI::IsMember({"bfgs", "cg"}))
      ->capture_default_str();
  fit_cmd->add_option("--out", fit_args.out_path, "Write the fit as JSON");
  fit_cmd->add_option("--report", fit_args.report_path,
                      "Write the text report");
  fit_cmd->add_flag("--no-se", fit_args.no_se,
                    "Skip sandwich standard errors");
  fit_cmd->add_flag("--no-standardize", fit_args.no_standardize,
                    "Keep covariates on their raw scale");
  fit_cmd->add_option("--threads", fit_args.threads,
                      "Worker threads (0 = all cores; results are identical "
                      "for every thread count)")
      ->capture_default_str();
  fit_cmd->add_option("--max-iter", fit_args.max_iter, "Iteration cap")
      ->capture_default_str();
  fit_cmd->add_option("--tol", fit_args.tol, "Gradient tolerance")
      ->capture_default_str();
  fit_cmd->add_option("--seed", fit_args.seed,
                      "Seed for the fallback starting point")
      ->capture_default_str();

  SimArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Draw a dataset from a model");
  sim_cmd->add_option("--params", sim_args.params_path,
                      "JSON file with model, parameters and draw settings");
  sim_cmd->add_flag("--toy", sim_args.toy,
                    "Use the built-in demonstration model");
  sim_cmd->add_option("--out", sim_args.out_path, "CSV output path")
      ->required();
  sim_cmd->add_option("--n", sim_args.n, "Number of units");
  sim_cmd->add_option("--seed", sim_args.seed, "RNG seed")
      ->each([&](const std::string&) { sim_args.seed_set = true; });
  sim_cmd->add_option("--missing-rate", sim_args.missing,
                      "Comma list of per-response missing rates (or one rate "
                      "for all responses)");

  SummaryArgs summary_args;
  auto* summary_cmd =
      app.add_subcommand("summary", "Render the report for a stored fit");
  summary_cmd->add_option("--in", summary_args.in_path, "Fit JSON file")
      ->required();
  summary_cmd->add_option("--report", summary_args.report_path,
                          "Also write the report to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (fit_cmd->parsed()) return run_fit(fit_args);
    if (sim_cmd->parsed()) return run_simulate(sim_args);
    if (summary_cmd->parsed()) return run_summary(summary_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
