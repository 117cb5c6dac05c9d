#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sparsebound/bounds.hpp"
#include "sparsebound/config.hpp"
#include "sparsebound/harness.hpp"
#include "sparsebound/infotheory.hpp"
#include "sparsebound/verify.hpp"

using namespace sparsebound;
using nlohmann::json;

namespace {

enum ExitCode : int { kOk = 0, kConfigFailure = 1, kResourceFailure = 2, kViolation = 3 };

void emit(const json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

/// Rescales every nats-valued field of a bound report to bits.
json in_units(json j, const std::string& units) {
  if (units == "nats") return j;
  for (auto& term : j["per_subset_terms"]) {
    term["numerator"] = term["numerator"].get<double>() / std::numbers::ln2;
    term["mi"] = term["mi"].get<double>() / std::numbers::ln2;
  }
  j["units"] = "bits";
  return j;
}

struct BoundArgs {
  std::string model = "group_testing";
  std::size_t n = 0;
  std::size_t k = 0;
  double snr = 1.0;
  std::uint64_t t = 0;
  std::string form = "finite-fano";
  std::string units = "nats";
};

json run_bound(const BoundArgs& a) {
  const BoundForm form = parse_bound_form(a.form);
  const auto dims = ProblemDims::uncapped(a.n, a.k);
  json out = {{"model", a.model}, {"n", a.n}, {"k", a.k}, {"form", to_string(form)}};
  if (a.model == "group_testing" || a.model == "one_bit_cs") {
    out["binary_output_bound"] = in_units(to_json(binary_output_lower_bound(dims, form)), a.units);
    if (a.t > 0) out["fano_error_at_cap"] = fano_error_lower_bound(a.t, std::numbers::ln2, a.n, a.k, 0);
    return out;
  }
  if (a.model != "linear_cs") throw ConfigError("unknown model '" + a.model + "'");
  out["snr"] = a.snr;
  if (a.k < a.n) out["snr_necessary"] = snr_necessary(a.n, a.k, form);
  const auto min_t = min_feasible_t(a.snr, a.n, a.k, form);
  out["min_feasible_t"] = min_t ? json(*min_t) : json("unbounded");
  if (a.t > 0) {
    out["t"] = a.t;
    out["cs_feasibility"] = to_json(cs_feasibility(a.t, a.snr, a.n, a.k, form));
    std::map<std::size_t, double> caps;
    const auto allocation = PowerAllocation::uniform(a.t);
    for (std::size_t j = 0; j < a.k; ++j) caps[j] = sequence_mi_cap(a.snr, a.n, a.k, j, allocation);
    out["gaussian_bound"] = in_units(to_json(nonadaptive_lower_bound(dims, caps, form)), a.units);
  }
  return out;
}

struct MiArgs {
  std::string model = "group_testing";
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t j = 0;
  double crossover = 0.0;
  double snr = 1.0;
  std::string strategy = "bernoulli";
  double p = -1.0;
  std::uint64_t t = 1;
  std::string method = "auto";
  std::uint64_t samples = 100'000;
  std::uint64_t seed = 0;
};

json run_mi(const MiArgs& a) {
  ExperimentConfig config;
  config.n = a.n;
  config.k = a.k;
  config.model = {a.model, a.crossover, a.snr};
  config.strategy.type = a.strategy;
  if (a.p >= 0.0) config.strategy.p = a.p;
  config.t_values = {a.t};
  config.revealed_size = a.j;
  config.seed = {a.seed};
  config.mi = {parse_mi_mode(a.method), a.samples};
  // No decoding happens here, so the decoder's constraints are not checked.
  config.validate(false);
  const MiSelection sel = select_mi(config, a.t, config.model.snr, config.seed);
  json per = json::object();
  for (const auto& [j, est] : sel.per_subset) per[std::to_string(j)] = to_json(est);
  return {{"config", to_json(config)},
          {"per_revealed_size", per},
          {"binary_cap", sel.binary_cap},
          {"units", "nats"}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample-complexity lower bounds and Monte-Carlo checks for sparse recovery"};
  app.set_version_flag("--version", SPARSEBOUND_VERSION);
  app.require_subcommand(1);

  BoundArgs bound_args;
  auto* bound = app.add_subcommand("bound", "Evaluate lower bounds on the number of measurements");
  bound->add_option("--model", bound_args.model, "group_testing | one_bit_cs | linear_cs")
      ->check(CLI::IsMember({"group_testing", "one_bit_cs", "linear_cs"}));
  bound->add_option("--n", bound_args.n, "Number of variables")->required();
  bound->add_option("--k", bound_args.k, "Support size")->required();
  bound->add_option("--snr", bound_args.snr, "Signal-to-noise ratio (CS models)");
  bound->add_option("--t", bound_args.t, "Measurement budget");
  bound->add_option("--form", bound_args.form, "asymptotic | finite-fano");
  bound->add_option("--units", bound_args.units, "nats | bits")
      ->check(CLI::IsMember({"nats", "bits"}));

  std::string config_path;
  std::string out_path;
  std::string csv_path;
  auto* simulate = app.add_subcommand("simulate", "Run an experiment config");
  simulate->add_option("--config", config_path, "Experiment JSON")->required();
  simulate->add_option("--out", out_path, "Report path (default stdout)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment over its T or snr grid");
  sweep_cmd->add_option("--config", config_path, "Experiment JSON")->required();
  sweep_cmd->add_option("--out", out_path, "Report path (default stdout)");
  sweep_cmd->add_option("--csv", csv_path, "Also write a flat CSV here");

  MiArgs mi_args;
  auto* mi = app.add_subcommand("mi", "Mutual information per revealed-subset size");
  mi->add_option("--model", mi_args.model, "group_testing | one_bit_cs | linear_cs");
  mi->add_option("--n", mi_args.n, "Number of variables")->required();
  mi->add_option("--k", mi_args.k, "Support size")->required();
  mi->add_option("--j", mi_args.j, "Revealed subset size");
  mi->add_option("--crossover", mi_args.crossover, "Group testing flip probability");
  mi->add_option("--snr", mi_args.snr, "Signal-to-noise ratio (CS models)");
  mi->add_option("--strategy", mi_args.strategy, "bernoulli | gaussian | binary_splitting | two_stage_cs");
  mi->add_option("--p", mi_args.p, "Bernoulli inclusion probability (default 1/K)");
  mi->add_option("--t", mi_args.t, "Measurement budget");
  mi->add_option("--method", mi_args.method, "auto | exact | plug-in | closed-form | monte-carlo");
  mi->add_option("--samples", mi_args.samples, "Samples or traces for estimated MI");
  mi->add_option("--seed", mi_args.seed, "Seed");

  std::uint64_t verify_seed = 0;
  std::uint64_t verify_trials = 2000;
  auto* verify = app.add_subcommand("verify", "Run the Fano-consistency suite");
  verify->add_option("--seed", verify_seed, "Base seed");
  verify->add_option("--trials", verify_trials, "Trials per cell");
  verify->add_option("--out", out_path, "Report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigFailure;
  }

  try {
    if (*bound) {
      emit(run_bound(bound_args), "");
    } else if (*simulate || *sweep_cmd) {
      const ExperimentConfig config = load_config(config_path);
      const ExperimentReport report = run_trials(config);
      emit(to_json(report), out_path);
      if (!csv_path.empty()) write_text(to_csv(report), csv_path);
    } else if (*mi) {
      emit(run_mi(mi_args), "");
    } else if (*verify) {
      const VerifyReport report = run_verify({verify_seed}, verify_trials);
      emit(report.report, out_path);
      if (!report.passed()) {
        std::cerr << "verify: " << report.violations << " of " << report.checks
                  << " checks violated\n";
        return kViolation;
      }
    }
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kResourceFailure;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigFailure;
  }
  return kOk;
}
