#include "sparsebound/config.hpp"

#include <fstream>
#include <set>

namespace sparsebound {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown field '" + key + "' in " + where);
  }
}

template <class T>
T get_or(const json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("field '" + key + "': " + e.what());
  }
}

template <class T>
T require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing field '" + key + "' in " + where);
  return get_or<T>(obj, key, T{});
}

std::vector<std::uint64_t> parse_t_sweep(const json& node) {
  std::vector<std::uint64_t> out;
  if (node.is_array()) {
    for (const auto& v : node) {
      if (!v.is_number_unsigned()) throw ConfigError("t_sweep entries must be unsigned integers");
      out.push_back(v.get<std::uint64_t>());
    }
    return out;
  }
  reject_unknown(node, {"from", "to", "step"}, "t_sweep");
  const auto from = require<std::uint64_t>(node, "from", "t_sweep");
  const auto to = require<std::uint64_t>(node, "to", "t_sweep");
  const auto step = get_or<std::uint64_t>(node, "step", 1);
  if (step == 0) throw ConfigError("t_sweep step must be positive");
  for (std::uint64_t t = from; t <= to; t += step) out.push_back(t);
  return out;
}

DecoderKind parse_decoder(const std::string& s) {
  if (s == "ml") return DecoderKind::kMl;
  if (s == "comp") return DecoderKind::kComp;
  if (s == "strategy") return DecoderKind::kStrategy;
  throw ConfigError("unknown decoder '" + s + "' (expected ml | comp | strategy)");
}

void validate_decoder(const ExperimentConfig& c) {
  const bool noiseless_gt = c.model.type == "group_testing" && c.model.crossover == 0.0;
  switch (c.decoder) {
    case DecoderKind::kMl: {
      const auto count = binomial_u64(c.n, c.k);
      if (count == 0 || count > c.candidate_cap) {
        throw ResourceError("ml decoder: C(n,k) exceeds the candidate cap");
      }
      break;
    }
    case DecoderKind::kComp:
      if (!noiseless_gt) throw ConfigError("comp decoder needs noiseless group testing");
      if (c.revealed_size != 0) throw ConfigError("comp decoder does not take a revealed subset");
      break;
    case DecoderKind::kStrategy:
      if (c.strategy.type != "binary_splitting") {
        throw ConfigError("strategy decoder needs binary_splitting");
      }
      if (c.revealed_size != 0) throw ConfigError("strategy decoder does not take a revealed subset");
      break;
  }
}

}  // namespace

MiMode parse_mi_mode(const std::string& s) {
  if (s == "auto") return MiMode::kAuto;
  if (s == "exact") return MiMode::kExact;
  if (s == "plug-in") return MiMode::kPlugIn;
  if (s == "closed-form") return MiMode::kClosedForm;
  if (s == "monte-carlo") return MiMode::kMonteCarlo;
  throw ConfigError("unknown mi_estimation method '" + s + "'");
}

std::string to_string(DecoderKind kind) {
  switch (kind) {
    case DecoderKind::kMl:
      return "ml";
    case DecoderKind::kComp:
      return "comp";
    case DecoderKind::kStrategy:
      return "strategy";
  }
  return "ml";
}

std::string to_string(MiMode mode) {
  switch (mode) {
    case MiMode::kAuto:
      return "auto";
    case MiMode::kExact:
      return "exact";
    case MiMode::kPlugIn:
      return "plug-in";
    case MiMode::kClosedForm:
      return "closed-form";
    case MiMode::kMonteCarlo:
      return "monte-carlo";
  }
  return "auto";
}

double ExperimentConfig::bernoulli_p() const {
  return strategy.p.value_or(1.0 / static_cast<double>(k));
}

ObservationModel ExperimentConfig::make_model(double snr) const {
  try {
    if (model.type == "group_testing") return ObservationModel(GroupTestingModel{model.crossover});
    if (model.type == "one_bit_cs") return ObservationModel(OneBitCsModel{snr});
    if (model.type == "linear_cs") return ObservationModel(LinearCsModel{snr});
  } catch (const DomainError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  throw ConfigError("unknown model type '" + model.type + "'");
}

std::unique_ptr<Strategy> ExperimentConfig::make_strategy(std::uint64_t t) const {
  const auto dims = ProblemDims::uncapped(n, k);
  if (strategy.type == "bernoulli") return std::make_unique<BernoulliStrategy>(n, bernoulli_p());
  if (strategy.type == "gaussian") {
    return std::make_unique<GaussianStrategy>(n, k, PowerAllocation::uniform(t));
  }
  if (strategy.type == "binary_splitting") return std::make_unique<BinarySplittingStrategy>(dims);
  if (strategy.type == "two_stage_cs") {
    return std::make_unique<TwoStageCsStrategy>(dims, t, strategy.split);
  }
  throw ConfigError("unknown strategy type '" + strategy.type + "'");
}

void ExperimentConfig::validate(bool check_decoder) const {
  if (k < 1 || k > n) throw ConfigError("dims: need 1 <= k <= n");
  const bool gt = model.type == "group_testing";
  const bool onebit = model.type == "one_bit_cs";
  const bool linear = model.type == "linear_cs";
  if (!gt && !onebit && !linear) throw ConfigError("unknown model type '" + model.type + "'");
  (void)make_model(model.snr);
  for (double s : snr_values) (void)make_model(s);
  if (gt && !snr_values.empty()) throw ConfigError("snr_sweep needs a CS model");

  const std::string& st = strategy.type;
  if (linear && st != "gaussian" && st != "two_stage_cs") {
    throw ConfigError("linear_cs needs a power-constrained design (gaussian or two_stage_cs)");
  }
  if (st == "bernoulli") {
    const double p = bernoulli_p();
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("strategy.p must lie in [0, 1]");
  } else if (st == "gaussian") {
    if (gt) throw ConfigError("group testing needs Boolean designs (bernoulli or binary_splitting)");
  } else if (st == "binary_splitting") {
    if (!gt || model.crossover != 0.0) {
      throw ConfigError("binary_splitting supports noiseless group testing only");
    }
  } else if (st == "two_stage_cs") {
    if (!linear) throw ConfigError("two_stage_cs needs the linear_cs model");
    if (!(strategy.split > 0.0 && strategy.split < 1.0)) {
      throw ConfigError("strategy.split must lie in (0, 1)");
    }
  } else {
    throw ConfigError("unknown strategy type '" + st + "'");
  }

  if (t_values.empty()) throw ConfigError("T range is empty");
  for (auto t : t_values) {
    if ((st == "gaussian" && t < 1) || (st == "two_stage_cs" && t < 2)) {
      throw ConfigError("T=" + std::to_string(t) + " too small for strategy " + st);
    }
  }
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (revealed_size >= k) throw ConfigError("revealed_size must be < k");

  if (check_decoder) validate_decoder(*this);

  switch (mi.method) {
    case MiMode::kExact:
      if (linear || st != "bernoulli") {
        throw ConfigError("exact MI needs a binary model with a Bernoulli design");
      }
      break;
    case MiMode::kPlugIn:
      if (linear) throw ConfigError("plug-in MI needs a binary-output model");
      if (st == "gaussian") throw ConfigError("plug-in MI needs a finite-alphabet design");
      if (mi.samples < 100) throw ConfigError("plug-in MI needs at least 100 traces");
      break;
    case MiMode::kMonteCarlo:
      if (st != "gaussian") throw ConfigError("monte-carlo MI needs the gaussian strategy");
      if (mi.samples < 1000) throw ConfigError("monte-carlo MI needs at least 1000 samples");
      break;
    case MiMode::kClosedForm:
    case MiMode::kAuto:
      break;
  }
}

ExperimentConfig parse_config(const json& j) {
  reject_unknown(j,
                 {"schema_version", "dims", "model", "strategy", "decoder", "t", "t_sweep",
                  "snr_sweep", "trials", "seed", "revealed_size", "mi_estimation", "bound_form",
                  "candidate_cap"},
                 "config");
  if (!j.contains("schema_version")) throw ConfigError("missing schema_version");
  if (get_or<int>(j, "schema_version", 0) != kConfigSchemaVersion) {
    throw ConfigError("unsupported schema_version (expected " +
                      std::to_string(kConfigSchemaVersion) + ")");
  }
  ExperimentConfig c;
  const json dims = j.value("dims", json::object());
  reject_unknown(dims, {"n", "k"}, "dims");
  c.n = require<std::size_t>(dims, "n", "dims");
  c.k = require<std::size_t>(dims, "k", "dims");

  const json model = j.value("model", json::object());
  reject_unknown(model, {"type", "crossover", "snr"}, "model");
  c.model.type = require<std::string>(model, "type", "model");
  c.model.crossover = get_or<double>(model, "crossover", 0.0);
  c.model.snr = get_or<double>(model, "snr", 1.0);

  const json strategy = j.value("strategy", json::object());
  reject_unknown(strategy, {"type", "p", "split"}, "strategy");
  c.strategy.type = require<std::string>(strategy, "type", "strategy");
  if (strategy.contains("p")) c.strategy.p = get_or<double>(strategy, "p", 0.0);
  c.strategy.split = get_or<double>(strategy, "split", 0.5);

  c.decoder = parse_decoder(get_or<std::string>(j, "decoder", "ml"));

  if (j.contains("t") == j.contains("t_sweep")) {
    throw ConfigError("exactly one of 't' and 't_sweep' is required");
  }
  if (j.contains("t")) {
    c.t_values = {get_or<std::uint64_t>(j, "t", 0)};
  } else {
    c.t_values = parse_t_sweep(j.at("t_sweep"));
  }
  if (j.contains("snr_sweep")) {
    c.snr_values = get_or<std::vector<double>>(j, "snr_sweep", {});
    if (c.snr_values.empty()) throw ConfigError("snr_sweep is empty");
  }
  c.trials = get_or<std::uint64_t>(j, "trials", 1);
  c.seed = {get_or<std::uint64_t>(j, "seed", 0)};
  c.revealed_size = get_or<std::size_t>(j, "revealed_size", 0);
  c.candidate_cap = get_or<std::uint64_t>(j, "candidate_cap", kDefaultCandidateCap);

  if (j.contains("mi_estimation")) {
    const json& mi = j.at("mi_estimation");
    reject_unknown(mi, {"method", "samples"}, "mi_estimation");
    c.mi.method = parse_mi_mode(get_or<std::string>(mi, "method", "auto"));
    c.mi.samples = get_or<std::uint64_t>(mi, "samples", c.mi.samples);
  }
  try {
    c.bound_form = parse_bound_form(get_or<std::string>(j, "bound_form", "finite-fano"));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["dims"] = {{"n", c.n}, {"k", c.k}};
  j["model"] = {{"type", c.model.type}};
  if (c.model.type == "group_testing") {
    j["model"]["crossover"] = c.model.crossover;
  } else {
    j["model"]["snr"] = c.model.snr;
  }
  j["strategy"] = {{"type", c.strategy.type}};
  if (c.strategy.type == "bernoulli") j["strategy"]["p"] = c.bernoulli_p();
  if (c.strategy.type == "two_stage_cs") j["strategy"]["split"] = c.strategy.split;
  j["decoder"] = to_string(c.decoder);
  if (c.t_values.size() == 1) {
    j["t"] = c.t_values.front();
  } else {
    j["t_sweep"] = c.t_values;
  }
  if (!c.snr_values.empty()) j["snr_sweep"] = c.snr_values;
  j["trials"] = c.trials;
  j["seed"] = c.seed.value;
  j["revealed_size"] = c.revealed_size;
  j["mi_estimation"] = {{"method", to_string(c.mi.method)}, {"samples", c.mi.samples}};
  j["bound_form"] = to_string(c.bound_form);
  j["candidate_cap"] = c.candidate_cap;
  return j;
}

}  // namespace sparsebound
