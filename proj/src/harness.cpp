#include "sparsebound/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <thread>

#include "sparsebound/decoders.hpp"
#include "sparsebound/kernels.hpp"

namespace sparsebound {

using nlohmann::json;

namespace {

// Separate stream for the traces and samples behind MI estimates.
constexpr std::uint64_t kMiStream = 0x6d69'5f73'7472'6561ULL;

// Plug-in traces are held in memory; refuse beyond this many stored doubles.
constexpr double kPluginDoubleBudget = 2.5e8;

struct TrialOutcome {
  bool error = false;
  bool ambiguous = false;
  std::uint64_t tests = 0;
};

struct Trace {
  SupportSet support;
  LatentCoefficients beta;
  RevealedSubset revealed;
  MeasurementHistory history;
  std::unique_ptr<Strategy> strategy;
};

Trace simulate(const ExperimentConfig& c, const ObservationModel& model, const Strategy& proto,
               std::uint64_t t, Rng& rng) {
  const auto dims = ProblemDims::uncapped(c.n, c.k);
  Trace tr{draw_support(dims, rng), {}, {}, MeasurementHistory(c.n), proto.fresh()};
  tr.beta = std::holds_alternative<GroupTestingModel>(model.variant())
                ? LatentCoefficients::ones(c.k)
                : draw_rademacher(c.k, rng);
  if (c.revealed_size > 0) tr.revealed = draw_revealed_subset(tr.support, c.revealed_size, rng);
  for (std::uint64_t step = 0; step < t; ++step) {
    if (tr.strategy->finished()) break;
    auto x = tr.strategy->next_design(tr.history, rng);
    if (tr.strategy->finished()) break;
    const double y = model.sample(restrict_to_support(x, tr.support), tr.beta, rng);
    tr.history.push(std::move(x), y);
  }
  return tr;
}

TrialOutcome run_one(const ExperimentConfig& c, const ObservationModel& model,
                     const Strategy& proto, std::uint64_t t, RngSeed seed) {
  Rng rng = make_rng(seed);
  Trace tr = simulate(c, model, proto, t, rng);
  TrialOutcome out;
  out.tests = tr.history.length();
  switch (c.decoder) {
    case DecoderKind::kMl: {
      const ProblemDims dims(c.n, c.k, c.candidate_cap);
      MlDecodeOptions opts;
      opts.candidate_cap = c.candidate_cap;
      const SupportIndex guess = ml_decode(tr.history, model, dims, tr.revealed, opts);
      out.error = guess != rank_support(dims, tr.support);
      break;
    }
    case DecoderKind::kComp: {
      auto survivors = comp_survivors(tr.history);
      out.ambiguous = survivors.size() != c.k;
      out.error = out.ambiguous || SupportSet(std::move(survivors)) != tr.support;
      break;
    }
    case DecoderKind::kStrategy: {
      const auto guess = tr.strategy->conclusion();
      out.error = !guess || *guess != tr.support;
      break;
    }
  }
  return out;
}

template <class Fn>
void parallel_for(std::uint64_t count, Fn&& fn) {
  const std::size_t workers =
      static_cast<std::size_t>(std::min<std::uint64_t>(worker_count(), count));
  if (workers <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::uint64_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::string trial_failure(std::uint64_t index, RngSeed seed, const std::string& what) {
  std::ostringstream os;
  os << "trial " << index << " (seed " << seed.value << ") failed: " << what;
  return os.str();
}

/// Runs `fn(i)` for every index on the worker pool; the lowest failing index
/// is rethrown with its seed.
template <class Fn>
void run_indexed(std::uint64_t count, RngSeed base, Fn&& fn) {
  std::vector<std::exception_ptr> failures(count);
  parallel_for(count, [&](std::uint64_t i) {
    try {
      fn(i);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  });
  for (std::uint64_t i = 0; i < count; ++i) {
    if (!failures[i]) continue;
    const RngSeed seed = derive_seed(base, i);
    try {
      std::rethrow_exception(failures[i]);
    } catch (const ResourceError& e) {
      throw ResourceError(trial_failure(i, seed, e.what()));
    } catch (const ConfigError& e) {
      throw ConfigError(trial_failure(i, seed, e.what()));
    } catch (const std::exception& e) {
      throw std::runtime_error(trial_failure(i, seed, e.what()));
    }
  }
}

MiEstimate sign_averaged_exact(const ObservationModel& model, const DesignDistribution& dist,
                               std::size_t k, std::size_t j) {
  if (std::holds_alternative<GroupTestingModel>(model.variant())) {
    return exact_conditional_mi(model, dist, k, j, LatentCoefficients::ones(k));
  }
  if (k >= 20) throw ResourceError("exact MI: 2^K sign patterns exceed the cap");
  const std::uint64_t patterns = 1ULL << k;
  double sum = 0.0;
  for (std::uint64_t code = 0; code < patterns; ++code) {
    LatentCoefficients beta{std::vector<double>(k)};
    for (std::size_t i = 0; i < k; ++i) beta.values[i] = ((code >> i) & 1U) ? -1.0 : 1.0;
    sum += exact_conditional_mi(model, dist, k, j, beta).value;
  }
  return {sum / static_cast<double>(patterns), MiMethod::kExactEnumeration, std::nullopt,
          std::nullopt};
}

MiEstimate binary_cap() {
  return {std::numbers::ln2, MiMethod::kClosedForm, std::nullopt, std::nullopt};
}

MiEstimate plugin_estimate(const ExperimentConfig& c, const ObservationModel& model,
                           std::uint64_t t, RngSeed seed) {
  if (t == 0) return {0.0, MiMethod::kPlugIn, c.mi.samples, 0.0};
  const double stored = static_cast<double>(c.mi.samples) * static_cast<double>(t) *
                        static_cast<double>(c.n);
  if (stored > kPluginDoubleBudget) {
    throw ResourceError("plug-in MI: traces would exceed the memory budget");
  }
  const auto proto = c.make_strategy(t);
  const RngSeed base{seed.value ^ kMiStream};
  std::vector<SupportTrace> traces(c.mi.samples, SupportTrace{MeasurementHistory(c.n), {}, {}, {}});
  run_indexed(c.mi.samples, base, [&](std::uint64_t i) {
    Rng rng = make_rng(derive_seed(base, i));
    Trace tr = simulate(c, model, *proto, t, rng);
    // Early-stopping strategies leave the remainder as empty tests.
    while (tr.history.length() < t) tr.history.push(std::vector<double>(c.n, 0.0), 0.0);
    traces[i] = SupportTrace{std::move(tr.history), std::move(tr.support), std::move(tr.revealed),
                             std::move(tr.beta)};
  });
  const auto profile = plugin_sequence_mi(traces);
  return {profile.average, MiMethod::kPlugIn, c.mi.samples, profile.std_error};
}

bool is_binary_model(const ExperimentConfig& c) { return c.model.type != "linear_cs"; }

}  // namespace

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {};
  const auto n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {lo, hi, half};
}

std::size_t worker_count() {
  if (const char* env = std::getenv("SPARSEBOUND_WORKERS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

MiSelection select_mi(const ExperimentConfig& c, std::uint64_t t, double snr, RngSeed seed) {
  const ObservationModel model = c.make_model(snr);
  const auto proto = c.make_strategy(std::max<std::uint64_t>(t, 1));
  const bool adaptive = proto->adaptive();
  const std::string& st = c.strategy.type;
  MiSelection sel;
  auto fill_cap = [&] {
    for (std::size_t j = 0; j < c.k; ++j) sel.per_subset[j] = binary_cap();
    sel.binary_cap = true;
  };

  if (is_binary_model(c)) {
    switch (c.mi.method) {
      case MiMode::kPlugIn:
        sel.per_subset[c.revealed_size] = plugin_estimate(c, model, t, seed);
        return sel;
      case MiMode::kClosedForm:
        fill_cap();
        return sel;
      case MiMode::kExact:
      case MiMode::kAuto:
        if (st == "bernoulli") {
          const auto dist = DesignDistribution::bernoulli(c.bernoulli_p());
          try {
            for (std::size_t j = 0; j < c.k; ++j) {
              sel.per_subset[j] = sign_averaged_exact(model, dist, c.k, j);
            }
            return sel;
          } catch (const ResourceError&) {
            if (c.mi.method == MiMode::kExact) throw;
            sel.per_subset.clear();
          }
        }
        if (c.mi.method == MiMode::kAuto && st == "gaussian") break;
        fill_cap();
        return sel;
      case MiMode::kMonteCarlo:
        break;
    }
    // 1-bit CS with Gaussian rows: per-coordinate variance 1/T at every step.
    const auto& onebit = std::get<OneBitCsModel>(model.variant());
    const double power = 1.0 / static_cast<double>(std::max<std::uint64_t>(t, 1));
    const DesignDistribution dist(
        GaussianDesign{power * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(c.k),
                                                         static_cast<Eigen::Index>(c.k))});
    for (std::size_t j = 0; j < c.k; ++j) {
      Rng rng = make_rng(derive_seed({seed.value ^ kMiStream}, j));
      sel.per_subset[j] = binary_channel_mi_mc(onebit, dist, c.k, j, LatentCoefficients::ones(c.k),
                                               c.mi.samples, rng);
    }
    return sel;
  }

  // Linear CS.
  const std::uint64_t steps = std::max<std::uint64_t>(t, 1);
  if (c.mi.method == MiMode::kMonteCarlo && !adaptive) {
    const double power = 1.0 / static_cast<double>(steps);
    const Eigen::MatrixXd cov = power * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(c.k),
                                                                  static_cast<Eigen::Index>(c.k));
    for (std::size_t j = 0; j < c.k; ++j) {
      Rng rng = make_rng(derive_seed({seed.value ^ kMiStream}, j));
      sel.per_subset[j] = linear_cs_mi_mc(snr, cov, j, c.mi.samples, rng);
    }
    return sel;
  }
  const auto allocation = PowerAllocation::uniform(steps);
  for (std::size_t j = 0; j < c.k; ++j) {
    sel.per_subset[j] = {sequence_mi_cap(snr, c.n, c.k, j, allocation), MiMethod::kClosedForm,
                         std::nullopt, std::nullopt};
  }
  return sel;
}

namespace {

ExperimentRow run_point(const ExperimentConfig& c, std::uint64_t t, double snr, RngSeed seed) {
  const ObservationModel model = c.make_model(snr);
  const auto proto = c.make_strategy(std::max<std::uint64_t>(t, 1));

  std::vector<TrialOutcome> outcomes(c.trials);
  run_indexed(c.trials, seed, [&](std::uint64_t i) {
    outcomes[i] = run_one(c, model, *proto, t, derive_seed(seed, i));
  });

  ExperimentRow row;
  row.t = t;
  if (!std::holds_alternative<GroupTestingModel>(model.variant())) row.snr = snr;
  row.trials = c.trials;
  row.seed = seed;
  std::uint64_t tests = 0;
  for (const auto& o : outcomes) {
    row.error_count += o.error ? 1 : 0;
    row.ambiguous_count += o.ambiguous ? 1 : 0;
    tests += o.tests;
  }
  row.empirical_pe = static_cast<double>(row.error_count) / static_cast<double>(row.trials);
  row.pe_interval = wilson_interval(row.error_count, row.trials);
  row.mean_tests = static_cast<double>(tests) / static_cast<double>(row.trials);

  const MiSelection sel = select_mi(c, t, snr, seed);
  row.mi_used = sel.per_subset.at(c.revealed_size);
  row.fano_bound = fano_error_lower_bound(t, row.mi_used.value, c.n, c.k, c.revealed_size);

  const auto dims = ProblemDims::uncapped(c.n, c.k);
  if (sel.per_subset.size() == c.k) {
    if (sel.binary_cap) {
      row.bound = binary_output_lower_bound(dims, c.bound_form);
    } else if (proto->adaptive()) {
      std::map<std::size_t, SequenceMiProfile> profiles;
      for (const auto& [j, est] : sel.per_subset) profiles[j] = make_profile({est});
      row.bound = adaptive_lower_bound(dims, profiles, c.bound_form);
    } else {
      std::map<std::size_t, double> values;
      for (const auto& [j, est] : sel.per_subset) values[j] = est.value;
      row.bound = nonadaptive_lower_bound(dims, values, c.bound_form);
    }
  } else if (is_binary_model(c)) {
    row.bound = binary_output_lower_bound(dims, c.bound_form);
  }
  if (c.model.type == "linear_cs" && t >= 1) {
    row.cs_feasible = cs_feasibility(t, snr, c.n, c.k, c.bound_form).feasible;
  }
  return row;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

json tbound_value(const TBound& b) {
  if (b.unbounded) return "unbounded";
  return b.value;
}

}  // namespace

ExperimentReport run_trials(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.config = config;
  report.config_hash = config_hash(config);
  report.kernel_isa = std::string(kernels::isa_name(kernels::active().isa));
  const std::vector<double> snrs =
      config.snr_values.empty() ? std::vector<double>{config.model.snr} : config.snr_values;
  std::uint64_t index = 0;
  for (double snr : snrs) {
    for (std::uint64_t t : config.t_values) {
      report.rows.push_back(run_point(config, t, snr, {config.seed.value + index}));
      ++index;
    }
  }
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

ExperimentReport sweep(const ExperimentConfig& config) { return run_trials(config); }

GapReport compare_adaptive_gap(const ExperimentConfig& nonadaptive,
                               const ExperimentConfig& adaptive) {
  if (nonadaptive.n != adaptive.n || nonadaptive.k != adaptive.k) {
    throw DomainError("compare_adaptive_gap: dims differ");
  }
  if (nonadaptive.model.type != adaptive.model.type ||
      nonadaptive.model.crossover != adaptive.model.crossover ||
      nonadaptive.model.snr != adaptive.model.snr || nonadaptive.snr_values != adaptive.snr_values) {
    throw DomainError("compare_adaptive_gap: models differ");
  }
  if (nonadaptive.trials != adaptive.trials || nonadaptive.seed != adaptive.seed) {
    throw DomainError("compare_adaptive_gap: trials or seed differ");
  }
  if (nonadaptive.t_values.size() != 1 || nonadaptive.t_values != adaptive.t_values ||
      nonadaptive.snr_values.size() > 1) {
    throw DomainError("compare_adaptive_gap: needs one matched T budget");
  }
  GapReport g;
  g.nonadaptive = run_trials(nonadaptive);
  g.adaptive = run_trials(adaptive);
  const auto& a = g.nonadaptive.rows.front();
  const auto& b = g.adaptive.rows.front();
  g.pe_nonadaptive = a.empirical_pe;
  g.pe_adaptive = b.empirical_pe;
  g.gap = a.empirical_pe - b.empirical_pe;
  const double se = std::sqrt(a.empirical_pe * (1.0 - a.empirical_pe) / static_cast<double>(a.trials) +
                              b.empirical_pe * (1.0 - b.empirical_pe) / static_cast<double>(b.trials));
  g.gap_lo = g.gap - kWilsonZ95 * se;
  g.gap_hi = g.gap + kWilsonZ95 * se;
  return g;
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

json to_json(const MiEstimate& e) {
  json j = {{"value", e.value}, {"method", to_string(e.method)}, {"units", "nats"}};
  j["samples"] = e.samples ? json(*e.samples) : json(nullptr);
  j["std_error"] = e.std_error ? json(*e.std_error) : json(nullptr);
  return j;
}

json to_json(const TBound& b) { return tbound_value(b); }

json to_json(const BoundReport& r) {
  json terms = json::array();
  for (const auto& term : r.per_subset_terms) {
    terms.push_back({{"revealed_size", term.revealed_size},
                     {"numerator", term.numerator},
                     {"mi", term.mi},
                     {"t_bound", tbound_value(term.t_bound)}});
  }
  return {{"per_subset_terms", terms},
          {"overall", tbound_value(r.overall)},
          {"argmax_revealed_size", r.argmax_revealed_size},
          {"form", to_string(r.form)},
          {"units", "nats"}};
}

json to_json(const CsFeasibilityReport& r) {
  json terms = json::array();
  for (const auto& term : r.per_i_terms) {
    terms.push_back(
        {{"i", term.i}, {"lhs", term.lhs}, {"rhs", term.rhs}, {"satisfied", term.satisfied}});
  }
  return {{"per_i_terms", terms}, {"feasible", r.feasible}, {"units", "nats"}};
}

json to_json(const ExperimentRow& row) {
  json j;
  j["t"] = row.t;
  j["snr"] = row.snr ? json(*row.snr) : json(nullptr);
  j["empirical_pe"] = row.empirical_pe;
  j["pe_interval"] = {{"lo", row.pe_interval.lo},
                      {"hi", row.pe_interval.hi},
                      {"half_width", row.pe_interval.half_width},
                      {"method", "wilson95"}};
  j["error_count"] = row.error_count;
  j["trials"] = row.trials;
  j["ambiguous_count"] = row.ambiguous_count;
  j["mean_tests"] = row.mean_tests;
  j["fano_bound"] = row.fano_bound;
  j["mi_used"] = to_json(row.mi_used);
  j["bound"] = row.bound.per_subset_terms.empty() ? json(nullptr) : to_json(row.bound);
  j["cs_feasible"] = row.cs_feasible ? json(*row.cs_feasible) : json(nullptr);
  j["seed"] = row.seed.value;
  return j;
}

json to_json(const ExperimentReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) rows.push_back(to_json(row));
  return {{"config", to_json(r.config)},
          {"rows", rows},
          {"config_hash", r.config_hash},
          {"version", SPARSEBOUND_VERSION},
          {"kernel_isa", r.kernel_isa},
          {"units", "nats"},
          {"wall_time_seconds", r.wall_time_seconds}};
}

json to_json(const GapReport& g) {
  return {{"pe_nonadaptive", g.pe_nonadaptive},
          {"pe_adaptive", g.pe_adaptive},
          {"gap", g.gap},
          {"gap_interval", {{"lo", g.gap_lo}, {"hi", g.gap_hi}, {"method", "two-proportion z95"}}},
          {"nonadaptive", to_json(g.nonadaptive)},
          {"adaptive", to_json(g.adaptive)}};
}

std::string to_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os << "t,snr,empirical_pe,pe_lo,pe_hi,error_count,trials,ambiguous_count,mean_tests,"
        "fano_bound,mi_value,mi_method,mi_std_error,bound_overall,cs_feasible,seed\n";
  for (const auto& row : r.rows) {
    os << row.t << ',' << (row.snr ? format_double(*row.snr) : "") << ','
       << format_double(row.empirical_pe) << ',' << format_double(row.pe_interval.lo) << ','
       << format_double(row.pe_interval.hi) << ',' << row.error_count << ',' << row.trials << ','
       << row.ambiguous_count << ',' << format_double(row.mean_tests) << ','
       << format_double(row.fano_bound) << ',' << format_double(row.mi_used.value) << ','
       << to_string(row.mi_used.method) << ','
       << (row.mi_used.std_error ? format_double(*row.mi_used.std_error) : "") << ',';
    if (row.bound.per_subset_terms.empty()) {
      os << "";
    } else if (row.bound.overall.unbounded) {
      os << "unbounded";
    } else {
      os << format_double(row.bound.overall.value);
    }
    os << ',' << (row.cs_feasible ? (*row.cs_feasible ? "true" : "false") : "") << ','
       << row.seed.value << '\n';
  }
  return os.str();
}

}  // namespace sparsebound
