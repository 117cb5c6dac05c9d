#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sparsebound/bounds.hpp"
#include "sparsebound/config.hpp"
#include "sparsebound/infotheory.hpp"

namespace sparsebound {

inline constexpr double kWilsonZ95 = 1.959963984540054;

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
  double half_width = 0.5;
};

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                               double z = kWilsonZ95);

/// One (T, snr) grid point.
struct ExperimentRow {
  std::uint64_t t = 0;
  std::optional<double> snr;  // CS models only
  double empirical_pe = 0.0;
  WilsonInterval pe_interval;
  std::uint64_t error_count = 0;
  std::uint64_t trials = 0;
  std::uint64_t ambiguous_count = 0;  // comp: survivors != K
  double mean_tests = 0.0;
  double fano_bound = 0.0;
  MiEstimate mi_used;  // at |S~| = revealed_size
  BoundReport bound;
  std::optional<bool> cs_feasible;  // linear CS only
  RngSeed seed;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ExperimentRow> rows;
  std::string config_hash;
  std::string kernel_isa;
  double wall_time_seconds = 0.0;
};

/// Worker count from SPARSEBOUND_WORKERS, else the hardware concurrency.
std::size_t worker_count();

/// Runs every (T, snr) point of the config; point i uses seed + i and trial r
/// within it uses derive_seed(seed + i, r). A failing trial aborts the run
/// with a message naming its seed.
ExperimentReport run_trials(const ExperimentConfig& config);

/// run_trials over a T range or snr range.
ExperimentReport sweep(const ExperimentConfig& config);

/// Information value per |S~| for the config at one grid point; used by
/// run_trials and by the `mi` command.
struct MiSelection {
  std::map<std::size_t, MiEstimate> per_subset;
  bool binary_cap = false;  // every entry is the ln 2 output-entropy cap
};
MiSelection select_mi(const ExperimentConfig& config, std::uint64_t t, double snr, RngSeed seed);

struct GapReport {
  double pe_nonadaptive = 0.0;
  double pe_adaptive = 0.0;
  double gap = 0.0;  // pe_nonadaptive - pe_adaptive
  double gap_lo = 0.0;
  double gap_hi = 0.0;
  ExperimentReport nonadaptive;
  ExperimentReport adaptive;
};

/// Both configs must be single-point and share dims, model, T, trials and seed.
GapReport compare_adaptive_gap(const ExperimentConfig& nonadaptive,
                               const ExperimentConfig& adaptive);

std::string config_hash(const ExperimentConfig& config);

nlohmann::json to_json(const MiEstimate& estimate);
nlohmann::json to_json(const TBound& bound);
nlohmann::json to_json(const BoundReport& report);
nlohmann::json to_json(const CsFeasibilityReport& report);
nlohmann::json to_json(const ExperimentRow& row);
nlohmann::json to_json(const ExperimentReport& report);
nlohmann::json to_json(const GapReport& report);

/// Flat CSV, one line per row.
std::string to_csv(const ExperimentReport& report);

}  // namespace sparsebound
