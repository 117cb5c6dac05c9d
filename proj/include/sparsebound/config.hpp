#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sparsebound/bounds.hpp"
#include "sparsebound/core_types.hpp"
#include "sparsebound/observation_models.hpp"
#include "sparsebound/strategies.hpp"

namespace sparsebound {

inline constexpr int kConfigSchemaVersion = 1;

struct ModelSpec {
  std::string type = "group_testing";  // group_testing | one_bit_cs | linear_cs
  double crossover = 0.0;
  double snr = 1.0;
};

struct StrategySpec {
  std::string type = "bernoulli";  // bernoulli | gaussian | binary_splitting | two_stage_cs
  std::optional<double> p;         // Bernoulli inclusion probability; default 1/K
  double split = 0.5;              // two_stage_cs
};

enum class DecoderKind { kMl, kComp, kStrategy };

enum class MiMode { kAuto, kExact, kPlugIn, kClosedForm, kMonteCarlo };

struct MiSpec {
  MiMode method = MiMode::kAuto;
  std::uint64_t samples = 100'000;
};

struct ExperimentConfig {
  std::size_t n = 0;
  std::size_t k = 0;
  ModelSpec model;
  StrategySpec strategy;
  DecoderKind decoder = DecoderKind::kMl;
  std::vector<std::uint64_t> t_values;
  std::vector<double> snr_values;  // empty: use model.snr
  std::uint64_t trials = 1;
  RngSeed seed;
  std::size_t revealed_size = 0;
  MiSpec mi;
  BoundForm bound_form = BoundForm::kFiniteFano;
  std::uint64_t candidate_cap = kDefaultCandidateCap;

  /// Throws ConfigError on unresolvable combinations, ResourceError when the
  /// ML decoder would exceed its candidate cap.
  void validate(bool check_decoder = true) const;

  ObservationModel make_model(double snr) const;
  /// Prototype strategy for a run of `t` steps; harness calls fresh() per trial.
  std::unique_ptr<Strategy> make_strategy(std::uint64_t t) const;
  double bernoulli_p() const;
};

/// Parses and validates; unknown keys and a missing or wrong schema_version
/// are rejected with ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& config);

std::string to_string(DecoderKind kind);
std::string to_string(MiMode mode);
/// Throws ConfigError on an unknown name.
MiMode parse_mi_mode(const std::string& text);

}  // namespace sparsebound
