#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sparsebound/core_types.hpp"
#include "sparsebound/observation_models.hpp"

namespace sparsebound {

// All information quantities are in nats.

enum class MiMethod { kExactEnumeration, kClosedForm, kPlugIn, kMonteCarlo };
std::string to_string(MiMethod method);

struct MiEstimate {
  double value = 0.0;
  MiMethod method = MiMethod::kExactEnumeration;
  std::optional<std::uint64_t> samples;
  std::optional<double> std_error;
};

struct SequenceMiProfile {
  std::vector<MiEstimate> per_step;
  double average = 0.0;
  /// sqrt(Σ se_t²)/T when every step carries a standard error.
  std::optional<double> std_error;
};

/// Builds a profile; the average is exactly per_step[0] when all steps agree.
SequenceMiProfile make_profile(std::vector<MiEstimate> per_step);

/// IID product over the K on-support coordinates of a finite pmf.
struct DiscreteDesign {
  std::vector<double> values;
  std::vector<double> pmf;
};

/// Zero-mean jointly Gaussian on-support design.
struct GaussianDesign {
  Eigen::MatrixXd covariance;
};

/// p(X) restricted to the support. Construction validates the pmf (sums to
/// 1 within 1e-12, nonnegative) or the covariance (symmetric PSD).
class DesignDistribution {
 public:
  explicit DesignDistribution(DiscreteDesign d);
  explicit DesignDistribution(GaussianDesign g);

  static DesignDistribution bernoulli(double p);
  static DesignDistribution point_mass(double value);

  const std::variant<DiscreteDesign, GaussianDesign>& variant() const noexcept { return d_; }
  bool is_discrete() const noexcept { return std::holds_alternative<DiscreteDesign>(d_); }

 private:
  std::variant<DiscreteDesign, GaussianDesign> d_;
};

/// Cap on alphabet^K for exact enumeration.
inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;
/// Bootstrap resamples behind every Monte-Carlo std_error.
inline constexpr std::size_t kBootstrapResamples = 200;

/// -p ln p - (1-p) ln(1-p), with 0 ln 0 = 0.
double binary_entropy(double p);

/// Exact I(X_{S'}; Y | X_{S̃}, β_S) for a binary-output model under an IID
/// discrete design. S̃ is taken to be the first `revealed_size` support
/// positions; S' the remaining ones.
MiEstimate exact_conditional_mi(const ObservationModel& model, const DesignDistribution& dist,
                                std::size_t k, std::size_t revealed_size,
                                const LatentCoefficients& beta,
                                std::uint64_t enumeration_cap = kDefaultEnumerationCap);

/// Monte-Carlo I(X_{S'}; Y | X_{S̃}, β_S) for 1-bit CS under a Gaussian design.
/// Both conditional output probabilities are evaluated in closed form, so the
/// only sampling is over x_S.
MiEstimate binary_channel_mi_mc(const OneBitCsModel& model, const DesignDistribution& dist,
                                std::size_t k, std::size_t revealed_size,
                                const LatentCoefficients& beta, std::size_t samples, Rng& rng);

/// ½ ln(1 + snr·(K - j)·N·P_t / K): per-step cap on linear CS information
/// under a power budget N·P_t.
double linear_cs_mi_closed_form(double snr, std::size_t n, std::size_t k,
                                std::size_t revealed_size, double power_fraction);

/// Monte-Carlo E_β[½ ln(1 + snr·βᵀ Σ_{S'|S̃} β)] over Rademacher β_{S'}: the
/// exact information of a Gaussian design with covariance Σ.
MiEstimate linear_cs_mi_mc(double snr, const Eigen::MatrixXd& covariance,
                           std::size_t revealed_size, std::size_t samples, Rng& rng);

/// Σ_{S'S'} - Σ_{S'S̃} Σ_{S̃S̃}^+ Σ_{S̃S'} with S̃ the first `revealed_size` indices.
Eigen::MatrixXd conditional_covariance(const Eigen::MatrixXd& covariance,
                                       std::size_t revealed_size);

/// One simulated run with its ground truth, as consumed by the plug-in estimator.
struct SupportTrace {
  MeasurementHistory history;
  SupportSet support;
  RevealedSubset revealed;
  LatentCoefficients beta;
};

/// Per-step plug-in estimate of I(X_{S'}^(t); Y^(t) | X_{S̃}^(t), β) from the
/// empirical joint table across traces, then averaged over t. No bias
/// correction; the bias is upward and O(cells / M).
SequenceMiProfile plugin_sequence_mi(std::span<const SupportTrace> traces);

/// Standard deviation of `resamples` bootstrap means of `values`.
double bootstrap_std_error(std::span<const double> values, std::size_t resamples, Rng& rng);

}  // namespace sparsebound
