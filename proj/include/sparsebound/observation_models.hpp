#pragma once

#include <span>
#include <string>
#include <variant>

#include "sparsebound/core_types.hpp"

namespace sparsebound {

enum class OutputAlphabet { kBinary, kReal };

/// Boolean OR channel with a symmetric output flip of probability `crossover`.
struct GroupTestingModel {
  double crossover = 0.0;
};

/// y = 1 iff <x_S, β_S> + w >= 0, w ~ Normal(0, 1/snr).
struct OneBitCsModel {
  double snr = 1.0;
};

/// y = <x_S, β_S> + w, w ~ Normal(0, 1/snr).
struct LinearCsModel {
  double snr = 1.0;
};

/// Observation channel P(Y | X_S, β_S). The design enters only through its
/// on-support values `x_support`, which is what makes every model satisfy
/// P(Y | X) = P(Y | X_S).
class ObservationModel {
 public:
  using Variant = std::variant<GroupTestingModel, OneBitCsModel, LinearCsModel>;

  /// Throws DomainError on crossover outside [0, 0.5) or snr <= 0.
  ObservationModel(Variant model);  // NOLINT(google-explicit-constructor)
  ObservationModel(GroupTestingModel m) : ObservationModel(Variant(m)) {}  // NOLINT
  ObservationModel(OneBitCsModel m) : ObservationModel(Variant(m)) {}      // NOLINT
  ObservationModel(LinearCsModel m) : ObservationModel(Variant(m)) {}      // NOLINT

  const Variant& variant() const noexcept { return model_; }
  OutputAlphabet output_alphabet() const noexcept;
  std::string name() const;

  double sample(std::span<const double> x_support, const LatentCoefficients& beta,
                Rng& rng) const;
  /// log P(y | x_S, β_S) for binary outputs, log density for linear CS.
  /// Impossible outcomes give -infinity.
  double log_likelihood(double y, std::span<const double> x_support,
                        const LatentCoefficients& beta) const;
  /// P(Y = 1 | x_S, β_S). Throws UnsupportedError for linear CS.
  double positive_probability(std::span<const double> x_support,
                              const LatentCoefficients& beta) const;

 private:
  Variant model_;
};

/// Standard normal CDF Φ.
double normal_cdf(double z);
/// ln Φ(z), accurate far into the lower tail.
double log_normal_cdf(double z);

/// Gathers x[support[k]] for each k.
std::vector<double> restrict_to_support(std::span<const double> x, const SupportSet& support);

}  // namespace sparsebound
