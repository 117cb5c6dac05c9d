#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "sparsebound/errors.hpp"

namespace sparsebound {

/// Default cap on C(N,K), the number of candidates an exhaustive decoder visits.
inline constexpr std::uint64_t kDefaultCandidateCap = 10'000'000;

/// N variables, K of which form the support. Construction rejects dimensions
/// whose candidate count C(N,K) is above the cap.
class ProblemDims {
 public:
  ProblemDims(std::size_t n_vars, std::size_t sparsity,
              std::uint64_t candidate_cap = kDefaultCandidateCap);

  /// Same as the constructor but without a cap; for bound evaluation only,
  /// where C(N,K) never has to be enumerated.
  static ProblemDims uncapped(std::size_t n_vars, std::size_t sparsity);

  std::size_t n_vars() const noexcept { return n_; }
  std::size_t sparsity() const noexcept { return k_; }
  /// C(N,K), or 0 when it does not fit in 64 bits (only possible when uncapped).
  std::uint64_t candidate_count() const noexcept { return count_; }

  friend bool operator==(const ProblemDims&, const ProblemDims&) = default;

 private:
  ProblemDims() = default;
  std::size_t n_ = 0;
  std::size_t k_ = 0;
  std::uint64_t count_ = 0;
};

/// Index ω of a K-subset in lexicographic order.
struct SupportIndex {
  std::uint64_t value = 0;
  friend auto operator<=>(const SupportIndex&, const SupportIndex&) = default;
};

/// Strictly increasing list of K distinct variable indices.
class SupportSet {
 public:
  SupportSet() = default;
  /// Throws DomainError unless members are strictly increasing.
  explicit SupportSet(std::vector<std::size_t> members);

  std::span<const std::size_t> members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool contains(std::size_t index) const noexcept;
  std::size_t operator[](std::size_t i) const { return members_[i]; }

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<std::size_t> members_;
};

/// A proper subset S̃ of a support, handed to the decoder as side information.
class RevealedSubset {
 public:
  RevealedSubset() = default;
  /// Throws DomainError unless `members` is sorted, contained in `support`,
  /// and strictly smaller than it.
  RevealedSubset(std::vector<std::size_t> members, const SupportSet& support);

  std::span<const std::size_t> members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }

 private:
  std::vector<std::size_t> members_;
};

/// β_S, aligned with the support order.
struct LatentCoefficients {
  std::vector<double> values;

  static LatentCoefficients ones(std::size_t k) { return {std::vector<double>(k, 1.0)}; }
  bool is_rademacher() const noexcept;
};

/// One measurement: a length-N design and its observation. Boolean designs
/// are stored as 0.0 / 1.0, binary observations likewise.
struct MeasurementStep {
  std::vector<double> x;
  double y = 0.0;
};

class MeasurementHistory {
 public:
  explicit MeasurementHistory(std::size_t n_vars) : n_(n_vars) {}

  void push(std::vector<double> x, double y);
  std::size_t n_vars() const noexcept { return n_; }
  std::size_t length() const noexcept { return steps_.size(); }
  bool empty() const noexcept { return steps_.empty(); }
  const MeasurementStep& operator[](std::size_t t) const { return steps_[t]; }
  std::span<const MeasurementStep> steps() const noexcept { return steps_; }

 private:
  std::size_t n_;
  std::vector<MeasurementStep> steps_;
};

struct RngSeed {
  std::uint64_t value = 0;
  friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

using Rng = std::mt19937_64;

/// SplitMix64 finaliser; used to derive independent per-trial streams.
std::uint64_t mix_seed(std::uint64_t x) noexcept;
/// Seed for stream `index` under `base`: base XOR mix(index).
RngSeed derive_seed(RngSeed base, std::uint64_t index) noexcept;
inline Rng make_rng(RngSeed seed) { return Rng(seed.value); }

/// Exact C(n,k) when it fits in 64 bits, otherwise 0.
std::uint64_t binomial_u64(std::uint64_t n, std::uint64_t k) noexcept;

/// ln C(n,k) via log-gamma; exactly 0 for k ∈ {0, n}.
double log_binom(std::uint64_t n, std::uint64_t k);

SupportSet unrank_support(const ProblemDims& dims, SupportIndex omega);
SupportIndex rank_support(const ProblemDims& dims, const SupportSet& s);

/// Uniform draw of ω ∈ [0, C(N,K)).
SupportIndex draw_support_index(const ProblemDims& dims, Rng& rng);
/// Uniform random K-subset. Goes through ω when C(N,K) fits in 64 bits and
/// through Floyd's sampler otherwise.
SupportSet draw_support(const ProblemDims& dims, Rng& rng);
/// Uniform random `size`-subset of `support`, sorted.
RevealedSubset draw_revealed_subset(const SupportSet& support, std::size_t size, Rng& rng);
/// IID ±1 with equal probability.
LatentCoefficients draw_rademacher(std::size_t k, Rng& rng);

}  // namespace sparsebound
