#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sparsebound/core_types.hpp"
#include "sparsebound/kernels.hpp"
#include "sparsebound/observation_models.hpp"

namespace sparsebound {

/// Cap on the number of β sign patterns marginalised per candidate.
inline constexpr std::uint64_t kDefaultSignPatternCap = 1ULL << 20;

/// The history transposed for scoring: one length-T column per variable,
/// plus bit-packed columns for binary models.
class ColumnarHistory {
 public:
  ColumnarHistory(const MeasurementHistory& history, bool pack_bits);

  std::size_t steps() const noexcept { return t_; }
  std::size_t n_vars() const noexcept { return n_; }
  const double* column(std::size_t var) const noexcept { return values_.data() + var * t_; }
  std::span<const double> y() const noexcept { return y_; }
  std::size_t words() const noexcept { return words_; }
  const std::uint64_t* bit_column(std::size_t var) const noexcept {
    return bits_.data() + var * words_;
  }
  std::span<const std::uint64_t> y_bits() const noexcept { return y_bits_; }

 private:
  std::size_t n_;
  std::size_t t_;
  std::size_t words_ = 0;
  std::vector<double> values_;
  std::vector<double> y_;
  std::vector<std::uint64_t> bits_;
  std::vector<std::uint64_t> y_bits_;
};

/// log P(Y^T | X^T, S), with β marginalised uniformly over ±1 patterns for
/// the CS models. Uses the given kernel set.
double support_log_likelihood(const ColumnarHistory& columns, const ObservationModel& model,
                              const SupportSet& support, const kernels::KernelSet& kernels);

/// Same quantity evaluated step by step through ObservationModel::log_likelihood.
double support_log_likelihood_reference(const MeasurementHistory& history,
                                        const ObservationModel& model, const SupportSet& support);

struct MlDecodeOptions {
  std::uint64_t candidate_cap = kDefaultCandidateCap;
  std::uint64_t sign_pattern_cap = kDefaultSignPatternCap;
  const kernels::KernelSet* kernels = nullptr;  // nullptr: kernels::active()
};

/// Exhaustive maximum likelihood over the supports containing `revealed`.
/// Ties go to the smallest SupportIndex.
SupportIndex ml_decode(const MeasurementHistory& history, const ObservationModel& model,
                       const ProblemDims& dims, const RevealedSubset& revealed = {},
                       const MlDecodeOptions& options = {});

/// Items never seen in a negative test, ascending.
std::vector<std::size_t> comp_survivors(const MeasurementHistory& history);

/// Noiseless group testing: every item in a negative test is cleared; the
/// answer is the survivors when exactly K remain, otherwise nullopt.
std::optional<SupportIndex> comp_decode(const MeasurementHistory& history, const ProblemDims& dims);

}  // namespace sparsebound
