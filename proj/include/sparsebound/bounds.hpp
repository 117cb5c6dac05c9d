#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparsebound/core_types.hpp"
#include "sparsebound/infotheory.hpp"

namespace sparsebound {

/// kAsymptotic: T >= log C(N-j, K-j) / I_j as stated for the theorems.
/// kFiniteFano: keeps the one-bit (ln 2 nats) slack of the error-event
/// entropy, T >= (log C(N-j, K-j) - ln 2) / I_j, a literal finite-N inequality.
enum class BoundForm { kAsymptotic, kFiniteFano };
std::string to_string(BoundForm form);
BoundForm parse_bound_form(const std::string& text);

/// ln 2: the entropy of the binary error event, in nats.
double fano_slack(BoundForm form) noexcept;

/// Sample-count bound; `unbounded` when the information is zero but the
/// uncertainty is not.
struct TBound {
  double value = 0.0;
  bool unbounded = false;
  friend bool operator==(const TBound&, const TBound&) = default;
};

struct BoundTerm {
  std::size_t revealed_size = 0;  // j = |S̃|
  double numerator = 0.0;         // ln C(N-j, K-j), nats
  double mi = 0.0;                // I_j or Ī_j, nats
  TBound t_bound;
  friend bool operator==(const BoundTerm&, const BoundTerm&) = default;
};

struct BoundReport {
  std::vector<BoundTerm> per_subset_terms;
  TBound overall;
  std::size_t argmax_revealed_size = 0;
  BoundForm form = BoundForm::kAsymptotic;
  friend bool operator==(const BoundReport&, const BoundReport&) = default;
};

/// Nonadaptive bound from per-|S̃| information values (one entry for each
/// j in 0..K-1).
BoundReport nonadaptive_lower_bound(const ProblemDims& dims, const std::map<std::size_t, double>& mi_per_subset,
                                    BoundForm form);
/// Adaptive bound: same maximisation with the sequence-averaged information.
BoundReport adaptive_lower_bound(const ProblemDims& dims,
                                 const std::map<std::size_t, SequenceMiProfile>& avg_mi_per_subset,
                                 BoundForm form);

/// Bound for any binary-output model (group testing, 1-bit CS): the
/// information per measurement is at most H(Y) <= ln 2 for every j.
BoundReport binary_output_lower_bound(const ProblemDims& dims, BoundForm form);

/// max(0, 1 - (T·Ī + ln 2) / ln C(N-j, K-j)); 0 when the remaining support
/// is already determined.
double fano_error_lower_bound(std::uint64_t t, double avg_mi, std::size_t n, std::size_t k,
                              std::size_t revealed_size);

/// Eigenvalues of the d×d matrix with constant diagonal and constant
/// off-diagonal rho: [diag + (d-1)·rho, diag - rho (d-1 times)].
std::vector<double> circulant_eigenvalues(std::size_t d, double diag, double rho);

/// Per-step power shares P_t; nonnegative, summing to 1 within 1e-12.
class PowerAllocation {
 public:
  explicit PowerAllocation(std::vector<double> weights);
  static PowerAllocation uniform(std::size_t t);
  std::span<const double> weights() const noexcept { return weights_; }
  std::size_t steps() const noexcept { return weights_.size(); }

 private:
  PowerAllocation() = default;
  std::vector<double> weights_;
};

/// (1/T)·Σ_t ½ ln(1 + snr·(K-j)·N·P_t / K).
double sequence_mi_cap(double snr, std::size_t n, std::size_t k, std::size_t revealed_size,
                       const PowerAllocation& allocation);

struct CsFeasibilityTerm {
  std::size_t i = 0;  // K - |S̃|
  double lhs = 0.0;   // T·½ ln(1 + snr·i·N/(K·T))
  double rhs = 0.0;   // ln C(N-K+i, i), minus ln 2 in the finite form
  bool satisfied = false;
};

struct CsFeasibilityReport {
  std::vector<CsFeasibilityTerm> per_i_terms;
  bool feasible = false;
};

CsFeasibilityReport cs_feasibility(std::uint64_t t, double snr, std::size_t n, std::size_t k,
                                   BoundForm form);

inline constexpr std::uint64_t kDefaultTCap = 10'000'000;

/// Smallest T <= cap with cs_feasibility true, or nullopt.
std::optional<std::uint64_t> min_feasible_t(double snr, std::size_t n, std::size_t k,
                                            BoundForm form, std::uint64_t cap = kDefaultTCap);

/// 2K·(ln(N-K+1) - slack)/N, floored at 0: below it, the i = 1 condition
/// fails for every T since T·½ ln(1 + snr·N/(K·T)) < ½·snr·N/K.
double snr_necessary(std::size_t n, std::size_t k, BoundForm form);

}  // namespace sparsebound
