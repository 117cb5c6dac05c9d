#pragma once

#include <cstdint>

#include "json.hpp"
#include "sparsebound/core_types.hpp"

namespace sparsebound {

/// Outcome of the Fano-consistency suite. `report` holds every checked row;
/// its only nondeterministic field is "wall_time_seconds".
struct VerifyReport {
  nlohmann::json report;
  std::size_t checks = 0;
  std::size_t violations = 0;
  bool passed() const noexcept { return violations == 0; }
};

/// Noiseless group testing, N=10, K=2, Bernoulli(p) for p in {0.3, 0.5},
/// T = 1..12, 2000 trials, revealed sizes 0 and 1, ML decoding: every row must
/// satisfy empirical P_e >= Fano bound - 3 Wilson half-widths, and every MI
/// value must stay under ln 2. Also checks the ln 2 adaptive bound against
/// log2 C(N,K).
VerifyReport run_verify(RngSeed seed, std::uint64_t trials = 2000);

}  // namespace sparsebound
