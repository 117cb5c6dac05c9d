#pragma once

// Inner loops of exhaustive likelihood scoring. Each candidate support is
// scored against all T measurements at once, with the design stored
// column-major (one contiguous length-T column per variable), so the loops
// run over t and vectorise directly.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The active set is chosen once at runtime from CPUID and the
// SPARSEBOUND_SIMD environment variable (scalar | avx2 | auto).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace sparsebound::kernels {

enum class Isa { kScalar, kAvx2 };

/// Σ_t (y[t] - Σ_k coeffs[k]·cols[k][t])². Every column has y.size() entries.
using SumSquaredResidualFn = double (*)(std::span<const double> y,
                                        std::span<const double* const> cols,
                                        std::span<const double> coeffs);

/// out[t] = Σ_k coeffs[k]·cols[k][t], accumulated in k order.
using CombineColumnsFn = void (*)(std::span<const double* const> cols,
                                  std::span<const double> coeffs, std::span<double> out);

/// popcount((OR_k cols[k]) XOR y) over y.size() 64-bit words. Padding bits
/// beyond T must be zero in every input.
using OrMismatchCountFn = std::uint64_t (*)(std::span<const std::uint64_t* const> cols,
                                            std::span<const std::uint64_t> y);

struct KernelSet {
  Isa isa;
  SumSquaredResidualFn sum_squared_residual;
  CombineColumnsFn combine_columns;
  OrMismatchCountFn or_mismatch_count;
};

const KernelSet& scalar_kernels() noexcept;
/// nullptr when the library was built without the AVX2 translation unit.
const KernelSet* avx2_kernels() noexcept;
bool cpu_has_avx2() noexcept;

/// The process-wide selection, resolved on first call.
const KernelSet& active() noexcept;
/// kScalar also when an explicit request cannot be honoured.
const KernelSet& select(std::string_view request) noexcept;
std::string_view isa_name(Isa isa) noexcept;

namespace detail {
double sum_squared_residual_scalar(std::span<const double>, std::span<const double* const>,
                                   std::span<const double>);
void combine_columns_scalar(std::span<const double* const>, std::span<const double>,
                            std::span<double>);
std::uint64_t or_mismatch_count_scalar(std::span<const std::uint64_t* const>,
                                       std::span<const std::uint64_t>);

double sum_squared_residual_avx2(std::span<const double>, std::span<const double* const>,
                                 std::span<const double>);
void combine_columns_avx2(std::span<const double* const>, std::span<const double>,
                          std::span<double>);
std::uint64_t or_mismatch_count_avx2(std::span<const std::uint64_t* const>,
                                     std::span<const std::uint64_t>);
}  // namespace detail

}  // namespace sparsebound::kernels
