#include <bit>

#include "sparsebound/kernels.hpp"

namespace sparsebound::kernels::detail {

double sum_squared_residual_scalar(std::span<const double> y, std::span<const double* const> cols,
                                   std::span<const double> coeffs) {
  double acc = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    double pred = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) pred += coeffs[k] * cols[k][t];
    const double r = y[t] - pred;
    acc += r * r;
  }
  return acc;
}

void combine_columns_scalar(std::span<const double* const> cols, std::span<const double> coeffs,
                            std::span<double> out) {
  for (std::size_t t = 0; t < out.size(); ++t) {
    double pred = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) pred += coeffs[k] * cols[k][t];
    out[t] = pred;
  }
}

std::uint64_t or_mismatch_count_scalar(std::span<const std::uint64_t* const> cols,
                                       std::span<const std::uint64_t> y) {
  std::uint64_t mismatches = 0;
  for (std::size_t w = 0; w < y.size(); ++w) {
    std::uint64_t pooled = 0;
    for (const std::uint64_t* col : cols) pooled |= col[w];
    mismatches += static_cast<std::uint64_t>(std::popcount(pooled ^ y[w]));
  }
  return mismatches;
}

}  // namespace sparsebound::kernels::detail
