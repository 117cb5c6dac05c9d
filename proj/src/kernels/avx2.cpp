// Compiled with -mavx2; only reached after cpu_has_avx2() succeeds.

#include <immintrin.h>

#include "sparsebound/kernels.hpp"

namespace sparsebound::kernels::detail {

namespace {

// Nibble-lookup population count (Mula): per-byte counts via pshufb, folded
// into four 64-bit lanes with psadbw.
inline __m256i popcount_epi64(__m256i v) {
  const __m256i lookup = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,
                                          0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  const __m256i lo = _mm256_and_si256(v, low_mask);
  const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
  const __m256i counts =
      _mm256_add_epi8(_mm256_shuffle_epi8(lookup, lo), _mm256_shuffle_epi8(lookup, hi));
  return _mm256_sad_epu8(counts, _mm256_setzero_si256());
}

inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

}  // namespace

double sum_squared_residual_avx2(std::span<const double> y, std::span<const double* const> cols,
                                 std::span<const double> coeffs) {
  const std::size_t n = y.size();
  const std::size_t k_count = cols.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t t = 0;
  for (; t + 4 <= n; t += 4) {
    __m256d pred = _mm256_setzero_pd();
    for (std::size_t k = 0; k < k_count; ++k) {
      const __m256d c = _mm256_set1_pd(coeffs[k]);
      pred = _mm256_add_pd(pred, _mm256_mul_pd(c, _mm256_loadu_pd(cols[k] + t)));
    }
    const __m256d r = _mm256_sub_pd(_mm256_loadu_pd(y.data() + t), pred);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(r, r));
  }
  double total = horizontal_sum(acc);
  for (; t < n; ++t) {
    double pred = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) pred += coeffs[k] * cols[k][t];
    const double r = y[t] - pred;
    total += r * r;
  }
  return total;
}

void combine_columns_avx2(std::span<const double* const> cols, std::span<const double> coeffs,
                          std::span<double> out) {
  const std::size_t n = out.size();
  const std::size_t k_count = cols.size();
  std::size_t t = 0;
  for (; t + 4 <= n; t += 4) {
    __m256d pred = _mm256_setzero_pd();
    for (std::size_t k = 0; k < k_count; ++k) {
      const __m256d c = _mm256_set1_pd(coeffs[k]);
      pred = _mm256_add_pd(pred, _mm256_mul_pd(c, _mm256_loadu_pd(cols[k] + t)));
    }
    _mm256_storeu_pd(out.data() + t, pred);
  }
  for (; t < n; ++t) {
    double pred = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) pred += coeffs[k] * cols[k][t];
    out[t] = pred;
  }
}

std::uint64_t or_mismatch_count_avx2(std::span<const std::uint64_t* const> cols,
                                     std::span<const std::uint64_t> y) {
  const std::size_t words = y.size();
  __m256i acc = _mm256_setzero_si256();
  std::size_t w = 0;
  for (; w + 4 <= words; w += 4) {
    __m256i pooled = _mm256_setzero_si256();
    for (const std::uint64_t* col : cols) {
      pooled = _mm256_or_si256(
          pooled, _mm256_loadu_si256(reinterpret_cast<const __m256i*>(col + w)));
    }
    const __m256i diff = _mm256_xor_si256(
        pooled, _mm256_loadu_si256(reinterpret_cast<const __m256i*>(y.data() + w)));
    acc = _mm256_add_epi64(acc, popcount_epi64(diff));
  }
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::uint64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; w < words; ++w) {
    std::uint64_t pooled = 0;
    for (const std::uint64_t* col : cols) pooled |= col[w];
    total += static_cast<std::uint64_t>(__builtin_popcountll(pooled ^ y[w]));
  }
  return total;
}

}  // namespace sparsebound::kernels::detail
