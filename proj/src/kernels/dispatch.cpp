#include <cstdlib>
#include <string>

#include "sparsebound/kernels.hpp"

namespace sparsebound::kernels {

namespace {

constexpr KernelSet kScalar{Isa::kScalar, detail::sum_squared_residual_scalar,
                            detail::combine_columns_scalar, detail::or_mismatch_count_scalar};

#if defined(SPARSEBOUND_HAVE_AVX2_TU)
constexpr KernelSet kAvx2{Isa::kAvx2, detail::sum_squared_residual_avx2,
                          detail::combine_columns_avx2, detail::or_mismatch_count_avx2};
#endif

}  // namespace

const KernelSet& scalar_kernels() noexcept { return kScalar; }

const KernelSet* avx2_kernels() noexcept {
#if defined(SPARSEBOUND_HAVE_AVX2_TU)
  return &kAvx2;
#else
  return nullptr;
#endif
}

bool cpu_has_avx2() noexcept {
#if defined(SPARSEBOUND_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelSet& select(std::string_view request) noexcept {
  if (request != "auto" && request != "avx2") return kScalar;
  const KernelSet* avx2 = avx2_kernels();
  if (avx2 != nullptr && cpu_has_avx2()) return *avx2;
  return kScalar;
}

const KernelSet& active() noexcept {
  static const KernelSet* chosen = [] {
    const char* env = std::getenv("SPARSEBOUND_SIMD");
    return &select(env != nullptr ? std::string_view(env) : std::string_view("auto"));
  }();
  return *chosen;
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::kAvx2:
      return "avx2";
    case Isa::kScalar:
      break;
  }
  return "scalar";
}

}  // namespace sparsebound::kernels
