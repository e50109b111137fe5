#include "calimetr/simd.hpp"

namespace calimetr::simd {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

#ifndef CALIMETR_ENABLE_AVX2
const Kernels* avx2_kernels_or_null() { return nullptr; }
#endif

const Kernels& active_kernels() {
  static const Kernels* chosen = [] {
    if (cpu_has_avx2()) {
      if (const Kernels* table = avx2_kernels_or_null()) return table;
    }
    return &scalar_kernels();
  }();
  return *chosen;
}

}  // namespace calimetr::simd
