#pragma once

#include <cstddef>
#include <cstdint>

namespace calimetr::simd {

// Batched kernels over row-major [n x k] double matrices. Each entry has a
// scalar reference implementation (libm) and, on x86-64 builds, an AVX2
// variant; the active table is picked once at startup from CPUID. Variants
// are equivalence-tested against the reference, not bit-identical: the
// vector exp/log carry ~1 ulp error.
struct Kernels {
  const char* name;

  // probs[i,:] = softmax(logits[i,:] * inv_temp), max-shifted per row.
  void (*softmax_rows)(const double* logits, double* probs, std::size_t n, std::size_t k,
                       double inv_temp);

  // out[i] = -(1/log k) * sum_j p_ij * log(max(p_ij, kProbFloor)), clamped to [0,1].
  void (*entropy_rows)(const double* probs, double* out, std::size_t n, std::size_t k);

  // out[i] = max_j probs[i,j]
  void (*confidence_rows)(const double* probs, double* out, std::size_t n, std::size_t k);

  // out[i] = -log(max(probs[i, labels[i]], kProbFloor))
  void (*neglog_label_rows)(const double* probs, const std::int32_t* labels, double* out,
                            std::size_t n, std::size_t k);

  // out[i] = sum_j (probs[i,j] - [j == labels[i]])^2
  void (*brier_rows)(const double* probs, const std::int32_t* labels, double* out, std::size_t n,
                     std::size_t k);

  // out[i] = sum_j p_ij * (log(max(p_ij, floor)) - log(max(q_ij, floor)))
  void (*kl_rows)(const double* p, const double* q, double* out, std::size_t n, std::size_t k);

  // out[j] = log(max(p[j], kProbFloor)) over a flat array.
  void (*log_clamped)(const double* p, double* out, std::size_t len);
};

const Kernels& scalar_kernels();

// Null when the binary was built without AVX2 support.
const Kernels* avx2_kernels_or_null();

bool cpu_has_avx2();

// The table everything routes through.
const Kernels& active_kernels();

}  // namespace calimetr::simd
