#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "calimetr/common.hpp"
#include "calimetr/simd.hpp"
#include "simd/vecmath.hpp"

// AVX2 variants: 4-lane bodies over each row, poly-scalar tails. Compiled
// only into builds where the compiler supports -mavx2 -mfma; selected at
// runtime behind a CPUID check.

namespace calimetr::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sw = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sw));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d sw = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, sw));
}

inline __m256d pow2_from_epi32(__m128i e) {
  __m256i e64 = _mm256_cvtepi32_epi64(e);
  e64 = _mm256_add_epi64(e64, _mm256_set1_epi64x(1023));
  e64 = _mm256_slli_epi64(e64, 52);
  return _mm256_castsi256_pd(e64);
}

// exp over 4 lanes; fdlibm reduction, saturating outside the finite range.
inline __m256d vec_exp(__m256d x) {
  using namespace detail;
  __m256d kd = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kInvLn2)),
                               _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d hi = _mm256_fnmadd_pd(kd, _mm256_set1_pd(kLn2Hi), x);
  __m256d lo = _mm256_mul_pd(kd, _mm256_set1_pd(kLn2Lo));
  __m256d r = _mm256_sub_pd(hi, lo);
  __m256d t = _mm256_mul_pd(r, r);

  __m256d p = _mm256_set1_pd(kExpP5);
  p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(kExpP4));
  p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(kExpP3));
  p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(kExpP2));
  p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(kExpP1));
  __m256d c = _mm256_fnmadd_pd(t, p, r);

  __m256d rc = _mm256_mul_pd(r, c);
  __m256d frac = _mm256_div_pd(rc, _mm256_sub_pd(_mm256_set1_pd(2.0), c));
  __m256d y = _mm256_sub_pd(_mm256_set1_pd(1.0), _mm256_sub_pd(_mm256_sub_pd(lo, frac), hi));

  // scale by 2^k in two stages so denormal results survive
  __m128i ki = _mm256_cvtpd_epi32(kd);
  __m128i e1 = _mm_min_epi32(_mm_max_epi32(ki, _mm_set1_epi32(-1021)), _mm_set1_epi32(1023));
  __m128i e2 = _mm_sub_epi32(ki, e1);
  e2 = _mm_min_epi32(_mm_max_epi32(e2, _mm_set1_epi32(-1022)), _mm_set1_epi32(1023));
  y = _mm256_mul_pd(_mm256_mul_pd(y, pow2_from_epi32(e1)), pow2_from_epi32(e2));

  __m256d over = _mm256_cmp_pd(x, _mm256_set1_pd(kExpOverflow), _CMP_GT_OQ);
  __m256d under = _mm256_cmp_pd(x, _mm256_set1_pd(kExpUnderflow), _CMP_LT_OQ);
  y = _mm256_blendv_pd(y, _mm256_set1_pd(HUGE_VAL), over);
  return _mm256_andnot_pd(under, y);
}

// log over 4 lanes. Precondition: positive normal lanes.
inline __m256d vec_log(__m256d x) {
  using namespace detail;
  __m256i bits = _mm256_castpd_si256(x);
  __m256i biased = _mm256_srli_epi64(bits, 52);
  __m256i mag = _mm256_add_epi64(biased, _mm256_set1_epi64x(0x4330000000000000LL));
  __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(mag), _mm256_set1_pd(0x1p52 + 1023.0));

  __m256i mant = _mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL));
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(mant, _mm256_set1_epi64x(0x3FF0000000000000LL)));
  __m256d ge = _mm256_cmp_pd(m, _mm256_set1_pd(kSqrt2), _CMP_GE_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), ge);
  e = _mm256_add_pd(e, _mm256_and_pd(ge, _mm256_set1_pd(1.0)));

  __m256d f = _mm256_sub_pd(m, _mm256_set1_pd(1.0));
  __m256d s = _mm256_div_pd(f, _mm256_add_pd(_mm256_set1_pd(2.0), f));
  __m256d z = _mm256_mul_pd(s, s);
  __m256d w = _mm256_mul_pd(z, z);
  __m256d q1 = _mm256_fmadd_pd(w, _mm256_set1_pd(kLg6), _mm256_set1_pd(kLg4));
  q1 = _mm256_fmadd_pd(w, q1, _mm256_set1_pd(kLg2));
  __m256d t1 = _mm256_mul_pd(w, q1);
  __m256d q2 = _mm256_fmadd_pd(w, _mm256_set1_pd(kLg7), _mm256_set1_pd(kLg5));
  q2 = _mm256_fmadd_pd(w, q2, _mm256_set1_pd(kLg3));
  q2 = _mm256_fmadd_pd(w, q2, _mm256_set1_pd(kLg1));
  __m256d t2 = _mm256_mul_pd(z, q2);
  __m256d r = _mm256_add_pd(t2, t1);
  __m256d hfsq = _mm256_mul_pd(_mm256_set1_pd(0.5), _mm256_mul_pd(f, f));
  __m256d inner = _mm256_fmadd_pd(s, _mm256_add_pd(hfsq, r), _mm256_mul_pd(e, _mm256_set1_pd(kLn2Lo)));
  return _mm256_fmsub_pd(e, _mm256_set1_pd(kLn2Hi),
                         _mm256_sub_pd(_mm256_sub_pd(hfsq, inner), f));
}

void softmax_rows_avx2(const double* logits, double* probs, std::size_t n, std::size_t k,
                       double inv_temp) {
  const __m256d vt = _mm256_set1_pd(inv_temp);
  for (std::size_t i = 0; i < n; ++i) {
    const double* in = logits + i * k;
    double* out = probs + i * k;

    double row_max;
    std::size_t j;
    if (k >= 4) {
      __m256d vmax = _mm256_mul_pd(_mm256_loadu_pd(in), vt);
      for (j = 4; j + 4 <= k; j += 4)
        vmax = _mm256_max_pd(vmax, _mm256_mul_pd(_mm256_loadu_pd(in + j), vt));
      row_max = hmax(vmax);
    } else {
      row_max = in[0] * inv_temp;
      j = 1;
    }
    for (; j < k; ++j) row_max = std::max(row_max, in[j] * inv_temp);

    const __m256d vm = _mm256_set1_pd(row_max);
    __m256d vsum = _mm256_setzero_pd();
    double tail_sum = 0.0;
    for (j = 0; j + 4 <= k; j += 4) {
      __m256d ex = vec_exp(_mm256_fmsub_pd(_mm256_loadu_pd(in + j), vt, vm));
      _mm256_storeu_pd(out + j, ex);
      vsum = _mm256_add_pd(vsum, ex);
    }
    for (; j < k; ++j) {
      out[j] = detail::poly_exp(in[j] * inv_temp - row_max);
      tail_sum += out[j];
    }

    const double inv_sum = 1.0 / (hsum(vsum) + tail_sum);
    const __m256d vs = _mm256_set1_pd(inv_sum);
    for (j = 0; j + 4 <= k; j += 4)
      _mm256_storeu_pd(out + j, _mm256_mul_pd(_mm256_loadu_pd(out + j), vs));
    for (; j < k; ++j) out[j] *= inv_sum;
  }
}

void entropy_rows_avx2(const double* probs, double* out, std::size_t n, std::size_t k) {
  const double inv_log_k = 1.0 / std::log(static_cast<double>(k));
  const __m256d vfloor = _mm256_set1_pd(kProbFloor);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = probs + i * k;
    __m256d vacc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= k; j += 4) {
      __m256d p = _mm256_loadu_pd(row + j);
      __m256d l = vec_log(_mm256_max_pd(p, vfloor));
      vacc = _mm256_fnmadd_pd(p, l, vacc);
    }
    double h = hsum(vacc);
    for (; j < k; ++j) h -= row[j] * detail::poly_log(std::max(row[j], kProbFloor));
    out[i] = std::clamp(h * inv_log_k, 0.0, 1.0);
  }
}

void confidence_rows_avx2(const double* probs, double* out, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = probs + i * k;
    double m;
    std::size_t j;
    if (k >= 4) {
      __m256d vmax = _mm256_loadu_pd(row);
      for (j = 4; j + 4 <= k; j += 4) vmax = _mm256_max_pd(vmax, _mm256_loadu_pd(row + j));
      m = hmax(vmax);
    } else {
      m = row[0];
      j = 1;
    }
    for (; j < k; ++j) m = std::max(m, row[j]);
    out[i] = m;
  }
}

void neglog_label_rows_avx2(const double* probs, const std::int32_t* labels, double* out,
                            std::size_t n, std::size_t k) {
  constexpr std::size_t kBlock = 256;
  double buf[kBlock];
  const __m256d sign = _mm256_set1_pd(-0.0);
  for (std::size_t base = 0; base < n; base += kBlock) {
    const std::size_t count = std::min(kBlock, n - base);
    for (std::size_t i = 0; i < count; ++i) {
      const double p = probs[(base + i) * k + static_cast<std::size_t>(labels[base + i])];
      buf[i] = std::clamp(p, kProbFloor, 1.0);
    }
    std::size_t j = 0;
    for (; j + 4 <= count; j += 4) {
      __m256d l = vec_log(_mm256_loadu_pd(buf + j));
      _mm256_storeu_pd(out + base + j, _mm256_xor_pd(l, sign));
    }
    for (; j < count; ++j) out[base + j] = -detail::poly_log(buf[j]);
  }
}

void brier_rows_avx2(const double* probs, const std::int32_t* labels, double* out, std::size_t n,
                     std::size_t k) {
  // sum_j (p - y)^2 == sum_j p^2 - 2*p_label + 1 for one-hot targets
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = probs + i * k;
    __m256d vacc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= k; j += 4) {
      __m256d p = _mm256_loadu_pd(row + j);
      vacc = _mm256_fmadd_pd(p, p, vacc);
    }
    double acc = hsum(vacc);
    for (; j < k; ++j) acc += row[j] * row[j];
    const double p_label = row[static_cast<std::size_t>(labels[i])];
    out[i] = acc - 2.0 * p_label + 1.0;
  }
}

void kl_rows_avx2(const double* p, const double* q, double* out, std::size_t n, std::size_t k) {
  const __m256d vfloor = _mm256_set1_pd(kProbFloor);
  for (std::size_t i = 0; i < n; ++i) {
    const double* pr = p + i * k;
    const double* qr = q + i * k;
    __m256d vacc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= k; j += 4) {
      __m256d vp = _mm256_loadu_pd(pr + j);
      __m256d lp = vec_log(_mm256_max_pd(vp, vfloor));
      __m256d lq = vec_log(_mm256_max_pd(_mm256_loadu_pd(qr + j), vfloor));
      vacc = _mm256_fmadd_pd(vp, _mm256_sub_pd(lp, lq), vacc);
    }
    double acc = hsum(vacc);
    for (; j < k; ++j) {
      acc += pr[j] * (detail::poly_log(std::max(pr[j], kProbFloor)) -
                      detail::poly_log(std::max(qr[j], kProbFloor)));
    }
    out[i] = acc;
  }
}

void log_clamped_avx2(const double* p, double* out, std::size_t len) {
  const __m256d vfloor = _mm256_set1_pd(kProbFloor);
  std::size_t j = 0;
  for (; j + 4 <= len; j += 4)
    _mm256_storeu_pd(out + j, vec_log(_mm256_max_pd(_mm256_loadu_pd(p + j), vfloor)));
  for (; j < len; ++j) out[j] = detail::poly_log(std::max(p[j], kProbFloor));
}

}  // namespace

const Kernels* avx2_kernels_or_null() {
  static const Kernels table{
      "avx2",
      softmax_rows_avx2,
      entropy_rows_avx2,
      confidence_rows_avx2,
      neglog_label_rows_avx2,
      brier_rows_avx2,
      kl_rows_avx2,
      log_clamped_avx2,
  };
  return &table;
}

}  // namespace calimetr::simd
