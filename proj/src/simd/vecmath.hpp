#pragma once

// Polynomial exp/log used by the AVX2 kernels, in scalar form for row tails.
// The algorithms are the classic fdlibm reductions; accuracy is ~1 ulp over
// the ranges this library feeds them (log: positive normals, exp: anything,
// with over/underflow saturating). The scalar *reference* kernels do not use
// these; they call libm, which is what the equivalence tests compare against.

#include <bit>
#include <cmath>
#include <cstdint>

namespace calimetr::simd::detail {

inline constexpr double kExpOverflow = 7.09782712893383973096e+02;
inline constexpr double kExpUnderflow = -7.45133219101941108420e+02;
inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;
inline constexpr double kInvLn2 = 1.44269504088896338700e+00;

inline constexpr double kExpP1 = 1.66666666666666019037e-01;
inline constexpr double kExpP2 = -2.77777777770155933842e-03;
inline constexpr double kExpP3 = 6.61375632143793436117e-05;
inline constexpr double kExpP4 = -1.65339022054652515390e-06;
inline constexpr double kExpP5 = 4.13813679705723846039e-08;

inline constexpr double kLg1 = 6.666666666666735130e-01;
inline constexpr double kLg2 = 3.999999999940941908e-01;
inline constexpr double kLg3 = 2.857142874366239149e-01;
inline constexpr double kLg4 = 2.222219843214978396e-01;
inline constexpr double kLg5 = 1.818357216161805012e-01;
inline constexpr double kLg6 = 1.531383769920937332e-01;
inline constexpr double kLg7 = 1.479819860511658591e-01;
inline constexpr double kSqrt2 = 1.41421356237309514547e+00;

// 2^e for e in [-1022, 1023], built from the exponent bits.
inline double pow2i(int e) {
  return std::bit_cast<double>(static_cast<std::uint64_t>(e + 1023) << 52);
}

// y * 2^k with two-stage scaling so denormal results stay correctly rounded.
inline double scale_pow2(double y, long k) {
  if (k > 1023) return y * pow2i(1023) * pow2i(static_cast<int>(k > 2046 ? 1023 : k - 1023));
  if (k >= -1021) return y * pow2i(static_cast<int>(k));
  long rem = k + 1021;
  if (rem < -1022) return 0.0;
  return y * pow2i(-1021) * pow2i(static_cast<int>(rem));
}

inline double poly_exp(double x) {
  if (x > kExpOverflow) return HUGE_VAL;
  if (x < kExpUnderflow) return 0.0;
  if (std::fabs(x) < 0x1p-28) return 1.0 + x;

  double kd = std::nearbyint(x * kInvLn2);
  double hi = x - kd * kLn2Hi;
  double lo = kd * kLn2Lo;
  double r = hi - lo;
  double t = r * r;
  double c = r - t * (kExpP1 + t * (kExpP2 + t * (kExpP3 + t * (kExpP4 + t * kExpP5))));
  double y = 1.0 - ((lo - (r * c) / (2.0 - c)) - hi);
  return scale_pow2(y, static_cast<long>(kd));
}

// Precondition: x is a positive normal double.
inline double poly_log(double x) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  long e = static_cast<long>((bits >> 52) & 0x7ff) - 1023;
  double m = std::bit_cast<double>((bits & 0x000FFFFFFFFFFFFFULL) | 0x3FF0000000000000ULL);
  if (m >= kSqrt2) {
    m *= 0.5;
    e += 1;
  }
  double f = m - 1.0;
  double s = f / (2.0 + f);
  double z = s * s;
  double w = z * z;
  double t1 = w * (kLg2 + w * (kLg4 + w * kLg6));
  double t2 = z * (kLg1 + w * (kLg3 + w * (kLg5 + w * kLg7)));
  double r = t2 + t1;
  double hfsq = 0.5 * f * f;
  double dk = static_cast<double>(e);
  return dk * kLn2Hi - ((hfsq - (s * (hfsq + r) + dk * kLn2Lo)) - f);
}

}  // namespace calimetr::simd::detail
