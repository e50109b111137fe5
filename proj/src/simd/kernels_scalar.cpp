#include <algorithm>
#include <cmath>

#include "calimetr/common.hpp"
#include "calimetr/simd.hpp"

// Reference kernels: plain loops over libm. These define the semantics the
// vector variants are tested against.

namespace calimetr::simd {
namespace {

void softmax_rows_scalar(const double* logits, double* probs, std::size_t n, std::size_t k,
                         double inv_temp) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* in = logits + i * k;
    double* out = probs + i * k;
    double m = in[0] * inv_temp;
    for (std::size_t j = 1; j < k; ++j) m = std::max(m, in[j] * inv_temp);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      out[j] = std::exp(in[j] * inv_temp - m);
      sum += out[j];
    }
    double inv_sum = 1.0 / sum;
    for (std::size_t j = 0; j < k; ++j) out[j] *= inv_sum;
  }
}

void entropy_rows_scalar(const double* probs, double* out, std::size_t n, std::size_t k) {
  const double inv_log_k = 1.0 / std::log(static_cast<double>(k));
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = probs + i * k;
    double h = 0.0;
    for (std::size_t j = 0; j < k; ++j) h -= row[j] * std::log(std::max(row[j], kProbFloor));
    out[i] = std::clamp(h * inv_log_k, 0.0, 1.0);
  }
}

void confidence_rows_scalar(const double* probs, double* out, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = probs + i * k;
    double m = row[0];
    for (std::size_t j = 1; j < k; ++j) m = std::max(m, row[j]);
    out[i] = m;
  }
}

void neglog_label_rows_scalar(const double* probs, const std::int32_t* labels, double* out,
                              std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < n; ++i) {
    const double p = probs[i * k + static_cast<std::size_t>(labels[i])];
    out[i] = -std::log(std::clamp(p, kProbFloor, 1.0));
  }
}

void brier_rows_scalar(const double* probs, const std::int32_t* labels, double* out, std::size_t n,
                       std::size_t k) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = probs + i * k;
    const std::size_t y = static_cast<std::size_t>(labels[i]);
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double d = row[j] - (j == y ? 1.0 : 0.0);
      acc += d * d;
    }
    out[i] = acc;
  }
}

void kl_rows_scalar(const double* p, const double* q, double* out, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* pr = p + i * k;
    const double* qr = q + i * k;
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      acc += pr[j] * (std::log(std::max(pr[j], kProbFloor)) - std::log(std::max(qr[j], kProbFloor)));
    }
    out[i] = acc;
  }
}

void log_clamped_scalar(const double* p, double* out, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) out[i] = std::log(std::max(p[i], kProbFloor));
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels table{
      "scalar",
      softmax_rows_scalar,
      entropy_rows_scalar,
      confidence_rows_scalar,
      neglog_label_rows_scalar,
      brier_rows_scalar,
      kl_rows_scalar,
      log_clamped_scalar,
  };
  return table;
}

}  // namespace calimetr::simd
