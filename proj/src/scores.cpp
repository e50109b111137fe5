#include "calimetr/scores.hpp"

#include <algorithm>
#include <cmath>

#include "calimetr/simd.hpp"

namespace calimetr {

const char* to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::entropy: return "entropy";
    case ScoreKind::variation_ratio: return "variation_ratio";
    case ScoreKind::cross_entropy: return "cross_entropy";
    case ScoreKind::confidence: return "confidence";
  }
  return "unknown";
}

double normalized_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) h -= v * std::log(std::max(v, kProbFloor));
  return std::clamp(h / std::log(static_cast<double>(p.size())), 0.0, 1.0);
}

double variation_ratio(std::span<const double> p) {
  double m = p[0];
  for (double v : p) m = std::max(m, v);
  return 1.0 - m;
}

double cross_entropy_instance(std::span<const double> p, std::int32_t label) {
  return -std::log(std::clamp(p[static_cast<std::size_t>(label)], kProbFloor, 1.0));
}

ScoreVector score_all(const PredictionSet& set, ScoreKind kind) {
  require_validated(set);
  const Matrix& probs = *set.probs;
  const std::size_t n = probs.rows;
  const std::size_t k = probs.cols;
  const auto& kernels = simd::active_kernels();

  ScoreVector out{std::vector<double>(n), kind};
  switch (kind) {
    case ScoreKind::entropy:
      kernels.entropy_rows(probs.data.data(), out.values.data(), n, k);
      break;
    case ScoreKind::confidence:
      kernels.confidence_rows(probs.data.data(), out.values.data(), n, k);
      break;
    case ScoreKind::variation_ratio:
      kernels.confidence_rows(probs.data.data(), out.values.data(), n, k);
      for (double& v : out.values) v = 1.0 - v;
      break;
    case ScoreKind::cross_entropy:
      kernels.neglog_label_rows(probs.data.data(), set.labels.data(), out.values.data(), n, k);
      break;
    default:
      fail(ErrorCode::UnknownKind, "unsupported score kind");
  }
  return out;
}

double nll(const PredictionSet& set) {
  ScoreVector ce = score_all(set, ScoreKind::cross_entropy);
  double sum = 0.0;
  for (double v : ce.values) sum += v;
  return sum / static_cast<double>(ce.values.size());
}

double brier(const PredictionSet& set) {
  require_validated(set);
  const Matrix& probs = *set.probs;
  std::vector<double> per_instance(probs.rows);
  simd::active_kernels().brier_rows(probs.data.data(), set.labels.data(), per_instance.data(),
                                    probs.rows, probs.cols);
  double sum = 0.0;
  for (double v : per_instance) sum += v;
  return sum / static_cast<double>(per_instance.size());
}

}  // namespace calimetr
