#include "calimetr/reliability.hpp"

#include <algorithm>
#include <cmath>

#include "calimetr/scores.hpp"

namespace calimetr {

namespace {

std::size_t bin_index(double x, int m_bins) {
  x = std::clamp(x, 0.0, 1.0);
  auto idx = static_cast<std::size_t>(x * static_cast<double>(m_bins));
  return std::min(idx, static_cast<std::size_t>(m_bins - 1));
}

double skewness_or_zero(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double m2 = 0.0, m3 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(values.size());
  m3 /= static_cast<double>(values.size());
  if (m2 <= 0.0) return 0.0;
  return m3 / std::pow(m2, 1.5);
}

ReliabilityCurve bin_stream(const PredictionSet& set, const BinningConfig& cfg,
                            std::span<const std::size_t> subset, ReliabilityMode mode) {
  require_validated(set);
  check_binning(cfg);

  const ScoreVector measure = score_all(
      set, mode == ReliabilityMode::confidence ? ScoreKind::confidence : ScoreKind::entropy);
  const Matrix& probs = *set.probs;

  const int m = cfg.m_bins;
  std::vector<std::size_t> counts(m, 0);
  std::vector<double> measure_sums(m, 0.0);
  std::vector<std::size_t> positives(m, 0);
  std::vector<double> stream;

  auto add_instance = [&](std::size_t i) {
    const double x = measure.values[i];
    const std::size_t b = bin_index(x, m);
    const bool correct = argmax_row(probs.row_span(i)) == static_cast<std::size_t>(set.labels[i]);
    const bool positive = mode == ReliabilityMode::confidence ? correct : !correct;
    counts[b] += 1;
    measure_sums[b] += x;
    positives[b] += positive ? 1 : 0;
    stream.push_back(x);
  };

  if (subset.empty()) {
    for (std::size_t i = 0; i < set.size(); ++i) add_instance(i);
  } else {
    stream.reserve(subset.size());
    for (std::size_t i : subset) add_instance(i);
  }

  ReliabilityCurve curve;
  curve.mode = mode;
  curve.skewness = skewness_or_zero(stream);
  curve.bins.resize(m);
  const double width = 1.0 / static_cast<double>(m);
  for (int b = 0; b < m; ++b) {
    BinStats& bin = curve.bins[b];
    bin.lo = static_cast<double>(b) * width;
    bin.hi = (b == m - 1) ? 1.0 : static_cast<double>(b + 1) * width;
    bin.count = counts[b];
    bin.empty = counts[b] == 0;
    if (!bin.empty) {
      bin.mean_measure = measure_sums[b] / static_cast<double>(counts[b]);
      bin.outcome_rate = static_cast<double>(positives[b]) / static_cast<double>(counts[b]);
    }
  }
  return curve;
}

double weighted_gap(const ReliabilityCurve& curve) {
  std::size_t total = 0;
  for (const BinStats& bin : curve.bins) total += bin.count;
  if (total == 0) return 0.0;
  double acc = 0.0;
  for (const BinStats& bin : curve.bins) {
    if (bin.empty) continue;
    acc += static_cast<double>(bin.count) / static_cast<double>(total) *
           std::fabs(bin.outcome_rate - bin.mean_measure);
  }
  return acc;
}

// Exact area of |f(x) - x| over one polyline segment.
double segment_gap_area(double x0, double y0, double x1, double y1) {
  const double w = x1 - x0;
  if (w <= 0.0) return 0.0;
  const double d0 = y0 - x0;
  const double d1 = y1 - x1;
  if (d0 * d1 >= 0.0) return w * (std::fabs(d0) + std::fabs(d1)) * 0.5;
  const double t = d0 / (d0 - d1);  // diagonal crossing inside the segment
  return w * (std::fabs(d0) * t + std::fabs(d1) * (1.0 - t)) * 0.5;
}

}  // namespace

ReliabilityCurve bin_confidence(const PredictionSet& set, const BinningConfig& cfg,
                                std::span<const std::size_t> subset) {
  return bin_stream(set, cfg, subset, ReliabilityMode::confidence);
}

ReliabilityCurve bin_uncertainty(const PredictionSet& set, const BinningConfig& cfg,
                                 std::span<const std::size_t> subset) {
  return bin_stream(set, cfg, subset, ReliabilityMode::uncertainty);
}

double ece(const ReliabilityCurve& curve) {
  if (curve.mode != ReliabilityMode::confidence) {
    fail(ErrorCode::WrongMode, "ece needs a confidence-binned curve");
  }
  return weighted_gap(curve);
}

double uce(const ReliabilityCurve& curve) {
  if (curve.mode != ReliabilityMode::uncertainty) {
    fail(ErrorCode::WrongMode, "uce needs an uncertainty-binned curve");
  }
  return weighted_gap(curve);
}

double calibration_quality_score(const ReliabilityCurve& curve) {
  constexpr double kMaxArea = 0.25;
  std::vector<std::pair<double, double>> pts;
  pts.emplace_back(0.0, 0.0);
  for (const BinStats& bin : curve.bins) {
    if (!bin.empty) pts.emplace_back(bin.mean_measure, bin.outcome_rate);
  }
  if (pts.size() == 1) fail(ErrorCode::NoData, "all bins are empty");
  pts.emplace_back(1.0, 1.0);

  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += segment_gap_area(pts[i - 1].first, pts[i - 1].second, pts[i].first, pts[i].second);
  }
  return std::clamp(1.0 - area / kMaxArea, 0.0, 1.0);
}

double skewness(std::span<const double> values) {
  if (values.size() < 2) fail(ErrorCode::DegenerateDistribution, "need N >= 2 values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double m2 = 0.0, m3 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(values.size());
  m3 /= static_cast<double>(values.size());
  if (m2 <= 0.0) fail(ErrorCode::DegenerateDistribution, "zero variance");
  return m3 / std::pow(m2, 1.5);
}

}  // namespace calimetr
