#pragma once

#include <span>
#include <vector>

#include "calimetr/core.hpp"

namespace calimetr {

struct BinStats {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double mean_measure = 0.0;  // mean confidence / mean uncertainty
  double outcome_rate = 0.0;  // accuracy (confidence mode) / error rate (uncertainty mode)
  bool empty = true;
};

enum class ReliabilityMode { confidence, uncertainty };

struct ReliabilityCurve {
  std::vector<BinStats> bins;
  ReliabilityMode mode = ReliabilityMode::confidence;
  // Third standardized moment of the instance-level measure distribution;
  // 0 when the distribution is degenerate (N < 2 or zero variance).
  double skewness = 0.0;
};

// Equal-width binning of max-probability confidence; outcome is accuracy.
// `subset` restricts to the given instance indices (empty = all instances).
ReliabilityCurve bin_confidence(const PredictionSet& set, const BinningConfig& cfg,
                                std::span<const std::size_t> subset = {});

// Equal-width binning of normalized entropy; outcome is the error rate.
ReliabilityCurve bin_uncertainty(const PredictionSet& set, const BinningConfig& cfg,
                                 std::span<const std::size_t> subset = {});

// Eq-style weighted absolute gap between outcome and measure per bin.
double ece(const ReliabilityCurve& curve);  // requires confidence mode
double uce(const ReliabilityCurve& curve);  // requires uncertainty mode

// 1 - A/0.25 where A is the area between the reliability polyline (anchored
// at (0,0) and (1,1)) and the diagonal; clamped to [0,1].
double calibration_quality_score(const ReliabilityCurve& curve);

// Sample skewness m3 / m2^(3/2) with population central moments.
double skewness(std::span<const double> values);

}  // namespace calimetr
