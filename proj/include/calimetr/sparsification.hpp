#pragma once

#include <optional>
#include <span>
#include <vector>

#include "calimetr/core.hpp"

namespace calimetr {

enum class SorterKind { variation_ratio, entropy, cross_entropy, oracle };
enum class MeritKind { iou, accuracy, brier };

const char* to_string(SorterKind kind);
const char* to_string(MeritKind kind);

struct CurveSeries {
  std::vector<double> fractions;  // increasing, fractions[0] == 0
  std::vector<double> values;     // merit on the remaining instances
  MeritKind merit = MeritKind::accuracy;
};

struct AuseResult {
  double ause = 0.0;
  CurveSeries oracle;
  CurveSeries method;
  SorterKind sorter = SorterKind::oracle;
  // Set when the method curve rises above the oracle anywhere on the grid
  // (the curve intersection pathology); the signed area is reported as-is.
  bool negative_area_flag = false;
};

// Indices ordered by score descending, ties broken by ascending index.
std::vector<std::size_t> sort_order(std::span<const double> scores);
std::vector<std::size_t> sort_order(const PredictionSet& set, SorterKind sorter);

// Misclassified instances first (FP+FN of class_id when given), index order
// within each group.
std::vector<std::size_t> oracle_order(const PredictionSet& set,
                                      std::optional<int> class_id = std::nullopt);

// Merit of the instances listed in `subset`. IoU requires class_id and is 1.0
// when the class is absent from both predictions and labels (vacuous case).
double merit(const PredictionSet& set, std::span<const std::size_t> subset, MeritKind kind,
             std::optional<int> class_id = std::nullopt);

// Merit over the fraction grid {0, max/(steps-1), ..., max}: the first
// floor(f*N) instances of `order` are removed at each fraction.
CurveSeries sparsification_curve(const PredictionSet& set, std::span<const std::size_t> order,
                                 MeritKind kind, const SparsificationConfig& cfg,
                                 std::optional<int> class_id = std::nullopt);

// Oracle and method curves plus the trapezoidal integral of their gap.
AuseResult ause(const PredictionSet& set, SorterKind sorter, MeritKind kind,
                const SparsificationConfig& cfg, std::optional<int> class_id = std::nullopt);

// AUSE with cross-entropy as the sorting measure (the residual-uncertainty
// estimator); labels enter the sort.
AuseResult ause_ce(const PredictionSet& set, MeritKind kind, const SparsificationConfig& cfg,
                   std::optional<int> class_id = std::nullopt);

namespace detail {

// T-invariant per-instance facts, shared across many curve evaluations by the
// temperature sweep.
struct InstanceStats {
  std::span<const std::int32_t> predicted;
  std::span<const std::int32_t> labels;
  std::span<const double> brier;  // required only for the brier merit
};

CurveSeries curve_from_stats(const InstanceStats& stats, std::span<const std::size_t> order,
                             MeritKind kind, const SparsificationConfig& cfg,
                             std::optional<int> class_id);

AuseResult ause_from_orders(const InstanceStats& stats, std::span<const std::size_t> method_order,
                            std::span<const std::size_t> oracle_ord, SorterKind sorter,
                            MeritKind kind, const SparsificationConfig& cfg,
                            std::optional<int> class_id);

}  // namespace detail

}  // namespace calimetr
