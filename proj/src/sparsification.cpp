#include "calimetr/sparsification.hpp"

#include <algorithm>
#include <cmath>

#include "calimetr/scores.hpp"
#include "calimetr/simd.hpp"

namespace calimetr {

const char* to_string(SorterKind kind) {
  switch (kind) {
    case SorterKind::variation_ratio: return "variation_ratio";
    case SorterKind::entropy: return "entropy";
    case SorterKind::cross_entropy: return "cross_entropy";
    case SorterKind::oracle: return "oracle";
  }
  return "unknown";
}

const char* to_string(MeritKind kind) {
  switch (kind) {
    case MeritKind::iou: return "iou";
    case MeritKind::accuracy: return "accuracy";
    case MeritKind::brier: return "brier";
  }
  return "unknown";
}

namespace {

std::vector<std::int32_t> predicted_classes(const PredictionSet& set) {
  const Matrix& probs = *set.probs;
  std::vector<std::int32_t> out(probs.rows);
  for (std::size_t i = 0; i < probs.rows; ++i) {
    out[i] = static_cast<std::int32_t>(argmax_row(probs.row_span(i)));
  }
  return out;
}

void check_class(const PredictionSet& set, std::optional<int> class_id) {
  if (!class_id) return;
  if (*class_id < 0 || static_cast<std::size_t>(*class_id) >= set.classes()) {
    fail(ErrorCode::UnknownClass, "class " + std::to_string(*class_id));
  }
}

std::vector<double> brier_per_instance(const PredictionSet& set) {
  const Matrix& probs = *set.probs;
  std::vector<double> out(probs.rows);
  simd::active_kernels().brier_rows(probs.data.data(), set.labels.data(), out.data(), probs.rows,
                                    probs.cols);
  return out;
}

std::vector<double> fraction_grid(const SparsificationConfig& cfg) {
  std::vector<double> fractions(cfg.steps);
  for (int j = 0; j < cfg.steps; ++j) {
    fractions[j] = cfg.max_fraction * static_cast<double>(j) / static_cast<double>(cfg.steps - 1);
  }
  return fractions;
}

double trapezoid(std::span<const double> xs, std::span<const double> ys) {
  double acc = 0.0;
  for (std::size_t j = 1; j < xs.size(); ++j) {
    acc += (xs[j] - xs[j - 1]) * (ys[j] + ys[j - 1]) * 0.5;
  }
  return acc;
}

}  // namespace

namespace detail {

CurveSeries curve_from_stats(const InstanceStats& stats, std::span<const std::size_t> order,
                             MeritKind kind, const SparsificationConfig& cfg,
                             std::optional<int> class_id) {
  const std::size_t n = order.size();

  CurveSeries series;
  series.merit = kind;
  series.fractions = fraction_grid(cfg);
  series.values.resize(series.fractions.size());

  // Walk the removal order once, keeping suffix statistics; merit at removal
  // count r only ever looks at order[r..n).
  std::size_t kept = n;
  std::size_t kept_correct = 0;
  std::size_t kept_members = 0;  // instances with label == class (accuracy/brier restriction)
  double kept_brier = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0;

  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t i = order[pos];
    const bool correct = stats.predicted[i] == stats.labels[i];
    kept_correct += correct ? 1 : 0;
    if (class_id) {
      const auto c = static_cast<std::int32_t>(*class_id);
      const bool pred_c = stats.predicted[i] == c;
      const bool label_c = stats.labels[i] == c;
      tp += (pred_c && label_c) ? 1 : 0;
      fp += (pred_c && !label_c) ? 1 : 0;
      fn += (!pred_c && label_c) ? 1 : 0;
      kept_members += label_c ? 1 : 0;
      if (kind == MeritKind::brier && label_c) kept_brier += stats.brier[i];
    } else if (kind == MeritKind::brier) {
      kept_brier += stats.brier[i];
    }
  }

  auto merit_now = [&]() -> double {
    switch (kind) {
      case MeritKind::iou: {
        const std::size_t denom = tp + fp + fn;
        return denom == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(denom);
      }
      case MeritKind::accuracy: {
        if (class_id) {
          // restricted to instances of the class; vacuous once they are gone
          const std::size_t correct_members = tp;  // pred==c && label==c
          return kept_members == 0
                     ? 1.0
                     : static_cast<double>(correct_members) / static_cast<double>(kept_members);
        }
        return static_cast<double>(kept_correct) / static_cast<double>(kept);
      }
      case MeritKind::brier: {
        const std::size_t denom = class_id ? kept_members : kept;
        return denom == 0 ? 0.0 : kept_brier / static_cast<double>(denom);
      }
    }
    return 0.0;
  };

  std::size_t removed = 0;
  for (std::size_t j = 0; j < series.fractions.size(); ++j) {
    const auto target =
        static_cast<std::size_t>(std::floor(series.fractions[j] * static_cast<double>(n)));
    while (removed < target && removed < n) {
      const std::size_t i = order[removed];
      const bool correct = stats.predicted[i] == stats.labels[i];
      kept -= 1;
      kept_correct -= correct ? 1 : 0;
      if (class_id) {
        const auto c = static_cast<std::int32_t>(*class_id);
        const bool pred_c = stats.predicted[i] == c;
        const bool label_c = stats.labels[i] == c;
        tp -= (pred_c && label_c) ? 1 : 0;
        fp -= (pred_c && !label_c) ? 1 : 0;
        fn -= (!pred_c && label_c) ? 1 : 0;
        kept_members -= label_c ? 1 : 0;
        if (kind == MeritKind::brier && label_c) kept_brier -= stats.brier[i];
      } else if (kind == MeritKind::brier) {
        kept_brier -= stats.brier[i];
      }
      ++removed;
    }
    if (kept == 0) fail(ErrorCode::EmptySubset, "sparsification removed every instance");
    series.values[j] = merit_now();
  }
  return series;
}

AuseResult ause_from_orders(const InstanceStats& stats, std::span<const std::size_t> method_order,
                            std::span<const std::size_t> oracle_ord, SorterKind sorter,
                            MeritKind kind, const SparsificationConfig& cfg,
                            std::optional<int> class_id) {
  AuseResult result;
  result.sorter = sorter;
  result.oracle = curve_from_stats(stats, oracle_ord, kind, cfg, class_id);
  result.method = curve_from_stats(stats, method_order, kind, cfg, class_id);

  std::vector<double> gap(result.oracle.values.size());
  for (std::size_t j = 0; j < gap.size(); ++j) {
    gap[j] = result.oracle.values[j] - result.method.values[j];
    if (result.method.values[j] > result.oracle.values[j] + 1e-12) {
      result.negative_area_flag = true;
    }
  }
  result.ause = trapezoid(result.oracle.fractions, gap);
  return result;
}

}  // namespace detail

std::vector<std::size_t> sort_order(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return idx;
}

std::vector<std::size_t> sort_order(const PredictionSet& set, SorterKind sorter) {
  require_validated(set);
  switch (sorter) {
    case SorterKind::variation_ratio:
      return sort_order(score_all(set, ScoreKind::variation_ratio).values);
    case SorterKind::entropy:
      return sort_order(score_all(set, ScoreKind::entropy).values);
    case SorterKind::cross_entropy:
      return sort_order(score_all(set, ScoreKind::cross_entropy).values);
    case SorterKind::oracle:
      return oracle_order(set);
  }
  fail(ErrorCode::UnknownSorter, "unsupported sorter");
}

std::vector<std::size_t> oracle_order(const PredictionSet& set, std::optional<int> class_id) {
  require_validated(set);
  check_class(set, class_id);
  const std::vector<std::int32_t> predicted = predicted_classes(set);

  std::vector<std::size_t> errors, rest;
  errors.reserve(set.size());
  rest.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    bool is_error;
    if (class_id) {
      const auto c = static_cast<std::int32_t>(*class_id);
      is_error = (predicted[i] == c) != (set.labels[i] == c);  // FP or FN of the class
    } else {
      is_error = predicted[i] != set.labels[i];
    }
    (is_error ? errors : rest).push_back(i);
  }
  errors.insert(errors.end(), rest.begin(), rest.end());
  return errors;
}

double merit(const PredictionSet& set, std::span<const std::size_t> subset, MeritKind kind,
             std::optional<int> class_id) {
  require_validated(set);
  check_class(set, class_id);
  if (subset.empty()) fail(ErrorCode::EmptySubset, "merit of an empty subset");
  if (kind == MeritKind::iou && !class_id) fail(ErrorCode::UnknownClass, "iou needs a class id");

  const std::vector<std::int32_t> predicted = predicted_classes(set);
  switch (kind) {
    case MeritKind::iou: {
      const auto c = static_cast<std::int32_t>(*class_id);
      std::size_t tp = 0, fp = 0, fn = 0;
      for (std::size_t i : subset) {
        const bool pred_c = predicted[i] == c;
        const bool label_c = set.labels[i] == c;
        tp += (pred_c && label_c) ? 1 : 0;
        fp += (pred_c && !label_c) ? 1 : 0;
        fn += (!pred_c && label_c) ? 1 : 0;
      }
      const std::size_t denom = tp + fp + fn;
      return denom == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(denom);
    }
    case MeritKind::accuracy: {
      std::size_t correct = 0;
      for (std::size_t i : subset) correct += predicted[i] == set.labels[i] ? 1 : 0;
      return static_cast<double>(correct) / static_cast<double>(subset.size());
    }
    case MeritKind::brier: {
      const std::vector<double> per_instance = brier_per_instance(set);
      double acc = 0.0;
      for (std::size_t i : subset) acc += per_instance[i];
      return acc / static_cast<double>(subset.size());
    }
  }
  fail(ErrorCode::UnknownKind, "unsupported merit");
}

CurveSeries sparsification_curve(const PredictionSet& set, std::span<const std::size_t> order,
                                 MeritKind kind, const SparsificationConfig& cfg,
                                 std::optional<int> class_id) {
  require_validated(set);
  check_sparsification(cfg);
  check_class(set, class_id);
  if (order.size() != set.size()) {
    fail(ErrorCode::ShapeMismatch, "order must be a permutation of the instances");
  }
  if (kind == MeritKind::iou && !class_id) fail(ErrorCode::UnknownClass, "iou needs a class id");

  const std::vector<std::int32_t> predicted = predicted_classes(set);
  std::vector<double> brier_values;
  if (kind == MeritKind::brier) brier_values = brier_per_instance(set);
  detail::InstanceStats stats{predicted, set.labels, brier_values};
  return detail::curve_from_stats(stats, order, kind, cfg, class_id);
}

AuseResult ause(const PredictionSet& set, SorterKind sorter, MeritKind kind,
                const SparsificationConfig& cfg, std::optional<int> class_id) {
  require_validated(set);
  check_sparsification(cfg);
  check_class(set, class_id);
  if (kind == MeritKind::iou && !class_id) fail(ErrorCode::UnknownClass, "iou needs a class id");

  const std::vector<std::int32_t> predicted = predicted_classes(set);
  std::vector<double> brier_values;
  if (kind == MeritKind::brier) brier_values = brier_per_instance(set);
  detail::InstanceStats stats{predicted, set.labels, brier_values};

  const std::vector<std::size_t> oracle_ord = oracle_order(set, class_id);
  const std::vector<std::size_t> method_order =
      sorter == SorterKind::oracle ? oracle_ord : sort_order(set, sorter);
  return detail::ause_from_orders(stats, method_order, oracle_ord, sorter, kind, cfg, class_id);
}

AuseResult ause_ce(const PredictionSet& set, MeritKind kind, const SparsificationConfig& cfg,
                   std::optional<int> class_id) {
  return ause(set, SorterKind::cross_entropy, kind, cfg, class_id);
}

}  // namespace calimetr
