#pragma once

#include <span>
#include <vector>

#include "calimetr/core.hpp"

namespace calimetr {

enum class ScoreKind { entropy, variation_ratio, cross_entropy, confidence };

const char* to_string(ScoreKind kind);

struct ScoreVector {
  std::vector<double> values;
  ScoreKind kind;
};

// Shannon entropy normalized by log(K), in [0,1]. 0*log(0) counts as 0.
double normalized_entropy(std::span<const double> p);

// 1 - max_k p_k.
double variation_ratio(std::span<const double> p);

// -log(clamp(p_label, 1e-12, 1)), natural log.
double cross_entropy_instance(std::span<const double> p, std::int32_t label);

// Mean per-instance cross-entropy against the ground-truth labels (nats).
double nll(const PredictionSet& set);

// Mean over instances of sum_k (p_k - [label==k])^2, in [0,2].
double brier(const PredictionSet& set);

// Vectorized dispatch over the per-instance measures above.
ScoreVector score_all(const PredictionSet& set, ScoreKind kind);

}  // namespace calimetr
