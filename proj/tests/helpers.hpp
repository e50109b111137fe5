#pragma once

#include <random>
#include <vector>

#include "calimetr/core.hpp"

namespace testutil {

inline calimetr::PredictionSet make_prob_set(const std::vector<std::vector<double>>& rows,
                                             std::vector<std::int32_t> labels) {
  calimetr::Matrix probs(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) probs.at(i, j) = rows[i][j];
  }
  calimetr::PredictionSet set;
  set.probs = std::move(probs);
  set.labels = std::move(labels);
  return calimetr::validate(std::move(set));
}

inline calimetr::PredictionSet make_logit_set(const std::vector<std::vector<double>>& rows,
                                              std::vector<std::int32_t> labels) {
  calimetr::Matrix logits(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) logits.at(i, j) = rows[i][j];
  }
  calimetr::PredictionSet set;
  set.logits = std::move(logits);
  set.labels = std::move(labels);
  return calimetr::validate(std::move(set));
}

inline calimetr::PredictionSet random_prob_set(std::mt19937_64& rng, std::size_t n, std::size_t k,
                                               double sharpness = 1.0) {
  std::normal_distribution<double> gauss(0.0, sharpness);
  std::uniform_int_distribution<std::int32_t> pick(0, static_cast<std::int32_t>(k) - 1);
  calimetr::Matrix logits(n, k);
  for (double& v : logits.data) v = gauss(rng);
  calimetr::PredictionSet set;
  set.logits = std::move(logits);
  set.labels.resize(n);
  for (auto& label : set.labels) label = pick(rng);
  return calimetr::validate(std::move(set));
}

}  // namespace testutil
