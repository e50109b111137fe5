#include "calimetr/decompose.hpp"

#include <algorithm>
#include <cmath>

#include "calimetr/simd.hpp"

namespace calimetr {

PredictionSet marginal(const EnsemblePredictions& ens) {
  if (ens.members.empty()) fail(ErrorCode::EnsembleMisaligned, "ensemble has no members");
  for (const auto& member : ens.members) require_validated(member);

  const PredictionSet& first = ens.members.front();
  const std::size_t n = first.size();
  const std::size_t k = first.classes();
  for (const auto& member : ens.members) {
    if (member.size() != n || member.classes() != k || member.labels != first.labels) {
      fail(ErrorCode::EnsembleMisaligned, "members disagree on shape or labels");
    }
  }

  Matrix mean(n, k);
  for (const auto& member : ens.members) {
    const std::vector<double>& src = member.probs->data;
    for (std::size_t idx = 0; idx < mean.data.size(); ++idx) mean.data[idx] += src[idx];
  }
  const double inv_m = 1.0 / static_cast<double>(ens.members.size());
  for (double& v : mean.data) v *= inv_m;

  PredictionSet out;
  out.probs = std::move(mean);
  out.labels = first.labels;
  out.class_names = first.class_names;
  out.validated = true;  // convex combination of simplex rows
  return out;
}

DecompositionResult decompose(const EnsemblePredictions& ens, EntropyScale scale) {
  PredictionSet marg = marginal(ens);
  const Matrix& q = *marg.probs;
  const std::size_t n = q.rows;
  const std::size_t k = q.cols;
  const std::size_t m = ens.members.size();
  const auto& kernels = simd::active_kernels();

  DecompositionResult result;
  result.total.resize(n);
  result.aleatoric.assign(n, 0.0);
  result.epistemic.assign(n, 0.0);

  kernels.entropy_rows(q.data.data(), result.total.data(), n, k);

  std::vector<double> scratch(n);
  const double inv_m = 1.0 / static_cast<double>(m);
  const double inv_log_k = 1.0 / std::log(static_cast<double>(k));
  for (const auto& member : ens.members) {
    const Matrix& p = *member.probs;
    kernels.entropy_rows(p.data.data(), scratch.data(), n, k);
    for (std::size_t i = 0; i < n; ++i) result.aleatoric[i] += scratch[i] * inv_m;
    kernels.kl_rows(p.data.data(), q.data.data(), scratch.data(), n, k);
    for (std::size_t i = 0; i < n; ++i) result.epistemic[i] += scratch[i] * inv_m * inv_log_k;
  }
  // KL of near-identical rows can round a hair below zero.
  for (double& v : result.epistemic) v = std::max(v, 0.0);

  if (scale == EntropyScale::nats) {
    const double log_k = std::log(static_cast<double>(k));
    for (double& v : result.total) v *= log_k;
    for (double& v : result.aleatoric) v *= log_k;
    for (double& v : result.epistemic) v *= log_k;
  }

  auto mean_of = [n](const std::vector<double>& values) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc / static_cast<double>(n);
  };
  result.total_mean = mean_of(result.total);
  result.aleatoric_mean = mean_of(result.aleatoric);
  result.epistemic_mean = mean_of(result.epistemic);
  return result;
}

}  // namespace calimetr
