#include "calimetr/synth.hpp"

#include <cmath>
#include <numbers>

#include "calimetr/simd.hpp"
#include "calimetr/temper.hpp"

namespace calimetr {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

void check_config(const SynthConfig& cfg) {
  if (cfg.n < 1) fail(ErrorCode::ShapeMismatch, "n must be >= 1");
  if (cfg.k < 2) fail(ErrorCode::ShapeMismatch, "k must be >= 2");
  if (!(cfg.concentration > 0.0)) fail(ErrorCode::ShapeMismatch, "concentration must be > 0");
  if (!(cfg.distortion > 0.0)) fail(ErrorCode::NonPositiveFactor, "distortion must be > 0");
}

std::int32_t sample_from_row(std::span<const double> row, double u) {
  double cum = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    cum += row[j];
    if (u < cum) return static_cast<std::int32_t>(j);
  }
  return static_cast<std::int32_t>(row.size() - 1);
}

// Reliability gap injected per measure bin (M = 10 reference grid). Spread
// keeps the per-bin calibration gaps visibly non-uniform.
constexpr double kBinGap[10] = {0.02, 0.12, 0.05, 0.15, 0.08, 0.13, 0.03, 0.10, 0.06, 0.14};

std::size_t gap_bin(double x) {
  auto idx = static_cast<std::size_t>(x * 10.0);
  return idx > 9 ? 9 : idx;
}

// Normalized entropy of (c, rest uniform) for K classes.
double entropy_of_top(double c, std::size_t k) {
  const double rest = (1.0 - c) / static_cast<double>(k - 1);
  double h = -c * std::log(std::max(c, kProbFloor));
  h -= (1.0 - c) * std::log(std::max(rest, kProbFloor));
  return h / std::log(static_cast<double>(k));
}

// Top-probability whose (c, rest uniform) row has the requested normalized
// entropy. entropy_of_top is strictly decreasing on c in (1/k, 1).
double top_for_entropy(double target, std::size_t k) {
  double lo = 1.0 / static_cast<double>(k) + 1e-9;
  double hi = 1.0 - 1e-12;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (entropy_of_top(mid, k) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& word : state_) word = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_gaussian() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = 1.0 - next_unit();  // (0, 1]
  const double u2 = next_unit();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

PredictionSet gen_calibrated(const SynthConfig& cfg) {
  check_config(cfg);
  Rng rng(cfg.seed);

  const double sigma = 1.0 / cfg.concentration;
  Matrix logits(cfg.n, cfg.k);
  for (double& v : logits.data) v = rng.next_gaussian() * sigma;

  Matrix probs(cfg.n, cfg.k);
  simd::active_kernels().softmax_rows(logits.data.data(), probs.data.data(), cfg.n, cfg.k, 1.0);

  PredictionSet set;
  set.labels.resize(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    set.labels[i] = sample_from_row(probs.row_span(i), rng.next_unit());
  }

  if (cfg.distortion != 1.0) {
    for (double& v : logits.data) v *= cfg.distortion;
    simd::active_kernels().softmax_rows(logits.data.data(), probs.data.data(), cfg.n, cfg.k, 1.0);
  }
  set.logits = std::move(logits);
  set.probs = std::move(probs);
  return validate(std::move(set));
}

PredictionSet distort(const PredictionSet& set, double g) {
  require_validated(set);
  if (!(g > 0.0)) fail(ErrorCode::NonPositiveFactor, "factor " + std::to_string(g));

  Matrix logits = recover_logits(set);
  for (double& v : logits.data) v *= g;
  Matrix probs(logits.rows, logits.cols);
  simd::active_kernels().softmax_rows(logits.data.data(), probs.data.data(), logits.rows,
                                      logits.cols, 1.0);
  PredictionSet out;
  out.logits = std::move(logits);
  out.probs = std::move(probs);
  out.labels = set.labels;
  out.class_names = set.class_names;
  out.provenance = set.provenance;
  out.validated = true;
  return out;
}

PredictionSet gen_skewed(const SynthConfig& cfg, SkewTarget target) {
  check_config(cfg);
  Rng rng(cfg.seed);

  Matrix probs(cfg.n, cfg.k);
  std::vector<std::int32_t> labels(cfg.n);
  const double rest_share = 1.0 / static_cast<double>(cfg.k - 1);

  for (std::size_t i = 0; i < cfg.n; ++i) {
    const bool extreme = rng.next_unit() < 0.85;
    double top;      // max probability of the row
    double measure;  // the binned quantity (confidence or entropy)
    if (target == SkewTarget::high_confidence) {
      top = extreme ? 0.905 + 0.09 * rng.next_unit() : 0.55 + 0.345 * rng.next_unit();
      measure = top;
    } else {
      const double h = extreme ? 0.01 + 0.085 * rng.next_unit() : 0.15 + 0.55 * rng.next_unit();
      top = top_for_entropy(h, cfg.k);
      measure = h;
    }

    const auto top_class = static_cast<std::int32_t>(rng.next_u64() % cfg.k);
    double* row = probs.row(i);
    for (std::size_t j = 0; j < cfg.k; ++j) row[j] = (1.0 - top) * rest_share;
    row[static_cast<std::size_t>(top_class)] = top;

    // Bin-dependent miscalibration: accuracy trails confidence (or error
    // exceeds entropy) by an offset that varies across bins.
    const double gap = kBinGap[gap_bin(measure)];
    double accuracy;
    if (target == SkewTarget::high_confidence) {
      accuracy = std::clamp(top - gap, 0.0, 1.0);
    } else {
      accuracy = std::clamp(1.0 - (measure + gap), 0.0, 1.0);
    }
    if (rng.next_unit() < accuracy) {
      labels[i] = top_class;
    } else {
      auto other = static_cast<std::int32_t>(rng.next_u64() % (cfg.k - 1));
      if (other >= top_class) other += 1;
      labels[i] = other;
    }
  }

  PredictionSet set;
  set.probs = std::move(probs);
  set.labels = std::move(labels);
  return validate(std::move(set));
}

}  // namespace calimetr
