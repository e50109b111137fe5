#pragma once

#include <array>
#include <cstdint>

#include "calimetr/core.hpp"

namespace calimetr {

// PRNG identifier recorded in emitted fixture files and report provenance.
inline constexpr const char* kPrngId = "splitmix64+xoshiro256++/box-muller";

// xoshiro256++ seeded through splitmix64 (Blackman & Vigna, public domain).
// Fixed algorithm so fixtures are reproducible independent of the standard
// library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double next_unit();      // [0, 1), 53 bits
  double next_gaussian();  // Box-Muller, second value cached

 private:
  std::array<std::uint64_t, 4> state_{};
  bool has_cached_ = false;
  double cached_ = 0.0;
};

struct SynthConfig {
  std::size_t n = 1000;
  std::size_t k = 5;
  // Dirichlet-style: large values concentrate rows near uniform, small values
  // near the simplex corners. Gaussian logits with sigma = 1/concentration.
  double concentration = 1.0;
  double distortion = 1.0;  // logit multiplier applied after label sampling
  std::uint64_t seed = 0;
};

enum class SkewTarget { high_confidence, high_uncertainty };

// Calibrated by construction: each label is sampled from its own predicted
// row, so binned accuracy tracks confidence as n grows.
PredictionSet gen_calibrated(const SynthConfig& cfg);

// Multiplies the logits by g (the inverse of tempering with T = g).
PredictionSet distort(const PredictionSet& set, double g);

// Confidence (or entropy) mass packed into one extreme bin, with per-bin
// accuracy offsets so the reliability gaps differ across bins. Rows are built
// in probability space; cfg.distortion does not apply here.
PredictionSet gen_skewed(const SynthConfig& cfg, SkewTarget target);

}  // namespace calimetr
