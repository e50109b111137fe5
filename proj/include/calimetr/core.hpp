#pragma once

#include <optional>
#include <string>
#include <vector>

#include "calimetr/common.hpp"

namespace calimetr {

// A single probability mass vector over K classes. Mostly used at API
// boundaries and in tests; batch code works on validated PredictionSet rows,
// which satisfy the same invariants by construction.
struct ProbVector {
  std::vector<double> p;

  std::size_t classes() const { return p.size(); }

  // Validates entries in [0,1], sum within kSimplexTol of 1, K >= 2, and
  // renormalizes the row exactly (divide by the row sum).
  static ProbVector checked(std::vector<double> values);
};

// Pixel/instance provenance for segmentation inputs. Presentation metadata
// only; no metric depends on it.
struct Provenance {
  std::string image_id;
  int row = 0;
  int col = 0;
};

// The universal input: N instances x K classes of logits and/or probabilities
// plus ground-truth labels. Immutable after validate(); safe to share across
// threads.
struct PredictionSet {
  std::optional<Matrix> logits;
  std::optional<Matrix> probs;
  std::vector<std::int32_t> labels;
  std::vector<std::string> class_names;  // empty = unnamed
  std::vector<Provenance> provenance;    // empty = none
  bool validated = false;

  std::size_t size() const { return labels.size(); }
  std::size_t classes() const {
    if (probs) return probs->cols;
    if (logits) return logits->cols;
    return 0;
  }

  const Matrix& prob_matrix() const;  // requires validated
};

// M member PredictionSets over identical instances, classes and labels.
struct EnsemblePredictions {
  std::vector<PredictionSet> members;

  std::size_t member_count() const { return members.size(); }
};

struct BinningConfig {
  int m_bins = 10;
};

struct SparsificationConfig {
  int steps = 100;
  double max_fraction = 0.99;
};

struct TemperatureGrid {
  std::vector<double> values;  // strictly increasing, all > 0

  static TemperatureGrid range(double t_min, double t_max, double t_step);
  std::size_t size() const { return values.size(); }
  // Largest adjacent spacing; the "one grid step" unit used by the
  // decoupling report.
  double step() const;
};

// Materializes probs (row-softmax of logits when absent), checks every
// invariant, renormalizes rows that are within tolerance of the simplex, and
// marks the set validated. Idempotent: a second pass is bit-identical.
PredictionSet validate(PredictionSet set);

// Checks that all members share N, K and labels exactly and are individually
// validated (validating them if needed).
EnsemblePredictions validate_ensemble(EnsemblePredictions ens);

void check_binning(const BinningConfig& cfg);
void check_sparsification(const SparsificationConfig& cfg);
void check_grid(const TemperatureGrid& grid);

// Throws if the set has not been through validate().
void require_validated(const PredictionSet& set);

// Lowest-index argmax, the tie-break used everywhere.
std::size_t argmax_row(std::span<const double> row);

}  // namespace calimetr
