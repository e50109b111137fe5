#pragma once

#include <map>
#include <string>
#include <vector>

#include "calimetr/core.hpp"
#include "calimetr/sparsification.hpp"

namespace calimetr {

// Row-softmax of logits / T. Labels and per-row argmax are unchanged; the
// returned set carries the scaled logits and is already validated.
PredictionSet apply_temperature(const PredictionSet& set, double temperature);

// log(clamp(p, 1e-12, 1)); softmax of the result reproduces p within 1e-6.
std::vector<double> logits_from_probs(std::span<const double> p);

// The set's logits, or logits recovered from probs when absent.
Matrix recover_logits(const PredictionSet& set);

struct SweepOptions {
  BinningConfig binning;
  SparsificationConfig sparsification;
  MeritKind merit = MeritKind::iou;
  // Compute ECE/UCE over all classes at once instead of averaging the
  // class-wise values.
  bool holistic = false;
  int threads = 0;  // 0 = hardware concurrency
};

struct SweepResult {
  TemperatureGrid grid;
  std::map<std::string, std::vector<double>> metrics;     // per-temperature values
  std::map<std::string, double> argmin_t;                 // argmax for ccqs/ucqs
  std::map<std::string, std::vector<double>> normalized;  // min-max scaled per metric
};

// All metric names sweep() accepts.
const std::vector<std::string>& all_sweep_metrics();

// Evaluates each requested metric at every grid temperature. Class-dependent
// metrics (ece, uce and, for the IoU merit, the AUSE family) are computed per
// class present in the labels and averaged.
SweepResult sweep(const PredictionSet& set, const TemperatureGrid& grid,
                  const std::vector<std::string>& metric_names, const SweepOptions& opts);

struct ClasswiseRow {
  int class_id = 0;
  std::string name;
  std::size_t count = 0;                 // instances with this label
  std::map<std::string, double> argmin_t;
};

struct SummaryStats {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

struct ClasswiseTable {
  std::vector<ClasswiseRow> rows;  // one per class present in the labels
  std::vector<int> top_classes;    // most represented
  std::vector<int> bottom_classes;
  std::map<std::string, SummaryStats> top_summary;
  std::map<std::string, SummaryStats> bottom_summary;
};

// Per-class optimal temperatures (metrics restricted to instances of each
// class; AUSE uses a global sort with class-restricted merit).
ClasswiseTable classwise_table(const PredictionSet& set, const TemperatureGrid& grid,
                               const std::vector<std::string>& metric_names,
                               const SweepOptions& opts, std::size_t top_count = 3,
                               std::size_t bottom_count = 3);

struct DecouplingEntry {
  std::string metric_a;
  std::string metric_b;
  double t_a = 0.0;
  double t_b = 0.0;
  double difference = 0.0;
  bool flagged = false;  // optima differ by more than one grid step
};

std::vector<DecouplingEntry> decoupling_report(const SweepResult& result);

}  // namespace calimetr
