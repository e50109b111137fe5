#include "calimetr/core.hpp"

#include <cmath>
#include <limits>

#include "calimetr/simd.hpp"

namespace calimetr {

namespace {

// Rows whose sum is already within a few ulps of 1 are left untouched so that
// validate(validate(s)) is bit-identical to validate(s).
bool needs_renormalization(double row_sum, std::size_t k) {
  const double ulp_budget = 16.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(k);
  return std::fabs(row_sum - 1.0) > ulp_budget;
}

void check_and_renormalize_row(std::span<double> row, std::size_t row_index) {
  double sum = 0.0;
  for (double p : row) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0 + kSimplexTol) {
      fail(ErrorCode::SimplexViolation,
           "probability outside [0,1] in row " + std::to_string(row_index));
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > kSimplexTol) {
    fail(ErrorCode::SimplexViolation, "row " + std::to_string(row_index) + " sums to " +
                                          std::to_string(sum) + ", off by more than 1e-6");
  }
  if (needs_renormalization(sum, row.size())) {
    const double inv = 1.0 / sum;
    for (double& p : row) p *= inv;
  }
}

}  // namespace

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SimplexViolation: return "SimplexViolation";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::UnknownKind: return "UnknownKind";
    case ErrorCode::WrongMode: return "WrongMode";
    case ErrorCode::NoData: return "NoData";
    case ErrorCode::DegenerateDistribution: return "DegenerateDistribution";
    case ErrorCode::UnknownSorter: return "UnknownSorter";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::NonPositiveTemperature: return "NonPositiveTemperature";
    case ErrorCode::NonPositiveFactor: return "NonPositiveFactor";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::EnsembleMisaligned: return "EnsembleMisaligned";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::HeaderParse: return "HeaderParse";
    case ErrorCode::PayloadSizeMismatch: return "PayloadSizeMismatch";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::UnknownHeader: return "UnknownHeader";
    case ErrorCode::UnwritablePath: return "UnwritablePath";
  }
  return "UnknownError";
}

ProbVector ProbVector::checked(std::vector<double> values) {
  if (values.size() < 2) fail(ErrorCode::ShapeMismatch, "probability vector needs K >= 2");
  check_and_renormalize_row(values, 0);
  return ProbVector{std::move(values)};
}

const Matrix& PredictionSet::prob_matrix() const {
  require_validated(*this);
  return *probs;
}

std::size_t argmax_row(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

void require_validated(const PredictionSet& set) {
  if (!set.validated || !set.probs) {
    throw std::logic_error("PredictionSet must go through validate() first");
  }
}

PredictionSet validate(PredictionSet set) {
  const std::size_t n = set.labels.size();
  if (n == 0) fail(ErrorCode::ShapeMismatch, "empty prediction set (N must be >= 1)");
  if (!set.logits && !set.probs) {
    fail(ErrorCode::ShapeMismatch, "neither logits nor probs present");
  }

  std::size_t k = 0;
  if (set.logits) {
    if (set.logits->rows != n) {
      fail(ErrorCode::ShapeMismatch, "logits rows != label count");
    }
    k = set.logits->cols;
    for (double v : set.logits->data) {
      if (!std::isfinite(v)) fail(ErrorCode::ShapeMismatch, "non-finite logit");
    }
  }
  if (set.probs) {
    if (set.probs->rows != n) fail(ErrorCode::ShapeMismatch, "probs rows != label count");
    if (k != 0 && set.probs->cols != k) {
      fail(ErrorCode::ShapeMismatch, "probs and logits disagree on K");
    }
    k = set.probs->cols;
  }
  if (k < 2) fail(ErrorCode::ShapeMismatch, "K must be >= 2");
  if (!set.class_names.empty() && set.class_names.size() != k) {
    fail(ErrorCode::ShapeMismatch, "class_names length != K");
  }
  if (!set.provenance.empty() && set.provenance.size() != n) {
    fail(ErrorCode::ShapeMismatch, "provenance length != N");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (set.labels[i] < 0 || static_cast<std::size_t>(set.labels[i]) >= k) {
      fail(ErrorCode::LabelOutOfRange,
           "label " + std::to_string(set.labels[i]) + " at instance " + std::to_string(i));
    }
  }

  if (!set.probs) {
    Matrix probs(n, k);
    simd::active_kernels().softmax_rows(set.logits->data.data(), probs.data.data(), n, k, 1.0);
    set.probs = std::move(probs);
  } else if (set.logits) {
    // When both are given the probs must be the row-softmax of the logits.
    Matrix expected(n, k);
    simd::active_kernels().softmax_rows(set.logits->data.data(), expected.data.data(), n, k, 1.0);
    for (std::size_t idx = 0; idx < expected.data.size(); ++idx) {
      if (std::fabs(expected.data[idx] - set.probs->data[idx]) > kSimplexTol) {
        fail(ErrorCode::SimplexViolation,
             "probs are not the row-softmax of the logits (instance " + std::to_string(idx / k) +
                 ")");
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) check_and_renormalize_row(set.probs->row_span(i), i);

  set.validated = true;
  return set;
}

EnsemblePredictions validate_ensemble(EnsemblePredictions ens) {
  if (ens.members.empty()) fail(ErrorCode::EnsembleMisaligned, "ensemble needs M >= 1 members");
  for (auto& member : ens.members) {
    if (!member.validated) member = validate(std::move(member));
  }
  const PredictionSet& first = ens.members.front();
  for (std::size_t m = 1; m < ens.members.size(); ++m) {
    const PredictionSet& cur = ens.members[m];
    if (cur.size() != first.size() || cur.classes() != first.classes()) {
      fail(ErrorCode::EnsembleMisaligned, "member " + std::to_string(m) + " has mismatched shape");
    }
    if (cur.labels != first.labels) {
      fail(ErrorCode::EnsembleMisaligned, "member " + std::to_string(m) + " has different labels");
    }
  }
  return ens;
}

void check_binning(const BinningConfig& cfg) {
  if (cfg.m_bins < 1) fail(ErrorCode::ShapeMismatch, "m_bins must be >= 1");
}

void check_sparsification(const SparsificationConfig& cfg) {
  if (cfg.steps < 2) fail(ErrorCode::ShapeMismatch, "sparsification steps must be >= 2");
  if (!(cfg.max_fraction > 0.0 && cfg.max_fraction < 1.0)) {
    fail(ErrorCode::ShapeMismatch, "max_fraction must lie in (0,1)");
  }
}

void check_grid(const TemperatureGrid& grid) {
  if (grid.values.empty()) fail(ErrorCode::EmptyGrid, "temperature grid is empty");
  double prev = 0.0;
  for (double t : grid.values) {
    if (!(t > 0.0)) fail(ErrorCode::NonPositiveTemperature, "grid value " + std::to_string(t));
    if (t <= prev) fail(ErrorCode::ShapeMismatch, "grid values must be strictly increasing");
    prev = t;
  }
}

TemperatureGrid TemperatureGrid::range(double t_min, double t_max, double t_step) {
  if (!(t_min > 0.0)) fail(ErrorCode::NonPositiveTemperature, "t_min must be > 0");
  if (!(t_step > 0.0)) fail(ErrorCode::ShapeMismatch, "t_step must be > 0");
  if (t_max < t_min) fail(ErrorCode::ShapeMismatch, "t_max must be >= t_min");
  TemperatureGrid grid;
  // Integer stepping avoids drift over long grids.
  const long count = std::lround((t_max - t_min) / t_step) + 1;
  grid.values.reserve(static_cast<std::size_t>(count));
  for (long idx = 0; idx < count; ++idx) {
    double t = t_min + static_cast<double>(idx) * t_step;
    if (t > t_max + 1e-12) break;
    grid.values.push_back(t);
  }
  check_grid(grid);
  return grid;
}

double TemperatureGrid::step() const {
  double step = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i) step = std::max(step, values[i] - values[i - 1]);
  return step;
}

}  // namespace calimetr
