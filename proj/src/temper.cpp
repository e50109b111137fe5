#include "calimetr/temper.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

#include "calimetr/reliability.hpp"
#include "calimetr/scores.hpp"
#include "calimetr/simd.hpp"

namespace calimetr {

PredictionSet apply_temperature(const PredictionSet& set, double temperature) {
  require_validated(set);
  if (!(temperature > 0.0)) {
    fail(ErrorCode::NonPositiveTemperature, "temperature " + std::to_string(temperature));
  }
  Matrix scaled = recover_logits(set);
  for (double& v : scaled.data) v /= temperature;

  Matrix probs(scaled.rows, scaled.cols);
  simd::active_kernels().softmax_rows(scaled.data.data(), probs.data.data(), scaled.rows,
                                      scaled.cols, 1.0);
  PredictionSet out;
  out.logits = std::move(scaled);
  out.probs = std::move(probs);
  out.labels = set.labels;
  out.class_names = set.class_names;
  out.provenance = set.provenance;
  out.validated = true;  // rows are a softmax output, simplex by construction
  return out;
}

std::vector<double> logits_from_probs(std::span<const double> p) {
  std::vector<double> out(p.size());
  simd::active_kernels().log_clamped(p.data(), out.data(), p.size());
  return out;
}

Matrix recover_logits(const PredictionSet& set) {
  require_validated(set);
  if (set.logits) return *set.logits;
  const Matrix& probs = *set.probs;
  Matrix out(probs.rows, probs.cols);
  simd::active_kernels().log_clamped(probs.data.data(), out.data.data(), probs.data.size());
  return out;
}

const std::vector<std::string>& all_sweep_metrics() {
  static const std::vector<std::string> names = {"nll",  "brier",  "ece",    "uce",    "ccqs",
                                                 "ucqs", "ause_v", "ause_s", "ause_ce"};
  return names;
}

namespace {

bool is_quality_score(const std::string& name) { return name == "ccqs" || name == "ucqs"; }

bool is_ause_metric(const std::string& name) {
  return name == "ause_v" || name == "ause_s" || name == "ause_ce";
}

SorterKind sorter_for(const std::string& name) {
  if (name == "ause_v") return SorterKind::variation_ratio;
  if (name == "ause_s") return SorterKind::entropy;
  return SorterKind::cross_entropy;
}

void check_metric_names(const std::vector<std::string>& names) {
  const auto& known = all_sweep_metrics();
  for (const auto& name : names) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      fail(ErrorCode::UnknownKind, "unknown sweep metric '" + name + "'");
    }
  }
}

// Everything about the input that temperature scaling cannot change: the
// per-row argmax, hence class membership of predictions, error indicators and
// oracle removal orders.
struct SweepContext {
  std::vector<std::int32_t> predicted;
  std::vector<int> classes_present;
  std::vector<std::vector<std::size_t>> class_members;  // label == c, per class
  std::vector<std::size_t> oracle_global;
  std::vector<std::vector<std::size_t>> oracle_per_class;
};

SweepContext make_context(const PredictionSet& set, bool need_oracles) {
  SweepContext ctx;
  const Matrix& probs = *set.probs;
  ctx.predicted.resize(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    ctx.predicted[i] = static_cast<std::int32_t>(argmax_row(probs.row_span(i)));
  }
  std::vector<std::vector<std::size_t>> members(set.classes());
  for (std::size_t i = 0; i < set.size(); ++i) {
    members[static_cast<std::size_t>(set.labels[i])].push_back(i);
  }
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].empty()) continue;
    ctx.classes_present.push_back(static_cast<int>(c));
    ctx.class_members.push_back(std::move(members[c]));
  }
  if (need_oracles) {
    ctx.oracle_global = oracle_order(set);
    ctx.oracle_per_class.reserve(ctx.classes_present.size());
    for (int c : ctx.classes_present) ctx.oracle_per_class.push_back(oracle_order(set, c));
  }
  return ctx;
}

double mean_of(std::span<const double> values, std::span<const std::size_t> subset) {
  double acc = 0.0;
  for (std::size_t i : subset) acc += values[i];
  return acc / static_cast<double>(subset.size());
}

// Per-temperature scratch shared by the global sweep and the class-wise table.
struct TemperedEval {
  PredictionSet set;
  std::vector<double> ce_scores;     // lazy
  std::vector<double> brier_scores;  // lazy

  const std::vector<double>& cross_entropy() {
    if (ce_scores.empty()) ce_scores = score_all(set, ScoreKind::cross_entropy).values;
    return ce_scores;
  }
  const std::vector<double>& brier_per_instance() {
    if (brier_scores.empty()) {
      const Matrix& probs = *set.probs;
      brier_scores.resize(probs.rows);
      simd::active_kernels().brier_rows(probs.data.data(), set.labels.data(), brier_scores.data(),
                                        probs.rows, probs.cols);
    }
    return brier_scores;
  }
};

// AUSE per sorter at one temperature: one global sort, then one curve pair
// per class for the IoU merit (class-restricted merit over a global sort) or
// a single global pair otherwise. Returns the mean and optionally the
// per-class values.
std::vector<double> ause_values(TemperedEval& ev, const SweepContext& ctx, SorterKind sorter,
                                const SweepOptions& opts, bool per_class) {
  const std::vector<std::size_t> method_order = sort_order(ev.set, sorter);
  std::span<const double> brier_span;
  if (opts.merit == MeritKind::brier) brier_span = ev.brier_per_instance();
  detail::InstanceStats stats{ctx.predicted, ev.set.labels, brier_span};
  if (opts.merit == MeritKind::iou || per_class) {
    std::vector<double> values;
    values.reserve(ctx.classes_present.size());
    for (std::size_t ci = 0; ci < ctx.classes_present.size(); ++ci) {
      const int c = ctx.classes_present[ci];
      values.push_back(detail::ause_from_orders(stats, method_order, ctx.oracle_per_class[ci],
                                                sorter, opts.merit, opts.sparsification, c)
                           .ause);
    }
    return values;
  }
  double global = detail::ause_from_orders(stats, method_order, ctx.oracle_global, sorter,
                                           opts.merit, opts.sparsification, std::nullopt)
                      .ause;
  return {global};
}

double mean(std::span<const double> values) {
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

void run_parallel(std::size_t job_count, int threads, const std::function<void(std::size_t)>& job);

double argopt_temperature(const TemperatureGrid& grid, std::span<const double> values,
                          bool maximize) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const bool better = maximize ? values[i] > values[best] : values[i] < values[best];
    if (better) best = i;
  }
  return grid.values[best];
}

std::vector<double> min_max_scale(std::span<const double> values) {
  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::vector<double> out(values.size(), 0.0);
  if (hi > lo) {
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / (hi - lo);
  }
  return out;
}

}  // namespace

SweepResult sweep(const PredictionSet& set, const TemperatureGrid& grid,
                  const std::vector<std::string>& metric_names, const SweepOptions& opts) {
  require_validated(set);
  check_grid(grid);
  check_binning(opts.binning);
  check_sparsification(opts.sparsification);
  check_metric_names(metric_names);

  bool need_oracles = false;
  for (const auto& name : metric_names) need_oracles |= is_ause_metric(name);
  const SweepContext ctx = make_context(set, need_oracles);

  PredictionSet base_with_logits = set;
  if (!base_with_logits.logits) base_with_logits.logits = recover_logits(set);
  base_with_logits.provenance.clear();  // not needed per temperature

  SweepResult result;
  result.grid = grid;
  for (const auto& name : metric_names) {
    result.metrics[name] = std::vector<double>(grid.size(), 0.0);
  }

  run_parallel(grid.size(), opts.threads, [&](std::size_t t_idx) {
    TemperedEval ev{apply_temperature(base_with_logits, grid.values[t_idx]), {}, {}};
    for (const auto& name : metric_names) {
      double value = 0.0;
      if (name == "nll") {
        value = mean(ev.cross_entropy());
      } else if (name == "brier") {
        value = mean(ev.brier_per_instance());
      } else if (name == "ece") {
        if (opts.holistic) {
          value = ece(bin_confidence(ev.set, opts.binning));
        } else {
          double acc = 0.0;
          for (const auto& members : ctx.class_members) {
            acc += ece(bin_confidence(ev.set, opts.binning, members));
          }
          value = acc / static_cast<double>(ctx.class_members.size());
        }
      } else if (name == "uce") {
        if (opts.holistic) {
          value = uce(bin_uncertainty(ev.set, opts.binning));
        } else {
          double acc = 0.0;
          for (const auto& members : ctx.class_members) {
            acc += uce(bin_uncertainty(ev.set, opts.binning, members));
          }
          value = acc / static_cast<double>(ctx.class_members.size());
        }
      } else if (name == "ccqs") {
        value = calibration_quality_score(bin_confidence(ev.set, opts.binning));
      } else if (name == "ucqs") {
        value = calibration_quality_score(bin_uncertainty(ev.set, opts.binning));
      } else {
        value = mean(ause_values(ev, ctx, sorter_for(name), opts, /*per_class=*/false));
      }
      result.metrics.at(name)[t_idx] = value;
    }
  });

  for (const auto& name : metric_names) {
    const auto& values = result.metrics[name];
    result.argmin_t[name] = argopt_temperature(grid, values, is_quality_score(name));
    result.normalized[name] = min_max_scale(values);
  }
  return result;
}

ClasswiseTable classwise_table(const PredictionSet& set, const TemperatureGrid& grid,
                               const std::vector<std::string>& metric_names,
                               const SweepOptions& opts, std::size_t top_count,
                               std::size_t bottom_count) {
  require_validated(set);
  check_grid(grid);
  check_binning(opts.binning);
  check_sparsification(opts.sparsification);
  check_metric_names(metric_names);

  const SweepContext ctx = make_context(set, true);
  PredictionSet base_with_logits = set;
  if (!base_with_logits.logits) base_with_logits.logits = recover_logits(set);
  base_with_logits.provenance.clear();

  const std::size_t n_classes = ctx.classes_present.size();
  // values[class][metric name][t]
  std::vector<std::map<std::string, std::vector<double>>> values(n_classes);
  for (auto& per_class : values) {
    for (const auto& name : metric_names) per_class[name].assign(grid.size(), 0.0);
  }

  run_parallel(grid.size(), opts.threads, [&](std::size_t t_idx) {
    TemperedEval ev{apply_temperature(base_with_logits, grid.values[t_idx]), {}, {}};
    for (const auto& name : metric_names) {
      if (is_ause_metric(name)) {
        const std::vector<double> per_class =
            ause_values(ev, ctx, sorter_for(name), opts, /*per_class=*/true);
        for (std::size_t ci = 0; ci < n_classes; ++ci) {
          values[ci].at(name)[t_idx] = per_class[ci];
        }
        continue;
      }
      for (std::size_t ci = 0; ci < n_classes; ++ci) {
        const auto& members = ctx.class_members[ci];
        double value = 0.0;
        if (name == "nll") {
          value = mean_of(ev.cross_entropy(), members);
        } else if (name == "brier") {
          value = mean_of(ev.brier_per_instance(), members);
        } else if (name == "ece") {
          value = ece(bin_confidence(ev.set, opts.binning, members));
        } else if (name == "uce") {
          value = uce(bin_uncertainty(ev.set, opts.binning, members));
        } else if (name == "ccqs") {
          value = calibration_quality_score(bin_confidence(ev.set, opts.binning, members));
        } else {
          value = calibration_quality_score(bin_uncertainty(ev.set, opts.binning, members));
        }
        values[ci].at(name)[t_idx] = value;
      }
    }
  });

  ClasswiseTable table;
  for (std::size_t ci = 0; ci < n_classes; ++ci) {
    ClasswiseRow row;
    row.class_id = ctx.classes_present[ci];
    row.name = !set.class_names.empty()
                   ? set.class_names[static_cast<std::size_t>(row.class_id)]
                   : "class_" + std::to_string(row.class_id);
    row.count = ctx.class_members[ci].size();
    for (const auto& name : metric_names) {
      row.argmin_t[name] =
          argopt_temperature(grid, values[ci][name], is_quality_score(name));
    }
    table.rows.push_back(std::move(row));
  }

  // Most/least represented class subsets; count ties resolved by class id.
  std::vector<std::size_t> by_count(n_classes);
  for (std::size_t i = 0; i < n_classes; ++i) by_count[i] = i;
  std::sort(by_count.begin(), by_count.end(), [&](std::size_t a, std::size_t b) {
    if (table.rows[a].count != table.rows[b].count) {
      return table.rows[a].count > table.rows[b].count;
    }
    return table.rows[a].class_id < table.rows[b].class_id;
  });
  top_count = std::min(top_count, n_classes);
  bottom_count = std::min(bottom_count, n_classes);
  for (std::size_t i = 0; i < top_count; ++i) {
    table.top_classes.push_back(table.rows[by_count[i]].class_id);
  }
  for (std::size_t i = 0; i < bottom_count; ++i) {
    table.bottom_classes.push_back(table.rows[by_count[n_classes - 1 - i]].class_id);
  }

  auto summarize = [&](const std::vector<int>& class_ids) {
    std::map<std::string, SummaryStats> summary;
    for (const auto& name : metric_names) {
      std::vector<double> optima;
      for (int c : class_ids) {
        for (const auto& row : table.rows) {
          if (row.class_id == c) optima.push_back(row.argmin_t.at(name));
        }
      }
      SummaryStats stats;
      if (!optima.empty()) {
        for (double v : optima) stats.mean += v;
        stats.mean /= static_cast<double>(optima.size());
        for (double v : optima) stats.stddev += (v - stats.mean) * (v - stats.mean);
        stats.stddev = std::sqrt(stats.stddev / static_cast<double>(optima.size()));
      }
      summary[name] = stats;
    }
    return summary;
  };
  table.top_summary = summarize(table.top_classes);
  table.bottom_summary = summarize(table.bottom_classes);
  return table;
}

std::vector<DecouplingEntry> decoupling_report(const SweepResult& result) {
  std::vector<DecouplingEntry> entries;
  const double step = result.grid.step();
  for (auto a = result.argmin_t.begin(); a != result.argmin_t.end(); ++a) {
    for (auto b = std::next(a); b != result.argmin_t.end(); ++b) {
      DecouplingEntry entry;
      entry.metric_a = a->first;
      entry.metric_b = b->first;
      entry.t_a = a->second;
      entry.t_b = b->second;
      entry.difference = std::fabs(a->second - b->second);
      entry.flagged = entry.difference > step + 1e-12;
      entries.push_back(std::move(entry));
    }
  }
  return entries;
}

namespace {

void run_parallel(std::size_t job_count, int threads, const std::function<void(std::size_t)>& job) {
  std::size_t worker_count = threads > 0 ? static_cast<std::size_t>(threads)
                                         : std::max(1u, std::thread::hardware_concurrency());
  worker_count = std::min(worker_count, job_count);
  if (worker_count <= 1) {
    for (std::size_t i = 0; i < job_count; ++i) job(i);
    return;
  }
  std::vector<std::exception_ptr> errors(worker_count);
  std::vector<std::thread> pool;
  pool.reserve(worker_count);
  for (std::size_t w = 0; w < worker_count; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < job_count; i += worker_count) job(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace

}  // namespace calimetr
