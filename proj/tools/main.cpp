#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "calimetr/decompose.hpp"
#include "calimetr/io.hpp"
#include "calimetr/reliability.hpp"
#include "calimetr/scores.hpp"
#include "calimetr/sparsification.hpp"
#include "calimetr/svg.hpp"
#include "calimetr/synth.hpp"
#include "calimetr/temper.hpp"

namespace {

using calimetr::io::Json;

struct Options {
  std::vector<std::string> inputs;
  std::string out_dir;
  int bins = 10;
  double temp_min = 0.1;
  double temp_max = 10.0;
  double temp_step = 0.1;
  std::string sorter = "vr";
  std::string merit = "iou";
  int steps = 100;
  double max_fraction = 0.99;
  std::string class_sel;  // "", "all" or an id
  bool holistic = false;
  bool nats = false;
  std::uint64_t seed = 0;
  std::string format = "json";
  // synth
  std::string kind = "calibrated";
  std::size_t n = 10000;
  std::size_t k = 5;
  double concentration = 1.0;
  double distortion = 1.0;
};

calimetr::SorterKind parse_sorter(const std::string& name) {
  if (name == "vr") return calimetr::SorterKind::variation_ratio;
  if (name == "entropy") return calimetr::SorterKind::entropy;
  if (name == "ce") return calimetr::SorterKind::cross_entropy;
  calimetr::fail(calimetr::ErrorCode::UnknownSorter, name);
}

calimetr::MeritKind parse_merit(const std::string& name) {
  if (name == "iou") return calimetr::MeritKind::iou;
  if (name == "accuracy") return calimetr::MeritKind::accuracy;
  if (name == "brier") return calimetr::MeritKind::brier;
  calimetr::fail(calimetr::ErrorCode::UnknownKind, name);
}

Json config_json(const Options& opt, const std::string& subcommand) {
  Json cfg;
  cfg["subcommand"] = subcommand;
  cfg["bins"] = static_cast<std::int64_t>(opt.bins);
  cfg["temp_min"] = opt.temp_min;
  cfg["temp_max"] = opt.temp_max;
  cfg["temp_step"] = opt.temp_step;
  cfg["sorter"] = opt.sorter;
  cfg["merit"] = opt.merit;
  cfg["steps"] = static_cast<std::int64_t>(opt.steps);
  cfg["max_fraction"] = opt.max_fraction;
  cfg["class"] = opt.class_sel.empty() ? "none" : opt.class_sel;
  cfg["holistic"] = opt.holistic;
  cfg["seed"] = opt.seed;
  cfg["format"] = opt.format;
  if (subcommand == "synth") {
    cfg["kind"] = opt.kind;
    cfg["n"] = opt.n;
    cfg["k"] = opt.k;
    cfg["concentration"] = opt.concentration;
    cfg["distortion"] = opt.distortion;
  }
  if (subcommand == "decompose") cfg["nats"] = opt.nats;
  return cfg;
}

Json curve_json(const calimetr::ReliabilityCurve& curve) {
  Json::Array bins;
  for (const auto& bin : curve.bins) {
    Json entry;
    entry["lo"] = bin.lo;
    entry["hi"] = bin.hi;
    entry["count"] = bin.count;
    entry["empty"] = bin.empty;
    entry["mean_measure"] = bin.mean_measure;
    entry["outcome_rate"] = bin.outcome_rate;
    bins.push_back(std::move(entry));
  }
  Json out;
  out["bins"] = Json(std::move(bins));
  out["mode"] = curve.mode == calimetr::ReliabilityMode::confidence ? "confidence" : "uncertainty";
  out["skewness"] = curve.skewness;
  return out;
}

Json series_json(const calimetr::CurveSeries& series) {
  Json::Array fractions, values;
  for (double f : series.fractions) fractions.emplace_back(f);
  for (double v : series.values) values.emplace_back(v);
  Json out;
  out["fractions"] = Json(std::move(fractions));
  out["values"] = Json(std::move(values));
  out["merit"] = calimetr::to_string(series.merit);
  return out;
}

Json ause_json(const calimetr::AuseResult& result, std::optional<int> class_id,
               const std::vector<std::string>& class_names) {
  Json out;
  out["ause"] = result.ause;
  out["sorter"] = calimetr::to_string(result.sorter);
  out["negative_area_flag"] = result.negative_area_flag;
  out["oracle"] = series_json(result.oracle);
  out["method"] = series_json(result.method);
  if (class_id) {
    out["class_id"] = static_cast<std::int64_t>(*class_id);
    if (!class_names.empty()) {
      out["class_name"] = class_names[static_cast<std::size_t>(*class_id)];
    }
  }
  return out;
}

Json sweep_json(const calimetr::SweepResult& sweep) {
  Json out;
  Json::Array grid;
  for (double t : sweep.grid.values) grid.emplace_back(t);
  out["grid"] = Json(std::move(grid));

  Json metrics, normalized, argmin;
  for (const auto& [name, values] : sweep.metrics) {
    Json::Array arr;
    for (double v : values) arr.emplace_back(v);
    metrics[name] = Json(std::move(arr));
  }
  for (const auto& [name, values] : sweep.normalized) {
    Json::Array arr;
    for (double v : values) arr.emplace_back(v);
    normalized[name] = Json(std::move(arr));
  }
  for (const auto& [name, t] : sweep.argmin_t) argmin[name] = t;
  out["metrics"] = std::move(metrics);
  out["normalized"] = std::move(normalized);
  out["argmin_t"] = std::move(argmin);

  Json::Array decoupling;
  for (const auto& entry : calimetr::decoupling_report(sweep)) {
    Json pair;
    pair["metric_a"] = entry.metric_a;
    pair["metric_b"] = entry.metric_b;
    pair["t_a"] = entry.t_a;
    pair["t_b"] = entry.t_b;
    pair["difference"] = entry.difference;
    pair["flagged"] = entry.flagged;
    decoupling.push_back(std::move(pair));
  }
  out["decoupling"] = Json(std::move(decoupling));
  return out;
}

Json classwise_json(const calimetr::ClasswiseTable& table, std::optional<int> only_class) {
  Json out;
  Json::Array rows;
  for (const auto& row : table.rows) {
    if (only_class && row.class_id != *only_class) continue;
    Json entry;
    entry["class_id"] = static_cast<std::int64_t>(row.class_id);
    entry["name"] = row.name;
    entry["count"] = row.count;
    Json argmin;
    for (const auto& [name, t] : row.argmin_t) argmin[name] = t;
    entry["argmin_t"] = std::move(argmin);
    rows.push_back(std::move(entry));
  }
  out["rows"] = Json(std::move(rows));
  if (!only_class) {
    auto summary_json = [](const std::map<std::string, calimetr::SummaryStats>& summary,
                           const std::vector<int>& classes) {
      Json out_summary;
      Json::Array ids;
      for (int c : classes) ids.emplace_back(static_cast<std::int64_t>(c));
      out_summary["classes"] = Json(std::move(ids));
      Json per_metric;
      for (const auto& [name, stats] : summary) {
        Json entry;
        entry["mean"] = stats.mean;
        entry["stddev"] = stats.stddev;
        per_metric[name] = std::move(entry);
      }
      out_summary["argmin_t"] = std::move(per_metric);
      return out_summary;
    };
    out["most_represented"] = summary_json(table.top_summary, table.top_classes);
    out["least_represented"] = summary_json(table.bottom_summary, table.bottom_classes);
  }
  return out;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) calimetr::fail(calimetr::ErrorCode::UnwritablePath, dir);
}

std::string out_path(const Options& opt, const std::string& file) {
  return (std::filesystem::path(opt.out_dir) / file).string();
}

bool wants_svg(const Options& opt) { return opt.format == "json+svg"; }

std::optional<int> parse_class_selection(const Options& opt, bool* want_all) {
  *want_all = opt.class_sel == "all";
  if (opt.class_sel.empty() || *want_all) return std::nullopt;
  try {
    return std::stoi(opt.class_sel);
  } catch (const std::exception&) {
    calimetr::fail(calimetr::ErrorCode::UnknownClass, "--class must be an id or 'all'");
  }
}

int run_report(const Options& opt) {
  const calimetr::PredictionSet set = calimetr::io::load_prediction_set(opt.inputs);
  const calimetr::BinningConfig bins{opt.bins};
  const auto conf_curve = calimetr::bin_confidence(set, bins);
  const auto unc_curve = calimetr::bin_uncertainty(set, bins);

  double correct = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    correct += calimetr::argmax_row(set.probs->row_span(i)) ==
                       static_cast<std::size_t>(set.labels[i])
                   ? 1.0
                   : 0.0;
  }

  Json metrics;
  metrics["accuracy"] = correct / static_cast<double>(set.size());
  metrics["nll"] = calimetr::nll(set);
  metrics["brier"] = calimetr::brier(set);
  metrics["ece"] = calimetr::ece(conf_curve);
  metrics["uce"] = calimetr::uce(unc_curve);
  metrics["ccqs"] = calimetr::calibration_quality_score(conf_curve);
  metrics["ucqs"] = calimetr::calibration_quality_score(unc_curve);

  Json reliability;
  reliability["confidence"] = curve_json(conf_curve);
  reliability["uncertainty"] = curve_json(unc_curve);

  Json report;
  report["metrics"] = std::move(metrics);
  report["reliability"] = std::move(reliability);
  report["provenance"] = calimetr::io::make_provenance(opt.inputs, config_json(opt, "report"));
  calimetr::io::write_report(report, out_path(opt, "report.json"));

  if (wants_svg(opt)) {
    calimetr::io::write_text_file(out_path(opt, "reliability_confidence.svg"),
                                  calimetr::svg::render_reliability(conf_curve, "reliability (confidence)"));
    calimetr::io::write_text_file(out_path(opt, "reliability_uncertainty.svg"),
                                  calimetr::svg::render_reliability(unc_curve, "reliability (uncertainty)"));
  }
  return 0;
}

int run_sweep(const Options& opt) {
  const calimetr::PredictionSet set = calimetr::io::load_prediction_set(opt.inputs);
  const auto grid = calimetr::TemperatureGrid::range(opt.temp_min, opt.temp_max, opt.temp_step);
  calimetr::SweepOptions sweep_opts;
  sweep_opts.binning = calimetr::BinningConfig{opt.bins};
  sweep_opts.sparsification = calimetr::SparsificationConfig{opt.steps, opt.max_fraction};
  sweep_opts.merit = parse_merit(opt.merit);
  sweep_opts.holistic = opt.holistic;

  const auto result = calimetr::sweep(set, grid, calimetr::all_sweep_metrics(), sweep_opts);
  Json sweep_section = sweep_json(result);

  bool want_all = false;
  const std::optional<int> class_id = parse_class_selection(opt, &want_all);
  if (want_all || class_id) {
    const auto table =
        calimetr::classwise_table(set, grid, calimetr::all_sweep_metrics(), sweep_opts);
    sweep_section["classwise"] = classwise_json(table, class_id);
  }

  Json report;
  report["sweep"] = std::move(sweep_section);
  report["provenance"] = calimetr::io::make_provenance(opt.inputs, config_json(opt, "sweep"));
  calimetr::io::write_report(report, out_path(opt, "report.json"));

  if (wants_svg(opt)) {
    calimetr::io::write_text_file(out_path(opt, "loss_surface.svg"),
                                  calimetr::svg::render_loss_surface(result, "normalized calibration loss"));
  }
  return 0;
}

int run_ause(const Options& opt) {
  const calimetr::PredictionSet set = calimetr::io::load_prediction_set(opt.inputs);
  const calimetr::SparsificationConfig cfg{opt.steps, opt.max_fraction};
  const auto sorter = parse_sorter(opt.sorter);
  const auto merit_kind = parse_merit(opt.merit);

  bool want_all = false;
  std::optional<int> selected = parse_class_selection(opt, &want_all);
  if (opt.class_sel.empty() && merit_kind == calimetr::MeritKind::iou) want_all = true;

  std::vector<std::pair<std::optional<int>, calimetr::AuseResult>> results;
  if (want_all) {
    std::vector<bool> present(set.classes(), false);
    for (std::int32_t label : set.labels) present[static_cast<std::size_t>(label)] = true;
    for (std::size_t c = 0; c < present.size(); ++c) {
      if (!present[c]) continue;
      const int id = static_cast<int>(c);
      results.emplace_back(id, calimetr::ause(set, sorter, merit_kind, cfg, id));
    }
  } else {
    results.emplace_back(selected, calimetr::ause(set, sorter, merit_kind, cfg, selected));
  }

  Json::Array out_results;
  for (const auto& [class_id, result] : results) {
    out_results.push_back(ause_json(result, class_id, set.class_names));
  }
  Json sparsification;
  sparsification["sorter"] = opt.sorter;
  sparsification["merit"] = opt.merit;
  sparsification["results"] = Json(std::move(out_results));

  Json report;
  report["sparsification"] = std::move(sparsification);
  report["provenance"] = calimetr::io::make_provenance(opt.inputs, config_json(opt, "ause"));
  calimetr::io::write_report(report, out_path(opt, "report.json"));

  if (wants_svg(opt)) {
    for (const auto& [class_id, result] : results) {
      const std::string suffix = class_id ? "_class" + std::to_string(*class_id) : "";
      calimetr::io::write_text_file(
          out_path(opt, "sparsification" + suffix + ".svg"),
          calimetr::svg::render_sparsification(result.oracle, result.method,
                                               "sparsification (" + opt.sorter + suffix + ")"));
    }
    if (results.size() > 1) {
      std::vector<double> xs, values;
      for (const auto& [class_id, result] : results) {
        xs.push_back(class_id ? static_cast<double>(*class_id) : 0.0);
        values.push_back(result.ause);
      }
      calimetr::io::write_text_file(out_path(opt, "ause_over_runs.svg"),
                                    calimetr::svg::render_ause_over_runs(xs, values, "ause per class"));
    }
  }
  return 0;
}

int run_decompose(const Options& opt) {
  // inputs: one or more member tensors plus exactly one labels tensor
  std::vector<std::string> member_paths;
  std::string labels_path;
  for (const std::string& path : opt.inputs) {
    const auto tensor = calimetr::io::read_tensor(path);
    if (tensor.role == "labels") {
      labels_path = path;
    } else {
      member_paths.push_back(path);
    }
  }
  if (labels_path.empty() || member_paths.empty()) {
    calimetr::fail(calimetr::ErrorCode::ShapeMismatch,
                   "decompose needs member tensors and one labels tensor");
  }

  calimetr::EnsemblePredictions ens;
  for (const std::string& path : member_paths) {
    ens.members.push_back(calimetr::io::load_prediction_set({path, labels_path}));
  }
  ens = calimetr::validate_ensemble(std::move(ens));
  const auto scale = opt.nats ? calimetr::EntropyScale::nats : calimetr::EntropyScale::normalized;
  const auto result = calimetr::decompose(ens, scale);

  Json decomposition;
  decomposition["members"] = ens.members.size();
  decomposition["scale"] = opt.nats ? "nats" : "normalized";
  decomposition["total_mean"] = result.total_mean;
  decomposition["aleatoric_mean"] = result.aleatoric_mean;
  decomposition["epistemic_mean"] = result.epistemic_mean;
  Json::Array total, aleatoric, epistemic;
  for (double v : result.total) total.emplace_back(v);
  for (double v : result.aleatoric) aleatoric.emplace_back(v);
  for (double v : result.epistemic) epistemic.emplace_back(v);
  decomposition["total"] = Json(std::move(total));
  decomposition["aleatoric"] = Json(std::move(aleatoric));
  decomposition["epistemic"] = Json(std::move(epistemic));

  Json report;
  report["decomposition"] = std::move(decomposition);
  report["provenance"] = calimetr::io::make_provenance(opt.inputs, config_json(opt, "decompose"));
  calimetr::io::write_report(report, out_path(opt, "report.json"));
  return 0;
}

int run_synth(const Options& opt) {
  calimetr::SynthConfig cfg;
  cfg.n = opt.n;
  cfg.k = opt.k;
  cfg.concentration = opt.concentration;
  cfg.distortion = opt.distortion;
  cfg.seed = opt.seed;

  calimetr::PredictionSet set;
  if (opt.kind == "calibrated") {
    set = calimetr::gen_calibrated(cfg);
  } else if (opt.kind == "skewed-conf") {
    set = calimetr::gen_skewed(cfg, calimetr::SkewTarget::high_confidence);
  } else if (opt.kind == "skewed-unc") {
    set = calimetr::gen_skewed(cfg, calimetr::SkewTarget::high_uncertainty);
  } else {
    calimetr::fail(calimetr::ErrorCode::UnknownKind, "--kind " + opt.kind);
  }

  std::vector<std::string> written;
  if (set.logits) {
    auto tensor = calimetr::io::tensor_from_logits(set);
    tensor.prng = calimetr::kPrngId;
    calimetr::io::write_tensor(out_path(opt, "logits.cal"), tensor);
    written.push_back(out_path(opt, "logits.cal"));
  } else {
    auto tensor = calimetr::io::tensor_from_probs(set);
    tensor.prng = calimetr::kPrngId;
    calimetr::io::write_tensor(out_path(opt, "probs.cal"), tensor);
    written.push_back(out_path(opt, "probs.cal"));
  }
  auto labels = calimetr::io::tensor_from_labels(set);
  labels.prng = calimetr::kPrngId;
  calimetr::io::write_tensor(out_path(opt, "labels.cal"), labels);
  written.push_back(out_path(opt, "labels.cal"));

  Json report;
  report["provenance"] = calimetr::io::make_provenance(written, config_json(opt, "synth"));
  calimetr::io::write_report(report, out_path(opt, "report.json"));
  return 0;
}

calimetr::ReliabilityCurve curve_from_json(const Json& data) {
  calimetr::ReliabilityCurve curve;
  curve.mode = data.at("mode").str() == "confidence" ? calimetr::ReliabilityMode::confidence
                                                     : calimetr::ReliabilityMode::uncertainty;
  curve.skewness = data.at("skewness").number();
  for (const Json& entry : data.at("bins").array()) {
    calimetr::BinStats bin;
    bin.lo = entry.at("lo").number();
    bin.hi = entry.at("hi").number();
    bin.count = static_cast<std::size_t>(entry.at("count").integer());
    bin.empty = entry.at("empty").boolean();
    bin.mean_measure = entry.at("mean_measure").number();
    bin.outcome_rate = entry.at("outcome_rate").number();
    curve.bins.push_back(bin);
  }
  return curve;
}

calimetr::CurveSeries series_from_json(const Json& data) {
  calimetr::CurveSeries series;
  for (const Json& f : data.at("fractions").array()) series.fractions.push_back(f.number());
  for (const Json& v : data.at("values").array()) series.values.push_back(v.number());
  const std::string merit_name = data.at("merit").str();
  series.merit = merit_name == "iou"        ? calimetr::MeritKind::iou
                 : merit_name == "accuracy" ? calimetr::MeritKind::accuracy
                                            : calimetr::MeritKind::brier;
  return series;
}

int run_plot(const Options& opt) {
  if (opt.inputs.size() != 1) {
    calimetr::fail(calimetr::ErrorCode::ShapeMismatch, "plot takes one report.json input");
  }
  const Json report = calimetr::io::read_report(opt.inputs[0]);

  if (report.contains("reliability")) {
    const Json& reliability = report.at("reliability");
    calimetr::io::write_text_file(
        out_path(opt, "reliability_confidence.svg"),
        calimetr::svg::render_reliability(curve_from_json(reliability.at("confidence")),
                                          "reliability (confidence)"));
    calimetr::io::write_text_file(
        out_path(opt, "reliability_uncertainty.svg"),
        calimetr::svg::render_reliability(curve_from_json(reliability.at("uncertainty")),
                                          "reliability (uncertainty)"));
  }
  if (report.contains("sparsification")) {
    const Json& spars = report.at("sparsification");
    std::vector<double> xs, values;
    std::size_t index = 0;
    for (const Json& entry : spars.at("results").array()) {
      const std::string suffix =
          entry.contains("class_id") ? "_class" + std::to_string(entry.at("class_id").integer())
                                     : "";
      calimetr::io::write_text_file(
          out_path(opt, "sparsification" + suffix + ".svg"),
          calimetr::svg::render_sparsification(series_from_json(entry.at("oracle")),
                                               series_from_json(entry.at("method")),
                                               "sparsification" + suffix));
      xs.push_back(static_cast<double>(index++));
      values.push_back(entry.at("ause").number());
    }
    if (values.size() > 1) {
      calimetr::io::write_text_file(out_path(opt, "ause_over_runs.svg"),
                                    calimetr::svg::render_ause_over_runs(xs, values, "ause series"));
    }
  }
  if (report.contains("sweep")) {
    const Json& sweep_section = report.at("sweep");
    calimetr::SweepResult sweep;
    for (const Json& t : sweep_section.at("grid").array()) sweep.grid.values.push_back(t.number());
    for (const auto& [name, arr] : sweep_section.at("normalized").object()) {
      std::vector<double> values;
      for (const Json& v : arr.array()) values.push_back(v.number());
      sweep.normalized[name] = std::move(values);
    }
    for (const auto& [name, t] : sweep_section.at("argmin_t").object()) {
      sweep.argmin_t[name] = t.number();
    }
    calimetr::io::write_text_file(out_path(opt, "loss_surface.svg"),
                                  calimetr::svg::render_loss_surface(sweep, "normalized calibration loss"));
  }

  Json own;
  own["provenance"] = calimetr::io::make_provenance(opt.inputs, config_json(opt, "plot"));
  calimetr::io::write_report(own, out_path(opt, "report.json"));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"calimetr: calibration and uncertainty metrics toolkit"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&](CLI::App* sub, bool needs_inputs) {
    if (needs_inputs) {
      sub->add_option("--inputs", opt.inputs, "input files")->required()->expected(-1);
    }
    sub->add_option("--out", opt.out_dir, "output directory")->required();
    sub->add_option("--bins", opt.bins, "reliability bins");
    sub->add_option("--temp-min", opt.temp_min, "sweep grid start");
    sub->add_option("--temp-max", opt.temp_max, "sweep grid end");
    sub->add_option("--temp-step", opt.temp_step, "sweep grid step");
    sub->add_option("--sorter", opt.sorter, "vr|entropy|ce");
    sub->add_option("--merit", opt.merit, "iou|accuracy|brier");
    sub->add_option("--steps", opt.steps, "sparsification fraction steps");
    sub->add_option("--max-fraction", opt.max_fraction, "last removal fraction");
    sub->add_option("--class", opt.class_sel, "class id or 'all'");
    sub->add_flag("--holistic", opt.holistic, "pool classes for ece/uce");
    sub->add_option("--seed", opt.seed, "PRNG seed");
    sub->add_option("--format", opt.format, "json|json+svg");
  };

  CLI::App* cmd_report = app.add_subcommand("report", "scalar metrics and reliability diagrams");
  add_common(cmd_report, true);
  CLI::App* cmd_sweep = app.add_subcommand("sweep", "metric curves over a temperature grid");
  add_common(cmd_sweep, true);
  CLI::App* cmd_ause = app.add_subcommand("ause", "sparsification curves and AUSE");
  add_common(cmd_ause, true);
  CLI::App* cmd_decompose = app.add_subcommand("decompose", "entropy decomposition of an ensemble");
  add_common(cmd_decompose, true);
  cmd_decompose->add_flag("--nats", opt.nats, "report nats instead of normalized entropy");
  CLI::App* cmd_synth = app.add_subcommand("synth", "generate synthetic fixtures");
  add_common(cmd_synth, false);
  cmd_synth->add_option("--kind", opt.kind, "calibrated|skewed-conf|skewed-unc");
  cmd_synth->add_option("--n", opt.n, "instance count");
  cmd_synth->add_option("--k", opt.k, "class count");
  cmd_synth->add_option("--concentration", opt.concentration, "row sharpness (large = uniform)");
  cmd_synth->add_option("--distortion", opt.distortion, "logit multiplier");
  CLI::App* cmd_plot = app.add_subcommand("plot", "render SVG figures from a report");
  add_common(cmd_plot, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  // Flag-value preconditions are usage errors, not data errors.
  if (opt.bins < 1 || opt.steps < 2 || !(opt.max_fraction > 0.0 && opt.max_fraction < 1.0) ||
      !(opt.temp_min > 0.0) || !(opt.temp_step > 0.0) || opt.temp_max < opt.temp_min ||
      (opt.format != "json" && opt.format != "json+svg") ||
      (opt.sorter != "vr" && opt.sorter != "entropy" && opt.sorter != "ce") ||
      (opt.merit != "iou" && opt.merit != "accuracy" && opt.merit != "brier") ||
      (opt.kind != "calibrated" && opt.kind != "skewed-conf" && opt.kind != "skewed-unc")) {
    std::cerr << "usage error: flag value out of range\n";
    return 2;
  }

  try {
    ensure_out_dir(opt.out_dir);
    if (cmd_report->parsed()) return run_report(opt);
    if (cmd_sweep->parsed()) return run_sweep(opt);
    if (cmd_ause->parsed()) return run_ause(opt);
    if (cmd_decompose->parsed()) return run_decompose(opt);
    if (cmd_synth->parsed()) return run_synth(opt);
    if (cmd_plot->parsed()) return run_plot(opt);
  } catch (const calimetr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
