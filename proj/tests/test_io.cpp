#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "calimetr/io.hpp"
#include "calimetr/svg.hpp"
#include "calimetr/synth.hpp"
#include "calimetr/temper.hpp"
#include "helpers.hpp"

using namespace calimetr;
using calimetr::io::Json;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() / "calimetr_io_test";
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("canonical json: sorted keys, %.6g floats, stable dumps") {
  Json doc;
  doc["zeta"] = 0.25;
  doc["alpha"] = std::int64_t{42};
  doc["mid"] = "text";
  CHECK(doc.dump() == R"({"alpha":42,"mid":"text","zeta":0.25})");

  CHECK(io::format_double(27.631021115928547) == "27.631");
  CHECK(io::format_double(2.0) == "2");
  CHECK(io::format_double(1e6) == "1e+06");

  // parse -> dump is idempotent on canonical text
  const std::string canonical = doc.dump();
  CHECK(Json::parse(canonical).dump() == canonical);

  CHECK_THROWS_AS(Json(std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(Json::parse("{broken"), Error);
}

TEST_CASE("tensor files round trip bit-for-bit") {
  TempDir dir;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-5.0, 5.0);

  io::TensorData tensor;
  tensor.dtype = "f32";
  tensor.role = "logits";
  tensor.shape = {3, 4};
  tensor.class_names = {"a", "b", "c", "d"};
  tensor.prng = kPrngId;
  for (int i = 0; i < 12; ++i) tensor.f32.push_back(static_cast<float>(unif(rng)));

  const std::string path = dir.file("t.cal");
  io::write_tensor(path, tensor);
  const auto back = io::read_tensor(path);
  CHECK(back.f32 == tensor.f32);
  CHECK(back.shape == tensor.shape);
  CHECK(back.class_names == tensor.class_names);
  CHECK(back.prng == tensor.prng);

  const std::string again = dir.file("t2.cal");
  io::write_tensor(again, back);
  CHECK(io::read_text_file(path) == io::read_text_file(again));
}

TEST_CASE("tensor reader validates magic, header and payload size") {
  TempDir dir;

  io::TensorData tensor;
  tensor.dtype = "f32";
  tensor.role = "probs";
  tensor.shape = {2, 2};
  tensor.f32 = {1.0f, 0.0f, 0.25f, 0.75f};
  const std::string path = dir.file("p.cal");
  io::write_tensor(path, tensor);
  // 8 magic + 4 len + header + 16 payload bytes
  const std::string blob = io::read_text_file(path);
  CHECK(io::read_tensor(path).f32.size() == 4);

  io::write_text_file(dir.file("bad.cal"), "NOTMAGIC" + blob.substr(8));
  try {
    (void)io::read_tensor(dir.file("bad.cal"));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadMagic);
  }

  io::write_text_file(dir.file("trunc.cal"), blob.substr(0, blob.size() - 4));
  try {
    (void)io::read_tensor(dir.file("trunc.cal"));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PayloadSizeMismatch);
  }
}

TEST_CASE("csv ingestion") {
  TempDir dir;
  io::write_text_file(dir.file("ok.csv"), "label,p0,p1\n0,0.9,0.1\n1,0.3,0.7\n");
  const auto set = io::read_csv_predictions(dir.file("ok.csv"));
  CHECK(set.size() == 2);
  CHECK(set.classes() == 2);
  CHECK(set.probs->at(0, 0) == doctest::Approx(0.9));

  io::write_text_file(dir.file("logits.csv"), "label,l0,l1\n0,2.0,0.0\n");
  const auto lset = io::read_csv_predictions(dir.file("logits.csv"));
  CHECK(lset.probs->at(0, 0) == doctest::Approx(0.8808).epsilon(1e-3));

  // near-simplex rows are renormalized on ingest
  io::write_text_file(dir.file("near.csv"), "label,p0,p1\n0,0.9000004,0.1\n");
  const auto nset = io::read_csv_predictions(dir.file("near.csv"));
  CHECK(nset.probs->at(0, 0) + nset.probs->at(0, 1) == doctest::Approx(1.0).epsilon(1e-12));

  io::write_text_file(dir.file("ragged.csv"), "label,p0,p1\n0,0.9\n");
  try {
    (void)io::read_csv_predictions(dir.file("ragged.csv"));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RaggedRows);
  }

  io::write_text_file(dir.file("text.csv"), "label,p0,p1\n0,zebra,0.1\n");
  try {
    (void)io::read_csv_predictions(dir.file("text.csv"));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonNumericCell);
  }

  io::write_text_file(dir.file("badhdr.csv"), "id,p0,p1\n0,0.9,0.1\n");
  try {
    (void)io::read_csv_predictions(dir.file("badhdr.csv"));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownHeader);
  }
}

TEST_CASE("prediction sets round trip through tensor files") {
  TempDir dir;
  const auto set = gen_calibrated(SynthConfig{50, 3, 1.0, 1.0, 3});
  io::write_tensor(dir.file("logits.cal"), io::tensor_from_logits(set));
  io::write_tensor(dir.file("labels.cal"), io::tensor_from_labels(set));
  const auto back = io::load_prediction_set({dir.file("logits.cal"), dir.file("labels.cal")});
  CHECK(back.size() == set.size());
  CHECK(back.labels == set.labels);
  for (std::size_t idx = 0; idx < set.probs->data.size(); ++idx) {
    CHECK(back.probs->data[idx] == doctest::Approx(set.probs->data[idx]).epsilon(1e-5));
  }
}

TEST_CASE("reports validate provenance and round trip") {
  TempDir dir;
  io::write_text_file(dir.file("input.bin"), "payload");

  Json report;
  Json metrics;
  metrics["nll"] = 0.5;
  report["metrics"] = std::move(metrics);
  report["provenance"] = io::make_provenance({dir.file("input.bin")}, Json(Json::Object{}));
  const std::string path = dir.file("report.json");
  io::write_report(report, path);

  const Json back = io::read_report(path);
  CHECK(back.at("metrics").at("nll").number() == doctest::Approx(0.5));
  io::write_report(back, dir.file("report2.json"));
  CHECK(io::read_text_file(path) == io::read_text_file(dir.file("report2.json")));

  Json hollow;
  hollow["metrics"] = Json(Json::Object{});
  CHECK_THROWS_AS(io::check_report(hollow), Error);
}

TEST_CASE("file digests are stable and content sensitive") {
  TempDir dir;
  io::write_text_file(dir.file("a"), "same bytes");
  io::write_text_file(dir.file("b"), "same bytes");
  io::write_text_file(dir.file("c"), "other bytes");
  CHECK(io::file_digest(dir.file("a")) == io::file_digest(dir.file("b")));
  CHECK(io::file_digest(dir.file("a")) != io::file_digest(dir.file("c")));
}

TEST_CASE("svg renderers are deterministic and structured") {
  auto set = testutil::make_prob_set(
      {{0.95, 0.05}, {0.72, 0.28}, {0.55, 0.45}, {0.93, 0.07}}, {0, 0, 1, 0});
  const auto curve = bin_confidence(set, BinningConfig{3});
  const std::string svg1 = svg::render_reliability(curve, "reliability");
  const std::string svg2 = svg::render_reliability(curve, "reliability");
  CHECK(svg1 == svg2);

  std::size_t bars = 0, diagonals = 0, non_empty = 0;
  for (const auto& bin : curve.bins) non_empty += bin.empty ? 0 : 1;
  for (std::size_t pos = svg1.find("bin-bar"); pos != std::string::npos;
       pos = svg1.find("bin-bar", pos + 1)) {
    ++bars;
  }
  for (std::size_t pos = svg1.find("class=\"diagonal\""); pos != std::string::npos;
       pos = svg1.find("class=\"diagonal\"", pos + 1)) {
    ++diagonals;
  }
  CHECK(bars == non_empty);
  CHECK(diagonals == 1);

  // loss surface: one polyline and one marker per metric
  SweepResult sweep;
  sweep.grid = TemperatureGrid::range(0.5, 2.0, 0.5);
  sweep.normalized["nll"] = {1.0, 0.0, 0.5, 0.75};
  sweep.normalized["ece"] = {0.3, 0.0, 1.0, 0.9};
  sweep.argmin_t["nll"] = 1.0;
  sweep.argmin_t["ece"] = 1.0;
  const std::string surface = svg::render_loss_surface(sweep, "loss");
  std::size_t curves = 0, markers = 0;
  for (std::size_t pos = surface.find("metric-curve"); pos != std::string::npos;
       pos = surface.find("metric-curve", pos + 1)) {
    ++curves;
  }
  for (std::size_t pos = surface.find("argmin-marker"); pos != std::string::npos;
       pos = surface.find("argmin-marker", pos + 1)) {
    ++markers;
  }
  CHECK(curves == 2);
  CHECK(markers == 2);
}

TEST_CASE("reliability bins reach the svg with meaningful geometry") {
  auto set = testutil::make_prob_set({{1.0, 0.0}}, {0});
  const auto curve = bin_confidence(set, BinningConfig{10});
  const std::string svg_text = svg::render_reliability(curve, "one bin");
  CHECK(svg_text.find("<svg") == 0);
  CHECK(svg_text.find("width=\"800\"") != std::string::npos);
  CHECK(svg_text.find("height=\"600\"") != std::string::npos);
}
