#include <doctest.h>

#include <random>

#include "calimetr/core.hpp"
#include "helpers.hpp"

using namespace calimetr;
using testutil::make_prob_set;

TEST_CASE("validate materializes probs from logits") {
  PredictionSet set;
  set.logits = Matrix(1, 2);
  set.logits->at(0, 0) = 2.0;
  set.logits->at(0, 1) = 0.0;
  set.labels = {0};
  set = validate(std::move(set));
  CHECK(set.probs->at(0, 0) == doctest::Approx(0.8808).epsilon(1e-3));
  CHECK(set.probs->at(0, 1) == doctest::Approx(0.1192).epsilon(1e-3));
}

TEST_CASE("validate accepts one-hot rows untouched") {
  auto set = make_prob_set({{1.0, 0.0}}, {0});
  CHECK(set.probs->at(0, 0) == 1.0);
  CHECK(set.probs->at(0, 1) == 0.0);
}

TEST_CASE("validate rejects rows off the simplex") {
  PredictionSet set;
  set.probs = Matrix(1, 2);
  set.probs->at(0, 0) = 0.6;
  set.probs->at(0, 1) = 0.6;
  set.labels = {0};
  try {
    validate(std::move(set));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SimplexViolation);
  }
}

TEST_CASE("validate rejects out-of-range labels and bad shapes") {
  PredictionSet set;
  set.probs = Matrix(1, 2);
  set.probs->at(0, 0) = 0.5;
  set.probs->at(0, 1) = 0.5;
  set.labels = {2};
  try {
    validate(std::move(set));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LabelOutOfRange);
  }

  PredictionSet empty;
  CHECK_THROWS_AS(validate(std::move(empty)), Error);

  PredictionSet ragged;
  ragged.probs = Matrix(2, 2);
  ragged.probs->at(0, 0) = 1.0;
  ragged.probs->at(1, 0) = 1.0;
  ragged.labels = {0};  // N mismatch
  try {
    validate(std::move(ragged));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeMismatch);
  }
}

TEST_CASE("validate checks probs against logits when both present") {
  PredictionSet set;
  set.logits = Matrix(1, 2);
  set.logits->at(0, 0) = 2.0;
  set.logits->at(0, 1) = 0.0;
  set.probs = Matrix(1, 2);
  set.probs->at(0, 0) = 0.5;
  set.probs->at(0, 1) = 0.5;
  set.labels = {0};
  CHECK_THROWS_AS(validate(std::move(set)), Error);
}

TEST_CASE("validate renormalizes near-simplex rows and is idempotent") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> noise(-5e-7, 5e-7);
  const std::size_t n = 50, k = 4;
  PredictionSet set;
  set.probs = Matrix(n, k);
  set.labels.assign(n, 0);
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      set.probs->at(i, j) = unif(rng);
      sum += set.probs->at(i, j);
    }
    for (std::size_t j = 0; j < k; ++j) {
      set.probs->at(i, j) = set.probs->at(i, j) / sum + noise(rng) / static_cast<double>(k);
    }
  }
  PredictionSet once = validate(std::move(set));
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += once.probs->at(i, j);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  PredictionSet twice = validate(once);
  CHECK(twice.probs->data == once.probs->data);  // bit-identical
}

TEST_CASE("ProbVector::checked enforces the simplex") {
  auto p = ProbVector::checked({0.25, 0.25, 0.5});
  CHECK(p.classes() == 3);
  CHECK_THROWS_AS(ProbVector::checked({1.0}), Error);
  CHECK_THROWS_AS(ProbVector::checked({0.9, 0.2}), Error);
  CHECK_THROWS_AS(ProbVector::checked({1.2, -0.2}), Error);
}

TEST_CASE("temperature grid construction") {
  const auto grid = TemperatureGrid::range(0.1, 10.0, 0.1);
  CHECK(grid.size() == 100);
  CHECK(grid.values.front() == doctest::Approx(0.1));
  CHECK(grid.values.back() == doctest::Approx(10.0));
  CHECK(grid.step() == doctest::Approx(0.1).epsilon(1e-9));
  CHECK_THROWS_AS(TemperatureGrid::range(0.0, 1.0, 0.1), Error);
  CHECK_THROWS_AS(check_grid(TemperatureGrid{{}}), Error);
  CHECK_THROWS_AS(check_grid(TemperatureGrid{{0.5, 0.5}}), Error);
}

TEST_CASE("ensemble alignment is enforced") {
  auto a = make_prob_set({{0.5, 0.5}, {0.9, 0.1}}, {0, 1});
  auto b = make_prob_set({{0.4, 0.6}, {0.2, 0.8}}, {0, 1});
  EnsemblePredictions ens{{a, b}};
  CHECK_NOTHROW(validate_ensemble(ens));

  auto c = make_prob_set({{0.4, 0.6}, {0.2, 0.8}}, {1, 1});
  EnsemblePredictions bad{{a, c}};
  try {
    validate_ensemble(std::move(bad));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EnsembleMisaligned);
  }
}

TEST_CASE("provenance must match the instance count when present") {
  PredictionSet set;
  set.probs = Matrix(2, 2);
  set.probs->at(0, 0) = 1.0;
  set.probs->at(1, 1) = 1.0;
  set.labels = {0, 1};
  set.provenance = {{"img_0", 3, 4}};  // wrong length
  CHECK_THROWS_AS(validate(std::move(set)), Error);

  PredictionSet ok;
  ok.probs = Matrix(2, 2);
  ok.probs->at(0, 0) = 1.0;
  ok.probs->at(1, 1) = 1.0;
  ok.labels = {0, 1};
  ok.provenance = {{"img_0", 3, 4}, {"img_0", 3, 5}};
  const auto validated = validate(std::move(ok));
  CHECK(validated.provenance.size() == 2);
  CHECK(validated.provenance[1].col == 5);
}

TEST_CASE("argmax ties break to the lowest class index") {
  const std::vector<double> row{0.25, 0.25, 0.25, 0.25};
  CHECK(argmax_row(row) == 0);
  const std::vector<double> row2{0.1, 0.45, 0.45};
  CHECK(argmax_row(row2) == 1);
}
