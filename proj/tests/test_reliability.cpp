#include <doctest.h>

#include <cmath>
#include <random>

#include "calimetr/reliability.hpp"
#include "calimetr/scores.hpp"
#include "helpers.hpp"
#include "oracle.hpp"

using namespace calimetr;
using testutil::make_prob_set;
using testutil::random_prob_set;

namespace {

ReliabilityCurve one_bin_curve(ReliabilityMode mode, double measure, double outcome,
                               std::size_t count) {
  ReliabilityCurve curve;
  curve.mode = mode;
  curve.bins.push_back(BinStats{0.0, 1.0, count, measure, outcome, false});
  return curve;
}

}  // namespace

TEST_CASE("bin_confidence on a two-instance fixture") {
  auto set = make_prob_set({{0.75, 0.25}, {0.75, 0.25}}, {0, 1});  // one correct
  const auto curve = bin_confidence(set, BinningConfig{10});
  std::size_t non_empty = 0;
  for (const auto& bin : curve.bins) {
    if (bin.empty) continue;
    ++non_empty;
    CHECK(bin.count == 2);
    CHECK(bin.mean_measure == doctest::Approx(0.75));
    CHECK(bin.outcome_rate == doctest::Approx(0.5));
  }
  CHECK(non_empty == 1);
  CHECK(ece(curve) == doctest::Approx(0.25));
}

TEST_CASE("bin_confidence with all-correct one-hot rows") {
  auto set = make_prob_set({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, {0, 0, 1});
  const auto curve = bin_confidence(set, BinningConfig{10});
  CHECK(curve.bins.back().count == 3);
  CHECK(curve.bins.back().mean_measure == doctest::Approx(1.0));
  CHECK(curve.bins.back().outcome_rate == doctest::Approx(1.0));
  CHECK(ece(curve) == doctest::Approx(0.0));
}

TEST_CASE("a single bin holds everything") {
  std::mt19937_64 rng(21);
  auto set = random_prob_set(rng, 40, 3);
  const auto curve = bin_confidence(set, BinningConfig{1});
  CHECK(curve.bins.size() == 1);
  CHECK(curve.bins[0].count == 40);
  double correct = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    correct += argmax_row(set.probs->row_span(i)) == static_cast<std::size_t>(set.labels[i]);
  }
  CHECK(curve.bins[0].outcome_rate == doctest::Approx(correct / 40.0));
}

TEST_CASE("bin_uncertainty fixtures") {
  auto perfect = make_prob_set({{1.0, 0.0}, {0.0, 1.0}}, {0, 1});
  const auto low = bin_uncertainty(perfect, BinningConfig{10});
  CHECK(low.bins.front().count == 2);
  CHECK(low.bins.front().outcome_rate == doctest::Approx(0.0));
  CHECK(low.bins.front().mean_measure == doctest::Approx(0.0));
  CHECK(uce(low) == doctest::Approx(0.0));

  auto uniform = make_prob_set({{0.5, 0.5}, {0.5, 0.5}}, {0, 1});  // argmax 0: one correct
  const auto high = bin_uncertainty(uniform, BinningConfig{10});
  CHECK(high.bins.back().count == 2);
  CHECK(high.bins.back().mean_measure == doctest::Approx(1.0));
  CHECK(high.bins.back().outcome_rate == doctest::Approx(0.5));
}

TEST_CASE("binary error streams agree between the two binning modes") {
  // For K=2 the misclassification indicator is the same instance-wise fact in
  // both diagrams; entropy only reparameterizes the x axis.
  std::mt19937_64 rng(2);
  auto set = random_prob_set(rng, 200, 2);
  const auto conf = score_all(set, ScoreKind::confidence);
  const auto unc = score_all(set, ScoreKind::entropy);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const bool correct =
        argmax_row(set.probs->row_span(i)) == static_cast<std::size_t>(set.labels[i]);
    (void)correct;
    // entropy is a strictly decreasing function of confidence on [0.5, 1]
    if (i > 0) {
      if (conf.values[i] > conf.values[i - 1]) CHECK(unc.values[i] <= unc.values[i - 1] + 1e-12);
      if (conf.values[i] < conf.values[i - 1]) CHECK(unc.values[i] >= unc.values[i - 1] - 1e-12);
    }
  }
}

TEST_CASE("single-bin outcome rates are complements across the two modes") {
  // the misclassification indicator is the same instance-level fact whether
  // instances are binned by confidence or by entropy
  std::mt19937_64 rng(53);
  auto set = random_prob_set(rng, 120, 2);
  const auto conf = bin_confidence(set, BinningConfig{1});
  const auto unc = bin_uncertainty(set, BinningConfig{1});
  CHECK(conf.bins[0].outcome_rate == doctest::Approx(1.0 - unc.bins[0].outcome_rate).epsilon(1e-12));
}

TEST_CASE("bin counts always sum to N") {
  std::mt19937_64 rng(13);
  for (int m : {1, 3, 10, 17}) {
    auto set = random_prob_set(rng, 101, 4);
    const auto curve = bin_confidence(set, BinningConfig{m});
    std::size_t total = 0;
    for (const auto& bin : curve.bins) total += bin.count;
    CHECK(total == 101);
    const auto ucurve = bin_uncertainty(set, BinningConfig{m});
    total = 0;
    for (const auto& bin : ucurve.bins) total += bin.count;
    CHECK(total == 101);
  }
}

TEST_CASE("ece and uce arithmetic on hand-built curves") {
  CHECK(ece(one_bin_curve(ReliabilityMode::confidence, 0.75, 0.5, 10)) == doctest::Approx(0.25));
  CHECK(uce(one_bin_curve(ReliabilityMode::uncertainty, 0.3, 0.5, 10)) == doctest::Approx(0.2));

  auto wrong = make_prob_set({{1.0, 0.0}}, {1});
  CHECK(ece(bin_confidence(wrong, BinningConfig{10})) == doctest::Approx(1.0));
}

TEST_CASE("ece and uce reject curves of the wrong mode") {
  auto set = make_prob_set({{0.7, 0.3}}, {0});
  const auto conf_curve = bin_confidence(set, BinningConfig{10});
  const auto unc_curve = bin_uncertainty(set, BinningConfig{10});
  CHECK_THROWS_AS((void)ece(unc_curve), Error);
  CHECK_THROWS_AS((void)uce(conf_curve), Error);
}

TEST_CASE("calibration quality score") {
  // curve identical to the diagonal
  ReliabilityCurve diag;
  diag.mode = ReliabilityMode::confidence;
  diag.bins.push_back(BinStats{0.2, 0.3, 5, 0.25, 0.25, false});
  diag.bins.push_back(BinStats{0.7, 0.8, 5, 0.75, 0.75, false});
  CHECK(calibration_quality_score(diag) == doctest::Approx(1.0));

  // single interior point (0.5, 1.0): the enclosed area is exactly A_max
  const auto worst = one_bin_curve(ReliabilityMode::confidence, 0.5, 1.0, 10);
  CHECK(calibration_quality_score(worst) == doctest::Approx(0.0).epsilon(1e-12));

  // numeric integration oracle at 1e4 subdivisions over the same polyline
  const auto mid = one_bin_curve(ReliabilityMode::confidence, 0.6, 0.45, 10);
  double area = 0.0;
  const int steps = 10000;
  auto poly = [&](double x) {
    if (x <= 0.6) return 0.45 * x / 0.6;
    return 0.45 + (1.0 - 0.45) * (x - 0.6) / 0.4;
  };
  for (int i = 0; i < steps; ++i) {
    const double x0 = static_cast<double>(i) / steps;
    const double x1 = static_cast<double>(i + 1) / steps;
    area += (std::fabs(poly(x0) - x0) + std::fabs(poly(x1) - x1)) / 2.0 * (x1 - x0);
  }
  CHECK(calibration_quality_score(mid) == doctest::Approx(1.0 - area / 0.25).epsilon(1e-6));

  ReliabilityCurve empty;
  empty.mode = ReliabilityMode::confidence;
  empty.bins.push_back(BinStats{});
  CHECK_THROWS_AS((void)calibration_quality_score(empty), Error);
}

TEST_CASE("skewness") {
  CHECK(skewness(std::vector<double>{-1.0, 0.0, 1.0}) == doctest::Approx(0.0));
  CHECK(skewness(std::vector<double>{0.0, 0.0, 0.0, 1.0}) == doctest::Approx(1.155).epsilon(1e-3));
  CHECK_THROWS_AS((void)skewness(std::vector<double>{0.5, 0.5, 0.5}), Error);
  CHECK_THROWS_AS((void)skewness(std::vector<double>{0.5}), Error);
}

TEST_CASE("curve skewness matches the instance-level stream") {
  std::mt19937_64 rng(47);
  auto set = random_prob_set(rng, 150, 3);
  const auto conf = score_all(set, ScoreKind::confidence);
  const auto curve = bin_confidence(set, BinningConfig{10});
  CHECK(curve.skewness == doctest::Approx(skewness(conf.values)).epsilon(1e-12));
}

TEST_CASE("binned metrics match the naive oracle") {
  std::mt19937_64 rng(31);
  for (int it = 0; it < 20; ++it) {
    auto set = random_prob_set(rng, 30, 3);
    const auto conf_curve = bin_confidence(set, BinningConfig{10});
    const auto unc_curve = bin_uncertainty(set, BinningConfig{10});
    CHECK(ece(conf_curve) ==
          doctest::Approx(oracle::ece(set.probs->data, set.labels, 30, 3, 10)).epsilon(1e-12));
    CHECK(uce(unc_curve) ==
          doctest::Approx(oracle::uce(set.probs->data, set.labels, 30, 3, 10)).epsilon(1e-12));
  }
}
