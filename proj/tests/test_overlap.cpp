#include "fmsolve/overlap.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace fmsolve;

TEST_CASE("confusion counts from masks") {
  const std::vector<bool> truth{true, true, false, false};

  SUBCASE("perfect prediction") {
    const auto c = confusion_from_masks(truth, truth);
    CHECK(c.tp == 2);
    CHECK(c.fp == 0);
    CHECK(c.fn == 0);
    CHECK(c.tn == 2);
  }

  SUBCASE("total inversion") {
    const std::vector<bool> inverted{false, false, true, true};
    const auto c = confusion_from_masks(inverted, truth);
    CHECK(c.tp == 0);
    CHECK(c.tn == 0);
    CHECK(c.fp == 2);
    CHECK(c.fn == 2);
  }

  SUBCASE("hand count") {
    const std::vector<bool> predicted{true, false, true, false};
    const auto c = confusion_from_masks(predicted, truth);
    CHECK(c.tp == 1);
    CHECK(c.fp == 1);
    CHECK(c.fn == 1);
    CHECK(c.tn == 1);
  }

  SUBCASE("length mismatch") {
    CHECK_THROWS_AS(confusion_from_masks({true}, truth), std::invalid_argument);
  }

  SUBCASE("counts sum to the mask length") {
    std::vector<bool> p, t;
    std::uint64_t state = 12345;
    for (int i = 0; i < 137; ++i) {
      state = state * 6364136223846793005ull + 1442695040888963407ull;
      p.push_back((state >> 60) & 1);
      t.push_back((state >> 61) & 1);
    }
    CHECK(confusion_from_masks(p, t).total() == 137.0);
  }
}

TEST_CASE("expected confusion counts of the degenerate predictors") {
  OverlapScenario scenario{0.3, 1000.0, PredictorKind::Zeros, 0.5};
  auto c = expected_confusion(scenario);
  CHECK(c.tp == 0);
  CHECK(c.fp == 0);
  CHECK(c.fn == doctest::Approx(300.0));
  CHECK(c.tn == doctest::Approx(700.0));

  scenario.predictor = PredictorKind::Ones;
  c = expected_confusion(scenario);
  CHECK(c.tp == doctest::Approx(300.0));
  CHECK(c.fp == doctest::Approx(700.0));
  CHECK(c.fn == 0);
  CHECK(c.tn == 0);

  scenario.predictor = PredictorKind::Random;
  c = expected_confusion(scenario);
  CHECK(c.tp == doctest::Approx(150.0));
  CHECK(c.fp == doctest::Approx(350.0));
  CHECK(c.fn == doctest::Approx(150.0));
  CHECK(c.tn == doctest::Approx(350.0));

  scenario.predictor = PredictorKind::Custom;
  CHECK_THROWS_AS(expected_confusion(scenario), std::invalid_argument);

  scenario.predictor = PredictorKind::Zeros;
  scenario.ratio = 1.5;
  CHECK_THROWS_AS(expected_confusion(scenario), std::invalid_argument);
}

TEST_CASE("metric formulas on expected counts") {
  SUBCASE("IoU of the Ones predictor is the overlap ratio") {
    const auto c = expected_confusion({0.3, 1000.0, PredictorKind::Ones, 0.5});
    const auto v = evaluate_metric(c, Metric::IoU);
    CHECK(v.value == doctest::Approx(0.3).epsilon(1e-14));
    CHECK_FALSE(v.degenerate);
  }

  SUBCASE("Zeros predictor at interior ratios") {
    const auto c = expected_confusion({0.4, 100.0, PredictorKind::Zeros, 0.5});
    CHECK(evaluate_metric(c, Metric::Sensitivity).value == 0.0);
    CHECK(evaluate_metric(c, Metric::Specificity).value == 1.0);
    CHECK(evaluate_metric(c, Metric::BalancedAccuracy).value == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_FALSE(evaluate_metric(c, Metric::BalancedAccuracy).degenerate);
  }

  SUBCASE("Random predictor at interior ratios") {
    const auto c = expected_confusion({0.25, 100.0, PredictorKind::Random, 0.5});
    CHECK(evaluate_metric(c, Metric::Sensitivity).value == doctest::Approx(0.5));
    CHECK(evaluate_metric(c, Metric::Specificity).value == doctest::Approx(0.5));
    CHECK(evaluate_metric(c, Metric::Accuracy).value == doctest::Approx(0.5));
    CHECK(evaluate_metric(c, Metric::BalancedAccuracy).value == doctest::Approx(0.5));
  }

  SUBCASE("degenerate flags at the endpoints") {
    // r = 0 with the Zeros predictor: no positives anywhere, sensitivity is 0/0
    const auto c = expected_confusion({0.0, 50.0, PredictorKind::Zeros, 0.5});
    const auto sens = evaluate_metric(c, Metric::Sensitivity);
    CHECK(sens.value == 0.0);
    CHECK(sens.degenerate);
    const auto ba = evaluate_metric(c, Metric::BalancedAccuracy);
    CHECK(ba.degenerate);  // propagated from the sensitivity component
    CHECK(ba.value == doctest::Approx(0.5));

    // r = 1 with the Ones predictor: no negatives, specificity is 0/0
    const auto ones = expected_confusion({1.0, 50.0, PredictorKind::Ones, 0.5});
    CHECK(evaluate_metric(ones, Metric::Specificity).degenerate);
  }

  SUBCASE("all-zero counts are rejected") {
    CHECK_THROWS_AS(evaluate_metric(ConfusionCounts{}, Metric::Accuracy), std::invalid_argument);
  }

  SUBCASE("negative counts are rejected") {
    CHECK_THROWS_AS(evaluate_metric(ConfusionCounts{-1, 0, 0, 5}, Metric::Accuracy),
                    std::invalid_argument);
  }
}

TEST_CASE("balanced accuracy is constant for all degenerate predictors") {
  for (int i = 1; i <= 99; ++i) {
    const double r = i / 100.0;
    for (PredictorKind kind : {PredictorKind::Zeros, PredictorKind::Ones, PredictorKind::Random}) {
      const auto c = expected_confusion({r, 977.0, kind, 0.5});
      const auto ba = evaluate_metric(c, Metric::BalancedAccuracy);
      CHECK(std::abs(ba.value - 0.5) <= 1e-12);
      CHECK_FALSE(ba.degenerate);
    }
  }
}

TEST_CASE("balanced accuracy of the biased coin is still one half") {
  for (double p : {0.1, 0.3, 0.9}) {
    const auto c = expected_confusion({0.37, 500.0, PredictorKind::Random, p});
    CHECK(evaluate_metric(c, Metric::BalancedAccuracy).value == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("prior-dependence witnesses on the ratio grid") {
  for (int i = 1; i <= 99; ++i) {
    const double r = i / 100.0;
    const auto zeros = expected_confusion({r, 321.0, PredictorKind::Zeros, 0.5});
    const auto ones = expected_confusion({r, 321.0, PredictorKind::Ones, 0.5});
    const auto random = expected_confusion({r, 321.0, PredictorKind::Random, 0.5});
    CHECK(std::abs(evaluate_metric(zeros, Metric::Accuracy).value - (1.0 - r)) <= 1e-12);
    CHECK(std::abs(evaluate_metric(ones, Metric::Accuracy).value - r) <= 1e-12);
    CHECK(std::abs(evaluate_metric(ones, Metric::IoU).value - r) <= 1e-12);
    CHECK(std::abs(evaluate_metric(ones, Metric::F1).value - 2.0 * r / (1.0 + r)) <= 1e-12);
    CHECK(std::abs(evaluate_metric(random, Metric::Precision).value - r) <= 1e-12);
  }
}

TEST_CASE("perfect prediction scores 1 on every metric") {
  const auto c = confusion_from_masks({true, true, false}, {true, true, false});
  for (Metric metric : kAllMetrics) {
    const auto v = evaluate_metric(c, metric);
    CHECK(v.value == doctest::Approx(1.0));
    CHECK_FALSE(v.degenerate);
  }
}

TEST_CASE("balanced accuracy is symmetric under class relabeling") {
  const ConfusionCounts c{17.0, 5.0, 3.0, 25.0};
  const ConfusionCounts swapped{c.tn, c.fn, c.fp, c.tp};
  CHECK(evaluate_metric(c, Metric::BalancedAccuracy).value ==
        doctest::Approx(evaluate_metric(swapped, Metric::BalancedAccuracy).value).epsilon(1e-14));
}

TEST_CASE("ratio sweep layout and spot values") {
  const std::vector<PredictorSpec> predictors = {
      {PredictorKind::Zeros, 0.5}, {PredictorKind::Ones, 0.5}, {PredictorKind::Random, 0.5}};
  const auto rows = sweep_ratio(predictors, 1000.0, 101);
  CHECK(rows.size() == 3u * 7u * 101u);

  int checked = 0;
  for (const auto& row : rows) {
    if (row.predictor == PredictorKind::Zeros && row.metric == Metric::Accuracy) {
      CHECK(std::abs(row.value - (1.0 - row.ratio)) <= 1e-12);
      ++checked;
    }
    if (row.predictor == PredictorKind::Ones && row.metric == Metric::F1 && row.ratio == 0.5) {
      CHECK(row.value == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    }
    if (row.metric == Metric::BalancedAccuracy && row.ratio > 0.0 && row.ratio < 1.0) {
      CHECK(std::abs(row.value - 0.5) <= 1e-12);
      CHECK_FALSE(row.degenerate);
    }
    // endpoint rows carry the degenerate flag where a component is 0/0
    if (row.ratio == 0.0 && row.predictor == PredictorKind::Zeros &&
        row.metric == Metric::Sensitivity) {
      CHECK(row.degenerate);
    }
  }
  CHECK(checked == 101);

  CHECK_THROWS_AS(sweep_ratio(predictors, 1000.0, 1), std::invalid_argument);
}

TEST_CASE("Monte Carlo confusion sampling") {
  SUBCASE("the coin flip converges to the expected counts") {
    const OverlapScenario scenario{0.5, 10000.0, PredictorKind::Random, 0.5};
    const auto c = monte_carlo_confusion(scenario, 7, 100);
    for (double count : {c.tp, c.fp, c.fn, c.tn}) {
      CHECK(std::abs(count - 2500.0) <= 0.02 * 2500.0);
    }
  }

  SUBCASE("Zeros and Ones are deterministic") {
    const OverlapScenario zeros{0.25, 400.0, PredictorKind::Zeros, 0.5};
    const auto expected_zeros = expected_confusion(zeros);
    for (std::uint64_t seed : {1ull, 99ull}) {
      const auto c = monte_carlo_confusion(zeros, seed, 3);
      CHECK(c.tp == expected_zeros.tp);
      CHECK(c.fp == expected_zeros.fp);
      CHECK(c.fn == expected_zeros.fn);
      CHECK(c.tn == expected_zeros.tn);
    }
    const OverlapScenario ones{0.25, 400.0, PredictorKind::Ones, 0.5};
    const auto expected_ones = expected_confusion(ones);
    const auto c = monte_carlo_confusion(ones, 42, 3);
    CHECK(c.tp == expected_ones.tp);
    CHECK(c.fp == expected_ones.fp);
  }

  SUBCASE("identical seeds give identical results") {
    const OverlapScenario scenario{0.3, 500.0, PredictorKind::Random, 0.5};
    const auto a = monte_carlo_confusion(scenario, 11, 10);
    const auto b = monte_carlo_confusion(scenario, 11, 10);
    CHECK(a.tp == b.tp);
    CHECK(a.fp == b.fp);
    CHECK(a.fn == b.fn);
    CHECK(a.tn == b.tn);
  }

  SUBCASE("non-integer region sizes are rejected") {
    CHECK_THROWS_AS(monte_carlo_confusion({0.5, 10.5, PredictorKind::Random, 0.5}, 1, 1),
                    std::invalid_argument);
  }
}
