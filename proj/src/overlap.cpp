#include "fmsolve/overlap.hpp"

#include "fmsolve/types.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace fmsolve {

void ConfusionCounts::validate() const {
  detail::require(std::isfinite(tp) && std::isfinite(fp) && std::isfinite(fn) && std::isfinite(tn),
                  "confusion counts must be finite");
  detail::require(tp >= 0 && fp >= 0 && fn >= 0 && tn >= 0,
                  "confusion counts must be non-negative");
}

const char* to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::Zeros: return "zeros";
    case PredictorKind::Ones: return "ones";
    case PredictorKind::Random: return "random";
    case PredictorKind::Custom: return "custom";
  }
  return "?";
}

const char* to_string(Metric metric) {
  switch (metric) {
    case Metric::Accuracy: return "accuracy";
    case Metric::Precision: return "precision";
    case Metric::Sensitivity: return "sensitivity";
    case Metric::Specificity: return "specificity";
    case Metric::IoU: return "iou";
    case Metric::F1: return "f1";
    case Metric::BalancedAccuracy: return "balanced_accuracy";
  }
  return "?";
}

void OverlapScenario::validate() const {
  detail::require(ratio >= 0.0 && ratio <= 1.0, "overlap ratio must lie in [0, 1]");
  detail::require(total > 0.0 && std::isfinite(total), "region size N must be positive");
  detail::require(random_p >= 0.0 && random_p <= 1.0, "random predictor probability must lie in [0, 1]");
}

ConfusionCounts confusion_from_masks(const std::vector<bool>& predicted,
                                     const std::vector<bool>& truth) {
  detail::require(!predicted.empty(), "masks must be non-empty");
  if (predicted.size() != truth.size()) {
    std::ostringstream msg;
    msg << "mask length mismatch: predicted has " << predicted.size() << " entries, truth has "
        << truth.size();
    throw std::invalid_argument(msg.str());
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (truth[i]) {
      (predicted[i] ? c.tp : c.fn) += 1.0;
    } else {
      (predicted[i] ? c.fp : c.tn) += 1.0;
    }
  }
  return c;
}

ConfusionCounts expected_confusion(const OverlapScenario& scenario) {
  scenario.validate();
  const double pos = scenario.ratio * scenario.total;
  const double neg = (1.0 - scenario.ratio) * scenario.total;
  switch (scenario.predictor) {
    case PredictorKind::Zeros:
      return {0.0, 0.0, pos, neg};
    case PredictorKind::Ones:
      return {pos, neg, 0.0, 0.0};
    case PredictorKind::Random: {
      const double p = scenario.random_p;
      return {p * pos, p * neg, (1.0 - p) * pos, (1.0 - p) * neg};
    }
    case PredictorKind::Custom:
      break;
  }
  throw std::invalid_argument(
      "custom predictors have no expected counts; use confusion_from_masks");
}

namespace {

MetricValue ratio_or_degenerate(double numerator, double denominator) {
  if (denominator == 0.0) return {0.0, true};
  return {numerator / denominator, false};
}

}  // namespace

MetricValue evaluate_metric(const ConfusionCounts& counts, Metric metric) {
  counts.validate();
  detail::require(counts.total() > 0.0, "confusion counts are all zero");
  switch (metric) {
    case Metric::Accuracy:
      return ratio_or_degenerate(counts.tp + counts.tn, counts.total());
    case Metric::Precision:
      return ratio_or_degenerate(counts.tp, counts.tp + counts.fp);
    case Metric::Sensitivity:
      return ratio_or_degenerate(counts.tp, counts.tp + counts.fn);
    case Metric::Specificity:
      return ratio_or_degenerate(counts.tn, counts.tn + counts.fp);
    case Metric::IoU:
      return ratio_or_degenerate(counts.tp, counts.tp + counts.fp + counts.fn);
    case Metric::F1:
      return ratio_or_degenerate(2.0 * counts.tp, 2.0 * counts.tp + counts.fp + counts.fn);
    case Metric::BalancedAccuracy: {
      const MetricValue sens = evaluate_metric(counts, Metric::Sensitivity);
      const MetricValue spec = evaluate_metric(counts, Metric::Specificity);
      return {0.5 * (sens.value + spec.value), sens.degenerate || spec.degenerate};
    }
  }
  throw std::invalid_argument("unknown metric");
}

std::vector<SweepRow> sweep_ratio(const std::vector<PredictorSpec>& predictors, double total,
                                  int steps) {
  detail::require(steps >= 2, "sweep needs at least 2 steps");
  detail::require(total > 0.0, "region size N must be positive");

  std::vector<SweepRow> rows;
  rows.reserve(predictors.size() * kAllMetrics.size() * static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t) {
    const double r = static_cast<double>(t) / static_cast<double>(steps - 1);
    for (const auto& spec : predictors) {
      OverlapScenario scenario{r, total, spec.kind, spec.random_p};
      const ConfusionCounts counts = expected_confusion(scenario);
      for (Metric metric : kAllMetrics) {
        const MetricValue v = evaluate_metric(counts, metric);
        rows.push_back({r, spec.kind, metric, v.value, v.degenerate});
      }
    }
  }
  return rows;
}

ConfusionCounts monte_carlo_confusion(const OverlapScenario& scenario, std::uint64_t seed,
                                      int trials) {
  scenario.validate();
  detail::require(trials >= 1, "need at least one trial");
  if (std::floor(scenario.total) != scenario.total) {
    std::ostringstream msg;
    msg << "Monte Carlo sampling needs an integer region size, got N = " << scenario.total;
    throw std::invalid_argument(msg.str());
  }
  detail::require(scenario.predictor != PredictorKind::Custom,
                  "custom predictors have no sampling rule; use confusion_from_masks");

  // Zeros and Ones carry no randomness.
  if (scenario.predictor != PredictorKind::Random) return expected_confusion(scenario);

  const auto n = static_cast<std::int64_t>(scenario.total);
  const auto positives = static_cast<std::int64_t>(std::llround(scenario.ratio * scenario.total));

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(scenario.random_p);
  ConfusionCounts sum;
  for (int t = 0; t < trials; ++t) {
    std::int64_t tp = 0, fp = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      const bool predicted = coin(rng);
      if (!predicted) continue;
      (i < positives ? tp : fp) += 1;
    }
    sum.tp += static_cast<double>(tp);
    sum.fp += static_cast<double>(fp);
    sum.fn += static_cast<double>(positives - tp);
    sum.tn += static_cast<double>((n - positives) - fp);
  }
  const double inv = 1.0 / static_cast<double>(trials);
  return {sum.tp * inv, sum.fp * inv, sum.fn * inv, sum.tn * inv};
}

}  // namespace fmsolve
