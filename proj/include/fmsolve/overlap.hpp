#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace fmsolve {

/// Confusion counts kept as reals so expected counts like r*N/2 are
/// representable alongside exact integer counts from real masks.
struct ConfusionCounts {
  double tp = 0;
  double fp = 0;
  double fn = 0;
  double tn = 0;

  double total() const { return tp + fp + fn + tn; }
  void validate() const;
};

enum class PredictorKind { Zeros, Ones, Random, Custom };

const char* to_string(PredictorKind kind);

/// A degenerate-predictor scenario: overlap ratio r, region size N, and the
/// baseline predictor. `random_p` is the positive-prediction probability of
/// the Random baseline (0.5 reproduces the standard coin flip).
struct OverlapScenario {
  double ratio = 0.5;
  double total = 1.0;
  PredictorKind predictor = PredictorKind::Random;
  double random_p = 0.5;

  void validate() const;
};

enum class Metric {
  Accuracy,
  Precision,
  Sensitivity,
  Specificity,
  IoU,
  F1,
  BalancedAccuracy,
};

inline constexpr std::array<Metric, 7> kAllMetrics = {
    Metric::Accuracy, Metric::Precision, Metric::Sensitivity, Metric::Specificity,
    Metric::IoU,      Metric::F1,        Metric::BalancedAccuracy,
};

const char* to_string(Metric metric);

/// A metric evaluation. A zero-denominator ratio evaluates to 0 and sets
/// `degenerate` instead of being silently averaged away; balanced accuracy
/// propagates the flag from either of its two components.
struct MetricValue {
  double value = 0;
  bool degenerate = false;
};

/// Exact counts from boolean masks; the four counts sum to the mask length.
ConfusionCounts confusion_from_masks(const std::vector<bool>& predicted,
                                     const std::vector<bool>& truth);

/// Expected counts of the three degenerate baselines at overlap ratio r:
///   Zeros  -> (0, 0, rN, (1-r)N)
///   Ones   -> (rN, (1-r)N, 0, 0)
///   Random -> (p rN, p (1-r)N, (1-p) rN, (1-p) (1-r)N)
/// Custom predictors have no closed form; use confusion_from_masks.
ConfusionCounts expected_confusion(const OverlapScenario& scenario);

MetricValue evaluate_metric(const ConfusionCounts& counts, Metric metric);

struct PredictorSpec {
  PredictorKind kind = PredictorKind::Random;
  double random_p = 0.5;
};

struct SweepRow {
  double ratio = 0;
  PredictorKind predictor = PredictorKind::Zeros;
  Metric metric = Metric::Accuracy;
  double value = 0;
  bool degenerate = false;
};

/// Evaluates all seven metrics for each predictor on the uniform ratio grid
/// r in {0, 1/(steps-1), ..., 1} using expected counts.
std::vector<SweepRow> sweep_ratio(const std::vector<PredictorSpec>& predictors, double total,
                                  int steps);

/// Empirical mean confusion counts over seeded trials. The truth mask has
/// round(r*N) positives; Zeros and Ones are deterministic and return the
/// expected counts exactly. N must be an integer.
ConfusionCounts monte_carlo_confusion(const OverlapScenario& scenario, std::uint64_t seed,
                                      int trials);

}  // namespace fmsolve
