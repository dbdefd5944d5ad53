#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ccmdp/curve.hpp"

namespace ccmdp {

/// Mean +- standard error across seeds, aligned on episode index.
struct MeanCurve {
  std::vector<double> mean;
  std::vector<double> std_error;  // sample std / sqrt(n_seeds)
  int n_seeds = 0;
};

MeanCurve aggregate_curves(const std::vector<LearningCurve>& curves);

struct ThresholdResult {
  double fraction = 0.0;   // of the baseline's best smoothed mean return
  double level = 0.0;      // the resulting absolute threshold
  std::optional<int> baseline_episodes;   // 1-based count, empty = not reached
  std::optional<int> treatment_episodes;
  std::optional<double> ratio;            // baseline / treatment episodes
};

struct TransferMetrics {
  double jumpstart = 0.0;       // mean(treatment first E0) - mean(baseline first E0)
  double asymptotic_gap = 0.0;  // mean(baseline last Ea) - mean(treatment last Ea)
  std::vector<ThresholdResult> time_to_threshold;
};

struct MetricWindows {
  int jumpstart_episodes = 5;    // E0
  int asymptotic_episodes = 10;  // Ea
  int smoothing = 10;            // trailing window before thresholding
};

/// Jumpstart, asymptotic gap (positive = treatment worse, the
/// baseline-minus-method convention), and episodes-to-threshold ratios at
/// fractions of the baseline's best smoothed mean return. Curves are smoothed
/// by a trailing moving average before thresholding.
TransferMetrics transfer_metrics(const MeanCurve& baseline, const MeanCurve& treatment,
                                 const std::vector<double>& thresholds,
                                 const MetricWindows& windows = {});

/// Trailing moving average with window min(i+1, window).
std::vector<double> smooth_trailing(const std::vector<double>& xs, int window);

}  // namespace ccmdp
