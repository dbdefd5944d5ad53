#include "ccmdp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ccmdp {
namespace {

double window_mean(const std::vector<double>& xs, std::size_t begin, std::size_t end) {
  double total = 0.0;
  for (std::size_t i = begin; i < end; ++i) total += xs[i];
  return end > begin ? total / static_cast<double>(end - begin) : 0.0;
}

}  // namespace

MeanCurve aggregate_curves(const std::vector<LearningCurve>& curves) {
  if (curves.empty()) throw std::invalid_argument("aggregate_curves: no curves");
  const std::size_t len = curves[0].returns.size();
  for (const auto& c : curves)
    if (c.returns.size() != len)
      throw std::invalid_argument("aggregate_curves: curve lengths differ");
  MeanCurve out;
  out.n_seeds = static_cast<int>(curves.size());
  out.mean.resize(len);
  out.std_error.resize(len);
  for (std::size_t e = 0; e < len; ++e) {
    double mean = 0.0;
    for (const auto& c : curves) mean += c.returns[e];
    mean /= out.n_seeds;
    double var = 0.0;
    for (const auto& c : curves) {
      const double d = c.returns[e] - mean;
      var += d * d;
    }
    var = out.n_seeds > 1 ? var / (out.n_seeds - 1) : 0.0;
    out.mean[e] = mean;
    out.std_error[e] = std::sqrt(var / out.n_seeds);
  }
  return out;
}

std::vector<double> smooth_trailing(const std::vector<double>& xs, int window) {
  if (window < 1) throw std::invalid_argument("smooth_trailing: window must be >= 1");
  std::vector<double> out(xs.size());
  double running = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    running += xs[i];
    if (i >= static_cast<std::size_t>(window)) running -= xs[i - window];
    const std::size_t n = std::min<std::size_t>(i + 1, window);
    out[i] = running / static_cast<double>(n);
  }
  return out;
}

TransferMetrics transfer_metrics(const MeanCurve& baseline, const MeanCurve& treatment,
                                 const std::vector<double>& thresholds,
                                 const MetricWindows& windows) {
  if (baseline.mean.size() != treatment.mean.size())
    throw std::invalid_argument("transfer_metrics: curve lengths differ");
  if (baseline.mean.empty())
    throw std::invalid_argument("transfer_metrics: empty curves");
  const std::size_t len = baseline.mean.size();
  TransferMetrics out;

  const std::size_t e0 = std::min<std::size_t>(windows.jumpstart_episodes, len);
  out.jumpstart =
      window_mean(treatment.mean, 0, e0) - window_mean(baseline.mean, 0, e0);
  const std::size_t ea = std::min<std::size_t>(windows.asymptotic_episodes, len);
  out.asymptotic_gap = window_mean(baseline.mean, len - ea, len) -
                       window_mean(treatment.mean, len - ea, len);

  const auto base_smooth = smooth_trailing(baseline.mean, windows.smoothing);
  const auto treat_smooth = smooth_trailing(treatment.mean, windows.smoothing);
  const double base_max = *std::max_element(base_smooth.begin(), base_smooth.end());
  for (double frac : thresholds) {
    ThresholdResult tr;
    tr.fraction = frac;
    tr.level = frac * base_max;
    for (std::size_t e = 0; e < len; ++e)
      if (base_smooth[e] >= tr.level) {
        tr.baseline_episodes = static_cast<int>(e) + 1;
        break;
      }
    for (std::size_t e = 0; e < len; ++e)
      if (treat_smooth[e] >= tr.level) {
        tr.treatment_episodes = static_cast<int>(e) + 1;
        break;
      }
    if (tr.baseline_episodes && tr.treatment_episodes)
      tr.ratio = static_cast<double>(*tr.baseline_episodes) /
                 static_cast<double>(*tr.treatment_episodes);
    out.time_to_threshold.push_back(tr);
  }
  return out;
}

}  // namespace ccmdp
