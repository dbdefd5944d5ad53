#pragma once

#include <cstdint>

#include "ccmdp/classifier.hpp"
#include "ccmdp/cmdp.hpp"
#include "ccmdp/curve.hpp"
#include "ccmdp/info.hpp"

namespace ccmdp {

struct MCConfig {
  double epsilon_start = 1.0;  // linear anneal over the budget
  double epsilon_end = 0.05;
  double kappa_initial = 0.0;  // prior bonus weight, annealed linearly
  double kappa_final = 0.0;
  int episode_budget = 1000;
  int horizon = 0;  // 0 = default_horizon(gamma)
  std::uint64_t seed = 0;
};

/// Every-visit epsilon-soft Monte Carlo control on raw states: exploration
/// draws are uniform, improvement is greedy on Q.
LearningCurve run_baseline_mc(const TabularCMDP& m, const MCConfig& config);

/// Same engine with a concept-level behavior prior: exploration draws come
/// from pi_phi(.|phi(s),c) and the improvement step maximizes
/// Q(s,a) + kappa * log pi_phi(a|phi(s),c) with kappa annealed to kappa_final.
/// With a uniform prior and kappa = 0 this reduces bit-for-bit to the
/// baseline. The prior must have full support.
LearningCurve run_prior_guided(const TabularCMDP& m, const ConceptClassifier& classifier,
                               const AbstractPolicy& abstract_policy,
                               const MCConfig& config);

}  // namespace ccmdp
