#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ccmdp/classifier.hpp"
#include "ccmdp/cmdp.hpp"
#include "ccmdp/curve.hpp"

namespace ccmdp {

struct TRMCConfig {
  double epsilon_mc = 0.05;          // trust region radius per policy update
  double initial_entropy_frac = 0.95;  // of log n_actions
  double entropy_decay = 0.95;       // per update event
  double entropy_floor = 0.01;       // nats
  int update_period_episodes = 5;    // K
  double alpha_min = 1e-4;
  double alpha_max = 1e4;
  int episode_budget = 1000;
  int horizon = 0;                   // 0 = default_horizon(gamma)
  std::uint64_t seed = 0;
};

/// Tables of the concept-level learner. The agent observes only
/// (concept, reward); raw states never enter these tables.
struct TRMCState {
  std::vector<std::vector<Dist>> q_table;  // [c][k][a] running mean return
  std::vector<std::vector<std::vector<long long>>> visit_counts;
  std::vector<std::vector<Dist>> policy;   // [c][k] -> action distribution
  double entropy_target = 0.0;
  double max_update_kl = 0.0;  // largest KL(new || old) over all row updates
  double max_abs_q = 0.0;      // running sup-norm of the Q table
  TRMCConfig config;
};

/// One step as the agent sees it.
struct ConceptStep {
  int concept_index;
  int action;
  double reward;
};

/// Every-visit discounted-return update of the running means, one episode.
void update_q_every_visit(TRMCState& state, int context,
                          const std::vector<ConceptStep>& episode, double gamma);

/// alpha with softmax(q/alpha) entropy within 1e-6 of the target, or the
/// nearest bound when unattainable; second element reports attainment.
std::pair<double, bool> temperature_search(const Dist& q_row, double entropy_target,
                                           double alpha_min, double alpha_max);

/// Largest-lambda point of the geometric path current^(1-lambda)*target^lambda
/// with KL(p||current) <= epsilon_mc (bisection to 1e-8 in lambda). KL along
/// this path is monotone in lambda, so the feasible endpoint is returned.
Dist trust_region_project(const Dist& current, const Dist& target, double epsilon_mc);

/// Algorithm: sample episodes through the hard classifier, fold every-visit
/// returns into q_table, and every K episodes refresh each visited policy row
/// by entropy-targeted softmax + trust-region projection, then decay the
/// entropy target. Deterministic in config.seed.
std::pair<TRMCState, LearningCurve> run_trmc(const TabularCMDP& m,
                                             const ConceptClassifier& classifier,
                                             const TRMCConfig& config);

}  // namespace ccmdp
