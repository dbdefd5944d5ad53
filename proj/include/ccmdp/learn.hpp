#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ccmdp/classifier.hpp"
#include "ccmdp/cmdp.hpp"
#include "ccmdp/info.hpp"
#include "ccmdp/solver.hpp"

namespace ccmdp {

struct LearnConfig {
  std::uint64_t seed = 0;
  int restarts = 16;
  int max_iters = 2000;
  double step_size = 1.0;     // initial backtracking step on logits
  double temp_initial = 1.0;  // soft classifier annealing schedule
  double temp_decay = 0.97;   // applied per 100 accepted steps
  double temp_floor = 0.05;
  double tol = 1e-10;         // stop when accepted decrease falls below
};

/// The learning objective: I(S:A|S_phi,C) of the classifier's rows (soft
/// classifiers use soft rows).
double objective(const TabularCMDP& m, const Solution& sol,
                 const ConceptClassifier& classifier);

/// Objective plus its exact gradient with respect to the classifier's logits
/// (soft view; the abstract action rows are the inner minimizer, so their
/// dependence contributes nothing to the total derivative).
std::pair<double, std::vector<std::vector<double>>> objective_with_gradient(
    const TabularCMDP& m, const Solution& sol, const ConceptClassifier& classifier);

/// Globally optimal deterministic classifier by enumeration; ties broken to
/// the lexicographically smallest assignment. Throws CapabilityError when
/// n_concepts^n_states > 1e7.
std::pair<ConceptClassifier, double> learn_exhaustive(const TabularCMDP& m,
                                                      const Solution& sol,
                                                      int n_concepts);

/// Best-improvement hill climbing over single-state reassignments with
/// seeded random restarts; returns a certified local optimum. An optional
/// init seeds the first restart.
std::pair<ConceptClassifier, double> learn_local_search(
    const TabularCMDP& m, const Solution& sol, int n_concepts,
    const LearnConfig& config, const std::vector<int>* init = nullptr);

struct GradientResult {
  ConceptClassifier classifier;  // soft, final temperature
  std::vector<double> trace;     // objective after each accepted step
  double soft_objective = 0.0;
  double hardened_objective = 0.0;  // objective of the argmax view
};

/// Backtracking gradient descent on soft-classifier logits with guarded
/// temperature annealing (a decay step that would raise the objective is
/// skipped, keeping the trace non-increasing). Best of `restarts` seeded
/// starts by hardened objective.
GradientResult learn_gradient(const TabularCMDP& m, const Solution& sol,
                              int n_concepts, const LearnConfig& config);

struct FactoredResult {
  FactoredClassifier classifier;
  std::vector<double> trace;
  double soft_objective = 0.0;
  double hardened_objective = 0.0;
};

/// Joint gradient descent over all factor logits; objective evaluated on the
/// induced product classifier.
FactoredResult learn_factored(const TabularCMDP& m, const Solution& sol,
                              const std::vector<int>& factor_sizes,
                              const LearnConfig& config);

/// One observation for the likelihood baseline.
struct Triple {
  int context;
  int state;
  int action;
};

/// (c, s, a) observations from seeded rollouts of `policy`, contexts drawn
/// from p_context; the likelihood baseline's training data.
std::vector<Triple> sample_triples(const TabularCMDP& m, const Policy& policy,
                                   int n_episodes, int horizon, std::uint64_t seed);

/// Likelihood-metric baseline: ascent on phi logits for the model
/// Pr(a|s,c) = sum_k phi(k|s) pi_phi(a|k,c) with pi_phi held fixed (the
/// random abstract policy the metric prescribes). Returns the classifier and
/// the final total log-likelihood.
std::pair<ConceptClassifier, double> baseline_likelihood(
    const std::vector<Triple>& triples, int n_states, int n_concepts,
    const AbstractPolicy& fixed_abstract_policy, const LearnConfig& config);

/// Context-free-metric baseline: learn_gradient with I(S:A|S_phi) as the
/// objective. Returns that objective's value.
GradientResult baseline_context_free(const TabularCMDP& m, const Solution& sol,
                                     int n_concepts, const LearnConfig& config);

/// Uniform-simplex abstract policy rows for the likelihood baseline.
AbstractPolicy random_abstract_policy(int n_contexts, int n_concepts, int n_actions,
                                      std::uint64_t seed);

}  // namespace ccmdp
