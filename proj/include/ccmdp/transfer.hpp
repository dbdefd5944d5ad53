#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccmdp/classifier.hpp"
#include "ccmdp/cmdp.hpp"
#include "ccmdp/info.hpp"
#include "ccmdp/learn.hpp"
#include "ccmdp/mc_control.hpp"
#include "ccmdp/metrics.hpp"
#include "ccmdp/trmc.hpp"

namespace ccmdp {

struct TransferConfig {
  int n_concepts = 2;
  LearnConfig learner;
  TRMCConfig trmc;
  MCConfig mc;  // episode_budget here is the budget for every method
  int n_seeds = 8;
  std::uint64_t seed = 0;
  std::vector<double> thresholds = {0.5, 0.8};
  MetricWindows windows;
  int n_threads = 1;
};

/// A treatment curve plus its comparison against the raw-state baseline.
struct MethodResult {
  MeanCurve curve;
  TransferMetrics metrics;
};

struct TransferReport {
  MeanCurve baseline;          // raw-state Monte Carlo control on the test CMDP
  MethodResult trmc_concepts;  // trust-region MC over the learned concepts
  MethodResult prior_guided;   // raw-state control guided by the TRMC policy
  ConceptClassifier classifier;  // hardened, learned on the train CMDP
  double train_objective = 0.0;  // I(S:A|S_phi,C) of the hardened classifier
  BoundReport bound;             // inequality chain on the test CMDP
  double corollary1 = 0.0;       // transfer bound: max dissimilarity on test
  Corollary1Witness witness;
  double concept_entropy = 0.0;     // H(S_phi) on the train joint
  double concept_context_mi = 0.0;  // I(S_phi:C) on the train joint
  int n_seeds = 0;
  // raw per-seed curves behind the aggregates, for CSV export
  std::vector<LearningCurve> baseline_runs, trmc_runs, prior_runs;
};

/// Full pipeline: solve train, learn a hardened classifier there, then on
/// test run (a) the raw-state baseline, (b) TRMC over the transferred
/// concepts, and (c) prior-guided raw-state control whose behavior prior is
/// the same seed's final TRMC concept policy. Every method runs for
/// mc.episode_budget episodes so curves align; per-seed generators are
/// derived from the single experiment seed. Throws std::invalid_argument
/// when train and test disagree on (n_states, n_actions, n_contexts).
TransferReport transfer_experiment(const TabularCMDP& train, const TabularCMDP& test,
                                   const TransferConfig& config);

struct SuiteSpec {
  int n_instances = 100;
  int n_states = 6;
  int n_actions = 3;
  int n_contexts = 2;
  double gamma = 0.9;
  double tau_frac = 0.05;
  int n_concepts = 3;     // random + learned classifier families
  int n_policies = 25;    // sampled abstract policies per classifier
  int learn_restarts = 8;
  std::uint64_t seed = 0;
  int n_threads = 1;
};

struct SuiteViolation {
  int instance = 0;
  std::string family;
  std::string check;
  double margin = 0.0;
};

struct SuiteCheckStats {
  std::string name;
  long long count = 0;
  long long violations = 0;
  double worst_margin = 0.0;  // minimum margin seen; >= -1e-7 everywhere = pass
};

struct SuiteReport {
  SuiteSpec spec;
  std::vector<SuiteCheckStats> checks;
  std::vector<SuiteViolation> violations;
  // per-(instance, family) chain evaluations, for external rechecking
  std::vector<BoundReport> reports;
  std::vector<std::string> families;
  std::vector<int> instances;
  long long total_checks = 0;
  long long total_violations = 0;
};

/// Randomized verification of the inequality chain
///   regret^2 <= F*I <= U  and  I <= pairwise bound
/// over random CMDPs, each with identity / constant / random / learned
/// classifiers. Checks, each with tolerance 1e-7 on the margin:
///   chain_lower      I - regret^2/F >= 0
///   chain_upper      U(pi) - F*I >= 0 for every sampled abstract policy
///   marginal_argmin  |U(marginal)/F - I| ~ 0 (the minimizer identity)
///   pairwise_upper   pairwise bound - I >= 0
///   max_pair         max coupled dissimilarity >= pairwise bound
/// (deterministic classifiers only for max_pair).
SuiteReport verify_bounds_suite(const SuiteSpec& spec);

/// Same checks on one provided CMDP instead of random instances; size fields
/// of `spec` are taken from the model.
SuiteReport verify_bounds_env(const TabularCMDP& m, const SuiteSpec& spec);

}  // namespace ccmdp
