#include "ccmdp/transfer.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "ccmdp/parallel.hpp"
#include "ccmdp/rng.hpp"

namespace ccmdp {

TransferReport transfer_experiment(const TabularCMDP& train, const TabularCMDP& test,
                                   const TransferConfig& config) {
  if (train.n_states != test.n_states || train.n_actions != test.n_actions ||
      train.n_contexts != test.n_contexts) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "transfer_experiment: train (%d,%d,%d) and test (%d,%d,%d) must share "
                  "state, action, and context counts",
                  train.n_states, train.n_actions, train.n_contexts, test.n_states,
                  test.n_actions, test.n_contexts);
    throw std::invalid_argument(buf);
  }
  if (config.n_seeds <= 0) throw std::invalid_argument("transfer_experiment: n_seeds must be positive");
  require_valid(train);
  require_valid(test);

  TransferReport report;
  report.n_seeds = config.n_seeds;

  const Solution train_sol = solve(train);
  GradientResult learned = learn_gradient(train, train_sol, config.n_concepts, config.learner);
  report.classifier =
      ConceptClassifier::from_assignment(learned.classifier.hard_assignment(), config.n_concepts);
  report.train_objective = learned.hardened_objective;

  const JointModel train_joint = build_joint(train, train_sol, report.classifier.rows());
  std::tie(report.concept_entropy, report.concept_context_mi) = concept_diagnostics(train_joint);

  const Solution test_sol = solve(test);
  report.bound = make_bound_report(test, test_sol, report.classifier.rows());
  std::tie(report.corollary1, report.witness) =
      corollary1_bound(test, test_sol, report.classifier.rows());

  // One generator stream per (seed index, method); every run is a pure
  // function of its slot, so the thread count cannot change the report.
  const int n = config.n_seeds;
  std::vector<LearningCurve> baseline(n), trmc(n), prior(n);
  const auto derive = [&](int i, int method) {
    return Rng(config.seed, 3ull * static_cast<std::uint64_t>(i) + method).next_u64();
  };
  parallel_for(n, config.n_threads, [&](int i) {
    MCConfig base_cfg = config.mc;
    base_cfg.seed = derive(i, 0);
    baseline[i] = run_baseline_mc(test, base_cfg);

    TRMCConfig trmc_cfg = config.trmc;
    trmc_cfg.episode_budget = config.mc.episode_budget;
    trmc_cfg.seed = derive(i, 2);
    auto [state, curve] = run_trmc(test, report.classifier, trmc_cfg);
    trmc[i] = std::move(curve);

    MCConfig guided_cfg = config.mc;
    guided_cfg.seed = derive(i, 1);
    AbstractPolicy behavior_prior{state.policy};
    prior[i] = run_prior_guided(test, report.classifier, behavior_prior, guided_cfg);
  });

  report.baseline = aggregate_curves(baseline);
  report.trmc_concepts.curve = aggregate_curves(trmc);
  report.prior_guided.curve = aggregate_curves(prior);
  report.baseline_runs = std::move(baseline);
  report.trmc_runs = std::move(trmc);
  report.prior_runs = std::move(prior);
  report.trmc_concepts.metrics = transfer_metrics(report.baseline, report.trmc_concepts.curve,
                                                  config.thresholds, config.windows);
  report.prior_guided.metrics = transfer_metrics(report.baseline, report.prior_guided.curve,
                                                 config.thresholds, config.windows);
  return report;
}

namespace {

constexpr double MARGIN_TOL = 1e-7;

struct InstanceOut {
  std::vector<std::pair<std::string, BoundReport>> reports;
  // (check index, family, margin)
  std::vector<std::tuple<int, std::string, double>> margins;
};

const char* const CHECK_NAMES[] = {"chain_lower", "chain_upper", "marginal_argmin",
                                   "pairwise_upper", "max_pair"};
constexpr int N_CHECKS = 5;

InstanceOut run_checks(const SuiteSpec& spec, std::uint64_t inst_seed, const TabularCMDP& m) {
  InstanceOut out;
  SolveConfig scfg;
  scfg.tau_frac = spec.tau_frac;
  const Solution sol = solve(m, scfg);

  std::vector<std::pair<std::string, ConceptClassifier>> families;
  families.emplace_back("identity", ConceptClassifier::identity(m.n_states));
  families.emplace_back("constant", ConceptClassifier::constant(m.n_states));
  {
    Rng assign_rng(inst_seed, 1);
    std::vector<int> assignment(m.n_states);
    for (int& k : assignment) k = assign_rng.next_below(spec.n_concepts);
    families.emplace_back("random",
                          ConceptClassifier::from_assignment(assignment, spec.n_concepts));
  }
  {
    LearnConfig lcfg;
    lcfg.restarts = spec.learn_restarts;
    lcfg.seed = Rng(inst_seed, 2).next_u64();
    families.emplace_back("learned",
                          learn_local_search(m, sol, spec.n_concepts, lcfg).first);
  }

  for (const auto& [name, classifier] : families) {
    const ClassifierRows rows = classifier.rows();
    const BoundReport report = make_bound_report(m, sol, rows);
    out.reports.emplace_back(name, report);

    out.margins.emplace_back(0, name, report.margins.mi_minus_regret_sq);

    const JointModel joint = build_joint(m, sol, rows);
    const double f = report.f_constant;
    Rng policy_rng(inst_seed, 3);
    for (int j = 0; j < spec.n_policies; ++j) {
      AbstractPolicy sampled;
      sampled.probs.assign(joint.n_contexts, std::vector<Dist>(joint.n_concepts));
      for (auto& per_c : sampled.probs)
        for (auto& row : per_c) row = policy_rng.next_simplex(joint.n_actions);
      // expected KL of the sampled policy; the minimizer identity says the
      // conditional MI is the infimum of exactly this quantity
      const double ekl = f > 0.0 ? lemma1_bound(joint, sol, sampled) / f : 0.0;
      out.margins.emplace_back(1, name, ekl - report.theorem1_mi);
    }

    const double scale = std::max(1.0, std::fabs(f * report.theorem1_mi));
    out.margins.emplace_back(2, name, MARGIN_TOL * scale - std::fabs(report.margins.u_minus_f_mi));

    out.margins.emplace_back(3, name, report.margins.t2_minus_mi);

    const double c1 = corollary1_bound(m, sol, rows).first;
    out.margins.emplace_back(4, name, c1 - report.theorem2_bound);
  }
  return out;
}

InstanceOut run_instance(const SuiteSpec& spec, int i) {
  const std::uint64_t inst_seed = Rng(spec.seed, static_cast<std::uint64_t>(i)).next_u64();
  const TabularCMDP m = build_random_cmdp(spec.n_states, spec.n_actions, spec.n_contexts,
                                          spec.gamma, inst_seed);
  return run_checks(spec, inst_seed, m);
}

SuiteReport assemble(const SuiteSpec& spec, const std::vector<InstanceOut>& outs) {
  SuiteReport report;
  report.spec = spec;
  report.checks.resize(N_CHECKS);
  for (int k = 0; k < N_CHECKS; ++k) {
    report.checks[k].name = CHECK_NAMES[k];
    report.checks[k].worst_margin = 1e300;
  }
  const int n = static_cast<int>(outs.size());
  for (int i = 0; i < n; ++i) {
    for (auto& [family, bound_report] : outs[i].reports) {
      report.reports.push_back(bound_report);
      report.families.push_back(family);
      report.instances.push_back(i);
    }
    for (const auto& [check, family, margin] : outs[i].margins) {
      auto& stats = report.checks[check];
      ++stats.count;
      if (margin < stats.worst_margin) stats.worst_margin = margin;
      if (margin < -MARGIN_TOL) {
        ++stats.violations;
        report.violations.push_back({i, family, stats.name, margin});
      }
    }
  }
  for (const auto& stats : report.checks) {
    report.total_checks += stats.count;
    report.total_violations += stats.violations;
  }
  return report;
}

}  // namespace

SuiteReport verify_bounds_suite(const SuiteSpec& spec) {
  if (spec.n_instances <= 0)
    throw std::invalid_argument("verify_bounds_suite: n_instances must be positive");
  std::vector<InstanceOut> outs(spec.n_instances);
  parallel_for(spec.n_instances, spec.n_threads,
               [&](int i) { outs[i] = run_instance(spec, i); });
  return assemble(spec, outs);
}

SuiteReport verify_bounds_env(const TabularCMDP& m, const SuiteSpec& spec) {
  require_valid(m);
  SuiteSpec s = spec;
  s.n_instances = 1;
  s.n_states = m.n_states;
  s.n_actions = m.n_actions;
  s.n_contexts = m.n_contexts;
  s.gamma = m.gamma;
  std::vector<InstanceOut> outs;
  outs.push_back(run_checks(s, Rng(s.seed, 0).next_u64(), m));
  return assemble(s, outs);
}

}  // namespace ccmdp
