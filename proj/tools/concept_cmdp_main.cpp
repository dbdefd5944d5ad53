#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ccmdp/cmdp.hpp"
#include "ccmdp/errors.hpp"
#include "ccmdp/io.hpp"
#include "ccmdp/learn.hpp"
#include "ccmdp/rng.hpp"
#include "ccmdp/solver.hpp"
#include "ccmdp/transfer.hpp"
#include "ccmdp/trmc.hpp"

namespace {

using namespace ccmdp;
using nlohmann::json;

// exit taxonomy: 0 ok, 2 input, 3 convergence, 4 capability, 5 bound violation
constexpr int EXIT_INPUT = 2;
constexpr int EXIT_CONVERGENCE = 3;
constexpr int EXIT_CAPABILITY = 4;
constexpr int EXIT_VIOLATION = 5;

int resolve_threads(int flag_threads) {
  if (const char* env = std::getenv("CONCEPT_CMDP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return flag_threads;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty())
    std::cout << text;
  else
    write_text_file(out_path, text);
}

void require_json_format(const std::string& format) {
  if (format != "json")
    throw std::invalid_argument("this command only produces json output");
}

TabularCMDP load_env(const std::string& path) { return cmdp_from_json(read_text_file(path)); }

struct CommonOpts {
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
  std::string format = "json";
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--seed", o.seed, "root seed for all randomness");
  sub->add_option("--out", o.out, "output path (default: stdout or cwd)");
  sub->add_option("--threads", o.threads, "worker threads (env CONCEPT_CMDP_THREADS overrides)");
  sub->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
}

int cmd_solve(const std::string& env_path, int context, bool context_set,
              const CommonOpts& o) {
  require_json_format(o.format);
  TabularCMDP m = load_env(env_path);
  if (context_set) {
    if (context < 0 || context >= m.n_contexts)
      throw std::invalid_argument("--context " + std::to_string(context) +
                                  " out of range for " + std::to_string(m.n_contexts) +
                                  " contexts");
    m = restrict_contexts(m, {context});
  }
  emit(o.out, solution_to_json(solve(m)));
  return 0;
}

int cmd_learn(const std::string& env_path, int n_concepts, std::vector<int> factor_sizes,
              const std::string& method, int restarts, int episodes, bool harden,
              const CommonOpts& o) {
  require_json_format(o.format);
  const TabularCMDP m = load_env(env_path);
  const Solution sol = solve(m);
  LearnConfig cfg;
  cfg.seed = o.seed;
  if (restarts > 0) cfg.restarts = restarts;

  if (factor_sizes.empty() && n_concepts <= 0)
    throw std::invalid_argument("pass --n-concepts or --factor-sizes");
  if (factor_sizes.size() == 1 && n_concepts <= 0) {
    n_concepts = factor_sizes[0];
    factor_sizes.clear();
  }
  const bool factored = !factor_sizes.empty();
  if (factored && method != "gradient")
    throw CapabilityError("method '" + method + "' does not support factored classifiers");

  json j;
  if (factored) {
    const FactoredResult r = learn_factored(m, sol, factor_sizes, cfg);
    j = json::parse(classifier_to_json(r.classifier));
    j["objective"] = r.hardened_objective;
    j["soft_objective"] = r.soft_objective;
  } else if (method == "exhaustive") {
    const auto [c, value] = learn_exhaustive(m, sol, n_concepts);
    j = json::parse(classifier_to_json(c));
    j["objective"] = value;
  } else if (method == "local") {
    const auto [c, value] = learn_local_search(m, sol, n_concepts, cfg);
    j = json::parse(classifier_to_json(c));
    j["objective"] = value;
  } else if (method == "gradient") {
    const GradientResult r = learn_gradient(m, sol, n_concepts, cfg);
    j = json::parse(classifier_to_json(r.classifier));
    j["objective"] = r.hardened_objective;
    j["soft_objective"] = r.soft_objective;
  } else if (method == "likelihood") {
    const auto triples =
        sample_triples(m, sol.soft_optimal, episodes, 0, Rng(o.seed, 1).next_u64());
    const AbstractPolicy fixed = random_abstract_policy(m.n_contexts, n_concepts,
                                                        m.n_actions, Rng(o.seed, 2).next_u64());
    const auto [c, loglik] = baseline_likelihood(triples, m.n_states, n_concepts, fixed, cfg);
    j = json::parse(classifier_to_json(c));
    j["objective"] = objective(m, sol, c);
    j["log_likelihood"] = loglik;
  } else if (method == "context-free") {
    const GradientResult r = baseline_context_free(m, sol, n_concepts, cfg);
    j = json::parse(classifier_to_json(r.classifier));
    j["objective"] = r.hardened_objective;
    j["soft_objective"] = r.soft_objective;
  } else {
    throw std::invalid_argument("unknown method '" + method + "'");
  }
  if (harden && factored)
    throw std::invalid_argument("--hard applies to single classifiers only");
  if (harden) {
    const ConceptClassifier soft = classifier_from_json(j.dump());
    const ConceptClassifier hard =
        ConceptClassifier::from_assignment(soft.hard_assignment(), soft.n_concepts);
    json hj = json::parse(classifier_to_json(hard));
    hj["objective"] = objective(m, sol, hard);
    for (const char* key : {"soft_objective", "log_likelihood"})
      if (j.contains(key)) hj[key] = j[key];
    j = std::move(hj);
  }
  j["method"] = method;
  emit(o.out, j.dump(2) + "\n");
  return 0;
}

int cmd_verify(const std::string& env_path, const std::string& recheck_path, int n_random,
               SuiteSpec spec, const CommonOpts& o) {
  require_json_format(o.format);
  spec.seed = o.seed;
  spec.n_threads = resolve_threads(o.threads);
  if (!recheck_path.empty()) {
    const SuiteReport r = suite_report_from_json(read_text_file(recheck_path));
    const int problems = recheck_suite_report(r);
    std::cout << "recheck: " << problems << " inconsistencies, " << r.total_violations
              << " recorded violations\n";
    return (problems > 0 || r.total_violations > 0) ? EXIT_VIOLATION : 0;
  }
  SuiteReport report;
  if (!env_path.empty()) {
    report = verify_bounds_env(load_env(env_path), spec);
  } else {
    spec.n_instances = n_random;
    report = verify_bounds_suite(spec);
  }
  emit(o.out, suite_report_to_json(report));
  if (!o.out.empty())
    std::cout << "checks: " << report.total_checks
              << ", violations: " << report.total_violations << "\n";
  return report.total_violations == 0 ? 0 : EXIT_VIOLATION;
}

int cmd_trmc(const std::string& env_path, const std::string& classifier_path, int episodes,
             double epsilon_mc, const CommonOpts& o) {
  const TabularCMDP m = load_env(env_path);
  const ConceptClassifier c = classifier_from_json(read_text_file(classifier_path));
  TRMCConfig cfg;
  cfg.seed = o.seed;
  cfg.episode_budget = episodes;
  cfg.epsilon_mc = epsilon_mc;
  const auto [state, curve] = run_trmc(m, c, cfg);
  const std::string prefix = o.out.empty() ? "trmc" : o.out;
  write_text_file(prefix + "_state.json", trmc_state_to_json(state));
  write_text_file(prefix + "_curve.csv", curve_to_csv(curve));
  std::cout << "wrote " << prefix << "_state.json and " << prefix << "_curve.csv\n";
  return 0;
}

TransferConfig parse_transfer_config(const std::string& text) {
  TransferConfig cfg;
  json j = json::parse(text);
  cfg.n_concepts = j.value("n_concepts", cfg.n_concepts);
  cfg.n_seeds = j.value("n_seeds", cfg.n_seeds);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.thresholds = j.value("thresholds", cfg.thresholds);
  if (j.contains("windows")) {
    const json& w = j["windows"];
    cfg.windows.jumpstart_episodes = w.value("jumpstart_episodes", cfg.windows.jumpstart_episodes);
    cfg.windows.asymptotic_episodes = w.value("asymptotic_episodes", cfg.windows.asymptotic_episodes);
    cfg.windows.smoothing = w.value("smoothing", cfg.windows.smoothing);
  }
  if (j.contains("learner")) {
    const json& l = j["learner"];
    cfg.learner.restarts = l.value("restarts", cfg.learner.restarts);
    cfg.learner.max_iters = l.value("max_iters", cfg.learner.max_iters);
    cfg.learner.seed = l.value("seed", cfg.learner.seed);
  }
  if (j.contains("trmc")) {
    const json& t = j["trmc"];
    cfg.trmc.epsilon_mc = t.value("epsilon_mc", cfg.trmc.epsilon_mc);
    cfg.trmc.update_period_episodes =
        t.value("update_period_episodes", cfg.trmc.update_period_episodes);
    cfg.trmc.initial_entropy_frac = t.value("initial_entropy_frac", cfg.trmc.initial_entropy_frac);
    cfg.trmc.entropy_decay = t.value("entropy_decay", cfg.trmc.entropy_decay);
    cfg.trmc.entropy_floor = t.value("entropy_floor", cfg.trmc.entropy_floor);
    cfg.trmc.horizon = t.value("horizon", cfg.trmc.horizon);
  }
  if (j.contains("mc")) {
    const json& s = j["mc"];
    cfg.mc.episode_budget = s.value("episode_budget", cfg.mc.episode_budget);
    cfg.mc.epsilon_start = s.value("epsilon_start", cfg.mc.epsilon_start);
    cfg.mc.epsilon_end = s.value("epsilon_end", cfg.mc.epsilon_end);
    cfg.mc.kappa_initial = s.value("kappa_initial", cfg.mc.kappa_initial);
    cfg.mc.kappa_final = s.value("kappa_final", cfg.mc.kappa_final);
    cfg.mc.horizon = s.value("horizon", cfg.mc.horizon);
  }
  cfg.mc.episode_budget = j.value("episode_budget", cfg.mc.episode_budget);
  return cfg;
}

int cmd_transfer(const std::string& train_path, const std::string& test_path,
                 const std::string& config_path, bool seed_given, const CommonOpts& o) {
  const TabularCMDP train = load_env(train_path);
  const TabularCMDP test = load_env(test_path);
  TransferConfig cfg;
  if (!config_path.empty()) {
    try {
      cfg = parse_transfer_config(read_text_file(config_path));
    } catch (const json::exception& e) {
      throw std::invalid_argument(std::string("config: ") + e.what());
    }
  }
  if (seed_given || config_path.empty()) cfg.seed = o.seed;
  cfg.n_threads = resolve_threads(o.threads);
  const TransferReport report = transfer_experiment(train, test, cfg);

  const std::string dir = o.out.empty() ? "." : o.out;
  std::filesystem::create_directories(dir);
  write_text_file(dir + "/transfer_report.json", transfer_report_to_json(report));
  write_text_file(dir + "/baseline.csv", curves_to_csv(report.baseline_runs));
  write_text_file(dir + "/trmc_concepts.csv", curves_to_csv(report.trmc_runs));
  write_text_file(dir + "/prior_guided.csv", curves_to_csv(report.prior_runs));
  std::cout << "wrote transfer_report.json and 3 curve CSVs to " << dir << "\n";
  return 0;
}

int cmd_report(const std::string& env_path, const std::string& classifier_path,
               const CommonOpts& o) {
  require_json_format(o.format);
  const TabularCMDP m = load_env(env_path);
  const Solution sol = solve(m);
  const ConceptClassifier c = classifier_from_json(read_text_file(classifier_path));
  const ClassifierRows rows = c.rows();
  const BoundReport bound = make_bound_report(m, sol, rows);
  const JointModel joint = build_joint(m, sol, rows);
  const auto [h_concept, mi_concept_context] = concept_diagnostics(joint);
  json j{{"bound", json::parse(bound_report_to_json(bound))},
         {"concept_entropy", h_concept},
         {"concept_context_mi", mi_concept_context},
         {"conditional_mi", bound.theorem1_mi},
         {"context_free_mi", context_free_mi(joint)}};
  if (c.mode == ConceptClassifier::Mode::hard) {
    const auto [value, witness] = corollary1_bound(m, sol, rows);
    j["corollary1"] = value;
    j["witness"] = json{{"context", witness.context}, {"s", witness.s},
                        {"s_prime", witness.s_prime}};
  }
  emit(o.out, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact concept learning, bound verification, and transfer benchmarks "
               "for tabular contextual MDPs"};
  app.require_subcommand(1);

  CommonOpts common;

  auto* solve_cmd = app.add_subcommand("solve", "solve an environment exactly");
  std::string env_path;
  int context = 0;
  solve_cmd->add_option("--env", env_path, "environment json")->required();
  auto* context_opt = solve_cmd->add_option("--context", context, "restrict to one context");
  add_common(solve_cmd, common);

  auto* learn_cmd = app.add_subcommand("learn-concepts", "learn a state classifier");
  std::string learn_env, method = "gradient";
  int n_concepts = 0, restarts = 0, triple_episodes = 200;
  std::vector<int> factor_sizes;
  learn_cmd->add_option("--env", learn_env, "environment json")->required();
  learn_cmd->add_option("--n-concepts", n_concepts, "concept count");
  learn_cmd->add_option("--factor-sizes", factor_sizes, "factored concept sizes")
      ->delimiter(',');
  learn_cmd->add_option("--method", method, "learning method")
      ->check(CLI::IsMember({"exhaustive", "local", "gradient", "likelihood", "context-free"}));
  learn_cmd->add_option("--restarts", restarts, "seeded restarts");
  learn_cmd->add_option("--episodes", triple_episodes, "rollout episodes (likelihood method)");
  bool harden = false;
  learn_cmd->add_flag("--hard", harden, "write the hardened (argmax) classifier");
  add_common(learn_cmd, common);

  auto* verify_cmd = app.add_subcommand("verify-bounds", "verify the inequality chain");
  std::string verify_env, recheck_path;
  int n_random = 100;
  SuiteSpec spec;
  verify_cmd->add_option("--env", verify_env, "verify one environment instead of random ones");
  verify_cmd->add_option("--random", n_random, "number of random instances");
  verify_cmd->add_option("--states", spec.n_states, "random-instance states");
  verify_cmd->add_option("--actions", spec.n_actions, "random-instance actions");
  verify_cmd->add_option("--contexts", spec.n_contexts, "random-instance contexts");
  verify_cmd->add_option("--gamma", spec.gamma, "random-instance discount");
  verify_cmd->add_option("--tau", spec.tau_frac, "softening temperature fraction");
  verify_cmd->add_option("--concepts", spec.n_concepts, "classifier size for random/learned");
  verify_cmd->add_option("--policies", spec.n_policies, "sampled abstract policies per check");
  verify_cmd->add_option("--restarts", spec.learn_restarts, "local-search restarts");
  verify_cmd->add_option("--recheck", recheck_path, "audit an existing suite report");
  add_common(verify_cmd, common);

  auto* trmc_cmd = app.add_subcommand("trmc", "trust-region Monte Carlo over concepts");
  std::string trmc_env, trmc_classifier;
  int trmc_episodes = 1000;
  double epsilon_mc = 0.05;
  trmc_cmd->add_option("--env", trmc_env, "environment json")->required();
  trmc_cmd->add_option("--classifier", trmc_classifier, "hard classifier json")->required();
  trmc_cmd->add_option("--episodes", trmc_episodes, "episode budget");
  trmc_cmd->add_option("--epsilon-mc", epsilon_mc, "trust region radius");
  add_common(trmc_cmd, common);

  auto* transfer_cmd = app.add_subcommand("transfer", "train-to-test transfer benchmark");
  std::string train_path, test_path, config_path;
  transfer_cmd->add_option("--train", train_path, "training environment json")->required();
  transfer_cmd->add_option("--test", test_path, "test environment json")->required();
  transfer_cmd->add_option("--config", config_path, "experiment config json");
  add_common(transfer_cmd, common);

  auto* report_cmd = app.add_subcommand("report", "bounds and diagnostics for a classifier");
  std::string report_env, report_classifier;
  report_cmd->add_option("--env", report_env, "environment json")->required();
  report_cmd->add_option("--classifier", report_classifier, "classifier json")->required();
  add_common(report_cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : EXIT_INPUT;
  }

  try {
    if (*solve_cmd)
      return cmd_solve(env_path, context, context_opt->count() > 0, common);
    if (*learn_cmd)
      return cmd_learn(learn_env, n_concepts, factor_sizes, method, restarts,
                       triple_episodes, harden, common);
    if (*verify_cmd) return cmd_verify(verify_env, recheck_path, n_random, spec, common);
    if (*trmc_cmd)
      return cmd_trmc(trmc_env, trmc_classifier, trmc_episodes, epsilon_mc, common);
    if (*transfer_cmd) {
      const bool seed_given =
          transfer_cmd->get_option("--seed")->count() > 0;
      return cmd_transfer(train_path, test_path, config_path, seed_given, common);
    }
    if (*report_cmd) return cmd_report(report_env, report_classifier, common);
    return EXIT_INPUT;
  } catch (const SupportError& e) {
    std::cerr << "support error: " << e.what() << "\n";
    return EXIT_INPUT;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return EXIT_CONVERGENCE;
  } catch (const CapabilityError& e) {
    std::cerr << "capability error: " << e.what() << "\n";
    return EXIT_CAPABILITY;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return EXIT_INPUT;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
