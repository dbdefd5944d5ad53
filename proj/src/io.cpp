#include "ccmdp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ccmdp {
namespace {

using nlohmann::json;

/// Shortest round-trip decimal form; deterministic for identical doubles.
std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

json parse_guard(const std::string& text, const char* where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string(where) + ": " + e.what());
  }
}

const json& require_key(const json& j, const char* key, const char* where) {
  auto it = j.find(key);
  if (it == j.end())
    throw std::invalid_argument(std::string(where) + ": missing key '" + key + "'");
  return *it;
}

template <typename T>
T get_as(const json& j, const char* key, const char* where) {
  try {
    return require_key(j, key, where).get<T>();
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string(where) + ": key '" + key + "': " + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json classifier_to_j(const ConceptClassifier& c) {
  return json{{"classifier_version", 1},
              {"factor_sizes", std::vector<int>{c.n_concepts}},
              {"logits", std::vector<std::vector<std::vector<double>>>{c.logits}},
              {"mode", c.mode == ConceptClassifier::Mode::hard ? "hard" : "soft"},
              {"n_concepts", c.n_concepts},
              {"temperature", c.temperature}};
}

ConceptClassifier factor_from_j(const json& j, int index, const char* where) {
  const auto logits = get_as<std::vector<std::vector<std::vector<double>>>>(j, "logits", where);
  const auto sizes = get_as<std::vector<int>>(j, "factor_sizes", where);
  if (sizes.size() != logits.size())
    throw std::invalid_argument(std::string(where) + ": factor_sizes and logits disagree");
  if (index >= static_cast<int>(sizes.size()))
    throw std::invalid_argument(std::string(where) + ": factor index out of range");
  ConceptClassifier c;
  c.n_concepts = sizes[index];
  c.logits = logits[index];
  c.temperature = get_as<double>(j, "temperature", where);
  const auto mode = get_as<std::string>(j, "mode", where);
  if (mode == "hard")
    c.mode = ConceptClassifier::Mode::hard;
  else if (mode == "soft")
    c.mode = ConceptClassifier::Mode::soft;
  else
    throw std::invalid_argument(std::string(where) + ": mode must be 'soft' or 'hard'");
  if (c.n_concepts <= 0)
    throw std::invalid_argument(std::string(where) + ": factor_sizes entries must be positive");
  for (const auto& row : c.logits)
    if (static_cast<int>(row.size()) != c.n_concepts)
      throw std::invalid_argument(std::string(where) + ": logits row width != factor size");
  if (!(c.temperature > 0.0))
    throw std::invalid_argument(std::string(where) + ": temperature must be positive");
  return c;
}

json bound_to_j(const BoundReport& r) {
  return json{{"f_constant", r.f_constant},
              {"lemma1_bound", r.lemma1_bound},
              {"margins",
               json{{"mi_minus_regret_sq", r.margins.mi_minus_regret_sq},
                    {"t2_minus_mi", r.margins.t2_minus_mi},
                    {"u_minus_f_mi", r.margins.u_minus_f_mi}}},
              {"regret", r.regret},
              {"regret_sq_over_f", r.regret_sq_over_f},
              {"theorem1_mi", r.theorem1_mi},
              {"theorem2_bound", r.theorem2_bound}};
}

BoundReport bound_from_j(const json& j, const char* where) {
  BoundReport r;
  r.f_constant = get_as<double>(j, "f_constant", where);
  r.lemma1_bound = get_as<double>(j, "lemma1_bound", where);
  r.regret = get_as<double>(j, "regret", where);
  r.regret_sq_over_f = get_as<double>(j, "regret_sq_over_f", where);
  r.theorem1_mi = get_as<double>(j, "theorem1_mi", where);
  r.theorem2_bound = get_as<double>(j, "theorem2_bound", where);
  const json& m = require_key(j, "margins", where);
  r.margins.mi_minus_regret_sq = get_as<double>(m, "mi_minus_regret_sq", where);
  r.margins.t2_minus_mi = get_as<double>(m, "t2_minus_mi", where);
  r.margins.u_minus_f_mi = get_as<double>(m, "u_minus_f_mi", where);
  return r;
}

json mean_curve_to_j(const MeanCurve& c) {
  return json{{"mean", c.mean}, {"n_seeds", c.n_seeds}, {"std_error", c.std_error}};
}

json metrics_to_j(const TransferMetrics& m) {
  json thresholds = json::array();
  for (const auto& t : m.time_to_threshold) {
    json e{{"fraction", t.fraction}, {"level", t.level}};
    e["baseline_episodes"] = t.baseline_episodes ? json(*t.baseline_episodes) : json(nullptr);
    e["treatment_episodes"] = t.treatment_episodes ? json(*t.treatment_episodes) : json(nullptr);
    e["ratio"] = t.ratio ? json(*t.ratio) : json(nullptr);
    thresholds.push_back(std::move(e));
  }
  return json{{"asymptotic_gap", m.asymptotic_gap},
              {"jumpstart", m.jumpstart},
              {"time_to_threshold", std::move(thresholds)}};
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << text;
}

std::string cmdp_to_json(const TabularCMDP& m) {
  json j{{"cmdp_version", 1},
         {"n_states", m.n_states},
         {"n_actions", m.n_actions},
         {"n_contexts", m.n_contexts},
         {"gamma", m.gamma},
         {"transitions", m.transitions},
         {"rewards", m.rewards},
         {"p_context", m.p_context},
         {"p_initial", m.p_initial},
         {"labels",
          json{{"states", m.labels.states},
               {"actions", m.labels.actions},
               {"contexts", m.labels.contexts}}}};
  return dump(j);
}

TabularCMDP cmdp_from_json(const std::string& text) {
  const char* where = "env";
  json j = parse_guard(text, where);
  if (j.value("cmdp_version", 1) != 1)
    throw std::invalid_argument("env: unsupported cmdp_version");
  TabularCMDP m;
  m.n_states = get_as<int>(j, "n_states", where);
  m.n_actions = get_as<int>(j, "n_actions", where);
  m.n_contexts = get_as<int>(j, "n_contexts", where);
  m.gamma = get_as<double>(j, "gamma", where);
  m.transitions =
      get_as<std::vector<std::vector<std::vector<Dist>>>>(j, "transitions", where);
  m.rewards = get_as<std::vector<std::vector<std::vector<double>>>>(j, "rewards", where);
  m.p_context = get_as<Dist>(j, "p_context", where);
  m.p_initial = get_as<std::vector<Dist>>(j, "p_initial", where);
  if (j.contains("labels")) {
    const json& lab = j["labels"];
    m.labels.states = lab.value("states", std::vector<std::string>{});
    m.labels.actions = lab.value("actions", std::vector<std::string>{});
    m.labels.contexts = lab.value("contexts", std::vector<std::string>{});
  }
  require_valid(m);
  return m;
}

std::string classifier_to_json(const ConceptClassifier& c) {
  return dump(classifier_to_j(c));
}

std::string classifier_to_json(const FactoredClassifier& c) {
  if (c.factors.empty())
    throw std::invalid_argument("classifier: factored classifier has no factors");
  std::vector<int> sizes;
  std::vector<std::vector<std::vector<double>>> logits;
  for (const auto& f : c.factors) {
    if (f.temperature != c.factors[0].temperature || f.mode != c.factors[0].mode)
      throw std::invalid_argument("classifier: factors must share temperature and mode");
    sizes.push_back(f.n_concepts);
    logits.push_back(f.logits);
  }
  json j{{"classifier_version", 1},
         {"factor_sizes", sizes},
         {"logits", logits},
         {"mode", c.factors[0].mode == ConceptClassifier::Mode::hard ? "hard" : "soft"},
         {"n_concepts", c.product_size()},
         {"temperature", c.factors[0].temperature}};
  return dump(j);
}

ConceptClassifier classifier_from_json(const std::string& text) {
  const char* where = "classifier";
  json j = parse_guard(text, where);
  if (j.value("classifier_version", 1) != 1)
    throw std::invalid_argument("classifier: unsupported classifier_version");
  const auto sizes = get_as<std::vector<int>>(j, "factor_sizes", where);
  if (sizes.size() != 1)
    throw std::invalid_argument("classifier: expected a single factor, found " +
                                std::to_string(sizes.size()));
  return factor_from_j(j, 0, where);
}

FactoredClassifier factored_from_json(const std::string& text) {
  const char* where = "classifier";
  json j = parse_guard(text, where);
  if (j.value("classifier_version", 1) != 1)
    throw std::invalid_argument("classifier: unsupported classifier_version");
  const auto sizes = get_as<std::vector<int>>(j, "factor_sizes", where);
  if (sizes.empty()) throw std::invalid_argument("classifier: factor_sizes is empty");
  FactoredClassifier c;
  for (int f = 0; f < static_cast<int>(sizes.size()); ++f)
    c.factors.push_back(factor_from_j(j, f, where));
  return c;
}

std::string solution_to_json(const Solution& sol) {
  json j{{"solution_version", 1},
         {"q_values", sol.q_values},
         {"v_values", sol.v_values},
         {"soft_policy", sol.soft_optimal.probs},
         {"occupancy", sol.occupancy},
         {"f_constant", sol.f_constant},
         {"tau", sol.tau},
         {"tol", sol.tol},
         {"iterations", sol.iterations}};
  return dump(j);
}

std::string bound_report_to_json(const BoundReport& r) { return dump(bound_to_j(r)); }

std::string suite_report_to_json(const SuiteReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back(json{{"count", c.count},
                          {"name", c.name},
                          {"violations", c.violations},
                          {"worst_margin", c.worst_margin}});
  json violations = json::array();
  for (const auto& v : r.violations)
    violations.push_back(json{{"check", v.check},
                              {"family", v.family},
                              {"instance", v.instance},
                              {"margin", v.margin}});
  json reports = json::array();
  for (const auto& b : r.reports) reports.push_back(bound_to_j(b));
  json j{{"suite_version", 1},
         {"spec",
          json{{"gamma", r.spec.gamma},
               {"learn_restarts", r.spec.learn_restarts},
               {"n_actions", r.spec.n_actions},
               {"n_concepts", r.spec.n_concepts},
               {"n_contexts", r.spec.n_contexts},
               {"n_instances", r.spec.n_instances},
               {"n_policies", r.spec.n_policies},
               {"n_states", r.spec.n_states},
               {"seed", r.spec.seed},
               {"tau_frac", r.spec.tau_frac}}},
         {"checks", std::move(checks)},
         {"violations", std::move(violations)},
         {"reports", std::move(reports)},
         {"families", r.families},
         {"instances", r.instances},
         {"total_checks", r.total_checks},
         {"total_violations", r.total_violations}};
  return dump(j);
}

SuiteReport suite_report_from_json(const std::string& text) {
  const char* where = "suite";
  json j = parse_guard(text, where);
  if (j.value("suite_version", 1) != 1)
    throw std::invalid_argument("suite: unsupported suite_version");
  SuiteReport r;
  const json& spec = require_key(j, "spec", where);
  r.spec.gamma = get_as<double>(spec, "gamma", where);
  r.spec.learn_restarts = get_as<int>(spec, "learn_restarts", where);
  r.spec.n_actions = get_as<int>(spec, "n_actions", where);
  r.spec.n_concepts = get_as<int>(spec, "n_concepts", where);
  r.spec.n_contexts = get_as<int>(spec, "n_contexts", where);
  r.spec.n_instances = get_as<int>(spec, "n_instances", where);
  r.spec.n_policies = get_as<int>(spec, "n_policies", where);
  r.spec.n_states = get_as<int>(spec, "n_states", where);
  r.spec.seed = get_as<std::uint64_t>(spec, "seed", where);
  r.spec.tau_frac = get_as<double>(spec, "tau_frac", where);
  for (const json& c : require_key(j, "checks", where)) {
    SuiteCheckStats stats;
    stats.count = get_as<long long>(c, "count", where);
    stats.name = get_as<std::string>(c, "name", where);
    stats.violations = get_as<long long>(c, "violations", where);
    stats.worst_margin = get_as<double>(c, "worst_margin", where);
    r.checks.push_back(std::move(stats));
  }
  for (const json& v : require_key(j, "violations", where)) {
    SuiteViolation violation;
    violation.check = get_as<std::string>(v, "check", where);
    violation.family = get_as<std::string>(v, "family", where);
    violation.instance = get_as<int>(v, "instance", where);
    violation.margin = get_as<double>(v, "margin", where);
    r.violations.push_back(std::move(violation));
  }
  for (const json& b : require_key(j, "reports", where))
    r.reports.push_back(bound_from_j(b, where));
  r.families = get_as<std::vector<std::string>>(j, "families", where);
  r.instances = get_as<std::vector<int>>(j, "instances", where);
  r.total_checks = get_as<long long>(j, "total_checks", where);
  r.total_violations = get_as<long long>(j, "total_violations", where);
  return r;
}

int recheck_suite_report(const SuiteReport& r) {
  const auto near = [](double a, double b) {
    return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)});
  };
  int problems = 0;
  for (const auto& b : r.reports) {
    if (!near(b.margins.mi_minus_regret_sq, b.theorem1_mi - b.regret_sq_over_f)) ++problems;
    if (!near(b.margins.t2_minus_mi, b.theorem2_bound - b.theorem1_mi)) ++problems;
    if (!near(b.margins.u_minus_f_mi, b.lemma1_bound - b.f_constant * b.theorem1_mi))
      ++problems;
    if (b.f_constant > 0.0 && !near(b.regret_sq_over_f * b.f_constant, b.regret * b.regret))
      ++problems;
    if (b.margins.mi_minus_regret_sq < -1e-7 || b.margins.t2_minus_mi < -1e-7) ++problems;
    if (b.regret < -1e-9 || b.theorem1_mi < -1e-12) ++problems;
  }
  long long tallied = 0;
  for (const auto& c : r.checks) {
    tallied += c.violations;
    if (c.worst_margin < -1e-7 && c.violations == 0) ++problems;
  }
  if (tallied != r.total_violations) ++problems;
  if (static_cast<long long>(r.violations.size()) != r.total_violations) ++problems;
  if (r.reports.size() != r.families.size() || r.reports.size() != r.instances.size())
    ++problems;
  return problems;
}

std::string transfer_report_to_json(const TransferReport& r) {
  json j{{"transfer_version", 1},
         {"baseline", mean_curve_to_j(r.baseline)},
         {"trmc_concepts",
          json{{"curve", mean_curve_to_j(r.trmc_concepts.curve)},
               {"metrics", metrics_to_j(r.trmc_concepts.metrics)}}},
         {"prior_guided",
          json{{"curve", mean_curve_to_j(r.prior_guided.curve)},
               {"metrics", metrics_to_j(r.prior_guided.metrics)}}},
         {"classifier", classifier_to_j(r.classifier)},
         {"train_objective", r.train_objective},
         {"bound", bound_to_j(r.bound)},
         {"corollary1", r.corollary1},
         {"witness",
          json{{"context", r.witness.context},
               {"s", r.witness.s},
               {"s_prime", r.witness.s_prime}}},
         {"concept_entropy", r.concept_entropy},
         {"concept_context_mi", r.concept_context_mi},
         {"n_seeds", r.n_seeds}};
  return dump(j);
}

std::string trmc_state_to_json(const TRMCState& s) {
  json j{{"trmc_version", 1},
         {"q_table", s.q_table},
         {"visit_counts", s.visit_counts},
         {"policy", s.policy},
         {"entropy_target", s.entropy_target},
         {"max_update_kl", s.max_update_kl},
         {"max_abs_q", s.max_abs_q},
         {"config",
          json{{"alpha_max", s.config.alpha_max},
               {"alpha_min", s.config.alpha_min},
               {"entropy_decay", s.config.entropy_decay},
               {"entropy_floor", s.config.entropy_floor},
               {"episode_budget", s.config.episode_budget},
               {"epsilon_mc", s.config.epsilon_mc},
               {"horizon", s.config.horizon},
               {"initial_entropy_frac", s.config.initial_entropy_frac},
               {"seed", s.config.seed},
               {"update_period_episodes", s.config.update_period_episodes}}}};
  return dump(j);
}

std::string curve_to_csv(const LearningCurve& curve) {
  return curves_to_csv(std::vector<LearningCurve>{curve});
}

std::string curves_to_csv(const std::vector<LearningCurve>& curves) {
  std::string out = "episode,seed,context,return,steps\n";
  char buf[96];
  for (const auto& curve : curves)
    for (std::size_t e = 0; e < curve.returns.size(); ++e) {
      std::snprintf(buf, sizeof buf, "%zu,%llu,%d,", e,
                    static_cast<unsigned long long>(curve.seed), curve.contexts[e]);
      out += buf;
      out += format_double(curve.returns[e]);
      std::snprintf(buf, sizeof buf, ",%d\n", curve.steps[e]);
      out += buf;
    }
  return out;
}

}  // namespace ccmdp
