#include "ccmdp/mc_control.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ccmdp/errors.hpp"
#include "ccmdp/rng.hpp"

namespace ccmdp {
namespace {

/// Shared engine. The prior enters in exactly two places: exploration draws
/// and the kappa log-prior bonus in the greedy step. A uniform prior with
/// kappa = 0 makes both vanish, so the baseline is this engine verbatim.
LearningCurve mc_control(const TabularCMDP& m, const std::vector<int>& phi,
                         const AbstractPolicy& prior, const MCConfig& config) {
  const int horizon = config.horizon > 0 ? config.horizon : default_horizon(m.gamma);
  for (const auto& per_c : prior.probs)
    for (const auto& row : per_c)
      for (double p : row)
        if (!(p > 0.0)) throw SupportError("mc_control: prior must be full support");

  std::vector<std::vector<std::vector<double>>> q(
      m.n_contexts, std::vector<std::vector<double>>(m.n_states,
                                                     std::vector<double>(m.n_actions, 0.0)));
  std::vector<std::vector<std::vector<long long>>> counts(
      m.n_contexts, std::vector<std::vector<long long>>(
                        m.n_states, std::vector<long long>(m.n_actions, 0)));

  auto greedy = [&](int c, int s, double kappa) {
    int best = 0;
    double best_v = -1e300;
    for (int a = 0; a < m.n_actions; ++a) {
      double v = q[c][s][a];
      if (kappa != 0.0) v += kappa * std::log(prior.probs[c][phi[s]][a]);
      if (v > best_v) {
        best_v = v;
        best = a;
      }
    }
    return best;
  };

  LearningCurve curve;
  curve.seed = config.seed;
  Rng rng(config.seed);
  const int budget = config.episode_budget;
  std::vector<int> ep_s(horizon), ep_a(horizon);
  std::vector<double> ep_r(horizon);
  for (int e = 0; e < budget; ++e) {
    const double frac = budget > 1 ? static_cast<double>(e) / (budget - 1) : 0.0;
    const double eps =
        config.epsilon_start + (config.epsilon_end - config.epsilon_start) * frac;
    const double kappa =
        config.kappa_initial + (config.kappa_final - config.kappa_initial) * frac;
    const int c = rng.next_categorical(m.p_context);
    int s = rng.next_categorical(m.p_initial[c]);
    double ep_return = 0.0, discount = 1.0;
    for (int t = 0; t < horizon; ++t) {
      int a;
      if (rng.next_double() < eps)
        a = rng.next_categorical(prior.probs[c][phi[s]]);
      else
        a = greedy(c, s, kappa);
      ep_s[t] = s;
      ep_a[t] = a;
      ep_r[t] = m.rewards[c][s][a];
      ep_return += discount * ep_r[t];
      discount *= m.gamma;
      s = rng.next_categorical(m.transitions[c][s][a]);
    }
    double g = 0.0;
    for (int t = horizon - 1; t >= 0; --t) {
      g = ep_r[t] + m.gamma * g;
      auto& n = counts[c][ep_s[t]][ep_a[t]];
      ++n;
      q[c][ep_s[t]][ep_a[t]] += (g - q[c][ep_s[t]][ep_a[t]]) / static_cast<double>(n);
    }
    curve.returns.push_back(ep_return);
    curve.steps.push_back(horizon);
    curve.contexts.push_back(c);
  }
  return curve;
}

}  // namespace

LearningCurve run_baseline_mc(const TabularCMDP& m, const MCConfig& config) {
  // trivial one-concept classifier + uniform prior: the reduction case
  std::vector<int> phi(m.n_states, 0);
  AbstractPolicy uniform;
  uniform.probs.assign(m.n_contexts,
                       std::vector<Dist>(1, Dist(m.n_actions, 1.0 / m.n_actions)));
  MCConfig cfg = config;
  cfg.kappa_initial = 0.0;
  cfg.kappa_final = 0.0;
  return mc_control(m, phi, uniform, cfg);
}

LearningCurve run_prior_guided(const TabularCMDP& m, const ConceptClassifier& classifier,
                               const AbstractPolicy& abstract_policy,
                               const MCConfig& config) {
  if (static_cast<int>(classifier.logits.size()) != m.n_states)
    throw std::invalid_argument("run_prior_guided: classifier does not match n_states");
  return mc_control(m, classifier.hard_assignment(), abstract_policy, config);
}

}  // namespace ccmdp
