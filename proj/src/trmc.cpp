#include "ccmdp/trmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ccmdp/errors.hpp"
#include "ccmdp/info.hpp"
#include "ccmdp/rng.hpp"

namespace ccmdp {
namespace {

Dist softmax_scaled(const Dist& q, double alpha) {
  Dist row(q.size());
  const double q_max = *std::max_element(q.begin(), q.end());
  double total = 0.0;
  for (std::size_t a = 0; a < q.size(); ++a) {
    // floor keeps full support when a large gap underflows exp
    row[a] = std::max(std::exp((q[a] - q_max) / alpha),
                      std::numeric_limits<double>::min());
    total += row[a];
  }
  for (double& x : row) x /= total;
  return row;
}

}  // namespace

void update_q_every_visit(TRMCState& state, int context,
                          const std::vector<ConceptStep>& episode, double gamma) {
  if (episode.empty()) return;
  // suffix returns G_t = r_t + gamma G_{t+1}
  double g = 0.0;
  std::vector<double> returns(episode.size());
  for (int t = static_cast<int>(episode.size()) - 1; t >= 0; --t) {
    g = episode[t].reward + gamma * g;
    returns[t] = g;
  }
  for (std::size_t t = 0; t < episode.size(); ++t) {
    const int k = episode[t].concept_index;
    const int a = episode[t].action;
    auto& count = state.visit_counts[context][k][a];
    auto& mean = state.q_table[context][k][a];
    ++count;
    mean += (returns[t] - mean) / static_cast<double>(count);
  }
}

std::pair<double, bool> temperature_search(const Dist& q_row, double entropy_target,
                                           double alpha_min, double alpha_max) {
  if (!(alpha_min > 0.0) || !(alpha_max > alpha_min))
    throw std::invalid_argument("temperature_search: bad alpha bounds");
  const double log_n = std::log(static_cast<double>(q_row.size()));
  if (entropy_target < 0.0 || entropy_target > log_n + 1e-12)
    throw std::invalid_argument("temperature_search: target outside [0, log n]");
  constexpr double TOL = 1e-6;
  const double spread =
      *std::max_element(q_row.begin(), q_row.end()) -
      *std::min_element(q_row.begin(), q_row.end());
  if (spread == 0.0)  // entropy is log n at every alpha
    return {alpha_max, std::abs(entropy_target - log_n) <= TOL};
  double lo = alpha_min, hi = alpha_max;
  const double h_lo = entropy(softmax_scaled(q_row, lo));
  const double h_hi = entropy(softmax_scaled(q_row, hi));
  if (entropy_target <= h_lo) return {lo, std::abs(h_lo - entropy_target) <= TOL};
  if (entropy_target >= h_hi) return {hi, std::abs(h_hi - entropy_target) <= TOL};
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double h = entropy(softmax_scaled(q_row, mid));
    if (std::abs(h - entropy_target) <= TOL) return {mid, true};
    if (h < entropy_target)
      lo = mid;  // entropy increases with alpha
    else
      hi = mid;
  }
  return {0.5 * (lo + hi), true};
}

Dist trust_region_project(const Dist& current, const Dist& target, double epsilon_mc) {
  if (current.size() != target.size())
    throw std::invalid_argument("trust_region_project: length mismatch");
  if (!(epsilon_mc >= 0.0))
    throw std::invalid_argument("trust_region_project: epsilon_mc must be >= 0");
  for (std::size_t i = 0; i < current.size(); ++i)
    if (current[i] <= 0.0 || target[i] <= 0.0)
      throw SupportError("trust_region_project: rows must be full support");
  if (epsilon_mc == 0.0) return current;

  auto geometric = [&](double lambda) {
    Dist p(current.size());
    double total = 0.0;
    for (std::size_t i = 0; i < current.size(); ++i) {
      p[i] = std::exp((1.0 - lambda) * std::log(current[i]) +
                      lambda * std::log(target[i]));
      total += p[i];
    }
    for (double& x : p) x /= total;
    return p;
  };

  if (kl_divergence(target, current) <= epsilon_mc) return target;
  // KL(p_lambda || current) grows monotonically from 0; keep the feasible end
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-8) {
    const double mid = 0.5 * (lo + hi);
    if (kl_divergence(geometric(mid), current) <= epsilon_mc)
      lo = mid;
    else
      hi = mid;
  }
  return geometric(lo);
}

std::pair<TRMCState, LearningCurve> run_trmc(const TabularCMDP& m,
                                             const ConceptClassifier& classifier,
                                             const TRMCConfig& config) {
  if (classifier.mode != ConceptClassifier::Mode::hard)
    throw std::invalid_argument("run_trmc: classifier must be in hard mode");
  if (static_cast<int>(classifier.logits.size()) != m.n_states)
    throw std::invalid_argument("run_trmc: classifier does not match n_states");
  const std::vector<int> phi = classifier.hard_assignment();
  const int n_k = classifier.n_concepts;
  const int horizon =
      config.horizon > 0 ? config.horizon : default_horizon(m.gamma);

  TRMCState state;
  state.config = config;
  state.q_table.assign(m.n_contexts, std::vector<Dist>(n_k, Dist(m.n_actions, 0.0)));
  state.visit_counts.assign(
      m.n_contexts, std::vector<std::vector<long long>>(
                        n_k, std::vector<long long>(m.n_actions, 0)));
  state.policy.assign(m.n_contexts,
                      std::vector<Dist>(n_k, Dist(m.n_actions, 1.0 / m.n_actions)));
  state.entropy_target =
      config.initial_entropy_frac * std::log(static_cast<double>(m.n_actions));

  LearningCurve curve;
  curve.seed = config.seed;
  Rng rng(config.seed);
  std::vector<ConceptStep> episode(horizon);
  for (int e = 0; e < config.episode_budget; ++e) {
    const int c = rng.next_categorical(m.p_context);
    int s = rng.next_categorical(m.p_initial[c]);
    double ep_return = 0.0, discount = 1.0;
    for (int t = 0; t < horizon; ++t) {
      const int k = phi[s];
      const int a = rng.next_categorical(state.policy[c][k]);
      const double r = m.rewards[c][s][a];
      episode[t] = {k, a, r};
      ep_return += discount * r;
      discount *= m.gamma;
      s = rng.next_categorical(m.transitions[c][s][a]);
    }
    update_q_every_visit(state, c, episode, m.gamma);
    for (const auto& row : state.q_table[c])
      for (double q : row) state.max_abs_q = std::max(state.max_abs_q, std::abs(q));
    curve.returns.push_back(ep_return);
    curve.steps.push_back(horizon);
    curve.contexts.push_back(c);

    if ((e + 1) % config.update_period_episodes == 0) {
      for (int cc = 0; cc < m.n_contexts; ++cc)
        for (int k = 0; k < n_k; ++k) {
          long long visits = 0;
          for (long long v : state.visit_counts[cc][k]) visits += v;
          if (visits == 0) continue;  // target undefined for unvisited rows
          const auto [alpha, exact] = temperature_search(
              state.q_table[cc][k], state.entropy_target, config.alpha_min,
              config.alpha_max);
          (void)exact;
          const Dist target = softmax_scaled(state.q_table[cc][k], alpha);
          Dist next =
              trust_region_project(state.policy[cc][k], target, config.epsilon_mc);
          state.max_update_kl =
              std::max(state.max_update_kl, kl_divergence(next, state.policy[cc][k]));
          state.policy[cc][k] = std::move(next);
        }
      state.entropy_target =
          std::max(config.entropy_floor, state.entropy_target * config.entropy_decay);
    }
  }
  return {std::move(state), std::move(curve)};
}

}  // namespace ccmdp
