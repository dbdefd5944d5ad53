#include "ccmdp/info.hpp"

#include <cmath>
#include <stdexcept>

#include "ccmdp/errors.hpp"

namespace ccmdp {
namespace {

void check_shapes(const TabularCMDP& m, const ClassifierRows& phi) {
  if (static_cast<int>(phi.size()) != m.n_states)
    throw std::invalid_argument("classifier rows do not match n_states");
  const std::size_t k = phi.empty() ? 0 : phi[0].size();
  if (k == 0) throw std::invalid_argument("classifier has zero concepts");
  for (const auto& row : phi)
    if (row.size() != k)
      throw std::invalid_argument("ragged classifier rows");
}

}  // namespace

double entropy(const Dist& p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

double kl_divergence(const Dist& p, const Dist& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("kl_divergence: length mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] <= 0.0)
      throw SupportError("kl_divergence: p has mass at index " +
                         std::to_string(i) + " where q is zero");
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

JointModel build_joint(const TabularCMDP& m, const Solution& sol,
                       const ClassifierRows& phi) {
  check_shapes(m, phi);
  JointModel j;
  j.n_contexts = m.n_contexts;
  j.n_states = m.n_states;
  j.n_concepts = static_cast<int>(phi[0].size());
  j.n_actions = m.n_actions;
  j.phi = phi;
  j.pi = sol.soft_optimal.probs;
  j.w.assign(m.n_contexts, std::vector<double>(m.n_states, 0.0));
  j.probs.assign(m.n_contexts,
                 std::vector<std::vector<Dist>>(
                     m.n_states, std::vector<Dist>(j.n_concepts, Dist(m.n_actions, 0.0))));
  j.p_concept.assign(m.n_contexts, Dist(j.n_concepts, 0.0));
  j.p_state_given.assign(m.n_contexts,
                         std::vector<Dist>(j.n_concepts, Dist(m.n_states, 0.0)));
  j.p_action_given.assign(m.n_contexts,
                          std::vector<Dist>(j.n_concepts, Dist(m.n_actions, 0.0)));
  for (int c = 0; c < m.n_contexts; ++c) {
    for (int s = 0; s < m.n_states; ++s) {
      const double w = m.p_context[c] * sol.occupancy[c][s];
      j.w[c][s] = w;
      if (w == 0.0) continue;
      for (int k = 0; k < j.n_concepts; ++k) {
        const double wk = w * phi[s][k];
        if (wk == 0.0) continue;
        j.p_concept[c][k] += wk;
        j.p_state_given[c][k][s] += wk;
        for (int a = 0; a < m.n_actions; ++a) {
          const double mass = wk * j.pi[c][s][a];
          j.probs[c][s][k][a] = mass;
          j.p_action_given[c][k][a] += mass;
        }
      }
    }
    // normalize the conditionals; zero-mass concepts keep zero rows
    for (int k = 0; k < j.n_concepts; ++k) {
      const double pk = j.p_concept[c][k];
      if (pk == 0.0) continue;
      for (int s = 0; s < m.n_states; ++s) j.p_state_given[c][k][s] /= pk;
      for (int a = 0; a < m.n_actions; ++a) j.p_action_given[c][k][a] /= pk;
    }
  }
  // p_concept rows hold p(k, c)/p(c) = p(k|c): divide out the context mass.
  for (int c = 0; c < m.n_contexts; ++c) {
    const double pc = m.p_context[c];
    if (pc == 0.0) continue;
    for (int k = 0; k < j.n_concepts; ++k) j.p_concept[c][k] /= pc;
  }
  return j;
}

double conditional_mi(const JointModel& j) {
  // I = E_{c,s,k,a} log pi*(a|s,c) / p(a|k,c)
  double mi = 0.0;
  for (int c = 0; c < j.n_contexts; ++c)
    for (int s = 0; s < j.n_states; ++s) {
      if (j.w[c][s] == 0.0) continue;
      for (int k = 0; k < j.n_concepts; ++k) {
        const double wk = j.w[c][s] * j.phi[s][k];
        if (wk == 0.0) continue;
        for (int a = 0; a < j.n_actions; ++a) {
          const double pa = j.pi[c][s][a];
          if (pa == 0.0) continue;
          mi += wk * pa * std::log(pa / j.p_action_given[c][k][a]);
        }
      }
    }
  return std::max(mi, 0.0);
}

double context_free_mi(const JointModel& j) {
  // marginalize contexts first: p(s), p(a|s), p(k), p(a|k)
  std::vector<double> p_s(j.n_states, 0.0);
  std::vector<Dist> p_a_given_s(j.n_states, Dist(j.n_actions, 0.0));
  Dist p_k(j.n_concepts, 0.0);
  std::vector<Dist> p_a_given_k(j.n_concepts, Dist(j.n_actions, 0.0));
  for (int c = 0; c < j.n_contexts; ++c)
    for (int s = 0; s < j.n_states; ++s) {
      const double w = j.w[c][s];
      if (w == 0.0) continue;
      p_s[s] += w;
      for (int a = 0; a < j.n_actions; ++a) p_a_given_s[s][a] += w * j.pi[c][s][a];
      for (int k = 0; k < j.n_concepts; ++k) {
        const double wk = w * j.phi[s][k];
        if (wk == 0.0) continue;
        p_k[k] += wk;
        for (int a = 0; a < j.n_actions; ++a)
          p_a_given_k[k][a] += wk * j.pi[c][s][a];
      }
    }
  for (int s = 0; s < j.n_states; ++s)
    if (p_s[s] > 0.0)
      for (double& x : p_a_given_s[s]) x /= p_s[s];
  for (int k = 0; k < j.n_concepts; ++k)
    if (p_k[k] > 0.0)
      for (double& x : p_a_given_k[k]) x /= p_k[k];
  // I(S:A|K) = E log p(a|s) / p(a|k)   (A indep. of K given S)
  double mi = 0.0;
  for (int s = 0; s < j.n_states; ++s) {
    if (p_s[s] == 0.0) continue;
    for (int k = 0; k < j.n_concepts; ++k) {
      const double w = p_s[s] * j.phi[s][k];
      if (w == 0.0) continue;
      for (int a = 0; a < j.n_actions; ++a) {
        const double pa = p_a_given_s[s][a];
        if (pa == 0.0) continue;
        mi += w * pa * std::log(pa / p_a_given_k[k][a]);
      }
    }
  }
  return std::max(mi, 0.0);
}

AbstractPolicy marginal_abstract_policy(const JointModel& j) {
  AbstractPolicy pi_phi;
  pi_phi.probs.assign(j.n_contexts,
                      std::vector<Dist>(j.n_concepts, Dist(j.n_actions, 0.0)));
  for (int c = 0; c < j.n_contexts; ++c)
    for (int k = 0; k < j.n_concepts; ++k) {
      if (j.p_concept[c][k] > 0.0) {
        pi_phi.probs[c][k] = j.p_action_given[c][k];
      } else {
        pi_phi.probs[c][k].assign(j.n_actions, 1.0 / j.n_actions);
      }
    }
  return pi_phi;
}

Policy lift_abstract_policy(const JointModel& j, const AbstractPolicy& pi_phi) {
  Policy pi;
  pi.probs.assign(j.n_contexts, std::vector<Dist>(j.n_states, Dist(j.n_actions, 0.0)));
  for (int c = 0; c < j.n_contexts; ++c)
    for (int s = 0; s < j.n_states; ++s)
      for (int k = 0; k < j.n_concepts; ++k) {
        const double pk = j.phi[s][k];
        if (pk == 0.0) continue;
        for (int a = 0; a < j.n_actions; ++a)
          pi.probs[c][s][a] += pk * pi_phi.probs[c][k][a];
      }
  return pi;
}

double lemma1_bound(const JointModel& j, const Solution& sol,
                    const AbstractPolicy& pi_phi) {
  double expected_kl = 0.0;
  for (int c = 0; c < j.n_contexts; ++c)
    for (int s = 0; s < j.n_states; ++s) {
      if (j.w[c][s] == 0.0) continue;
      for (int k = 0; k < j.n_concepts; ++k) {
        const double wk = j.w[c][s] * j.phi[s][k];
        if (wk == 0.0) continue;
        expected_kl += wk * kl_divergence(j.pi[c][s], pi_phi.probs[c][k]);
      }
    }
  return sol.f_constant * expected_kl;
}

double behavior_dissimilarity(const Solution& sol, int s, int s_prime, int context) {
  return kl_divergence(sol.soft_optimal.probs[context][s],
                       sol.soft_optimal.probs[context][s_prime]);
}

double coupling(const JointModel& j, int s, int s_prime, int context) {
  double total = 0.0;
  for (int k = 0; k < j.n_concepts; ++k) {
    const double shared = j.phi[s][k] * j.phi[s_prime][k];
    if (shared == 0.0) continue;
    const double pk = j.p_concept[context][k];
    if (pk <= 0.0)
      throw SupportError("coupling: concept " + std::to_string(k) +
                         " has zero probability in context " +
                         std::to_string(context) + " but shared support");
    total += shared / pk;
  }
  return total;
}

double theorem2_bound(const JointModel& j, const Solution& sol) {
  double bound = 0.0;
  for (int c = 0; c < j.n_contexts; ++c) {
    // occupancy within this context: w[c][s] / p(c)
    double pc = 0.0;
    for (int s = 0; s < j.n_states; ++s) pc += j.w[c][s];
    if (pc == 0.0) continue;
    for (int s = 0; s < j.n_states; ++s) {
      const double ps = j.w[c][s] / pc;
      if (ps == 0.0) continue;
      for (int s2 = 0; s2 < j.n_states; ++s2) {
        const double ps2 = j.w[c][s2] / pc;
        if (ps2 == 0.0) continue;
        double coup = 0.0;
        for (int k = 0; k < j.n_concepts; ++k) {
          const double shared = j.phi[s][k] * j.phi[s2][k];
          if (shared == 0.0) continue;
          coup += shared / j.p_concept[c][k];
        }
        if (coup == 0.0) continue;
        bound += pc * ps * ps2 * coup * behavior_dissimilarity(sol, s, s2, c);
      }
    }
  }
  return bound;
}

std::pair<double, Corollary1Witness> corollary1_bound(const TabularCMDP& test,
                                                      const Solution& test_sol,
                                                      const ClassifierRows& train_phi) {
  check_shapes(test, train_phi);
  const int n_concepts = static_cast<int>(train_phi[0].size());
  std::vector<int> assignment(test.n_states);
  for (int s = 0; s < test.n_states; ++s) {
    int arg = 0;
    for (int k = 0; k < n_concepts; ++k) {
      if (train_phi[s][k] != 0.0 && train_phi[s][k] != 1.0)
        throw std::invalid_argument("corollary1_bound: classifier must be deterministic");
      if (train_phi[s][k] == 1.0) arg = k;
    }
    assignment[s] = arg;
  }
  // p(k|c) under the test occupancy decides which concepts carry mass.
  JointModel j = build_joint(test, test_sol, train_phi);
  double best = 0.0;
  Corollary1Witness witness;
  for (int c = 0; c < test.n_contexts; ++c)
    for (int s = 0; s < test.n_states; ++s) {
      if (j.w[c][s] == 0.0) continue;
      for (int s2 = 0; s2 < test.n_states; ++s2) {
        if (j.w[c][s2] == 0.0 || assignment[s] != assignment[s2]) continue;
        if (j.p_concept[c][assignment[s]] <= 0.0) continue;
        const double d = behavior_dissimilarity(test_sol, s, s2, c);
        if (d > best) {
          best = d;
          witness = {s, s2, c};
        }
      }
    }
  return {best, witness};
}

std::pair<double, double> concept_diagnostics(const JointModel& j) {
  Dist p_c(j.n_contexts, 0.0);
  Dist p_k(j.n_concepts, 0.0);
  for (int c = 0; c < j.n_contexts; ++c)
    for (int s = 0; s < j.n_states; ++s) p_c[c] += j.w[c][s];
  double h_k_given_c = 0.0;
  for (int c = 0; c < j.n_contexts; ++c) {
    if (p_c[c] == 0.0) continue;
    h_k_given_c += p_c[c] * entropy(j.p_concept[c]);
    for (int k = 0; k < j.n_concepts; ++k)
      p_k[k] += p_c[c] * j.p_concept[c][k];
  }
  const double h_k = entropy(p_k);
  const double mi = std::max(h_k - h_k_given_c, 0.0);
  return {h_k, mi};
}

BoundReport make_bound_report(const TabularCMDP& m, const Solution& sol,
                              const ClassifierRows& phi) {
  JointModel j = build_joint(m, sol, phi);
  BoundReport rep;
  rep.f_constant = sol.f_constant;
  rep.theorem1_mi = conditional_mi(j);
  rep.theorem2_bound = theorem2_bound(j, sol);
  AbstractPolicy pi_phi = marginal_abstract_policy(j);
  rep.lemma1_bound = lemma1_bound(j, sol, pi_phi);
  const Policy lifted = lift_abstract_policy(j, pi_phi);
  const double reference = evaluate_policy(m, sol.soft_optimal);
  rep.regret = reference - evaluate_policy(m, lifted);
  rep.regret_sq_over_f =
      rep.f_constant > 0.0 ? rep.regret * rep.regret / rep.f_constant : 0.0;
  rep.margins.mi_minus_regret_sq = rep.theorem1_mi - rep.regret_sq_over_f;
  rep.margins.t2_minus_mi = rep.theorem2_bound - rep.theorem1_mi;
  rep.margins.u_minus_f_mi = rep.lemma1_bound - rep.f_constant * rep.theorem1_mi;
  return rep;
}

}  // namespace ccmdp
