#pragma once

#include <tuple>
#include <vector>

#include "ccmdp/cmdp.hpp"
#include "ccmdp/solver.hpp"

namespace ccmdp {

/// Soft classifier rows: phi[s] = distribution over concepts.
using ClassifierRows = std::vector<Dist>;

/// probs[c][k] = distribution over actions; the abstract policy pi_phi.
struct AbstractPolicy {
  std::vector<std::vector<Dist>> probs;
};

/// Exact joint p(c,s,k,a) = p_C(c) * occupancy(s|c) * phi(k|s) * pi*(a|s,c)
/// with the marginals every information quantity needs.
struct JointModel {
  int n_contexts = 0, n_states = 0, n_concepts = 0, n_actions = 0;
  std::vector<std::vector<std::vector<Dist>>> probs;  // [c][s][k][a]
  std::vector<std::vector<double>> w;                 // [c][s] = p_C * occupancy
  ClassifierRows phi;                                 // [s][k]
  std::vector<std::vector<Dist>> pi;                  // [c][s][a], the softened pi*
  std::vector<Dist> p_concept;                        // [c][k]
  std::vector<std::vector<Dist>> p_state_given;       // [c][k][s]
  std::vector<std::vector<Dist>> p_action_given;      // [c][k][a]
};

JointModel build_joint(const TabularCMDP& m, const Solution& sol,
                       const ClassifierRows& phi);

/// Sum p_i log(p_i/q_i) in nats; 0 log(0/q) = 0; p>0 with q=0 throws
/// SupportError (a deterministic row leaked past softening).
double kl_divergence(const Dist& p, const Dist& q);

double entropy(const Dist& p);

/// I(S:A|S_phi,C) in nats.
double conditional_mi(const JointModel& joint);

/// I(S:A|S_phi) in nats: contexts marginalized out before conditioning.
double context_free_mi(const JointModel& joint);

/// pi_phi*(a|k,c) = sum_s pi*(a|s,c) p(s|k,c); uniform rows where p(k|c)=0
/// (the maximum-entropy completion of an undefined marginal).
AbstractPolicy marginal_abstract_policy(const JointModel& joint);

/// Raw-state policy sum_k phi(k|s) pi_phi(a|k,c), the executable form of an
/// abstract policy.
Policy lift_abstract_policy(const JointModel& joint, const AbstractPolicy& pi_phi);

/// U = F_M * E_{C,S,S_phi}[KL(pi*(.|s,c) || pi_phi(.|k,c))], the Lemma-1
/// regret-squared bound for following pi_phi.
double lemma1_bound(const JointModel& joint, const Solution& sol,
                    const AbstractPolicy& pi_phi);

/// D(s,s'|c): KL between softened optimal action rows of two states.
double behavior_dissimilarity(const Solution& sol, int s, int s_prime, int context);

/// J_phi(s,s'|c) = sum_k phi(k|s) phi(k|s') / p(k|c); SupportError on a
/// zero-probability concept in the shared support.
double coupling(const JointModel& joint, int s, int s_prime, int context);

/// E_{c; s,s' iid ~ p_S(.|c)}[J_phi(s,s'|c) * D(s,s'|c)], the Theorem-2
/// upper bound on conditional_mi.
double theorem2_bound(const JointModel& joint, const Solution& sol);

struct Corollary1Witness {
  int s = -1, s_prime = -1, context = -1;
};

/// max over coupled pairs (J > 0 under the train classifier) of the test
/// behavior dissimilarity; train classifier must be deterministic rows.
std::pair<double, Corollary1Witness> corollary1_bound(const TabularCMDP& test,
                                                      const Solution& test_sol,
                                                      const ClassifierRows& train_phi);

/// (H(S_phi), I(S_phi:C)) in nats.
std::pair<double, double> concept_diagnostics(const JointModel& joint);

/// The full inequality chain evaluated at the marginal abstract policy. The
/// regret here is measured against the softened reference policy's return
/// (the policy the bounds are stated for), not the greedy optimum: with an
/// identity classifier the lifted marginal IS the reference policy and the
/// chain is exactly tight at zero.
struct BoundReport {
  double regret = 0.0;           // R(reference) - R(lifted marginal)
  double regret_sq_over_f = 0.0; // regret^2 / F_M (0 when F_M = 0)
  double lemma1_bound = 0.0;     // U at the marginal abstract policy
  double theorem1_mi = 0.0;      // I(S:A|S_phi,C)
  double theorem2_bound = 0.0;
  double f_constant = 0.0;
  struct Margins {
    double mi_minus_regret_sq = 0.0;  // theorem1_mi - regret_sq_over_f
    double t2_minus_mi = 0.0;         // theorem2_bound - theorem1_mi
    double u_minus_f_mi = 0.0;        // lemma1_bound - f_constant*theorem1_mi
  } margins;
};

BoundReport make_bound_report(const TabularCMDP& m, const Solution& sol,
                              const ClassifierRows& phi);

}  // namespace ccmdp
