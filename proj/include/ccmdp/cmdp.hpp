#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ccmdp {

using Dist = std::vector<double>;

struct Labels {
  std::vector<std::string> states;
  std::vector<std::string> actions;
  std::vector<std::string> contexts;
};

/// Finite contextual MDP (S, A, C, r, T, p_C, p_S0, gamma), dense tables.
/// Immutable after construction by convention; share freely across threads.
struct TabularCMDP {
  int n_states = 0;
  int n_actions = 0;
  int n_contexts = 0;
  double gamma = 0.0;
  /// transitions[c][s][a] = distribution over next states.
  std::vector<std::vector<std::vector<Dist>>> transitions;
  /// rewards[c][s][a]; no next-state dependence.
  std::vector<std::vector<std::vector<double>>> rewards;
  Dist p_context;
  /// p_initial[c] = distribution over start states.
  std::vector<Dist> p_initial;
  Labels labels;

  double reward_sup() const;
};

/// probs[c][s] = distribution over actions.
struct Policy {
  std::vector<std::vector<Dist>> probs;
};

struct Step {
  int state;
  int action;
  double reward;
  int next_state;
};

struct Trajectory {
  int context = 0;
  std::vector<Step> steps;
  std::uint64_t seed = 0;
};

struct Violation {
  std::string where;   // table and index, e.g. "transitions[c=0][s=1][a=2]"
  double magnitude;    // size of the breach
  std::string message;
};

/// Empty iff every TabularCMDP invariant holds; never throws.
std::vector<Violation> validate(const TabularCMDP& m);

/// Throws std::invalid_argument listing all violations.
void require_valid(const TabularCMDP& m);

std::string violation_summary(const std::vector<Violation>& violations);

/// Smallest T with gamma^T < tol, capped. Fixed-horizon episodes keep
/// runtimes deterministic; the tail mass past T is below tol.
int default_horizon(double gamma, double tol = 1e-6, int cap = 10000);

Policy uniform_policy(const TabularCMDP& m);

/// Rolls p_initial, policy, transitions for exactly `horizon` steps.
/// Identical (inputs, seed) give a bit-identical trajectory.
Trajectory sample_episode(const TabularCMDP& m, const Policy& policy, int context,
                          std::uint64_t seed, int horizon);

/// The two-city rental-car example: 4 cars (2 electric, 2 combustion),
/// 2 routes, gamma = 0. City c1 pays the short-route reward for route a1
/// regardless of car; city c2 pays it for a2 on electric cars and a1 on
/// combustion cars. One-step episodic choice.
TabularCMDP build_rental_car(double reward_long_route = 0.5,
                             double reward_short_route = 1.0);

/// Random dense instance: transition rows flat-Dirichlet, rewards U[-1,1],
/// p_context and p_initial rows flat-Dirichlet. Deterministic in seed.
TabularCMDP build_random_cmdp(int n_states, int n_actions, int n_contexts,
                              double gamma, std::uint64_t seed);

/// Sub-CMDP over a context subset; p_context renormalized over `keep`.
TabularCMDP restrict_contexts(const TabularCMDP& m, const std::vector<int>& keep);

}  // namespace ccmdp
