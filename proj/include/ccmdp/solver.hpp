#pragma once

#include <utility>
#include <vector>

#include "ccmdp/cmdp.hpp"

namespace ccmdp {

/// Exact per-context solution: optimal values, the softened optimal policy
/// used by every information quantity, discounted occupancies under it, and
/// the regret-bound constant 2*||r||_inf/(1-gamma)^2.
struct Solution {
  std::vector<std::vector<std::vector<double>>> q_values;  // [c][s][a]
  std::vector<std::vector<double>> v_values;               // [c][s]
  Policy soft_optimal;
  std::vector<Dist> occupancy;  // [c] -> distribution over states
  double f_constant = 0.0;
  double tau = 0.0;   // Boltzmann temperature used for soft_optimal
  double tol = 0.0;   // Bellman residual reached
  int iterations = 0; // value-iteration sweeps used (max over contexts)
};

struct SolveConfig {
  double tol = 1e-12;
  int max_iters = 1000000;
  /// Boltzmann temperature as a fraction of ||r||_inf (1.0 if rewards are 0).
  double tau_frac = 0.05;
  /// Occupancy measured under the softened policy (the default keeps every
  /// information quantity internally consistent); false uses the greedy one.
  bool occupancy_under_soft = true;
};

/// (q, v) for one context; sup-norm Bellman residual < tol on return.
std::pair<std::vector<std::vector<double>>, std::vector<double>> value_iteration(
    const TabularCMDP& m, int context, double tol, int max_iters = 1000000,
    int* iters_out = nullptr);

enum class Softening { boltzmann, epsilon_greedy };

/// Full-support policy from q-values: Boltzmann(tau) or epsilon-greedy(eps).
/// The unique argmax per row keeps the largest probability.
Policy soften_policy(const std::vector<std::vector<std::vector<double>>>& q_values,
                     Softening mode, double param);

/// Greedy policy, ties to the lowest action index.
Policy greedy_policy(const std::vector<std::vector<std::vector<double>>>& q_values);

/// p_S(s|c) = (1-gamma) sum_t gamma^t Pr(s_t = s | policy, c), by dense LU
/// solve of x = (1-gamma) p0 + gamma P^T x.
Dist discounted_occupancy(const TabularCMDP& m, int context, const Policy& policy);

/// Exact R_M(pi): per-context policy evaluation, expectation over p_context
/// and p_initial.
double evaluate_policy(const TabularCMDP& m, const Policy& policy);

/// R_M(pi*) - R_M(pi) against the greedy optimum.
double regret(const TabularCMDP& m, const Policy& policy);

Solution solve(const TabularCMDP& m, const SolveConfig& config = {});

}  // namespace ccmdp
