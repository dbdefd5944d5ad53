#include "ccmdp/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ccmdp/errors.hpp"

namespace ccmdp {
namespace {

int argmax_lowest(const std::vector<double>& row) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(row.size()); ++i)
    if (row[i] > row[best]) best = i;
  return best;
}

/// Row-stochastic state transition matrix under a policy, one context.
Eigen::MatrixXd policy_matrix(const TabularCMDP& m, int context, const Policy& policy) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m.n_states, m.n_states);
  for (int s = 0; s < m.n_states; ++s)
    for (int a = 0; a < m.n_actions; ++a) {
      const double pa = policy.probs[context][s][a];
      if (pa == 0.0) continue;
      for (int s2 = 0; s2 < m.n_states; ++s2)
        P(s, s2) += pa * m.transitions[context][s][a][s2];
    }
  return P;
}

/// V_pi for one context by dense LU of (I - gamma P_pi) V = r_pi.
Eigen::VectorXd policy_values(const TabularCMDP& m, int context, const Policy& policy) {
  Eigen::VectorXd r_pi = Eigen::VectorXd::Zero(m.n_states);
  for (int s = 0; s < m.n_states; ++s)
    for (int a = 0; a < m.n_actions; ++a)
      r_pi(s) += policy.probs[context][s][a] * m.rewards[context][s][a];
  if (m.gamma == 0.0) return r_pi;
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m.n_states, m.n_states) -
                      m.gamma * policy_matrix(m, context, policy);
  return A.partialPivLu().solve(r_pi);
}

double optimal_return(const TabularCMDP& m, double tol) {
  double total = 0.0;
  for (int c = 0; c < m.n_contexts; ++c) {
    auto [q, v] = value_iteration(m, c, tol);
    double rc = 0.0;
    for (int s = 0; s < m.n_states; ++s) rc += m.p_initial[c][s] * v[s];
    total += m.p_context[c] * rc;
  }
  return total;
}

}  // namespace

std::pair<std::vector<std::vector<double>>, std::vector<double>> value_iteration(
    const TabularCMDP& m, int context, double tol, int max_iters, int* iters_out) {
  if (context < 0 || context >= m.n_contexts)
    throw std::invalid_argument("value_iteration: context out of range");
  if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be > 0");
  std::vector<double> v(m.n_states, 0.0), v_new(m.n_states);
  int iters = 0;
  for (;; ++iters) {
    if (iters >= max_iters)
      throw ConvergenceError("value_iteration: no convergence in " +
                             std::to_string(max_iters) + " sweeps (tol " +
                             std::to_string(tol) + ")");
    double delta = 0.0;
    for (int s = 0; s < m.n_states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < m.n_actions; ++a) {
        double q = m.rewards[context][s][a];
        if (m.gamma != 0.0) {
          double ev = 0.0;
          const Dist& row = m.transitions[context][s][a];
          for (int s2 = 0; s2 < m.n_states; ++s2) ev += row[s2] * v[s2];
          q += m.gamma * ev;
        }
        best = std::max(best, q);
      }
      v_new[s] = best;
      delta = std::max(delta, std::abs(best - v[s]));
    }
    v.swap(v_new);
    if (delta < tol) break;
  }
  if (iters_out) *iters_out = iters + 1;
  // One more backup from the converged v: residual of the result < gamma*tol.
  std::vector<std::vector<double>> q(m.n_states, std::vector<double>(m.n_actions));
  std::vector<double> v_out(m.n_states);
  for (int s = 0; s < m.n_states; ++s) {
    for (int a = 0; a < m.n_actions; ++a) {
      double qa = m.rewards[context][s][a];
      if (m.gamma != 0.0) {
        double ev = 0.0;
        const Dist& row = m.transitions[context][s][a];
        for (int s2 = 0; s2 < m.n_states; ++s2) ev += row[s2] * v[s2];
        qa += m.gamma * ev;
      }
      q[s][a] = qa;
    }
    v_out[s] = q[s][argmax_lowest(q[s])];
  }
  return {std::move(q), std::move(v_out)};
}

Policy soften_policy(const std::vector<std::vector<std::vector<double>>>& q_values,
                     Softening mode, double param) {
  if (mode == Softening::boltzmann && !(param > 0.0))
    throw std::invalid_argument("soften_policy: tau must be > 0");
  if (mode == Softening::epsilon_greedy && !(param > 0.0 && param <= 1.0))
    throw std::invalid_argument("soften_policy: eps must be in (0,1]");
  Policy pi;
  pi.probs.resize(q_values.size());
  for (std::size_t c = 0; c < q_values.size(); ++c) {
    pi.probs[c].resize(q_values[c].size());
    for (std::size_t s = 0; s < q_values[c].size(); ++s) {
      const auto& q = q_values[c][s];
      const int n = static_cast<int>(q.size());
      Dist row(n);
      if (mode == Softening::boltzmann) {
        const double q_max = *std::max_element(q.begin(), q.end());
        double z = 0.0;
        for (int a = 0; a < n; ++a) {
          // floor keeps full support if a huge gap underflows exp
          row[a] = std::max(std::exp((q[a] - q_max) / param),
                            std::numeric_limits<double>::min());
          z += row[a];
        }
        for (int a = 0; a < n; ++a) row[a] /= z;
      } else {
        const int star = argmax_lowest(q);
        for (int a = 0; a < n; ++a) row[a] = param / n;
        row[star] += 1.0 - param;
      }
      pi.probs[c][s] = std::move(row);
    }
  }
  return pi;
}

Policy greedy_policy(const std::vector<std::vector<std::vector<double>>>& q_values) {
  Policy pi;
  pi.probs.resize(q_values.size());
  for (std::size_t c = 0; c < q_values.size(); ++c) {
    pi.probs[c].resize(q_values[c].size());
    for (std::size_t s = 0; s < q_values[c].size(); ++s) {
      Dist row(q_values[c][s].size(), 0.0);
      row[argmax_lowest(q_values[c][s])] = 1.0;
      pi.probs[c][s] = std::move(row);
    }
  }
  return pi;
}

Dist discounted_occupancy(const TabularCMDP& m, int context, const Policy& policy) {
  if (context < 0 || context >= m.n_contexts)
    throw std::invalid_argument("discounted_occupancy: context out of range");
  Eigen::VectorXd p0(m.n_states);
  for (int s = 0; s < m.n_states; ++s) p0(s) = m.p_initial[context][s];
  Eigen::VectorXd x;
  if (m.gamma == 0.0) {
    x = p0;
  } else {
    // x = (1-gamma) p0 + gamma P^T x
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m.n_states, m.n_states) -
                        m.gamma * policy_matrix(m, context, policy).transpose();
    x = A.partialPivLu().solve((1.0 - m.gamma) * p0);
  }
  Dist occ(m.n_states);
  for (int s = 0; s < m.n_states; ++s) occ[s] = std::max(x(s), 0.0);
  return occ;
}

double evaluate_policy(const TabularCMDP& m, const Policy& policy) {
  double total = 0.0;
  for (int c = 0; c < m.n_contexts; ++c) {
    Eigen::VectorXd v = policy_values(m, c, policy);
    double rc = 0.0;
    for (int s = 0; s < m.n_states; ++s) rc += m.p_initial[c][s] * v(s);
    total += m.p_context[c] * rc;
  }
  return total;
}

double regret(const TabularCMDP& m, const Policy& policy) {
  return optimal_return(m, 1e-12) - evaluate_policy(m, policy);
}

Solution solve(const TabularCMDP& m, const SolveConfig& config) {
  Solution sol;
  sol.q_values.resize(m.n_contexts);
  sol.v_values.resize(m.n_contexts);
  for (int c = 0; c < m.n_contexts; ++c) {
    int iters = 0;
    auto [q, v] = value_iteration(m, c, config.tol, config.max_iters, &iters);
    sol.q_values[c] = std::move(q);
    sol.v_values[c] = std::move(v);
    sol.iterations = std::max(sol.iterations, iters);
  }
  const double r_sup = m.reward_sup();
  sol.tau = r_sup > 0.0 ? config.tau_frac * r_sup : 1.0;
  sol.soft_optimal = soften_policy(sol.q_values, Softening::boltzmann, sol.tau);
  const Policy occ_policy =
      config.occupancy_under_soft ? sol.soft_optimal : greedy_policy(sol.q_values);
  sol.occupancy.resize(m.n_contexts);
  for (int c = 0; c < m.n_contexts; ++c)
    sol.occupancy[c] = discounted_occupancy(m, c, occ_policy);
  const double one_minus = 1.0 - m.gamma;
  sol.f_constant = 2.0 * r_sup / (one_minus * one_minus);
  sol.tol = config.tol;
  return sol;
}

}  // namespace ccmdp
