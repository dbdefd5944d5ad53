#include <cmath>
#include <vector>

#include "ccmdp/cmdp.hpp"
#include "ccmdp/errors.hpp"
#include "ccmdp/solver.hpp"
#include "doctest.h"

using namespace ccmdp;

namespace {

TabularCMDP single_state(double gamma, double reward) {
  TabularCMDP m;
  m.n_states = 1;
  m.n_actions = 1;
  m.n_contexts = 1;
  m.gamma = gamma;
  m.transitions = {{{{1.0}}}};
  m.rewards = {{{reward}}};
  m.p_context = {1.0};
  m.p_initial = {{1.0}};
  return m;
}

// s0 -> s1, s1 absorbing; r(s0)=0, r(s1)=1
TabularCMDP two_step_chain(double gamma) {
  TabularCMDP m;
  m.n_states = 2;
  m.n_actions = 1;
  m.n_contexts = 1;
  m.gamma = gamma;
  m.transitions = {{{{0.0, 1.0}}, {{0.0, 1.0}}}};
  m.rewards = {{{0.0}, {1.0}}};
  m.p_context = {1.0};
  m.p_initial = {{1.0, 0.0}};
  return m;
}

double total_variation(const Dist& p, const Dist& q) {
  double tv = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return tv / 2;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("value iteration: closed forms on one- and two-state chains") {
  auto [q1, v1] = value_iteration(single_state(0.9, 1.0), 0, 1e-12);
  CHECK(v1[0] == doctest::Approx(10.0).epsilon(1e-10));  // 1/(1-0.9)
  auto [q2, v2] = value_iteration(two_step_chain(0.5), 0, 1e-12);
  CHECK(v2[1] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(v2[0] == doctest::Approx(1.0).epsilon(1e-10));  // 0 + 0.5 * V(s1)
  CHECK(q2[0][0] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("value iteration: gamma 0 reduces to the immediate reward") {
  TabularCMDP m = build_random_cmdp(5, 3, 1, 0.0, 4);
  auto [q, v] = value_iteration(m, 0, 1e-12);
  for (int s = 0; s < m.n_states; ++s) {
    double best = m.rewards[0][s][0];
    for (int a = 1; a < m.n_actions; ++a) best = std::max(best, m.rewards[0][s][a]);
    CHECK(v[s] == doctest::Approx(best).epsilon(1e-12));
    for (int a = 0; a < m.n_actions; ++a)
      CHECK(q[s][a] == doctest::Approx(m.rewards[0][s][a]).epsilon(1e-12));
  }
}

TEST_CASE("value iteration: Bellman residual below tol on random instances") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TabularCMDP m = build_random_cmdp(6, 3, 1, 0.9, seed);
    const double tol = 1e-10;
    auto [q, v] = value_iteration(m, 0, tol);
    for (int s = 0; s < m.n_states; ++s) {
      double best = q[s][0];
      for (int a = 1; a < m.n_actions; ++a) best = std::max(best, q[s][a]);
      CHECK(v[s] == doctest::Approx(best).epsilon(1e-13));  // v = max_a q
      for (int a = 0; a < m.n_actions; ++a) {
        double backup = m.rewards[0][s][a];
        for (int t = 0; t < m.n_states; ++t)
          backup += m.gamma * m.transitions[0][s][a][t] * v[t];
        CHECK(std::abs(q[s][a] - backup) < tol);
      }
    }
  }
}

TEST_CASE("value iteration: impossible iteration cap raises convergence error") {
  TabularCMDP m = build_random_cmdp(6, 3, 1, 0.99, 1);
  CHECK_THROWS_AS(value_iteration(m, 0, 1e-12, 2), ConvergenceError);
  SolveConfig cfg;
  cfg.max_iters = 2;
  CHECK_THROWS_AS(solve(m, cfg), ConvergenceError);
}

TEST_CASE("soften_policy: Boltzmann rows match the logistic closed form") {
  std::vector<std::vector<std::vector<double>>> q = {{{1.0, 1.0}, {1.0, 0.0}}};
  Policy tie = soften_policy(q, Softening::boltzmann, 1.0);
  CHECK(tie.probs[0][0][0] == 0.5);
  CHECK(tie.probs[0][0][1] == 0.5);
  const double sigma = 1.0 / (1.0 + std::exp(-1.0));
  CHECK(tie.probs[0][1][0] == doctest::Approx(sigma).epsilon(1e-12));
  CHECK(tie.probs[0][1][1] == doctest::Approx(1.0 - sigma).epsilon(1e-12));
}

TEST_CASE("soften_policy: epsilon-greedy splits epsilon uniformly") {
  std::vector<std::vector<std::vector<double>>> q = {{{1.0, 0.0}}};
  Policy pi = soften_policy(q, Softening::epsilon_greedy, 0.2);
  CHECK(pi.probs[0][0][0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(pi.probs[0][0][1] == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("soften_policy: temperature to zero approaches the greedy policy") {
  TabularCMDP m = build_random_cmdp(6, 3, 2, 0.9, 7);
  Solution sol = solve(m, {});
  Policy greedy = greedy_policy(sol.q_values);
  double prev = 1e100;
  for (double tau : {1.0, 0.1, 0.01}) {
    Policy soft = soften_policy(sol.q_values, Softening::boltzmann, tau);
    double dist = 0.0;
    for (int c = 0; c < m.n_contexts; ++c)
      for (int s = 0; s < m.n_states; ++s)
        dist = std::max(dist, total_variation(soft.probs[c][s], greedy.probs[c][s]));
    CHECK(dist < prev);
    prev = dist;
  }
  CHECK(prev < 0.03);
}

TEST_CASE("greedy_policy breaks ties toward the lowest action index") {
  std::vector<std::vector<std::vector<double>>> q = {{{2.0, 2.0, 1.0}}};
  Policy pi = greedy_policy(q);
  CHECK(pi.probs[0][0][0] == 1.0);
  CHECK(pi.probs[0][0][1] == 0.0);
}

TEST_CASE("discounted occupancy: closed forms") {
  // gamma = 0: the occupancy is the initial distribution
  TabularCMDP m = build_random_cmdp(4, 2, 1, 0.0, 9);
  Policy pi = uniform_policy(m);
  Dist occ0 = discounted_occupancy(m, 0, pi);
  for (int s = 0; s < 4; ++s)
    CHECK(occ0[s] == doctest::Approx(m.p_initial[0][s]).epsilon(1e-12));

  // absorbing single state
  Dist occ1 = discounted_occupancy(single_state(0.9, 0.0), 0, uniform_policy(single_state(0.9, 0.0)));
  CHECK(occ1[0] == doctest::Approx(1.0).epsilon(1e-12));

  // deterministic 2-cycle started in s0 at gamma 1/2:
  // (1-g)(1 + g^2 + ...) = 1/(1+g) = 2/3 on s0
  TabularCMDP cyc;
  cyc.n_states = 2;
  cyc.n_actions = 1;
  cyc.n_contexts = 1;
  cyc.gamma = 0.5;
  cyc.transitions = {{{{0.0, 1.0}}, {{1.0, 0.0}}}};
  cyc.rewards = {{{0.0}, {0.0}}};
  cyc.p_context = {1.0};
  cyc.p_initial = {{1.0, 0.0}};
  Dist occ2 = discounted_occupancy(cyc, 0, uniform_policy(cyc));
  CHECK(occ2[0] == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(occ2[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("discounted occupancy: agrees with the truncated power series") {
  TabularCMDP m = build_random_cmdp(6, 3, 1, 0.9, 21);
  Policy pi = uniform_policy(m);
  Dist occ = discounted_occupancy(m, 0, pi);
  double mass = 0.0;
  for (double p : occ) mass += p;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));

  // roll the chain forward T steps by hand
  const int T = 50;
  Dist dist = m.p_initial[0];
  Dist series(6, 0.0);
  double g = 1.0;
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < 6; ++s) series[s] += (1.0 - m.gamma) * g * dist[s];
    Dist next(6, 0.0);
    for (int s = 0; s < 6; ++s)
      for (int a = 0; a < 3; ++a)
        for (int s2 = 0; s2 < 6; ++s2)
          next[s2] += dist[s] * pi.probs[0][s][a] * m.transitions[0][s][a][s2];
    dist = next;
    g *= m.gamma;
  }
  const double tail = std::pow(m.gamma, T) / (1.0 - m.gamma);
  for (int s = 0; s < 6; ++s) CHECK(std::abs(occ[s] - series[s]) < tail + 1e-12);
}

TEST_CASE("policy evaluation and regret on the rental-car instance") {
  TabularCMDP m = build_rental_car();  // action gap 0.5 in every (c,s)
  Policy uniform = uniform_policy(m);
  CHECK(evaluate_policy(m, uniform) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(regret(m, uniform) == doctest::Approx(0.25).epsilon(1e-12));

  Solution sol = solve(m, {});
  CHECK(regret(m, greedy_policy(sol.q_values)) == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(evaluate_policy(m, greedy_policy(sol.q_values)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("regret is nonnegative and bounded by 2||r||/(1-gamma)") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    TabularCMDP m = build_random_cmdp(5, 3, 2, 0.9, 100 + seed);
    Policy pi = uniform_policy(m);
    double r = regret(m, pi);
    CHECK(r >= -1e-10);
    CHECK(r <= 2.0 * m.reward_sup() / (1.0 - m.gamma) + 1e-9);
  }
}

TEST_CASE("solve: bundle is internally consistent") {
  TabularCMDP m = build_rental_car();
  Solution sol = solve(m, {});
  CHECK(sol.f_constant == doctest::Approx(2.0).epsilon(1e-12));  // 2*1/(1-0)^2
  CHECK(sol.tau == doctest::Approx(0.05).epsilon(1e-12));        // tau_frac * ||r||
  CHECK(sol.tol <= 1e-12);
  for (int c = 0; c < m.n_contexts; ++c) {
    double mass = 0.0;
    for (double p : sol.occupancy[c]) mass += p;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
    for (int s = 0; s < m.n_states; ++s)
      for (int a = 0; a < m.n_actions; ++a) CHECK(sol.soft_optimal.probs[c][s][a] > 0.0);
  }
  // soft_optimal is the Boltzmann softening of the solved q-values
  Policy redo = soften_policy(sol.q_values, Softening::boltzmann, sol.tau);
  for (int c = 0; c < m.n_contexts; ++c)
    for (int s = 0; s < m.n_states; ++s)
      for (int a = 0; a < m.n_actions; ++a)
        CHECK(sol.soft_optimal.probs[c][s][a] ==
              doctest::Approx(redo.probs[c][s][a]).epsilon(1e-15));

  CHECK(solve(single_state(0.9, 1.0), {}).f_constant == doctest::Approx(200.0).epsilon(1e-10));
}

TEST_CASE("solve: occupancy_under_soft=false uses the greedy policy") {
  TabularCMDP m = build_random_cmdp(5, 2, 1, 0.9, 3);
  SolveConfig cfg;
  cfg.occupancy_under_soft = false;
  Solution sol = solve(m, cfg);
  Dist greedy_occ = discounted_occupancy(m, 0, greedy_policy(sol.q_values));
  for (int s = 0; s < 5; ++s)
    CHECK(sol.occupancy[0][s] == doctest::Approx(greedy_occ[s]).epsilon(1e-12));
}

}  // TEST_SUITE
