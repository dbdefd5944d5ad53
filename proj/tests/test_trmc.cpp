#include <cmath>
#include <stdexcept>
#include <vector>

#include "ccmdp/classifier.hpp"
#include "ccmdp/cmdp.hpp"
#include "ccmdp/errors.hpp"
#include "ccmdp/info.hpp"
#include "ccmdp/solver.hpp"
#include "ccmdp/trmc.hpp"
#include "doctest.h"

using namespace ccmdp;

namespace {

TabularCMDP bandit() {
  TabularCMDP m;
  m.n_states = 1;
  m.n_actions = 2;
  m.n_contexts = 1;
  m.gamma = 0.0;
  m.transitions = {{{{1.0}, {1.0}}}};
  m.rewards = {{{1.0, 0.0}}};
  m.p_context = {1.0};
  m.p_initial = {{1.0}};
  return m;
}

double row_entropy(const Dist& q, double alpha) {
  double mx = q[0];
  for (double v : q) mx = std::max(mx, v);
  double z = 0.0;
  for (double v : q) z += std::exp((v - mx) / alpha);
  double h = 0.0;
  for (double v : q) {
    double p = std::exp((v - mx) / alpha) / z;
    if (p > 0) h -= p * std::log(p);
  }
  return h;
}

}  // namespace

TEST_SUITE("trmc") {

TEST_CASE("update_q_every_visit: running means of every-visit returns") {
  TRMCState st;
  st.q_table = {{{0.0}}};
  st.visit_counts = {{{0}}};
  update_q_every_visit(st, 0, {{0, 0, 1.0}}, 0.5);
  CHECK(st.q_table[0][0][0] == 1.0);
  CHECK(st.visit_counts[0][0][0] == 1);
  update_q_every_visit(st, 0, {{0, 0, 0.0}}, 0.5);
  CHECK(st.q_table[0][0][0] == 0.5);
  CHECK(st.visit_counts[0][0][0] == 2);

  // both visits of the same pair contribute their tail returns
  TRMCState st2;
  st2.q_table = {{{0.0}}};
  st2.visit_counts = {{{0}}};
  update_q_every_visit(st2, 0, {{0, 0, 0.0}, {0, 0, 1.0}}, 0.5);
  CHECK(st2.q_table[0][0][0] == doctest::Approx(0.75).epsilon(1e-15));  // (0.5 + 1)/2
  CHECK(st2.visit_counts[0][0][0] == 2);

  // distinct (concept, action) rows are updated independently
  TRMCState st3;
  st3.q_table = {{{0.0, 0.0}, {0.0, 0.0}}};
  st3.visit_counts = {{{0, 0}, {0, 0}}};
  update_q_every_visit(st3, 0, {{0, 0, 1.0}, {1, 1, 0.0}}, 0.5);
  CHECK(st3.q_table[0][0][0] == doctest::Approx(1.0).epsilon(1e-15));  // 1 + 0.5*0
  CHECK(st3.q_table[0][1][1] == 0.0);
  CHECK(st3.visit_counts[0][0][0] == 1);
  CHECK(st3.visit_counts[0][1][1] == 1);
  CHECK(st3.visit_counts[0][0][1] == 0);
}

TEST_CASE("temperature_search: hits attainable targets, reports the bound otherwise") {
  // softmax((1,0)/alpha) at alpha=1 has entropy H(sigma(1))
  const double p = 1.0 / (1.0 + std::exp(-1.0));
  const double target = -p * std::log(p) - (1 - p) * std::log(1 - p);
  auto [alpha, exact] = temperature_search({1.0, 0.0}, target, 1e-4, 1e4);
  CHECK(exact);
  CHECK(std::abs(alpha - 1.0) < 1e-4);
  CHECK(std::abs(row_entropy({1.0, 0.0}, alpha) - target) < 1e-6);

  // a flat row is uniform at every temperature; the target is unattainable
  auto [flat_alpha, flat_exact] = temperature_search({0.5, 0.5}, 0.3, 1e-4, 1e4);
  CHECK(!flat_exact);
  CHECK(flat_alpha == 1e4);  // nearest bound

  // entropy 0 is reached at the cold bound for a spread row
  auto [cold_alpha, cold_exact] = temperature_search({1.0, 0.0}, 0.0, 1e-4, 1e4);
  CHECK(cold_alpha == 1e-4);
  CHECK(cold_exact);

  CHECK_THROWS_AS(temperature_search({1.0, 0.0}, 10.0, 1e-4, 1e4), std::invalid_argument);
}

TEST_CASE("trust_region_project: exact KL budget on the geometric path") {
  Dist p = trust_region_project({0.5, 0.5}, {0.9, 0.1}, 0.05);
  CHECK(std::abs(kl_divergence(p, {0.5, 0.5}) - 0.05) < 1e-6);
  CHECK(p[0] == doctest::Approx(0.65678159532403335).epsilon(1e-9));
  CHECK(p[0] > 0.5);
  CHECK(p[0] < 0.9);

  // a target already inside the region is returned as-is
  Dist q = trust_region_project({0.5, 0.5}, {0.55, 0.45}, 0.05);
  CHECK(q[0] == doctest::Approx(0.55).epsilon(1e-12));

  // zero radius pins the current policy
  Dist r = trust_region_project({0.7, 0.3}, {0.2, 0.8}, 0.0);
  CHECK(r[0] == doctest::Approx(0.7).epsilon(1e-12));

  CHECK_THROWS_AS(trust_region_project({0.5, 0.5}, {1.0, 0.0}, 0.05), SupportError);
}

TEST_CASE("run_trmc: two-armed bandit converges to the good arm") {
  TabularCMDP b = bandit();
  ConceptClassifier k1 = ConceptClassifier::constant(1);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    TRMCConfig cfg;
    cfg.episode_budget = 200;
    cfg.seed = seed;
    auto [st, curve] = run_trmc(b, k1, cfg);
    CHECK(st.policy[0][0][0] == doctest::Approx(0.98226773053157934).epsilon(1e-12));
    CHECK(st.policy[0][0][0] >= 0.9);
    CHECK(curve.returns.size() == 200);
    CHECK(st.max_update_kl <= cfg.epsilon_mc + 1e-6);
    CHECK(st.max_abs_q <= 1.0 + 1e-6);  // ||r||/(1-gamma) = 1
  }
}

TEST_CASE("run_trmc: zero budget returns the uniform init and an empty curve") {
  TRMCConfig cfg;
  cfg.episode_budget = 0;
  auto [st, curve] = run_trmc(bandit(), ConceptClassifier::constant(1), cfg);
  CHECK(curve.returns.empty());
  CHECK(st.policy[0][0][0] == 0.5);
  CHECK(st.policy[0][0][1] == 0.5);
  CHECK(st.entropy_target == doctest::Approx(0.95 * std::log(2.0)).epsilon(1e-12));
  CHECK(st.max_update_kl == 0.0);
}

TEST_CASE("run_trmc: learns the rental-car task through the true concepts") {
  TabularCMDP m = build_rental_car();
  Solution sol = solve(m, {});
  ConceptClassifier sep = ConceptClassifier::from_assignment({0, 0, 1, 1}, 2);
  TRMCConfig cfg;
  cfg.seed = 3;
  auto [st, curve] = run_trmc(m, sep, cfg);

  // the learned abstract policy, executed through the classifier, is near-optimal
  JointModel j = build_joint(m, sol, sep.hard_rows());
  AbstractPolicy ap;
  ap.probs = st.policy;
  double lifted_return = evaluate_policy(m, lift_abstract_policy(j, ap));
  CHECK(lifted_return == doctest::Approx(0.99934528593765859).epsilon(1e-12));
  CHECK(lifted_return >= 0.99);

  // invariants: trust region respected, Q bounded by ||r||/(1-gamma),
  // policy rows remain full-support distributions
  CHECK(st.max_update_kl <= cfg.epsilon_mc + 1e-6);
  CHECK(st.max_update_kl > 0.0);
  CHECK(st.max_abs_q <= 1.0 + 1e-6);
  CHECK(st.entropy_target == doctest::Approx(cfg.entropy_floor).epsilon(1e-12));
  for (int c = 0; c < 2; ++c)
    for (int k = 0; k < 2; ++k) {
      double mass = 0.0;
      for (double v : st.policy[c][k]) {
        CHECK(v > 0.0);
        mass += v;
      }
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    }

  // curve bookkeeping
  CHECK(curve.returns.size() == 1000);
  CHECK(curve.seed == 3);
  for (int c : curve.contexts) {
    CHECK(c >= 0);
    CHECK(c < 2);
  }
  for (int s : curve.steps) CHECK(s == 1);  // gamma 0: single-step episodes

  // byte determinism
  auto [st2, curve2] = run_trmc(m, sep, cfg);
  CHECK(st2.policy == st.policy);
  CHECK(st2.q_table == st.q_table);
  CHECK(st2.visit_counts == st.visit_counts);
  CHECK(curve2.returns == curve.returns);
  CHECK(curve2.contexts == curve.contexts);
}

TEST_CASE("run_trmc: entropy target decays per update event down to the floor") {
  const double h0 = 0.95 * std::log(2.0);
  TabularCMDP b = bandit();
  ConceptClassifier k1 = ConceptClassifier::constant(1);
  auto target_after = [&](int budget) {
    TRMCConfig cfg;
    cfg.episode_budget = budget;
    auto [st, curve] = run_trmc(b, k1, cfg);
    return st.entropy_target;
  };
  CHECK(target_after(4) == doctest::Approx(h0).epsilon(1e-12));  // no event yet
  CHECK(target_after(5) == doctest::Approx(h0 * 0.95).epsilon(1e-12));
  CHECK(target_after(10) == doctest::Approx(h0 * 0.95 * 0.95).epsilon(1e-12));
  CHECK(target_after(15) == doctest::Approx(h0 * std::pow(0.95, 3)).epsilon(1e-12));
}

TEST_CASE("run_trmc: classifier must be hard and match the state count") {
  TabularCMDP m = build_rental_car();
  TRMCConfig cfg;
  ConceptClassifier soft = ConceptClassifier::from_assignment({0, 0, 1, 1}, 2);
  soft.mode = ConceptClassifier::Mode::soft;
  CHECK_THROWS_AS(run_trmc(m, soft, cfg), std::invalid_argument);
  ConceptClassifier mismatch = ConceptClassifier::from_assignment({0, 1}, 2);
  CHECK_THROWS_AS(run_trmc(m, mismatch, cfg), std::invalid_argument);
}

}  // TEST_SUITE
