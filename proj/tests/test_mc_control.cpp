#include <cmath>
#include <vector>

#include "ccmdp/classifier.hpp"
#include "ccmdp/cmdp.hpp"
#include "ccmdp/errors.hpp"
#include "ccmdp/info.hpp"
#include "ccmdp/mc_control.hpp"
#include "ccmdp/solver.hpp"
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

double trailing_mean(const std::vector<double>& xs, int w) {
  double s = 0.0;
  for (std::size_t i = xs.size() - w; i < xs.size(); ++i) s += xs[i];
  return s / w;
}

// first episode whose full trailing-w window clears the level; -1 if none
int first_hit(const std::vector<double>& xs, int w, double level) {
  for (int i = w - 1; i < static_cast<int>(xs.size()); ++i) {
    double s = 0.0;
    for (int j = i - w + 1; j <= i; ++j) s += xs[j];
    if (s / w >= level) return i;
  }
  return -1;
}

}  // namespace

TEST_SUITE("mc_control") {

TEST_CASE("prior-guided with a flat prior and zero kappa IS the baseline") {
  TabularCMDP m = build_rental_car();
  MCConfig cfg;
  cfg.episode_budget = 100;
  cfg.seed = 5;
  LearningCurve base = run_baseline_mc(m, cfg);
  AbstractPolicy uniform;
  uniform.probs = {{{0.5, 0.5}}, {{0.5, 0.5}}};
  LearningCurve guided = run_prior_guided(m, ConceptClassifier::constant(4), uniform, cfg);
  CHECK(base.returns == guided.returns);  // bit-for-bit
  CHECK(base.steps == guided.steps);
  CHECK(base.contexts == guided.contexts);
  CHECK(base.seed == 5);
}

TEST_CASE("baseline: zero rewards give an identically zero curve") {
  TabularCMDP m = bandit();
  for (auto& row : m.rewards[0])
    for (double& r : row) r = 0.0;
  MCConfig cfg;
  cfg.episode_budget = 50;
  LearningCurve curve = run_baseline_mc(m, cfg);
  REQUIRE(curve.returns.size() == 50);
  for (double r : curve.returns) CHECK(r == 0.0);
}

TEST_CASE("baseline: solves the bandit and the rental pair") {
  MCConfig cfg;
  cfg.episode_budget = 300;
  cfg.seed = 2;
  LearningCurve b = run_baseline_mc(bandit(), cfg);
  CHECK(trailing_mean(b.returns, 50) == doctest::Approx(0.92).epsilon(1e-12));
  CHECK(trailing_mean(b.returns, 50) >= 0.9);  // residual epsilon exploration

  MCConfig rcfg;
  rcfg.episode_budget = 400;
  rcfg.seed = 7;
  LearningCurve r1 = run_baseline_mc(build_rental_car(), rcfg);
  LearningCurve r2 = run_baseline_mc(build_rental_car(), rcfg);
  CHECK(trailing_mean(r1.returns, 50) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r1.returns == r2.returns);  // deterministic in seed
}

TEST_CASE("prior-guided: a good prior reaches threshold before the baseline on every seed") {
  TabularCMDP m = build_rental_car();
  Solution sol = solve(m, {});
  ConceptClassifier sep = ConceptClassifier::from_assignment({0, 0, 1, 1}, 2);
  JointModel j = build_joint(m, sol, sep.hard_rows());
  AbstractPolicy prior = marginal_abstract_policy(j);
  for (std::uint64_t seed = 1000; seed < 1008; ++seed) {
    MCConfig cfg;
    cfg.episode_budget = 400;
    cfg.seed = seed;
    LearningCurve base = run_baseline_mc(m, cfg);
    MCConfig pg = cfg;
    pg.kappa_initial = 1.0;
    pg.kappa_final = 0.0;
    LearningCurve guided = run_prior_guided(m, sep, prior, pg);
    int base_hit = first_hit(base.returns, 10, 0.95);
    int guided_hit = first_hit(guided.returns, 10, 0.95);
    REQUIRE(base_hit >= 0);
    REQUIRE(guided_hit >= 0);
    CHECK(guided_hit == 9);  // first full window already clears it
    CHECK(guided_hit < base_hit);
  }
}

TEST_CASE("prior-guided: overwhelming kappa pins behavior to a bad prior") {
  TabularCMDP m = build_rental_car();
  ConceptClassifier sep = ConceptClassifier::from_assignment({0, 0, 1, 1}, 2);
  AbstractPolicy wrong;  // prefers the low-reward route everywhere
  wrong.probs = {{{0.01, 0.99}, {0.01, 0.99}}, {{0.99, 0.01}, {0.99, 0.01}}};
  MCConfig cfg;
  cfg.episode_budget = 300;
  cfg.seed = 1;
  cfg.kappa_initial = 100.0;
  cfg.kappa_final = 100.0;
  LearningCurve curve = run_prior_guided(m, sep, wrong, cfg);
  CHECK(trailing_mean(curve.returns, 50) == doctest::Approx(0.67).epsilon(1e-12));
  CHECK(trailing_mean(curve.returns, 50) < 0.8);  // never recovers the optimum
}

TEST_CASE("prior-guided: zero-support prior is rejected") {
  TabularCMDP m = build_rental_car();
  ConceptClassifier sep = ConceptClassifier::from_assignment({0, 0, 1, 1}, 2);
  AbstractPolicy degenerate;
  degenerate.probs = {{{1.0, 0.0}, {1.0, 0.0}}, {{1.0, 0.0}, {1.0, 0.0}}};
  MCConfig cfg;
  cfg.episode_budget = 10;
  CHECK_THROWS_AS(run_prior_guided(m, sep, degenerate, cfg), SupportError);
}

}  // TEST_SUITE
