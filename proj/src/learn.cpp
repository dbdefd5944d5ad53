#include "ccmdp/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ccmdp/errors.hpp"
#include "ccmdp/rng.hpp"

namespace ccmdp {
namespace {

/// One term of the MI objective: a weight over states and the action rows
/// it applies to. Conditional MI uses one task per context; the context-free
/// variant pools everything into a single task.
struct WeightedTask {
  std::vector<double> w;     // joint mass per state
  std::vector<Dist> pi;      // [s][a]
};

std::vector<WeightedTask> conditional_tasks(const TabularCMDP& m, const Solution& sol) {
  std::vector<WeightedTask> tasks(m.n_contexts);
  for (int c = 0; c < m.n_contexts; ++c) {
    tasks[c].w.resize(m.n_states);
    tasks[c].pi = sol.soft_optimal.probs[c];
    for (int s = 0; s < m.n_states; ++s)
      tasks[c].w[s] = m.p_context[c] * sol.occupancy[c][s];
  }
  return tasks;
}

std::vector<WeightedTask> pooled_task(const TabularCMDP& m, const Solution& sol) {
  WeightedTask t;
  t.w.assign(m.n_states, 0.0);
  t.pi.assign(m.n_states, Dist(m.n_actions, 0.0));
  for (int c = 0; c < m.n_contexts; ++c)
    for (int s = 0; s < m.n_states; ++s) {
      const double w = m.p_context[c] * sol.occupancy[c][s];
      t.w[s] += w;
      for (int a = 0; a < m.n_actions; ++a)
        t.pi[s][a] += w * sol.soft_optimal.probs[c][s][a];
    }
  for (int s = 0; s < m.n_states; ++s)
    if (t.w[s] > 0.0)
      for (double& x : t.pi[s]) x /= t.w[s];
  return {std::move(t)};
}

/// Objective sum_t sum_s w phi(k|s) sum_a pi log(pi / q_t(a|k)) for soft rows
/// P, optionally with its exact gradient dI/dP (the q-side terms cancel).
/// Dead concepts (zero mass) read as uniform q rows; they carry no mass in
/// the objective and keep the gradient finite.
double mi_objective(const std::vector<WeightedTask>& tasks, const ClassifierRows& P,
                    int n_concepts, std::vector<std::vector<double>>* grad) {
  const int n_states = static_cast<int>(P.size());
  const int n_actions = tasks.empty() ? 0 : static_cast<int>(tasks[0].pi[0].size());
  if (grad) grad->assign(n_states, std::vector<double>(n_concepts, 0.0));
  double total = 0.0;
  std::vector<double> d(n_concepts);
  std::vector<Dist> q(n_concepts, Dist(n_actions));
  for (const auto& t : tasks) {
    std::fill(d.begin(), d.end(), 0.0);
    for (auto& row : q) std::fill(row.begin(), row.end(), 0.0);
    for (int s = 0; s < n_states; ++s) {
      const double w = t.w[s];
      if (w == 0.0) continue;
      for (int k = 0; k < n_concepts; ++k) {
        const double wk = w * P[s][k];
        if (wk == 0.0) continue;
        d[k] += wk;
        for (int a = 0; a < n_actions; ++a) q[k][a] += wk * t.pi[s][a];
      }
    }
    for (int k = 0; k < n_concepts; ++k) {
      if (d[k] > 0.0)
        for (double& x : q[k]) x /= d[k];
      else
        std::fill(q[k].begin(), q[k].end(), 1.0 / n_actions);
    }
    for (int s = 0; s < n_states; ++s) {
      const double w = t.w[s];
      if (w == 0.0) continue;
      for (int k = 0; k < n_concepts; ++k) {
        double term = 0.0;  // sum_a pi log(pi/q_k)
        for (int a = 0; a < n_actions; ++a) {
          const double pa = t.pi[s][a];
          if (pa > 0.0) term += pa * std::log(pa / q[k][a]);
        }
        total += w * P[s][k] * term;
        if (grad) (*grad)[s][k] += w * term;
      }
    }
  }
  return total;
}

/// Same objective for a hard assignment, without materializing rows.
double mi_objective_hard(const std::vector<WeightedTask>& tasks,
                         const std::vector<int>& assignment, int n_concepts) {
  const int n_states = static_cast<int>(assignment.size());
  const int n_actions = tasks.empty() ? 0 : static_cast<int>(tasks[0].pi[0].size());
  double total = 0.0;
  std::vector<double> d(n_concepts);
  std::vector<Dist> q(n_concepts, Dist(n_actions));
  for (const auto& t : tasks) {
    std::fill(d.begin(), d.end(), 0.0);
    for (auto& row : q) std::fill(row.begin(), row.end(), 0.0);
    for (int s = 0; s < n_states; ++s) {
      const double w = t.w[s];
      if (w == 0.0) continue;
      const int k = assignment[s];
      d[k] += w;
      for (int a = 0; a < n_actions; ++a) q[k][a] += w * t.pi[s][a];
    }
    for (int k = 0; k < n_concepts; ++k)
      if (d[k] > 0.0)
        for (double& x : q[k]) x /= d[k];
    for (int s = 0; s < n_states; ++s) {
      const double w = t.w[s];
      if (w == 0.0) continue;
      const int k = assignment[s];
      for (int a = 0; a < n_actions; ++a) {
        const double pa = t.pi[s][a];
        if (pa > 0.0) total += w * pa * std::log(pa / q[k][a]);
      }
    }
  }
  return std::max(total, 0.0);
}

ClassifierRows softmax_rows(const std::vector<std::vector<double>>& z, double temp) {
  ClassifierRows P(z.size());
  for (std::size_t s = 0; s < z.size(); ++s) {
    Dist row(z[s].size());
    const double z_max = *std::max_element(z[s].begin(), z[s].end());
    double total = 0.0;
    for (std::size_t k = 0; k < z[s].size(); ++k) {
      row[k] = std::exp((z[s][k] - z_max) / temp);
      total += row[k];
    }
    for (double& x : row) x /= total;
    P[s] = std::move(row);
  }
  return P;
}

void clip_logits(std::vector<std::vector<double>>& z) {
  for (auto& row : z)
    for (double& x : row) x = std::clamp(x, -LOGIT_CLIP, LOGIT_CLIP);
}

/// dI/dlogits from dI/dP through the tempered softmax.
std::vector<std::vector<double>> chain_softmax(
    const ClassifierRows& P, const std::vector<std::vector<double>>& g_rows,
    double temp) {
  std::vector<std::vector<double>> g(P.size());
  for (std::size_t s = 0; s < P.size(); ++s) {
    const std::size_t n = P[s].size();
    g[s].resize(n);
    double dot = 0.0;
    for (std::size_t k = 0; k < n; ++k) dot += P[s][k] * g_rows[s][k];
    for (std::size_t k = 0; k < n; ++k)
      g[s][k] = P[s][k] * (g_rows[s][k] - dot) / temp;
  }
  return g;
}

struct GradientRun {
  std::vector<std::vector<double>> logits;
  double temperature = 1.0;
  std::vector<double> trace;
  double soft_objective = 0.0;
};

/// Backtracking descent with guarded annealing on any objective given as
/// (rows -> value, gradient wrt rows). Trace is non-increasing: Armijo steps
/// strictly decrease and a temperature decay is skipped if it would regress.
GradientRun descend(const std::vector<WeightedTask>& tasks, int n_concepts,
                    std::vector<std::vector<double>> z, const LearnConfig& config) {
  GradientRun run;
  double temp = config.temp_initial;
  clip_logits(z);
  ClassifierRows P = softmax_rows(z, temp);
  std::vector<std::vector<double>> g_rows;
  double f = mi_objective(tasks, P, n_concepts, &g_rows);
  run.trace.push_back(f);
  int accepted = 0;
  for (int iter = 0; iter < config.max_iters; ++iter) {
    const auto g = chain_softmax(P, g_rows, temp);
    double gsq = 0.0;
    for (const auto& row : g)
      for (double x : row) gsq += x * x;
    bool stepped = false;
    if (gsq > 1e-24) {
      double step = config.step_size;
      for (int back = 0; back < 60; ++back) {
        std::vector<std::vector<double>> z_new = z;
        for (std::size_t s = 0; s < z.size(); ++s)
          for (std::size_t k = 0; k < z[s].size(); ++k)
            z_new[s][k] -= step * g[s][k];
        clip_logits(z_new);
        ClassifierRows P_new = softmax_rows(z_new, temp);
        std::vector<std::vector<double>> g_new;
        const double f_new = mi_objective(tasks, P_new, n_concepts, &g_new);
        if (f_new <= f - 1e-4 * step * gsq) {
          const double decrease = f - f_new;
          z = std::move(z_new);
          P = std::move(P_new);
          g_rows = std::move(g_new);
          f = f_new;
          run.trace.push_back(f);
          ++accepted;
          stepped = decrease >= config.tol;
          break;
        }
        step *= 0.5;
      }
    }
    // cool every 100 accepted steps, or when progress stalls; skip a decay
    // that would raise the objective
    const bool due = accepted > 0 && accepted % 100 == 0;
    if ((due || !stepped) && temp > config.temp_floor) {
      const double temp_new = std::max(config.temp_floor, temp * config.temp_decay);
      ClassifierRows P_cool = softmax_rows(z, temp_new);
      std::vector<std::vector<double>> g_cool;
      const double f_cool = mi_objective(tasks, P_cool, n_concepts, &g_cool);
      if (f_cool <= f) {
        temp = temp_new;
        P = std::move(P_cool);
        g_rows = std::move(g_cool);
        f = f_cool;
        run.trace.push_back(f);
        continue;
      }
    }
    if (!stepped) break;
  }
  run.logits = std::move(z);
  run.temperature = temp;
  run.soft_objective = f;
  return run;
}

std::vector<std::vector<double>> random_logits(int n_states, int n_concepts, Rng& rng) {
  std::vector<std::vector<double>> z(n_states, std::vector<double>(n_concepts));
  for (auto& row : z)
    for (double& x : row) x = 0.1 * rng.next_normal();
  return z;
}

GradientResult gradient_over_tasks(const std::vector<WeightedTask>& tasks,
                                   int n_states, int n_concepts,
                                   const LearnConfig& config) {
  GradientResult best;
  if (n_concepts == 1) {
    best.classifier = ConceptClassifier::constant(n_states);
    best.soft_objective = mi_objective_hard(tasks, std::vector<int>(n_states, 0), 1);
    best.hardened_objective = best.soft_objective;
    best.trace = {best.soft_objective};
    return best;
  }
  bool have = false;
  const int restarts = std::max(1, config.restarts);
  for (int r = 0; r < restarts; ++r) {
    Rng rng(config.seed, static_cast<std::uint64_t>(r));
    GradientRun run = descend(tasks, n_concepts, random_logits(n_states, n_concepts, rng),
                              config);
    ConceptClassifier c;
    c.n_concepts = n_concepts;
    c.logits = run.logits;
    c.temperature = run.temperature;
    c.mode = ConceptClassifier::Mode::soft;
    const double hard = mi_objective_hard(tasks, c.hard_assignment(), n_concepts);
    const bool better =
        !have || hard < best.hardened_objective ||
        (hard == best.hardened_objective && run.soft_objective < best.soft_objective);
    if (better) {
      best.classifier = std::move(c);
      best.trace = std::move(run.trace);
      best.soft_objective = run.soft_objective;
      best.hardened_objective = hard;
      have = true;
    }
  }
  return best;
}

void check_n_concepts(int n_concepts) {
  if (n_concepts < 1) throw std::invalid_argument("n_concepts must be >= 1");
}

}  // namespace

double objective(const TabularCMDP& m, const Solution& sol,
                 const ConceptClassifier& classifier) {
  return conditional_mi(build_joint(m, sol, classifier.rows()));
}

std::pair<double, std::vector<std::vector<double>>> objective_with_gradient(
    const TabularCMDP& m, const Solution& sol, const ConceptClassifier& classifier) {
  const auto tasks = conditional_tasks(m, sol);
  const ClassifierRows P = classifier.soft_rows();
  std::vector<std::vector<double>> g_rows;
  const double f = mi_objective(tasks, P, classifier.n_concepts, &g_rows);
  return {f, chain_softmax(P, g_rows, classifier.temperature)};
}

std::pair<ConceptClassifier, double> learn_exhaustive(const TabularCMDP& m,
                                                      const Solution& sol,
                                                      int n_concepts) {
  check_n_concepts(n_concepts);
  if (std::pow(static_cast<double>(n_concepts), m.n_states) > 1e7)
    throw CapabilityError("learn_exhaustive: " + std::to_string(n_concepts) + "^" +
                          std::to_string(m.n_states) + " assignments exceed 1e7");
  const auto tasks = conditional_tasks(m, sol);
  std::vector<int> assignment(m.n_states, 0);
  std::vector<int> best = assignment;
  double best_f = mi_objective_hard(tasks, assignment, n_concepts);
  // lexicographic odometer: last state's concept advances fastest, so the
  // first optimum seen is the lexicographically smallest
  for (;;) {
    int i = m.n_states - 1;
    while (i >= 0 && assignment[i] == n_concepts - 1) assignment[i--] = 0;
    if (i < 0) break;
    ++assignment[i];
    const double f = mi_objective_hard(tasks, assignment, n_concepts);
    if (f < best_f) {
      best_f = f;
      best = assignment;
    }
  }
  return {ConceptClassifier::from_assignment(best, n_concepts), best_f};
}

std::pair<ConceptClassifier, double> learn_local_search(
    const TabularCMDP& m, const Solution& sol, int n_concepts,
    const LearnConfig& config, const std::vector<int>* init) {
  check_n_concepts(n_concepts);
  const auto tasks = conditional_tasks(m, sol);
  std::vector<int> best;
  double best_f = std::numeric_limits<double>::infinity();
  const int restarts = std::max(1, config.restarts);
  for (int r = 0; r < restarts; ++r) {
    std::vector<int> assignment(m.n_states);
    if (r == 0 && init) {
      assignment = *init;
      for (int k : assignment)
        if (k < 0 || k >= n_concepts)
          throw std::invalid_argument("learn_local_search: init out of range");
    } else {
      Rng rng(config.seed, static_cast<std::uint64_t>(r));
      for (int s = 0; s < m.n_states; ++s) assignment[s] = rng.next_below(n_concepts);
    }
    double f = mi_objective_hard(tasks, assignment, n_concepts);
    for (;;) {  // best-improvement sweep; ties to lowest (state, concept)
      double move_f = f;
      int move_s = -1, move_k = -1;
      for (int s = 0; s < m.n_states; ++s) {
        const int cur = assignment[s];
        for (int k = 0; k < n_concepts; ++k) {
          if (k == cur) continue;
          assignment[s] = k;
          const double cand = mi_objective_hard(tasks, assignment, n_concepts);
          if (cand < move_f) {
            move_f = cand;
            move_s = s;
            move_k = k;
          }
        }
        assignment[s] = cur;
      }
      if (move_s < 0) break;
      assignment[move_s] = move_k;
      f = move_f;
    }
    if (f < best_f) {
      best_f = f;
      best = assignment;
    }
  }
  return {ConceptClassifier::from_assignment(best, n_concepts), best_f};
}

GradientResult learn_gradient(const TabularCMDP& m, const Solution& sol,
                              int n_concepts, const LearnConfig& config) {
  check_n_concepts(n_concepts);
  return gradient_over_tasks(conditional_tasks(m, sol), m.n_states, n_concepts, config);
}

GradientResult baseline_context_free(const TabularCMDP& m, const Solution& sol,
                                     int n_concepts, const LearnConfig& config) {
  check_n_concepts(n_concepts);
  // single-context conditional MI and context-free MI coincide; sharing the
  // task construction keeps the two methods bit-identical there
  const auto tasks =
      m.n_contexts == 1 ? conditional_tasks(m, sol) : pooled_task(m, sol);
  return gradient_over_tasks(tasks, m.n_states, n_concepts, config);
}

FactoredResult learn_factored(const TabularCMDP& m, const Solution& sol,
                              const std::vector<int>& factor_sizes,
                              const LearnConfig& config) {
  if (factor_sizes.empty())
    throw std::invalid_argument("learn_factored: no factor sizes");
  long long product = 1;
  for (int sz : factor_sizes) {
    check_n_concepts(sz);
    product *= sz;
    if (product > 100000)
      throw CapabilityError("learn_factored: product concept space too large");
  }
  const int n_factors = static_cast<int>(factor_sizes.size());
  const int K = static_cast<int>(product);
  const auto tasks = conditional_tasks(m, sol);

  // precompute each product concept's factor digits
  std::vector<std::vector<int>> digits(K, std::vector<int>(n_factors));
  for (int k = 0; k < K; ++k) {
    int rest = k;
    for (int i = 0; i < n_factors; ++i) {
      digits[k][i] = rest % factor_sizes[i];
      rest /= factor_sizes[i];
    }
  }

  struct FactorState {
    std::vector<std::vector<std::vector<double>>> z;  // [factor][s][u]
  };

  auto product_rows = [&](const FactorState& fs, double temp,
                          std::vector<ClassifierRows>* factor_rows) {
    std::vector<ClassifierRows> rows(n_factors);
    for (int i = 0; i < n_factors; ++i) rows[i] = softmax_rows(fs.z[i], temp);
    ClassifierRows P(m.n_states, Dist(K, 0.0));
    for (int s = 0; s < m.n_states; ++s)
      for (int k = 0; k < K; ++k) {
        double p = 1.0;
        for (int i = 0; i < n_factors; ++i) p *= rows[i][s][digits[k][i]];
        P[s][k] = p;
      }
    if (factor_rows) *factor_rows = std::move(rows);
    return P;
  };

  auto objective_and_grad = [&](const FactorState& fs, double temp, bool want_grad,
                                FactorState* grad_out) {
    std::vector<ClassifierRows> rows;
    ClassifierRows P = product_rows(fs, temp, &rows);
    std::vector<std::vector<double>> g_P;
    const double f = mi_objective(tasks, P, K, want_grad ? &g_P : nullptr);
    if (want_grad) {
      grad_out->z.assign(n_factors, {});
      // dI/dphi_i(u|s) = sum_{k: digit_i=u} g_P[s][k] * prod_{j!=i} phi_j
      std::vector<std::vector<std::vector<double>>> g_rows(n_factors);
      for (int i = 0; i < n_factors; ++i)
        g_rows[i].assign(m.n_states, std::vector<double>(factor_sizes[i], 0.0));
      for (int s = 0; s < m.n_states; ++s)
        for (int k = 0; k < K; ++k) {
          const double gk = g_P[s][k];
          if (gk == 0.0) continue;
          for (int i = 0; i < n_factors; ++i) {
            double others = 1.0;
            for (int j = 0; j < n_factors; ++j)
              if (j != i) others *= rows[j][s][digits[k][j]];
            g_rows[i][s][digits[k][i]] += gk * others;
          }
        }
      for (int i = 0; i < n_factors; ++i)
        grad_out->z[i] = chain_softmax(rows[i], g_rows[i], temp);
    }
    return f;
  };

  FactoredResult best;
  bool have = false;
  const int restarts = std::max(1, config.restarts);
  for (int r = 0; r < restarts; ++r) {
    Rng rng(config.seed, static_cast<std::uint64_t>(r));
    FactorState fs;
    fs.z.resize(n_factors);
    for (int i = 0; i < n_factors; ++i)
      fs.z[i] = random_logits(m.n_states, factor_sizes[i], rng);
    double temp = config.temp_initial;
    for (auto& zf : fs.z) clip_logits(zf);
    double f = objective_and_grad(fs, temp, false, nullptr);
    std::vector<double> trace{f};
    int accepted = 0;
    for (int iter = 0; iter < config.max_iters; ++iter) {
      FactorState g;
      objective_and_grad(fs, temp, true, &g);
      double gsq = 0.0;
      for (const auto& zf : g.z)
        for (const auto& row : zf)
          for (double x : row) gsq += x * x;
      bool stepped = false;
      if (gsq > 1e-24) {
        double step = config.step_size;
        for (int back = 0; back < 60; ++back) {
          FactorState fs_new = fs;
          for (int i = 0; i < n_factors; ++i)
            for (int s = 0; s < m.n_states; ++s)
              for (int u = 0; u < factor_sizes[i]; ++u)
                fs_new.z[i][s][u] -= step * g.z[i][s][u];
          for (auto& zf : fs_new.z) clip_logits(zf);
          const double f_new = objective_and_grad(fs_new, temp, false, nullptr);
          if (f_new <= f - 1e-4 * step * gsq) {
            stepped = (f - f_new) >= config.tol;
            fs = std::move(fs_new);
            f = f_new;
            trace.push_back(f);
            ++accepted;
            break;
          }
          step *= 0.5;
        }
      }
      const bool due = accepted > 0 && accepted % 100 == 0;
      if ((due || !stepped) && temp > config.temp_floor) {
        const double temp_new = std::max(config.temp_floor, temp * config.temp_decay);
        const double f_cool = objective_and_grad(fs, temp_new, false, nullptr);
        if (f_cool <= f) {
          temp = temp_new;
          f = f_cool;
          trace.push_back(f);
          continue;
        }
      }
      if (!stepped) break;
    }
    // harden per factor, evaluate the induced product assignment
    std::vector<int> assignment(m.n_states, 0);
    FactoredClassifier fc;
    for (int i = 0; i < n_factors; ++i) {
      ConceptClassifier c;
      c.n_concepts = factor_sizes[i];
      c.logits = fs.z[i];
      c.temperature = temp;
      c.mode = ConceptClassifier::Mode::soft;
      fc.factors.push_back(std::move(c));
    }
    std::vector<int> strides(n_factors, 1);
    for (int i = 1; i < n_factors; ++i)
      strides[i] = strides[i - 1] * factor_sizes[i - 1];
    for (int i = 0; i < n_factors; ++i) {
      const auto digits_i = fc.factors[i].hard_assignment();
      for (int s = 0; s < m.n_states; ++s) assignment[s] += strides[i] * digits_i[s];
    }
    const double hard = mi_objective_hard(tasks, assignment, K);
    const bool better = !have || hard < best.hardened_objective ||
                        (hard == best.hardened_objective && f < best.soft_objective);
    if (better) {
      best.classifier = std::move(fc);
      best.trace = std::move(trace);
      best.soft_objective = f;
      best.hardened_objective = hard;
      have = true;
    }
  }
  return best;
}

AbstractPolicy random_abstract_policy(int n_contexts, int n_concepts, int n_actions,
                                      std::uint64_t seed) {
  Rng rng(seed);
  AbstractPolicy pi;
  pi.probs.assign(n_contexts, std::vector<Dist>(n_concepts));
  for (int c = 0; c < n_contexts; ++c)
    for (int k = 0; k < n_concepts; ++k) pi.probs[c][k] = rng.next_simplex(n_actions);
  return pi;
}

std::pair<ConceptClassifier, double> baseline_likelihood(
    const std::vector<Triple>& triples, int n_states, int n_concepts,
    const AbstractPolicy& fixed_abstract_policy, const LearnConfig& config) {
  if (triples.empty())
    throw std::invalid_argument("baseline_likelihood: no observations");
  check_n_concepts(n_concepts);
  const int n_contexts = static_cast<int>(fixed_abstract_policy.probs.size());
  const int n_actions =
      static_cast<int>(fixed_abstract_policy.probs[0][0].size());
  // aggregate counts n(c,s,a)
  std::vector<std::vector<std::vector<double>>> counts(
      n_contexts, std::vector<std::vector<double>>(n_states,
                                                   std::vector<double>(n_actions, 0.0)));
  for (const auto& t : triples) {
    if (t.context < 0 || t.context >= n_contexts || t.state < 0 ||
        t.state >= n_states || t.action < 0 || t.action >= n_actions)
      throw std::invalid_argument("baseline_likelihood: triple index out of range");
    counts[t.context][t.state][t.action] += 1.0;
  }
  const auto& pi_phi = fixed_abstract_policy.probs;

  auto neg_loglik = [&](const ClassifierRows& P,
                        std::vector<std::vector<double>>* grad) {
    if (grad) grad->assign(n_states, std::vector<double>(n_concepts, 0.0));
    double nll = 0.0;
    for (int c = 0; c < n_contexts; ++c)
      for (int s = 0; s < n_states; ++s)
        for (int a = 0; a < n_actions; ++a) {
          const double n = counts[c][s][a];
          if (n == 0.0) continue;
          double p = 0.0;
          for (int k = 0; k < n_concepts; ++k) p += P[s][k] * pi_phi[c][k][a];
          if (p <= 0.0)
            throw SupportError("baseline_likelihood: observation with zero "
                               "model probability");
          nll -= n * std::log(p);
          if (grad)
            for (int k = 0; k < n_concepts; ++k)
              (*grad)[s][k] -= n * pi_phi[c][k][a] / p;
        }
    return nll;
  };

  ConceptClassifier best;
  double best_nll = std::numeric_limits<double>::infinity();
  const int restarts = std::max(1, config.restarts);
  for (int r = 0; r < restarts; ++r) {
    Rng rng(config.seed, static_cast<std::uint64_t>(r));
    auto z = random_logits(n_states, n_concepts, rng);
    clip_logits(z);
    const double temp = 1.0;  // likelihood ascent runs at fixed temperature
    ClassifierRows P = softmax_rows(z, temp);
    std::vector<std::vector<double>> g_rows;
    double f = neg_loglik(P, &g_rows);
    for (int iter = 0; iter < config.max_iters; ++iter) {
      const auto g = chain_softmax(P, g_rows, temp);
      double gsq = 0.0;
      for (const auto& row : g)
        for (double x : row) gsq += x * x;
      if (gsq <= 1e-24) break;
      double step = config.step_size;
      bool stepped = false;
      for (int back = 0; back < 60; ++back) {
        auto z_new = z;
        for (int s = 0; s < n_states; ++s)
          for (int k = 0; k < n_concepts; ++k) z_new[s][k] -= step * g[s][k];
        clip_logits(z_new);
        ClassifierRows P_new = softmax_rows(z_new, temp);
        std::vector<std::vector<double>> g_new;
        const double f_new = neg_loglik(P_new, &g_new);
        if (f_new <= f - 1e-4 * step * gsq) {
          stepped = (f - f_new) >= config.tol;
          z = std::move(z_new);
          P = std::move(P_new);
          g_rows = std::move(g_new);
          f = f_new;
          break;
        }
        step *= 0.5;
      }
      if (!stepped) break;
    }
    if (f < best_nll) {
      best_nll = f;
      best.n_concepts = n_concepts;
      best.logits = z;
      best.temperature = temp;
      best.mode = ConceptClassifier::Mode::soft;
    }
  }
  return {std::move(best), -best_nll};
}

std::vector<Triple> sample_triples(const TabularCMDP& m, const Policy& policy,
                                   int n_episodes, int horizon, std::uint64_t seed) {
  if (n_episodes <= 0) throw std::invalid_argument("sample_triples: n_episodes must be positive");
  const int steps = horizon > 0 ? horizon : default_horizon(m.gamma);
  std::vector<Triple> triples;
  triples.reserve(static_cast<std::size_t>(n_episodes) * steps);
  Rng rng(seed);
  for (int e = 0; e < n_episodes; ++e) {
    const int c = rng.next_categorical(m.p_context);
    const Trajectory traj = sample_episode(m, policy, c, rng.next_u64(), steps);
    for (const Step& step : traj.steps) triples.push_back({c, step.state, step.action});
  }
  return triples;
}

}  // namespace ccmdp
