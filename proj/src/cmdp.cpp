#include "ccmdp/cmdp.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "ccmdp/rng.hpp"

namespace ccmdp {
namespace {

constexpr double SUM_TOL = 1e-9;

std::string idx3(const char* table, int c, int s, int a) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%s[c=%d][s=%d][a=%d]", table, c, s, a);
  return buf;
}

void check_dist(std::vector<Violation>& out, const std::string& where,
                const Dist& row, std::size_t expect_len) {
  if (row.size() != expect_len) {
    out.push_back({where, static_cast<double>(row.size()),
                   where + ": length " + std::to_string(row.size()) +
                       ", expected " + std::to_string(expect_len)});
    return;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (!(row[i] >= 0.0)) {  // catches negatives and NaN
      char buf[64];
      std::snprintf(buf, sizeof(buf), ": entry %zu = %.17g is negative", i, row[i]);
      out.push_back({where, row[i], where + buf});
    }
    sum += row[i];
  }
  if (std::abs(sum - 1.0) > SUM_TOL) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), ": sums to %.17g, off by %.3g", sum, sum - 1.0);
    out.push_back({where, std::abs(sum - 1.0), where + buf});
  }
}

}  // namespace

double TabularCMDP::reward_sup() const {
  double sup = 0.0;
  for (const auto& per_c : rewards)
    for (const auto& per_s : per_c)
      for (double r : per_s) sup = std::max(sup, std::abs(r));
  return sup;
}

std::vector<Violation> validate(const TabularCMDP& m) {
  std::vector<Violation> out;
  if (m.n_states < 1 || m.n_actions < 1 || m.n_contexts < 1) {
    out.push_back({"shape", 0.0, "shape: all counts must be >= 1"});
    return out;
  }
  if (!(m.gamma >= 0.0) || m.gamma >= 1.0) {
    out.push_back({"gamma", m.gamma, "discount not < 1 (gamma = " +
                                         std::to_string(m.gamma) + ")"});
  }
  const auto nc = static_cast<std::size_t>(m.n_contexts);
  const auto ns = static_cast<std::size_t>(m.n_states);
  const auto na = static_cast<std::size_t>(m.n_actions);
  if (m.transitions.size() != nc || m.rewards.size() != nc ||
      m.p_initial.size() != nc) {
    out.push_back({"shape", static_cast<double>(m.transitions.size()),
                   "shape: per-context table count does not match n_contexts"});
    return out;
  }
  check_dist(out, "p_context", m.p_context, nc);
  for (int c = 0; c < m.n_contexts; ++c) {
    check_dist(out, "p_initial[c=" + std::to_string(c) + "]", m.p_initial[c], ns);
    if (m.transitions[c].size() != ns || m.rewards[c].size() != ns) {
      out.push_back({"shape", 0.0,
                     "shape: state dimension mismatch in context " + std::to_string(c)});
      continue;
    }
    for (int s = 0; s < m.n_states; ++s) {
      if (m.transitions[c][s].size() != na || m.rewards[c][s].size() != na) {
        out.push_back({"shape", 0.0, "shape: action dimension mismatch at " +
                                         idx3("transitions", c, s, 0)});
        continue;
      }
      for (int a = 0; a < m.n_actions; ++a) {
        check_dist(out, idx3("transitions", c, s, a), m.transitions[c][s][a], ns);
        double r = m.rewards[c][s][a];
        if (!std::isfinite(r)) {
          out.push_back({idx3("rewards", c, s, a), r,
                         idx3("rewards", c, s, a) + ": non-finite reward"});
        }
      }
    }
  }
  return out;
}

std::string violation_summary(const std::vector<Violation>& violations) {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i].message;
  }
  return os.str();
}

void require_valid(const TabularCMDP& m) {
  auto v = validate(m);
  if (!v.empty()) throw std::invalid_argument("invalid CMDP: " + violation_summary(v));
}

int default_horizon(double gamma, double tol, int cap) {
  if (tol <= 0.0) throw std::invalid_argument("default_horizon: tol must be > 0");
  double p = 1.0;
  int t = 0;
  while (p >= tol && t < cap) {
    p *= gamma;
    ++t;
  }
  return t;
}

Policy uniform_policy(const TabularCMDP& m) {
  Policy pi;
  pi.probs.assign(m.n_contexts,
                  std::vector<Dist>(m.n_states, Dist(m.n_actions, 1.0 / m.n_actions)));
  return pi;
}

Trajectory sample_episode(const TabularCMDP& m, const Policy& policy, int context,
                          std::uint64_t seed, int horizon) {
  if (context < 0 || context >= m.n_contexts)
    throw std::invalid_argument("sample_episode: context index " +
                                std::to_string(context) + " out of range");
  if (horizon < 1) throw std::invalid_argument("sample_episode: horizon must be >= 1");
  Rng rng(seed);
  Trajectory tau;
  tau.context = context;
  tau.seed = seed;
  tau.steps.reserve(horizon);
  int s = rng.next_categorical(m.p_initial[context]);
  for (int t = 0; t < horizon; ++t) {
    int a = rng.next_categorical(policy.probs[context][s]);
    double r = m.rewards[context][s][a];
    int s_next = rng.next_categorical(m.transitions[context][s][a]);
    tau.steps.push_back({s, a, r, s_next});
    s = s_next;
  }
  return tau;
}

TabularCMDP build_rental_car(double reward_long_route, double reward_short_route) {
  if (!(reward_short_route > reward_long_route))
    throw std::invalid_argument(
        "build_rental_car: reward_short_route must exceed reward_long_route");
  const double hi = reward_short_route;
  const double lo = reward_long_route;
  TabularCMDP m;
  m.n_states = 4;  // e1, e2, g1, g2
  m.n_actions = 2;
  m.n_contexts = 2;
  m.gamma = 0.0;
  m.labels.states = {"e1", "e2", "g1", "g2"};
  m.labels.actions = {"a1", "a2"};
  m.labels.contexts = {"c1", "c2"};
  m.p_context = {0.5, 0.5};
  m.p_initial.assign(2, Dist(4, 0.25));
  // Self-loops; gamma = 0 makes dynamics irrelevant beyond validity.
  m.transitions.assign(2, std::vector<std::vector<Dist>>(
                              4, std::vector<Dist>(2, Dist(4, 0.0))));
  for (int c = 0; c < 2; ++c)
    for (int s = 0; s < 4; ++s)
      for (int a = 0; a < 2; ++a) m.transitions[c][s][a][s] = 1.0;
  m.rewards.assign(2, std::vector<std::vector<double>>(4, std::vector<double>(2, 0.0)));
  for (int s = 0; s < 4; ++s) {
    m.rewards[0][s][0] = hi;  // c1: route a1 better for every car
    m.rewards[0][s][1] = lo;
  }
  for (int s = 0; s < 2; ++s) {  // c2, electric: a2 better
    m.rewards[1][s][0] = lo;
    m.rewards[1][s][1] = hi;
  }
  for (int s = 2; s < 4; ++s) {  // c2, combustion: a1 better
    m.rewards[1][s][0] = hi;
    m.rewards[1][s][1] = lo;
  }
  return m;
}

TabularCMDP build_random_cmdp(int n_states, int n_actions, int n_contexts,
                              double gamma, std::uint64_t seed) {
  if (n_states < 1 || n_actions < 1 || n_contexts < 1)
    throw std::invalid_argument("build_random_cmdp: counts must be >= 1");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("build_random_cmdp: gamma must be in [0,1)");
  Rng rng(seed);
  TabularCMDP m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  m.n_contexts = n_contexts;
  m.gamma = gamma;
  m.transitions.assign(
      n_contexts, std::vector<std::vector<Dist>>(n_states, std::vector<Dist>(n_actions)));
  m.rewards.assign(n_contexts, std::vector<std::vector<double>>(
                                   n_states, std::vector<double>(n_actions)));
  for (int c = 0; c < n_contexts; ++c)
    for (int s = 0; s < n_states; ++s)
      for (int a = 0; a < n_actions; ++a)
        m.transitions[c][s][a] = rng.next_simplex(n_states);
  for (int c = 0; c < n_contexts; ++c)
    for (int s = 0; s < n_states; ++s)
      for (int a = 0; a < n_actions; ++a)
        m.rewards[c][s][a] = rng.uniform(-1.0, 1.0);
  m.p_context = rng.next_simplex(n_contexts);
  m.p_initial.resize(n_contexts);
  for (int c = 0; c < n_contexts; ++c) m.p_initial[c] = rng.next_simplex(n_states);
  return m;
}

TabularCMDP restrict_contexts(const TabularCMDP& m, const std::vector<int>& keep) {
  if (keep.empty()) throw std::invalid_argument("restrict_contexts: empty context set");
  TabularCMDP out;
  out.n_states = m.n_states;
  out.n_actions = m.n_actions;
  out.n_contexts = static_cast<int>(keep.size());
  out.gamma = m.gamma;
  out.labels.states = m.labels.states;
  out.labels.actions = m.labels.actions;
  double mass = 0.0;
  for (int c : keep) {
    if (c < 0 || c >= m.n_contexts)
      throw std::invalid_argument("restrict_contexts: context index out of range");
    mass += m.p_context[c];
  }
  if (mass <= 0.0)
    throw std::invalid_argument("restrict_contexts: kept contexts have zero mass");
  for (int c : keep) {
    out.transitions.push_back(m.transitions[c]);
    out.rewards.push_back(m.rewards[c]);
    out.p_initial.push_back(m.p_initial[c]);
    out.p_context.push_back(m.p_context[c] / mass);
    if (!m.labels.contexts.empty()) out.labels.contexts.push_back(m.labels.contexts[c]);
  }
  return out;
}

}  // namespace ccmdp
