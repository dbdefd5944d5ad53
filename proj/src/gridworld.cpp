#include "ccmdp/gridworld.hpp"

#include <cstdio>
#include <stdexcept>

namespace ccmdp {
namespace {

struct Geometry {
  int height = 0, width = 0;
  std::vector<char> cell;  // '.', '#', 'T'
  int sig_count = 1;

  bool wall(int r, int c) const {
    return r < 0 || r >= height || c < 0 || c >= width ||
           cell[r * width + c] == '#';
  }
  bool target(int r, int c) const {
    return r >= 0 && r < height && c >= 0 && c < width &&
           cell[r * width + c] == 'T';
  }
  int signature(int r, int c) const {
    if (sig_count == 1) return 0;
    if (target(r, c)) return 2;
    if (target(r - 1, c) || target(r + 1, c) || target(r, c - 1) ||
        target(r, c + 1))
      return 1;
    return 0;
  }
};

Geometry parse_layout(const GridSpec& spec) {
  if (spec.rows.empty() || spec.rows[0].empty())
    throw std::invalid_argument("gridworld: empty layout");
  Geometry g;
  g.height = static_cast<int>(spec.rows.size());
  g.width = static_cast<int>(spec.rows[0].size());
  bool any_target = false;
  for (const auto& row : spec.rows) {
    if (static_cast<int>(row.size()) != g.width)
      throw std::invalid_argument("gridworld: ragged layout rows");
    for (char ch : row) {
      if (ch != '.' && ch != '#' && ch != 'T')
        throw std::invalid_argument(std::string("gridworld: bad layout char '") +
                                    ch + "'");
      if (ch == 'T') any_target = true;
      g.cell.push_back(ch);
    }
  }
  g.sig_count = any_target ? 3 : 1;
  return g;
}

// up, right, down, left
constexpr int DR[4] = {-1, 0, 1, 0};
constexpr int DC[4] = {0, 1, 0, -1};

}  // namespace

int grid_signature_count(const GridSpec& spec) {
  return parse_layout(spec).sig_count;
}

int grid_state_index(const GridSpec& spec, int row, int col) {
  Geometry g = parse_layout(spec);
  if (g.wall(row, col))
    throw std::invalid_argument("grid_state_index: not a free cell");
  return (row * g.width + col) * g.sig_count + g.signature(row, col);
}

TabularCMDP build_contextual_gridworld(const GridSpec& spec) {
  if (spec.tasks.empty())
    throw std::invalid_argument("gridworld: at least one task required");
  if (!(spec.gamma >= 0.0 && spec.gamma < 1.0))
    throw std::invalid_argument("gridworld: gamma must be in [0,1)");
  if (!(spec.slip >= 0.0 && spec.slip <= 1.0))
    throw std::invalid_argument("gridworld: slip must be in [0,1]");
  Geometry g = parse_layout(spec);
  const int n_cells = g.height * g.width;
  const int n_states = n_cells * g.sig_count;
  const int n_actions = 4;
  const int n_contexts = static_cast<int>(spec.tasks.size());

  TabularCMDP m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  m.n_contexts = n_contexts;
  m.gamma = spec.gamma;
  m.labels.actions = {"up", "right", "down", "left"};
  for (const auto& t : spec.tasks) m.labels.contexts.push_back(t.name);
  m.labels.states.resize(n_states);
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c)
      for (int sig = 0; sig < g.sig_count; ++sig) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "(%d,%d)|%d", r, c, sig);
        m.labels.states[(r * g.width + c) * g.sig_count + sig] = buf;
      }

  // One shared dynamics table; contexts differ only in reward.
  std::vector<std::vector<Dist>> trans(n_states, std::vector<Dist>(n_actions, Dist(n_states, 0.0)));
  std::vector<double> p_move(n_states * n_actions, 0.0);
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c) {
      const int cell = r * g.width + c;
      for (int sig = 0; sig < g.sig_count; ++sig) {
        const int s = cell * g.sig_count + sig;
        if (g.cell[cell] == '#') {  // walls absorb; never started in
          for (int a = 0; a < n_actions; ++a) trans[s][a][s] = 1.0;
          continue;
        }
        for (int a = 0; a < n_actions; ++a) {
          // attempted direction plus the two perpendicular slips
          const int dirs[3] = {a, (a + 1) % 4, (a + 3) % 4};
          const double mass[3] = {1.0 - spec.slip, spec.slip / 2, spec.slip / 2};
          for (int i = 0; i < 3; ++i) {
            int rr = r + DR[dirs[i]], cc = c + DC[dirs[i]];
            if (g.wall(rr, cc)) {
              rr = r;
              cc = c;
            }
            const int dest_cell = rr * g.width + cc;
            const int dest = dest_cell * g.sig_count + g.signature(rr, cc);
            trans[s][a][dest] += mass[i];
            if (dest_cell != cell) p_move[s * n_actions + a] += mass[i];
          }
        }
      }
    }

  m.transitions.assign(n_contexts, trans);
  m.rewards.assign(n_contexts, std::vector<std::vector<double>>(
                                   n_states, std::vector<double>(n_actions, 0.0)));
  for (int k = 0; k < n_contexts; ++k) {
    const GridTask& task = spec.tasks[k];
    for (int cell = 0; cell < n_cells; ++cell) {
      if (g.cell[cell] == '#') continue;
      const bool on_target = g.cell[cell] == 'T';
      for (int sig = 0; sig < g.sig_count; ++sig) {
        const int s = cell * g.sig_count + sig;
        for (int a = 0; a < n_actions; ++a) {
          // Target cells pay the task value outright; the locomotion bonus
          // applies only away from objects.
          m.rewards[k][s][a] = on_target
                                   ? task.target_reward
                                   : task.move_bonus * p_move[s * n_actions + a];
        }
      }
    }
  }

  // Start anywhere free, with the cell's own signature.
  Dist p0(n_states, 0.0);
  int n_free = 0;
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c)
      if (g.cell[r * g.width + c] != '#') ++n_free;
  if (n_free == 0) throw std::invalid_argument("gridworld: no free cells");
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c) {
      const int cell = r * g.width + c;
      if (g.cell[cell] != '#')
        p0[cell * g.sig_count + g.signature(r, c)] = 1.0 / n_free;
    }
  m.p_initial.assign(n_contexts, p0);
  m.p_context.assign(n_contexts, 1.0 / n_contexts);
  return m;
}

GridSpec showcase_train_grid() {
  GridSpec spec;
  spec.rows = {
      ".....",
      ".T...",
      ".....",
      "...T.",
      ".....",
  };
  spec.tasks = {
      {"plain", 0.0, 0.1},
      {"seek", 1.0, 0.1},
      {"avoid", -1.0, 0.1},
  };
  spec.gamma = 0.95;
  spec.slip = 0.0;
  return spec;
}

GridSpec showcase_test_grid() {
  GridSpec spec;
  spec.rows = {
      ".....",
      ".###.",
      ".....",
      "##.T.",
      ".....",
  };
  spec.tasks = {
      {"exit_a", 1.0, 0.1},
      {"exit_b", 1.0, 0.1},
      {"exit_c", 1.0, 0.1},
  };
  spec.gamma = 0.95;
  spec.slip = 0.0;
  return spec;
}

}  // namespace ccmdp
