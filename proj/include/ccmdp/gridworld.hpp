#pragma once

#include <string>
#include <vector>

#include "ccmdp/cmdp.hpp"

namespace ccmdp {

/// One context of a gridworld CMDP: how target cells pay and how movement
/// itself is rewarded. target_reward > 0 seeks targets, < 0 avoids them.
struct GridTask {
  std::string name;
  double target_reward = 0.0;
  double move_bonus = 0.0;  // paid per step, scaled by P(cell changes)
};

/// Rectangular layout: '.' free, '#' wall, 'T' target (free cell with an
/// object). Every cell of the rectangle is a state dimension; walls are
/// absorbing and never started in.
struct GridSpec {
  std::vector<std::string> rows;
  std::vector<GridTask> tasks;
  double gamma = 0.95;
  double slip = 0.0;  // probability mass moved to the two perpendicular moves
};

/// States are (cell, object signature) pairs with signature in
/// {0: plain, 1: target-adjacent, 2: on-target} when the layout has targets
/// (a single signature otherwise), so concept classifiers can pick up
/// object adjacency separately from position. Actions: up, right, down, left.
/// Off-grid or wall moves stay in place. r(s,a,c) = task.target_reward at
/// target cells + task.move_bonus * P(move succeeds).
TabularCMDP build_contextual_gridworld(const GridSpec& spec);

/// Cell/signature accessors for the state encoding above.
int grid_state_index(const GridSpec& spec, int row, int col);
int grid_signature_count(const GridSpec& spec);

/// The showcase pair used by the transfer benchmark: an open 5x5 field with
/// two targets and {plain, seek, avoid} tasks, and a walled maze over the
/// same rectangle whose single exit sits on one of the field's target cells,
/// with seek-exit tasks only.
GridSpec showcase_train_grid();
GridSpec showcase_test_grid();

}  // namespace ccmdp
