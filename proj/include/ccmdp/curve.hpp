#pragma once

#include <cstdint>
#include <vector>

namespace ccmdp {

/// Per-episode record of one seeded learning run.
struct LearningCurve {
  std::vector<double> returns;  // discounted return per episode
  std::vector<int> steps;       // steps per episode
  std::vector<int> contexts;    // context sampled per episode
  std::uint64_t seed = 0;
};

}  // namespace ccmdp
