#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "odyssey/core/types.hpp"

namespace odyssey {

enum class LocalMode { uniform_radius, fixed_radius };

// Knobs shared by the trajectory-search algorithms. Field letters follow the
// usual search notation: N branching, K local iterations, S simulations,
// B beam width, C the UCB exploration constant.
struct SearchConfig {
  int branching = 4;                 // N
  int local_iters = 20;              // K (constant form)
  std::vector<int> k_schedule;       // per-timestep K_t, noisy end first; empty = constant
  double lambda = 0.15;              // max step-size scaling factor
  double epsilon = 0.4;              // global-exploration probability
  int simulations = 8;               // S
  int beam_width = 2;                // B
  double ucb_c = 1.414;              // C
  std::uint64_t seed = 0;

  // Ablations / variants.
  bool strict_pivot_replacement = false;  // replace the pivot unconditionally
  bool mcts_fresh_rollout_noise = false;  // draw fresh rollout noise instead of reusing candidates
  LocalMode zero_order_mode = LocalMode::fixed_radius;

  int k_at_step(int t, int steps) const {
    if (k_schedule.empty()) return local_iters;
    return k_schedule[static_cast<std::size_t>(steps - t)];
  }

  double mean_k(int steps) const {
    if (k_schedule.empty()) return static_cast<double>(local_iters);
    double s = std::accumulate(k_schedule.begin(), k_schedule.end(), 0.0);
    return s / static_cast<double>(steps);
  }

  void validate(int steps) const {
    if (branching < 1) throw ConfigError("search config: N must be >= 1");
    if (k_schedule.empty()) {
      if (local_iters < 1) throw ConfigError("search config: K must be >= 1");
    } else {
      if (static_cast<int>(k_schedule.size()) != steps)
        throw ConfigError("search config: K schedule has " +
                          std::to_string(k_schedule.size()) + " entries but T = " +
                          std::to_string(steps));
      for (int k : k_schedule)
        if (k < 1) throw ConfigError("search config: every K_t must be >= 1");
    }
    if (lambda < 0.0) throw ConfigError("search config: lambda must be >= 0");
    if (epsilon < 0.0 || epsilon > 1.0) throw ConfigError("search config: epsilon must be in [0, 1]");
    if (simulations < 1) throw ConfigError("search config: S must be >= 1");
    if (beam_width < 1) throw ConfigError("search config: B must be >= 1");
  }
};

}  // namespace odyssey
