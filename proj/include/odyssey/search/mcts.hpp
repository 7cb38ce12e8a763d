#pragma once

#include <cmath>
#include <cstdio>
#include <vector>

#include "odyssey/core/rng.hpp"
#include "odyssey/diffusion/sampler.hpp"
#include "odyssey/rewards/rewards.hpp"
#include "odyssey/search/candidates.hpp"
#include "odyssey/search/config.hpp"
#include "odyssey/search/result.hpp"

namespace odyssey {

// UCB1 value of a child: mean reward plus C * sqrt(ln(parent visits) / child visits).
inline double ucb_score(double child_reward_sum, int child_visits, int parent_visits, double c) {
  return child_reward_sum / child_visits +
         c * std::sqrt(std::log(static_cast<double>(parent_visits)) / child_visits);
}

// A node of the denoising tree. Children, when expanded, are a contiguous
// block of exactly N nodes keyed by candidate index; the candidate noises for
// a depth live in the search-wide fixed table.
struct MctsNode {
  Vec latent;
  int step = 0;
  int first_child = -1;  // -1 while unexpanded
  int visit_count = 0;
  double reward_sum = 0.0;
};

// Monte Carlo tree search over the fixed denoising tree: per committed step,
// S simulations of UCB selection (unvisited children first, ties to the
// lowest index), expansion, random-child rollout to x0, and backpropagation;
// then the child with the highest mean reward is committed and its subtree
// reused. Measured step invocations are asserted against the (N+S)*T^2 bound.
inline SearchResult mcts(const SearchConfig& cfg, const Vec& x_T, ContextId context,
                         const Denoiser& den, const NoiseSchedule& sched, const RewardFn& reward) {
  cfg.validate(sched.steps);
  const int steps = sched.steps;
  const int n_cand = cfg.branching;
  const int dim = den.dimension();
  NfeMeter nfe;

  // Fixed per-step candidate sets, drawn once up front.
  std::vector<std::vector<Vec>> cands(static_cast<std::size_t>(steps) + 1);
  for (int t = 1; t <= steps; ++t) {
    auto& row = cands[static_cast<std::size_t>(t)];
    row.reserve(static_cast<std::size_t>(n_cand));
    for (int j = 0; j < n_cand; ++j) {
      RngStream st = RngStream::keyed(cfg.seed, StreamTag::mcts_candidate,
                                      static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(j));
      row.push_back(draw_global(st, sched.noise_std_at_step(t), dim));
    }
  }

  std::vector<MctsNode> nodes;
  nodes.push_back({x_T, steps, -1, 0, 0.0});
  int root = 0;
  bool warned_unbounded_reward = false;

  auto expand = [&](int idx) {
    int child0 = static_cast<int>(nodes.size());
    int t = nodes[static_cast<std::size_t>(idx)].step;
    for (int j = 0; j < n_cand; ++j) {
      DiffusionState s{context, nodes[static_cast<std::size_t>(idx)].latent, t};
      DiffusionState next = sampler_step(s, cands[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)],
                                         den, sched, nfe);
      nodes.push_back({std::move(next.latent), t - 1, -1, 0, 0.0});
    }
    nodes[static_cast<std::size_t>(idx)].first_child = child0;
  };

  auto select_child = [&](int idx) {
    const MctsNode& node = nodes[static_cast<std::size_t>(idx)];
    int best = -1;
    double best_ucb = 0.0;
    for (int j = 0; j < n_cand; ++j) {
      const MctsNode& ch = nodes[static_cast<std::size_t>(node.first_child + j)];
      if (ch.visit_count == 0) return node.first_child + j;  // unvisited priority, lowest index
      double u = ucb_score(ch.reward_sum, ch.visit_count, node.visit_count, cfg.ucb_c);
      if (best < 0 || u > best_ucb) {
        best = node.first_child + j;
        best_ucb = u;
      }
    }
    return best;
  };

  auto clamp_reward = [&](double r) {
    if (r < 0.0 || r > 1.0) {
      if (!warned_unbounded_reward) {
        std::fprintf(stderr, "mcts: reward %g outside [0,1]; clamping (UCB assumes bounded rewards)\n", r);
        warned_unbounded_reward = true;
      }
      r = clamp01(r);
    }
    return r;
  };

  SearchResult res;
  for (int t = steps; t >= 1; --t) {
    for (int s = 0; s < cfg.simulations; ++s) {
      RngStream sim = RngStream::keyed(cfg.seed, StreamTag::mcts_simulation,
                                       static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(s));
      std::vector<int> path{root};
      int cur = root;
      while (nodes[static_cast<std::size_t>(cur)].first_child >= 0) {  // selection
        cur = select_child(cur);
        path.push_back(cur);
      }

      Vec x0;
      if (nodes[static_cast<std::size_t>(cur)].step != 0) {
        expand(cur);  // expansion
        int k = sim.uniform_int(n_cand);
        int child = nodes[static_cast<std::size_t>(cur)].first_child + k;
        path.push_back(child);

        DiffusionState roll{context, nodes[static_cast<std::size_t>(child)].latent,
                            nodes[static_cast<std::size_t>(child)].step};
        while (roll.step > 0) {  // simulation
          Vec z;
          if (cfg.mcts_fresh_rollout_noise) {
            z = sim.gaussian_vector(dim, sched.noise_std_at_step(roll.step));
          } else {
            int idx = sim.uniform_int(n_cand);
            z = cands[static_cast<std::size_t>(roll.step)][static_cast<std::size_t>(idx)];
          }
          roll = sampler_step(roll, z, den, sched, nfe);
        }
        x0 = std::move(roll.latent);
      } else {
        x0 = nodes[static_cast<std::size_t>(cur)].latent;  // leaf already clean
      }

      double r = clamp_reward(reward.score(x0, context));
      for (int idx : path) {  // backpropagation
        nodes[static_cast<std::size_t>(idx)].visit_count += 1;
        nodes[static_cast<std::size_t>(idx)].reward_sum += r;
      }
    }

    // Commit the child with the highest mean reward; reuse its subtree.
    const MctsNode& r_node = nodes[static_cast<std::size_t>(root)];
    if (r_node.first_child < 0)
      throw NumericError("mcts: root never expanded (S too small for selection to reach it)");
    int best = -1;
    double best_mean = 0.0;
    for (int j = 0; j < n_cand; ++j) {
      const MctsNode& ch = nodes[static_cast<std::size_t>(r_node.first_child + j)];
      if (ch.visit_count == 0) continue;
      double mean = ch.reward_sum / ch.visit_count;
      if (best < 0 || mean > best_mean) {
        best = r_node.first_child + j;
        best_mean = mean;
      }
    }
    if (best < 0) throw NumericError("mcts: no visited child to commit");
    res.trajectory.noises.push_back(
        cands[static_cast<std::size_t>(t)][static_cast<std::size_t>(best - r_node.first_child)]);
    root = best;
  }

  res.sample = nodes[static_cast<std::size_t>(root)].latent;
  res.reward = clamp_reward(reward.score(res.sample, context));
  res.nfe = nfe.snapshot();

  const std::int64_t bound = static_cast<std::int64_t>(n_cand + cfg.simulations) *
                             static_cast<std::int64_t>(steps) * static_cast<std::int64_t>(steps);
  if (res.nfe.step_invocations > bound)
    throw NumericError("mcts: measured NFE exceeds the (N+S)*T^2 bound");
  return res;
}

}  // namespace odyssey
