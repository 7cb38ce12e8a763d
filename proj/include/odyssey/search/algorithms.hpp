#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "odyssey/core/rng.hpp"
#include "odyssey/diffusion/sampler.hpp"
#include "odyssey/rewards/rewards.hpp"
#include "odyssey/search/local_search.hpp"
#include "odyssey/search/result.hpp"

namespace odyssey {

namespace detail {

struct RolloutOutcome {
  Vec sample;
  NoiseTrajectory trajectory;
  double reward = 0.0;
};

// One full seeded rollout; noise for step t of rollout n comes from the
// stream keyed (seed, trajectory, n, t), so rollout 0 of any N reproduces a
// plain naive rollout bit for bit.
inline RolloutOutcome seeded_rollout(std::uint64_t seed, int rollout_index, const Vec& x_T,
                                     ContextId context, const Denoiser& den,
                                     const NoiseSchedule& sched, const RewardFn& reward,
                                     NfeMeter& nfe) {
  RolloutOutcome out;
  DiffusionState s{context, x_T, sched.steps};
  const int dim = den.dimension();
  for (int t = sched.steps; t >= 1; --t) {
    RngStream st = RngStream::keyed(seed, StreamTag::trajectory,
                                    static_cast<std::uint64_t>(rollout_index),
                                    static_cast<std::uint64_t>(t));
    Vec z = draw_global(st, sched.noise_std_at_step(t), dim);
    out.trajectory.noises.push_back(z);
    s = sampler_step(s, z, den, sched, nfe);
  }
  out.sample = std::move(s.latent);
  out.reward = reward.score(out.sample, context);
  return out;
}

}  // namespace detail

// Plain stochastic sampling: fresh noise at every step. NFE = T.
inline SearchResult naive_sample(const SearchConfig& cfg, const Vec& x_T, ContextId context,
                                 const Denoiser& den, const NoiseSchedule& sched,
                                 const RewardFn& reward) {
  NfeMeter nfe;
  auto ro = detail::seeded_rollout(cfg.seed, 0, x_T, context, den, sched, reward, nfe);
  return {std::move(ro.sample), std::move(ro.trajectory), ro.reward, nfe.snapshot(), {}};
}

// N independent rollouts sharing x_T; the highest terminal reward wins,
// ties resolved toward the lowest rollout index. NFE = N*T.
inline SearchResult best_of_n(const SearchConfig& cfg, const Vec& x_T, ContextId context,
                              const Denoiser& den, const NoiseSchedule& sched,
                              const RewardFn& reward) {
  cfg.validate(sched.steps);
  NfeMeter nfe;
  SearchResult best;
  for (int n = 0; n < cfg.branching; ++n) {
    auto ro = detail::seeded_rollout(cfg.seed, n, x_T, context, den, sched, reward, nfe);
    if (n == 0 || ro.reward > best.reward) {
      best.sample = std::move(ro.sample);
      best.trajectory = std::move(ro.trajectory);
      best.reward = ro.reward;
    }
  }
  best.nfe = nfe.snapshot();
  return best;
}

// Beam search over the denoising tree: one candidate set shared across beams
// per step, children ranked by the reward of their Tweedie estimate, top B
// kept (ties toward the lexicographically lowest (beam, candidate) pair).
// NFE = N*B*T step invocations.
inline SearchResult beam_search(const SearchConfig& cfg, const std::vector<Vec>& x_T_beams,
                                ContextId context, const Denoiser& den, const NoiseSchedule& sched,
                                const RewardFn& reward) {
  cfg.validate(sched.steps);
  const int n_cand = cfg.branching;
  const int width = cfg.beam_width;
  if (static_cast<int>(x_T_beams.size()) != width)
    throw ConfigError("beam_search: need exactly B initial latents");
  const int dim = den.dimension();
  NfeMeter nfe;

  std::vector<Vec> beam_latents = x_T_beams;
  std::vector<std::vector<int>> beam_paths(static_cast<std::size_t>(width));
  std::vector<std::vector<Vec>> candidate_history;  // per step, the shared N noises

  struct Child {
    double score;
    int beam;
    int cand;
    Vec latent;
  };

  for (int t = sched.steps; t >= 1; --t) {
    std::vector<Vec> cands;
    cands.reserve(static_cast<std::size_t>(n_cand));
    for (int i = 0; i < n_cand; ++i) {
      RngStream st = RngStream::keyed(cfg.seed, StreamTag::beam_candidate,
                                      static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(i));
      cands.push_back(draw_global(st, sched.noise_std_at_step(t), dim));
    }

    const double dst_level = sched.level_at_step(t - 1);
    std::vector<Child> children;
    children.reserve(static_cast<std::size_t>(width * n_cand));
    for (int j = 0; j < width; ++j) {
      DiffusionState s{context, beam_latents[static_cast<std::size_t>(j)], t};
      for (int i = 0; i < n_cand; ++i) {
        DiffusionState next = sampler_step(s, cands[static_cast<std::size_t>(i)], den, sched, nfe);
        Vec x0_hat = tweedie_estimate(next.latent, dst_level, context, den, sched.kind, nfe);
        children.push_back({reward.score(x0_hat, context), j, i, std::move(next.latent)});
      }
    }

    std::stable_sort(children.begin(), children.end(), [](const Child& a, const Child& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.beam != b.beam) return a.beam < b.beam;
      return a.cand < b.cand;
    });

    std::vector<Vec> next_latents;
    std::vector<std::vector<int>> next_paths;
    for (int j = 0; j < width; ++j) {
      Child& c = children[static_cast<std::size_t>(j)];
      next_latents.push_back(std::move(c.latent));
      auto path = beam_paths[static_cast<std::size_t>(c.beam)];
      path.push_back(c.cand);
      next_paths.push_back(std::move(path));
    }
    beam_latents = std::move(next_latents);
    beam_paths = std::move(next_paths);
    candidate_history.push_back(std::move(cands));
  }

  int best_beam = 0;
  double best_reward = -1.0;
  for (int j = 0; j < width; ++j) {
    double r = reward.score(beam_latents[static_cast<std::size_t>(j)], context);
    if (r > best_reward) {
      best_reward = r;
      best_beam = j;
    }
  }

  SearchResult res;
  res.sample = beam_latents[static_cast<std::size_t>(best_beam)];
  res.reward = best_reward;
  const auto& path = beam_paths[static_cast<std::size_t>(best_beam)];
  for (std::size_t step = 0; step < path.size(); ++step)
    res.trajectory.noises.push_back(candidate_history[step][static_cast<std::size_t>(path[step])]);
  res.nfe = nfe.snapshot();
  return res;
}

namespace detail {

// Shared body of the two per-step bandit searches. NFE = N * sum_t K_t.
inline SearchResult per_step_search(const SearchConfig& cfg, double epsilon, LocalMode mode,
                                    const Vec& x_T, ContextId context, const Denoiser& den,
                                    const NoiseSchedule& sched, const RewardFn& reward,
                                    bool record_trace) {
  cfg.validate(sched.steps);
  NfeMeter nfe;
  SearchResult res;
  DiffusionState s{context, x_T, sched.steps};
  for (int t = sched.steps; t >= 1; --t) {
    StepSearchParams p;
    p.branching = cfg.branching;
    p.iterations = cfg.k_at_step(t, sched.steps);
    p.lambda = cfg.lambda;
    p.epsilon = epsilon;
    p.local_mode = mode;
    p.strict_replacement = cfg.strict_pivot_replacement;
    p.seed = cfg.seed;
    p.record_trace = record_trace;
    StepSearchOutcome out = search_step(s, p, den, sched, reward, nfe);
    res.trajectory.noises.push_back(std::move(out.pivot));
    if (record_trace)
      res.pivot_trace.insert(res.pivot_trace.end(), out.trace.begin(), out.trace.end());
    s = DiffusionState{context, std::move(out.post_latent), t - 1};
  }
  res.sample = std::move(s.latent);
  res.reward = reward.score(res.sample, context);
  res.nfe = nfe.snapshot();
  return res;
}

}  // namespace detail

// Hill-climbing without global exploration: a fresh pivot per step, K rounds
// of N radius-limited candidates (fixed radius by default).
inline SearchResult zero_order_search(const SearchConfig& cfg, const Vec& x_T, ContextId context,
                                      const Denoiser& den, const NoiseSchedule& sched,
                                      const RewardFn& reward, bool record_trace = false) {
  return detail::per_step_search(cfg, 0.0, cfg.zero_order_mode, x_T, context, den, sched, reward,
                                 record_trace);
}

// Epsilon-contaminated zero-order search: each candidate is an independent
// global prior draw with probability epsilon, otherwise a uniform-radius
// local draw around the pivot.
inline SearchResult epsilon_greedy(const SearchConfig& cfg, const Vec& x_T, ContextId context,
                                   const Denoiser& den, const NoiseSchedule& sched,
                                   const RewardFn& reward, bool record_trace = false) {
  return detail::per_step_search(cfg, cfg.epsilon, LocalMode::uniform_radius, x_T, context, den,
                                 sched, reward, record_trace);
}

}  // namespace odyssey
