#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "odyssey/core/rng.hpp"
#include "odyssey/core/types.hpp"
#include "odyssey/diffusion/sampler.hpp"
#include "odyssey/rewards/rewards.hpp"
#include "odyssey/search/candidates.hpp"
#include "odyssey/search/config.hpp"
#include "odyssey/search/result.hpp"

namespace odyssey {

// How global-exploration candidates are drawn. The Gaussian prior is the
// algorithmic default; the truncated uniform ball is the theorem-faithful
// variant used by the regret experiment.
enum class GlobalDrawMode { gaussian, uniform_ball };

struct StepSearchParams {
  int branching = 4;       // N
  int iterations = 20;     // K for this step
  double lambda = 0.15;
  double epsilon = 0.4;
  LocalMode local_mode = LocalMode::uniform_radius;
  bool strict_replacement = false;
  std::uint64_t seed = 0;
  bool record_trace = false;
  GlobalDrawMode global_mode = GlobalDrawMode::gaussian;
  double ball_radius = 0.0;  // uniform_ball only
};

struct StepSearchOutcome {
  Vec pivot;        // committed noise for this step
  Vec post_latent;  // cached f(x_t, pivot); commits cost no extra NFE
  double surrogate = 0.0;
  std::vector<PivotTraceEntry> trace;
};

namespace detail {

inline Vec draw_uniform_ball(RngStream& rng, double radius, int dim) {
  Vec z = rng.gaussian_vector(dim, 1.0);
  double n = norm(z);
  double r = radius * std::pow(rng.uniform(), 1.0 / dim);
  double s = n > 0.0 ? r / n : 0.0;
  for (auto& v : z) v *= s;
  return z;
}

}  // namespace detail

// One bandit round at a single timestep: K iterations of N candidates, each
// independently global (with probability epsilon) or local around the current
// pivot. Candidates are scored by the reward of the Tweedie estimate of the
// post-step latent; the incumbent pivot is retained unless a candidate is
// strictly better (or unconditionally replaced in strict mode). Ties pick the
// lowest candidate index. Exactly N*K sampler-step invocations; the winning
// candidate's post-step latent is cached so committing is free.
inline StepSearchOutcome search_step(const DiffusionState& state, const StepSearchParams& p,
                                     const Denoiser& den, const NoiseSchedule& sched,
                                     const RewardFn& reward, NfeMeter& nfe) {
  const int t = state.step;
  const int dim = den.dimension();
  const double noise_std = sched.noise_std_at_step(t);
  const double dst_level = sched.level_at_step(t - 1);

  RngStream pivot_stream = RngStream::keyed(p.seed, StreamTag::pivot, static_cast<std::uint64_t>(t));
  Vec pivot = draw_global(pivot_stream, noise_std, dim);

  StepSearchOutcome out;
  bool have_incumbent = false;

  for (int k = 1; k <= p.iterations; ++k) {
    int best_i = -1;
    double best_score = 0.0;
    Vec best_noise;
    Vec best_latent;
    bool best_is_global = false;

    for (int i = 0; i < p.branching; ++i) {
      RngStream st = RngStream::keyed(p.seed, StreamTag::candidate, static_cast<std::uint64_t>(t),
                                      static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(i));
      bool global = st.uniform() < p.epsilon;
      Vec z = global ? (p.global_mode == GlobalDrawMode::gaussian
                            ? draw_global(st, noise_std, dim)
                            : detail::draw_uniform_ball(st, p.ball_radius, dim))
                     : draw_local(st, pivot, p.lambda, dim, p.local_mode);

      DiffusionState next = sampler_step(state, z, den, sched, nfe);
      Vec x0_hat = tweedie_estimate(next.latent, dst_level, state.context, den, sched.kind, nfe);
      double sc = reward.score(x0_hat, state.context);

      if (best_i < 0 || sc > best_score) {
        best_i = i;
        best_score = sc;
        best_noise = std::move(z);
        best_latent = std::move(next.latent);
        best_is_global = global;
      }
    }

    PivotChoice choice;
    if (p.strict_replacement || !have_incumbent || best_score > out.surrogate) {
      pivot = best_noise;
      out.pivot = std::move(best_noise);
      out.post_latent = std::move(best_latent);
      out.surrogate = best_score;
      have_incumbent = true;
      choice = best_is_global ? PivotChoice::global_draw : PivotChoice::local_draw;
    } else {
      choice = PivotChoice::keep;
    }

    if (p.record_trace) out.trace.push_back({t, k, choice, out.surrogate});
  }

  return out;
}

}  // namespace odyssey
