#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "odyssey/core/rng.hpp"
#include "odyssey/diffusion/sampler.hpp"
#include "odyssey/models/gmm.hpp"
#include "odyssey/rewards/rewards.hpp"
#include "odyssey/search/candidates.hpp"

namespace odyssey {

struct LipschitzPoint {
  double sigma_t = 0.0;
  double grad_norm_mean = 0.0;
  double grad_norm_std = 0.0;
  int samples = 0;
};

struct LipschitzCurve {
  std::vector<LipschitzPoint> points;  // strictly monotone sigma axis
};

// Reward-sensitivity estimator ||grad_{x_t} r(x0_hat(x_t), c)||_2 by central
// finite differences of the composite x_t -> r(tweedie(x_t, level_t)).
// subspace_dim = 0 differentiates along all d coordinates; a positive value m
// uses m random directions with the sqrt(d/m) norm rescaling.
inline double estimate_lipschitz(int t, const Vec& x_t, ContextId context, const Denoiser& den,
                                 const NoiseSchedule& sched, const RewardFn& reward,
                                 double fd_step, int subspace_dim = 0,
                                 std::uint64_t subspace_seed = 0) {
  if (!(fd_step > 0.0)) throw ConfigError("estimate_lipschitz: fd_step must be > 0");
  const int dim = den.dimension();
  const double level = sched.level_at_step(t);
  NfeMeter nfe;

  auto composite = [&](const Vec& x, int coord) {
    Vec x0_hat = tweedie_estimate(x, level, context, den, sched.kind, nfe);
    double r = reward.score(x0_hat, context);
    if (!std::isfinite(r))
      throw NumericError("estimate_lipschitz: non-finite reward under perturbation of coordinate " +
                         std::to_string(coord));
    return r;
  };

  double sq = 0.0;
  Vec x = x_t;
  if (subspace_dim <= 0) {
    for (int i = 0; i < dim; ++i) {
      double orig = x[static_cast<std::size_t>(i)];
      x[static_cast<std::size_t>(i)] = orig + fd_step;
      double fp = composite(x, i);
      x[static_cast<std::size_t>(i)] = orig - fd_step;
      double fm = composite(x, i);
      x[static_cast<std::size_t>(i)] = orig;
      double g = (fp - fm) / (2.0 * fd_step);
      sq += g * g;
    }
  } else {
    RngStream rng = RngStream::keyed(subspace_seed, StreamTag::subspace,
                                     static_cast<std::uint64_t>(t));
    for (int j = 0; j < subspace_dim; ++j) {
      Vec u = rng.gaussian_vector(dim, 1.0);
      double n = norm(u);
      for (auto& v : u) v /= n;
      Vec xp = x_t, xm = x_t;
      axpy(fd_step, u, xp);
      axpy(-fd_step, u, xm);
      double g = (composite(xp, j) - composite(xm, j)) / (2.0 * fd_step);
      sq += g * g;
    }
    sq *= static_cast<double>(dim) / subspace_dim;
  }
  return std::sqrt(sq);
}

// Per-sigma average of estimate_lipschitz over fresh naive-rollout latents.
// Each seed contributes one rollout; the latent reached at step t feeds the
// estimate for sigma_t. fd_step defaults to 1e-3 * effective sigma.
inline LipschitzCurve lipschitz_sweep(const GmmModel& model, const RewardFn& reward, int seeds,
                                      const NoiseSchedule& sched, std::uint64_t base_seed = 0,
                                      int subspace_dim = 0) {
  if (seeds < 10) throw ConfigError("lipschitz_sweep: seeds must be >= 10");
  GmmDenoiser den(model, sched.kind);
  const int dim = den.dimension();
  const int steps = sched.steps;

  std::vector<std::vector<double>> by_step(static_cast<std::size_t>(steps));
  for (int s = 0; s < seeds; ++s) {
    std::uint64_t seed = fold(base_seed, static_cast<std::uint64_t>(s));
    ContextId context = s % model.context_count();
    RngStream init = RngStream::keyed(seed, StreamTag::initial);
    NfeMeter nfe;
    DiffusionState st{context, init.gaussian_vector(dim, sched.kind == ScheduleKind::VE
                                                             ? sched.level_at_step(steps)
                                                             : 1.0),
                      steps};
    for (int t = steps; t >= 1; --t) {
      double fd = 1e-3 * std::max(sched.effective_sigma_at_step(t), 1e-6);
      double g = estimate_lipschitz(t, st.latent, context, den, sched, reward, fd, subspace_dim,
                                    seed);
      by_step[static_cast<std::size_t>(steps - t)].push_back(g);
      RngStream traj = RngStream::keyed(seed, StreamTag::trajectory, 0, static_cast<std::uint64_t>(t));
      Vec z = draw_global(traj, sched.noise_std_at_step(t), dim);
      st = sampler_step(st, z, den, sched, nfe);
    }
  }

  LipschitzCurve curve;
  for (int t = steps; t >= 1; --t) {
    const auto& vals = by_step[static_cast<std::size_t>(steps - t)];
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= vals.size();
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var = vals.size() > 1 ? var / (vals.size() - 1) : 0.0;
    curve.points.push_back(
        {sched.effective_sigma_at_step(t), mean, std::sqrt(var), static_cast<int>(vals.size())});
  }
  return curve;
}

}  // namespace odyssey
