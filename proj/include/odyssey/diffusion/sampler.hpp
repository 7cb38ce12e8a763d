#pragma once

#include <cmath>
#include <string>

#include "odyssey/core/types.hpp"
#include "odyssey/diffusion/denoiser.hpp"
#include "odyssey/diffusion/schedule.hpp"

namespace odyssey {

namespace detail {

inline Vec call_denoiser(const Denoiser& den, const Vec& x, double level, ContextId c,
                         NfeMeter& nfe) {
  nfe.add_raw_calls(1);
  return den.posterior_mean(x, level, c);
}

inline void require_steppable(const DiffusionState& s) {
  if (s.step < 1) throw NumericError("sampler step: state is already at step 0");
  if (!all_finite(s.latent)) throw NumericError("sampler step: non-finite latent");
}

}  // namespace detail

// One stochastic EDM step (churn inflation, Euler, Heun correction unless the
// destination level is 0). Uses the provided noise vector as the injected
// churn noise. Exactly one denoiser call when the destination level is 0,
// otherwise exactly two.
inline DiffusionState edm_step(const DiffusionState& state, const Vec& noise, const Denoiser& den,
                               const NoiseSchedule& sched, NfeMeter& nfe) {
  detail::require_steppable(state);
  if (sched.kind != ScheduleKind::VE) throw ConfigError("edm_step requires a VE schedule");
  nfe.add_step_invocation();

  const int t = state.step;
  const double sigma_src = sched.level_at_step(t);
  const double sigma_dst = sched.level_at_step(t - 1);
  const double gamma = sched.gamma_at_step(t);
  const double t_hat = (1.0 + gamma) * sigma_src;

  Vec x_hat = state.latent;
  if (gamma > 0.0) {
    const double inflate = std::sqrt(t_hat * t_hat - sigma_src * sigma_src);
    axpy(inflate, noise, x_hat);
  }

  Vec d0 = detail::call_denoiser(den, x_hat, t_hat, state.context, nfe);
  for (std::size_t i = 0; i < d0.size(); ++i) d0[i] = (x_hat[i] - d0[i]) / t_hat;

  Vec x_next = x_hat;
  axpy(sigma_dst - t_hat, d0, x_next);

  if (sigma_dst != 0.0) {
    Vec d1 = detail::call_denoiser(den, x_next, sigma_dst, state.context, nfe);
    for (std::size_t i = 0; i < d1.size(); ++i) d1[i] = (x_next[i] - d1[i]) / sigma_dst;
    x_next = x_hat;
    for (std::size_t i = 0; i < x_next.size(); ++i)
      x_next[i] += (sigma_dst - t_hat) * (0.5 * d0[i] + 0.5 * d1[i]);
  }

  if (!all_finite(x_next)) throw NumericError("edm_step: non-finite latent after step");
  return {state.context, std::move(x_next), t - 1};
}

// One DDIM step. The epsilon prediction is recovered from the posterior mean
// via eps = (x_t - sqrt(alpha_t) x0_hat) / sqrt(1 - alpha_t). Exactly one
// denoiser call.
inline DiffusionState ddim_step(const DiffusionState& state, const Vec& noise, const Denoiser& den,
                                const NoiseSchedule& sched, NfeMeter& nfe) {
  detail::require_steppable(state);
  if (sched.kind != ScheduleKind::VP) throw ConfigError("ddim_step requires a VP schedule");
  nfe.add_step_invocation();

  const int t = state.step;
  const double alpha_t = sched.level_at_step(t);
  const double alpha_prev = sched.level_at_step(t - 1);
  const double ratio = alpha_t / alpha_prev;
  if (!(ratio > 0.0) || ratio > 1.0 + 1e-12)
    throw ConfigError("ddim_step: alpha ratio outside (0, 1]");
  if (alpha_t >= 1.0) {
    // Degenerate all-clean schedule entry: the update is the identity.
    Vec same = detail::call_denoiser(den, state.latent, alpha_t, state.context, nfe);
    return {state.context, std::move(same), t - 1};
  }

  const double sigma_t =
      sched.eta * std::sqrt((1.0 - alpha_prev) / (1.0 - alpha_t)) *
      std::sqrt(std::max(0.0, 1.0 - ratio));

  Vec x0_hat = detail::call_denoiser(den, state.latent, alpha_t, state.context, nfe);

  const double sqrt_at = std::sqrt(alpha_t);
  const double sqrt_one_minus_at = std::sqrt(1.0 - alpha_t);
  const double mean_scale = std::sqrt(alpha_prev / alpha_t);
  const double eps_coef = std::sqrt(alpha_prev * (1.0 - alpha_t) / alpha_t) -
                          std::sqrt(std::max(0.0, 1.0 - alpha_prev - sigma_t * sigma_t));

  Vec x_next(state.latent.size());
  for (std::size_t i = 0; i < x_next.size(); ++i) {
    const double eps = (state.latent[i] - sqrt_at * x0_hat[i]) / sqrt_one_minus_at;
    x_next[i] = mean_scale * state.latent[i] - eps_coef * eps + sigma_t * noise[i];
  }

  if (!all_finite(x_next)) throw NumericError("ddim_step: non-finite latent after step");
  return {state.context, std::move(x_next), t - 1};
}

inline DiffusionState sampler_step(const DiffusionState& state, const Vec& noise,
                                   const Denoiser& den, const NoiseSchedule& sched,
                                   NfeMeter& nfe) {
  return sched.kind == ScheduleKind::VE ? edm_step(state, noise, den, sched, nfe)
                                        : ddim_step(state, noise, den, sched, nfe);
}

// Posterior-mean (clean sample) estimate from a noisy latent. At the terminal
// level (sigma 0 / alpha 1) the latent is already clean and is returned
// unchanged with no denoiser call; otherwise exactly one call.
inline Vec tweedie_estimate(const Vec& latent, double level, ContextId context,
                            const Denoiser& den, ScheduleKind kind, NfeMeter& nfe) {
  if (kind == ScheduleKind::VE && level == 0.0) return latent;
  if (kind == ScheduleKind::VP && level >= 1.0) return latent;
  return detail::call_denoiser(den, latent, level, context, nfe);
}

// Deterministic composition of T sampler steps driven by a full noise trajectory.
inline Vec rollout(const Vec& x_T, const NoiseTrajectory& z, ContextId context,
                   const Denoiser& den, const NoiseSchedule& sched, NfeMeter& nfe) {
  if (z.rows() != sched.steps)
    throw ConfigError("rollout: trajectory row count " + std::to_string(z.rows()) +
                      " does not match schedule steps " + std::to_string(sched.steps));
  DiffusionState s{context, x_T, sched.steps};
  for (int t = sched.steps; t >= 1; --t) {
    const Vec& noise = z.at_step(t);
    if (noise.size() != x_T.size()) throw ConfigError("rollout: trajectory row dimension mismatch");
    s = sampler_step(s, noise, den, sched, nfe);
  }
  return s.latent;
}

}  // namespace odyssey
