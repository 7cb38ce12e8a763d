#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "odyssey/core/types.hpp"

namespace odyssey {

enum class ScheduleKind { VE, VP };

inline const char* to_string(ScheduleKind k) { return k == ScheduleKind::VE ? "ve" : "vp"; }

// Discretized noise schedule shared by both samplers.
//
// levels[] holds T+1 entries ordered from the noisy end to the clean end:
// index i corresponds to step T-i. For VE these are sigma values with
// levels[T] == 0 exactly; for VP they are cumulative alpha coefficients with
// levels[T] == 1 at the clean end.
struct NoiseSchedule {
  ScheduleKind kind = ScheduleKind::VE;
  int steps = 0;              // T
  std::vector<double> levels; // size T+1
  std::vector<double> gamma;  // VE only, size T; gamma[i] applies to the step leaving levels[i]
  double eta = 1.0;           // VP only

  double level_at_step(int t) const { return levels[static_cast<std::size_t>(steps - t)]; }
  double gamma_at_step(int t) const { return gamma[static_cast<std::size_t>(steps - t)]; }

  // Std of the noise prior the samplers consume at step t: sigma_t for VE
  // (candidates ~ N(0, sigma_t^2 I)), unit for VP (the DDIM update applies
  // its own sigma_t factor to the injected noise).
  double noise_std_at_step(int t) const {
    return kind == ScheduleKind::VE ? level_at_step(t) : 1.0;
  }

  // Effective sigma axis for diagnostics: sigma_t for VE,
  // sqrt((1-alpha_t)/alpha_t) for VP.
  double effective_sigma_at_step(int t) const {
    if (kind == ScheduleKind::VE) return level_at_step(t);
    double a = level_at_step(t);
    return std::sqrt((1.0 - a) / a);
  }
};

// EDM-default power-law discretization. levels[i] follows the rho-grid for
// i = 0..T-1 and the terminal entry is exactly 0. gamma_i = min(churn/T, sqrt(2)-1).
inline NoiseSchedule build_ve_schedule(int steps, double sigma_min, double sigma_max, double rho,
                                       double churn) {
  if (steps < 1) throw ConfigError("ve schedule: steps must be >= 1");
  if (!(sigma_min > 0.0) || !(sigma_min < sigma_max))
    throw ConfigError("ve schedule: need 0 < sigma_min < sigma_max");
  if (!(rho > 0.0)) throw ConfigError("ve schedule: rho must be > 0");
  if (churn < 0.0) throw ConfigError("ve schedule: churn must be >= 0");

  NoiseSchedule s;
  s.kind = ScheduleKind::VE;
  s.steps = steps;
  s.levels.resize(static_cast<std::size_t>(steps) + 1);
  double inv_rho = 1.0 / rho;
  double hi = std::pow(sigma_max, inv_rho);
  double lo = std::pow(sigma_min, inv_rho);
  for (int i = 0; i < steps; ++i) {
    double frac = steps > 1 ? static_cast<double>(i) / (steps - 1) : 0.0;
    s.levels[static_cast<std::size_t>(i)] = std::pow(hi + frac * (lo - hi), rho);
  }
  s.levels[static_cast<std::size_t>(steps)] = 0.0;

  constexpr double kGammaMax = 0.41421356237309515;  // sqrt(2) - 1
  double g = std::min(churn / steps, kGammaMax);
  s.gamma.assign(static_cast<std::size_t>(steps), g);
  return s;
}

// Linear-beta DDPM discretization feeding the DDIM alpha coefficients:
// alpha_t = prod_{i<=t} (1 - beta_i) with beta linear from beta_min to beta_max.
inline NoiseSchedule build_vp_schedule(int steps, double beta_min, double beta_max,
                                       double eta = 1.0) {
  if (steps < 1) throw ConfigError("vp schedule: steps must be >= 1");
  if (!(beta_min >= 0.0) || !(beta_min <= beta_max) || !(beta_max < 1.0))
    throw ConfigError("vp schedule: need 0 <= beta_min <= beta_max < 1");
  if (eta < 0.0 || eta > 1.0) throw ConfigError("vp schedule: eta must be in [0, 1]");

  NoiseSchedule s;
  s.kind = ScheduleKind::VP;
  s.steps = steps;
  s.eta = eta;
  s.levels.resize(static_cast<std::size_t>(steps) + 1);
  s.levels[static_cast<std::size_t>(steps)] = 1.0;  // alpha_0, clean end
  double alpha = 1.0;
  for (int t = 1; t <= steps; ++t) {
    double frac = steps > 1 ? static_cast<double>(t - 1) / (steps - 1) : 0.0;
    double beta = beta_min + frac * (beta_max - beta_min);
    alpha *= 1.0 - beta;
    s.levels[static_cast<std::size_t>(steps - t)] = alpha;
  }
  return s;
}

}  // namespace odyssey
