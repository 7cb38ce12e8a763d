#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "odyssey/diffusion/sampler.hpp"
#include "odyssey/models/synthetic.hpp"
#include "odyssey/rewards/rewards.hpp"
#include "odyssey/search/local_search.hpp"

namespace odyssey {

struct RegretGridPoint {
  double epsilon = 0.5;
  int branching = 4;
  int iterations = 4;
};

struct RegretConfig {
  int dim = 2;
  double data_tau = 0.25;
  std::vector<RegretGridPoint> grid;
  int trials = 200;
  int steps = 8;
  int frozen_step = 4;
  double sigma_min = 0.05;
  double sigma_max = 10.0;
  double rho = 7.0;
  double churn = 40.0;  // the frozen step must actually consume its noise
  // Zero-width local moves isolate the covering mechanism the regret bound
  // describes; raise lambda to study how hill-climbing accelerates the decay.
  double lambda = 0.0;
  double s_factor = 0.35;  // mode_distance width relative to the reachable image of the ball
  bool theorem_faithful = false;  // clip global draws to the high-probability ball
  double eta_confidence = 0.01;
  std::uint64_t seed = 0;
};

// Canonical grid: M = eps*N*K in {8, 64, 512} scaled through the branching
// factor with the per-step iteration budget held fixed.
inline std::vector<RegretGridPoint> default_regret_grid() {
  return {{0.5, 4, 4}, {0.5, 32, 4}, {0.5, 256, 4}};
}

struct RegretPoint {
  int m = 0;  // round(eps * N * K)
  double simple_regret_mean = 0.0;
  double simple_regret_std = 0.0;
};

struct RegretCurve {
  std::vector<RegretPoint> points;  // strictly increasing m
  double fitted_slope = 0.0;        // log-log least squares
};

// Simple-regret decay of the epsilon-greedy bandit round at one frozen
// timestep. The data model is a single Gaussian, so the candidate-to-estimate
// map is affine and the mode_distance reward centered on the image of an
// in-ball point z* has a known exact maximum of 1; simple regret is
// 1 - surrogate(final pivot), computed exactly.
inline RegretCurve regret_experiment(const RegretConfig& cfg) {
  if (cfg.dim < 1 || cfg.dim > 8) throw ConfigError("regret experiment: dim must be in [1, 8]");
  if (cfg.trials < 1) throw ConfigError("regret experiment: trials must be >= 1");
  std::set<int> distinct;
  for (const auto& g : cfg.grid)
    distinct.insert(static_cast<int>(std::lround(g.epsilon * g.branching * g.iterations)));
  if (distinct.size() < 3)
    throw ConfigError("regret experiment: need at least 3 distinct M = eps*N*K values for a slope fit");

  GmmModel model = make_single_gaussian(Vec(static_cast<std::size_t>(cfg.dim), 0.0), cfg.data_tau);
  GmmDenoiser den(model, ScheduleKind::VE);
  NoiseSchedule sched = build_ve_schedule(cfg.steps, cfg.sigma_min, cfg.sigma_max, cfg.rho, cfg.churn);
  const int t = cfg.frozen_step;
  if (t < 1 || t > cfg.steps) throw ConfigError("regret experiment: frozen step outside [1, T]");
  const double sigma_t = sched.level_at_step(t);
  const double dst_level = sched.level_at_step(t - 1);
  const double ball_radius = sigma_t * std::sqrt(cfg.dim * std::log(1.0 / cfg.eta_confidence));

  // Frozen latent from the exact marginal at sigma_t.
  RngStream init = RngStream::keyed(cfg.seed, StreamTag::initial);
  double marginal_std = std::sqrt(cfg.data_tau * cfg.data_tau + sigma_t * sigma_t);
  DiffusionState state{0, init.gaussian_vector(cfg.dim, marginal_std), t};

  auto predict = [&](const Vec& z) {
    NfeMeter scratch;
    DiffusionState next = sampler_step(state, z, den, sched, scratch);
    return tweedie_estimate(next.latent, dst_level, 0, den, ScheduleKind::VE, scratch);
  };

  // Target: the image of an in-ball point, so the in-ball maximum is exactly 1.
  RngStream dir_stream = RngStream::keyed(cfg.seed, StreamTag::subspace);
  Vec z_star = dir_stream.gaussian_vector(cfg.dim, 1.0);
  double zn = norm(z_star);
  for (auto& v : z_star) v *= 0.3 * ball_radius / zn;
  Vec target = predict(z_star);

  // Reward width scaled to the reachable image of the ball.
  Vec at_zero = predict(Vec(static_cast<std::size_t>(cfg.dim), 0.0));
  double gain = distance(target, at_zero) / norm(z_star);
  if (!(gain > 0.0))
    throw NumericError("regret experiment: candidate noise does not influence the estimate "
                       "(is churn zero?)");
  ModeDistanceReward reward(target, cfg.s_factor * gain * ball_radius);

  struct Cell {
    int m;
    double mean;
    double stddev;
  };
  std::vector<Cell> cells;
  for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
    const auto& gp = cfg.grid[g];
    std::vector<double> regrets;
    regrets.reserve(static_cast<std::size_t>(cfg.trials));
    for (int trial = 0; trial < cfg.trials; ++trial) {
      StepSearchParams p;
      p.branching = gp.branching;
      p.iterations = gp.iterations;
      p.lambda = cfg.lambda;
      p.epsilon = gp.epsilon;
      p.local_mode = LocalMode::uniform_radius;
      p.seed = fold(fold(cfg.seed, static_cast<std::uint64_t>(g)), static_cast<std::uint64_t>(trial));
      p.global_mode = cfg.theorem_faithful ? GlobalDrawMode::uniform_ball : GlobalDrawMode::gaussian;
      p.ball_radius = ball_radius;
      NfeMeter nfe;
      StepSearchOutcome out = search_step(state, p, den, sched, reward, nfe);
      regrets.push_back(1.0 - out.surrogate);
    }
    double mean = 0.0;
    for (double r : regrets) mean += r;
    mean /= regrets.size();
    double var = 0.0;
    for (double r : regrets) var += (r - mean) * (r - mean);
    var = regrets.size() > 1 ? var / (regrets.size() - 1) : 0.0;
    cells.push_back({static_cast<int>(std::lround(gp.epsilon * gp.branching * gp.iterations)), mean,
                     std::sqrt(var)});
  }

  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.m < b.m; });

  RegretCurve curve;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& c : cells) {
    curve.points.push_back({c.m, c.mean, c.stddev});
    double lx = std::log(static_cast<double>(c.m));
    double ly = std::log(std::max(c.mean, 1e-12));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double n = static_cast<double>(cells.size());
  curve.fitted_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return curve;
}

}  // namespace odyssey
