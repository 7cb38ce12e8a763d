#pragma once

#include <span>
#include <string>
#include <vector>

#include "odyssey/models/gmm.hpp"
#include "odyssey/rewards/rewards.hpp"
#include "odyssey/search/algorithms.hpp"

namespace odyssey {

struct KbarPoint {
  double sigma_t = 0.0;
  double kbar = 0.0;
  int trials = 0;
};

struct KbarReport {
  std::vector<KbarPoint> per_sigma;
};

// k-bar statistic of a single timestep's pivot trace: sum_k (k-1) I_k, where
// I_k marks rounds that committed to a global prior draw. The normalized form
// (default) divides by K, so all-global traces with K=20 score 9.5.
inline double kbar_statistic(std::span<const PivotTraceEntry> trace, int local_iters,
                             bool normalize = true) {
  if (static_cast<int>(trace.size()) != local_iters)
    throw ConfigError("kbar_statistic: trace covers " + std::to_string(trace.size()) +
                      " iterations, expected K = " + std::to_string(local_iters));
  double acc = 0.0;
  for (const auto& e : trace) {
    if (e.iteration < 1 || e.iteration > local_iters)
      throw ConfigError("kbar_statistic: iteration index outside 1..K");
    if (e.choice == PivotChoice::global_draw) acc += static_cast<double>(e.iteration - 1);
  }
  return normalize ? acc / local_iters : acc;
}

// Mean normalized k-bar per noise level from repeated traced runs of the
// epsilon-greedy search on the given model.
inline KbarReport kbar_sweep(const GmmModel& model, const NoiseSchedule& sched,
                             const SearchConfig& base_cfg, const RewardFn& reward, int seeds,
                             std::uint64_t base_seed = 0) {
  GmmDenoiser den(model, sched.kind);
  const int steps = sched.steps;
  std::vector<double> acc(static_cast<std::size_t>(steps), 0.0);
  std::vector<int> count(static_cast<std::size_t>(steps), 0);

  for (int s = 0; s < seeds; ++s) {
    SearchConfig cfg = base_cfg;
    cfg.seed = fold(base_seed, static_cast<std::uint64_t>(s));
    ContextId context = s % model.context_count();
    RngStream init = RngStream::keyed(cfg.seed, StreamTag::initial);
    Vec x_T = init.gaussian_vector(model.dimension(), sched.kind == ScheduleKind::VE
                                                          ? sched.level_at_step(steps)
                                                          : 1.0);
    SearchResult res = epsilon_greedy(cfg, x_T, context, den, sched, reward, /*record_trace=*/true);

    std::size_t pos = 0;
    for (int t = steps; t >= 1; --t) {
      int k_t = cfg.k_at_step(t, steps);
      std::span<const PivotTraceEntry> slice(res.pivot_trace.data() + pos,
                                             static_cast<std::size_t>(k_t));
      pos += static_cast<std::size_t>(k_t);
      acc[static_cast<std::size_t>(steps - t)] += kbar_statistic(slice, k_t);
      count[static_cast<std::size_t>(steps - t)] += 1;
    }
  }

  KbarReport report;
  for (int t = steps; t >= 1; --t) {
    std::size_t i = static_cast<std::size_t>(steps - t);
    report.per_sigma.push_back({sched.effective_sigma_at_step(t), acc[i] / count[i], count[i]});
  }
  return report;
}

}  // namespace odyssey
