#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "odyssey/harness/config.hpp"
#include "odyssey/models/gmm_io.hpp"
#include "odyssey/models/synthetic.hpp"
#include "odyssey/rewards/rewards.hpp"
#include "odyssey/search/algorithms.hpp"
#include "odyssey/search/mcts.hpp"

namespace odyssey {

// One line of the results table; mirrors the method/NFE/reward column
// structure of the evaluation tables.
struct ResultRow {
  std::uint64_t seed = 0;
  std::string context;
  std::string method;
  std::string reward_name;
  int N = 0;
  double K_mean = 0.0;
  double lambda = 0.0;
  double epsilon = 0.0;
  int S = 0;
  int B = 0;
  int T = 0;
  std::int64_t nfe_paper_unit = 0;
  std::int64_t nfe_raw = 0;
  double final_reward = 0.0;
  double wall_time_ms = 0.0;
};

inline std::string result_csv_header() {
  return "seed,context,method,reward_name,N,K_mean,lambda,epsilon,S,B,T,"
         "nfe_paper_unit,nfe_raw,final_reward,wall_time_ms";
}

inline std::string to_csv(const ResultRow& r) {
  std::string out;
  out += std::to_string(r.seed);
  out += ',';
  out += r.context;
  out += ',';
  out += r.method;
  out += ',';
  out += r.reward_name;
  out += ',';
  out += std::to_string(r.N);
  out += ',';
  out += detail::format_double(r.K_mean);
  out += ',';
  out += detail::format_double(r.lambda);
  out += ',';
  out += detail::format_double(r.epsilon);
  out += ',';
  out += std::to_string(r.S);
  out += ',';
  out += std::to_string(r.B);
  out += ',';
  out += std::to_string(r.T);
  out += ',';
  out += std::to_string(r.nfe_paper_unit);
  out += ',';
  out += std::to_string(r.nfe_raw);
  out += ',';
  out += detail::format_double(r.final_reward);
  out += ',';
  out += detail::format_double(r.wall_time_ms);
  return out;
}

// Everything a run needs, resolved once. The model lives behind a stable
// pointer because the denoiser and reward hold references into it.
struct ExperimentEnv {
  std::unique_ptr<GmmModel> model;
  NoiseSchedule schedule;
  std::unique_ptr<GmmDenoiser> denoiser;
  RewardPtr reward;
  std::vector<ContextId> context_ids;
  std::vector<std::string> context_names;
};

inline GmmModel resolve_model(const std::string& spec) {
  constexpr std::string_view kBuiltin = "builtin:";
  if (spec.rfind(kBuiltin, 0) == 0) return make_builtin_model(spec.substr(kBuiltin.size()));
  return load_gmm(spec);
}

inline ExperimentEnv build_env(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentEnv env;
  env.model = std::make_unique<GmmModel>(resolve_model(cfg.model_spec));
  env.schedule = cfg.make_schedule();
  env.denoiser = std::make_unique<GmmDenoiser>(*env.model, env.schedule.kind);
  env.reward = make_reward(cfg.reward_spec, *env.model);
  if (cfg.contexts.empty()) {
    for (int c = 0; c < env.model->context_count(); ++c) {
      env.context_ids.push_back(c);
      env.context_names.push_back(env.model->context_names()[static_cast<std::size_t>(c)]);
    }
  } else {
    for (const auto& name : cfg.contexts) {
      env.context_ids.push_back(env.model->context_id(name));
      env.context_names.push_back(name);
    }
  }
  return env;
}

// Per-(context, image, repeat) task seed; independent of worker scheduling.
inline std::uint64_t row_seed_for(std::uint64_t base, int ctx_idx, int img_idx, int rep) {
  return fold(fold(fold(fold(base, StreamTag::row), static_cast<std::uint64_t>(ctx_idx)),
                   static_cast<std::uint64_t>(img_idx)),
              static_cast<std::uint64_t>(rep));
}

inline ResultRow run_single(const ExperimentConfig& cfg, const ExperimentEnv& env, int ctx_idx,
                            int img_idx, int rep) {
  const std::uint64_t row_seed = row_seed_for(cfg.seed, ctx_idx, img_idx, rep);
  const ContextId context = env.context_ids[static_cast<std::size_t>(ctx_idx)];
  const int dim = env.model->dimension();
  const double init_std =
      env.schedule.kind == ScheduleKind::VE ? env.schedule.level_at_step(env.schedule.steps) : 1.0;

  SearchConfig search = cfg.search;
  search.seed = row_seed;

  ResultRow row;
  row.seed = row_seed;
  row.context = env.context_names[static_cast<std::size_t>(ctx_idx)];
  row.method = to_string(cfg.method);
  row.reward_name = std::string(env.reward->name());
  row.N = search.branching;
  row.K_mean = search.mean_k(cfg.steps);
  row.lambda = search.lambda;
  row.epsilon = search.epsilon;
  row.S = search.simulations;
  row.B = search.beam_width;
  row.T = cfg.steps;

  auto t0 = std::chrono::steady_clock::now();
  try {
    SearchResult res;
    switch (cfg.method) {
      case Method::naive: {
        RngStream st = RngStream::keyed(row_seed, StreamTag::initial, 0);
        res = naive_sample(search, st.gaussian_vector(dim, init_std), context, *env.denoiser,
                           env.schedule, *env.reward);
        break;
      }
      case Method::best_of_n: {
        RngStream st = RngStream::keyed(row_seed, StreamTag::initial, 0);
        res = best_of_n(search, st.gaussian_vector(dim, init_std), context, *env.denoiser,
                        env.schedule, *env.reward);
        break;
      }
      case Method::beam: {
        std::vector<Vec> beams;
        for (int j = 0; j < search.beam_width; ++j) {
          RngStream st = RngStream::keyed(row_seed, StreamTag::initial, static_cast<std::uint64_t>(j));
          beams.push_back(st.gaussian_vector(dim, init_std));
        }
        res = beam_search(search, beams, context, *env.denoiser, env.schedule, *env.reward);
        break;
      }
      case Method::zero_order: {
        RngStream st = RngStream::keyed(row_seed, StreamTag::initial, 0);
        res = zero_order_search(search, st.gaussian_vector(dim, init_std), context, *env.denoiser,
                                env.schedule, *env.reward);
        break;
      }
      case Method::eps_greedy: {
        RngStream st = RngStream::keyed(row_seed, StreamTag::initial, 0);
        res = epsilon_greedy(search, st.gaussian_vector(dim, init_std), context, *env.denoiser,
                             env.schedule, *env.reward);
        break;
      }
      case Method::mcts: {
        RngStream st = RngStream::keyed(row_seed, StreamTag::initial, 0);
        res = mcts(search, st.gaussian_vector(dim, init_std), context, *env.denoiser, env.schedule,
                   *env.reward);
        break;
      }
    }
    row.nfe_paper_unit = res.nfe.step_invocations;
    row.nfe_raw = res.nfe.raw_denoiser_calls;
    row.final_reward = res.reward;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "run: row (context=%s image=%d repeat=%d) failed: %s\n",
                 row.context.c_str(), img_idx, rep, e.what());
    row.final_reward = std::numeric_limits<double>::quiet_NaN();
  }
  auto t1 = std::chrono::steady_clock::now();
  row.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return row;
}

// Closed-form NFE of each method in sampler-step invocations, as printed in
// the usual method tables. Equals the measured step_invocations for naive,
// best-of-N, and the local searches. Beam measures N*B*T (every candidate
// expansion) against the (N+B)*T formula here; MCTS measures at or below the
// (N+S)*T^2 bound.
inline std::int64_t paper_formula_nfe(Method method, const SearchConfig& search, int steps) {
  const std::int64_t T = steps;
  const std::int64_t N = search.branching;
  switch (method) {
    case Method::naive: return T;
    case Method::best_of_n: return N * T;
    case Method::beam: return (N + search.beam_width) * T;
    case Method::zero_order:
    case Method::eps_greedy: {
      std::int64_t total = 0;
      for (int t = steps; t >= 1; --t) total += search.k_at_step(t, steps);
      return N * total;
    }
    case Method::mcts: return (N + search.simulations) * T * T;
  }
  return 0;
}

inline int worker_pool_size() {
  unsigned hw = std::thread::hardware_concurrency();
  int threads = hw > 0 ? static_cast<int>(hw) : 1;
  if (const char* env = std::getenv("NOISE_ODYSSEY_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1) threads = std::min(threads, cap);
  }
  return threads;
}

// Sink receives (task index, row) as tasks complete, possibly out of order,
// under an internal lock.
using RowSink = std::function<void(std::size_t, const ResultRow&)>;

inline std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg,
                                             const RowSink& sink = {}, int threads = 0) {
  ExperimentEnv env = build_env(cfg);
  struct Task {
    int ctx_idx, img_idx, rep;
  };
  std::vector<Task> tasks;
  for (int c = 0; c < static_cast<int>(env.context_ids.size()); ++c)
    for (int i = 0; i < cfg.images_per_context; ++i)
      for (int r = 0; r < cfg.repeats; ++r) tasks.push_back({c, i, r});

  std::vector<ResultRow> rows(tasks.size());
  if (threads <= 0) threads = worker_pool_size();
  threads = std::min<int>(threads, static_cast<int>(tasks.size()));
  threads = std::max(threads, 1);

  std::atomic<std::size_t> next{0};
  std::mutex sink_mutex;
  auto work = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      rows[i] = run_single(cfg, env, tasks[i].ctx_idx, tasks[i].img_idx, tasks[i].rep);
      if (sink) {
        std::lock_guard<std::mutex> lock(sink_mutex);
        sink(i, rows[i]);
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return rows;
}

}  // namespace odyssey
