#pragma once

#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "odyssey/core/vec.hpp"

namespace odyssey {

// Class / mode label; index into a model's context table.
using ContextId = int;

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// MDP state s_t = (context, latent x_t, step index t). Steps count down from
// T (pure noise) to 0 (clean sample).
struct DiffusionState {
  ContextId context = 0;
  Vec latent;
  int step = 0;
};

// The search variable: T injected-noise vectors, row 0 <-> step T, row T-1 <-> step 1.
struct NoiseTrajectory {
  std::vector<Vec> noises;

  int rows() const { return static_cast<int>(noises.size()); }

  // Noise applied at step t (t in [1, T]).
  const Vec& at_step(int t) const { return noises[noises.size() - static_cast<std::size_t>(t)]; }
  Vec& at_step(int t) { return noises[noises.size() - static_cast<std::size_t>(t)]; }

  static NoiseTrajectory zeros(int steps, int dim) {
    NoiseTrajectory z;
    z.noises.assign(static_cast<std::size_t>(steps), Vec(static_cast<std::size_t>(dim), 0.0));
    return z;
  }
};

// NFE audit. step_invocations is the standard reporting unit (one per
// sampler-step invocation f); raw_denoiser_calls counts every denoiser
// forward pass, including Heun's second call and Tweedie evaluations.
class NfeMeter {
 public:
  struct Snapshot {
    std::int64_t step_invocations = 0;
    std::int64_t raw_denoiser_calls = 0;
  };

  void add_step_invocation() { step_invocations_.fetch_add(1, std::memory_order_relaxed); }
  void add_raw_calls(std::int64_t n) { raw_calls_.fetch_add(n, std::memory_order_relaxed); }

  std::int64_t step_invocations() const { return step_invocations_.load(std::memory_order_relaxed); }
  std::int64_t raw_denoiser_calls() const { return raw_calls_.load(std::memory_order_relaxed); }

  Snapshot snapshot() const { return {step_invocations(), raw_denoiser_calls()}; }

 private:
  std::atomic<std::int64_t> step_invocations_{0};
  std::atomic<std::int64_t> raw_calls_{0};
};

}  // namespace odyssey
