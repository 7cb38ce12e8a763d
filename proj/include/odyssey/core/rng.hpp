#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace odyssey {

// splitmix64 finalizer (Steele/Lea/Flood; public-domain reference constants).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Order-sensitive key derivation. The accumulator is re-diffused before the
// new word enters, so additively related (h, w) pairs (small seeds, small
// indices) cannot collide the way a plain h + w combine would.
inline std::uint64_t fold(std::uint64_t h, std::uint64_t w) {
  return mix64(mix64(h + 0x9E3779B97F4A7C15ull) ^ (w + 0x632BE59BD9B4E019ull));
}

// Stream tags keep independently keyed streams from colliding.
enum class StreamTag : std::uint64_t {
  trajectory = 0x01,   // naive / best-of-N per-step noise
  initial = 0x02,      // x_T draws
  pivot = 0x03,        // local-search pivot init
  candidate = 0x04,    // local-search candidates, keyed (t, k, i)
  beam_candidate = 0x05,
  mcts_candidate = 0x06,
  mcts_simulation = 0x07,
  row = 0x08,          // harness per-row seeds
  calibration = 0x09,
  subspace = 0x0a,
};

inline std::uint64_t fold(std::uint64_t h, StreamTag tag) {
  return fold(h, static_cast<std::uint64_t>(tag));
}

// Counter-free keyed PRNG stream. Each stream is an independent splitmix64
// sequence whose initial state is derived from (seed, tag, indices), so any
// draw is reproducible regardless of evaluation order or threading.
class RngStream {
 public:
  explicit RngStream(std::uint64_t state) : state_(mix64(state ^ 0xD1B54A32D192ED03ull)) {}

  static RngStream keyed(std::uint64_t seed, StreamTag tag) {
    return RngStream(fold(seed, tag));
  }
  static RngStream keyed(std::uint64_t seed, StreamTag tag, std::uint64_t a) {
    return RngStream(fold(fold(seed, tag), a));
  }
  static RngStream keyed(std::uint64_t seed, StreamTag tag, std::uint64_t a, std::uint64_t b) {
    return RngStream(fold(fold(fold(seed, tag), a), b));
  }
  static RngStream keyed(std::uint64_t seed, StreamTag tag, std::uint64_t a, std::uint64_t b,
                         std::uint64_t c) {
    return RngStream(fold(fold(fold(fold(seed, tag), a), b), c));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Lemire-style multiply-shift; bias is
  // negligible for the small n used here and the result is deterministic.
  int uniform_int(int n) {
    return static_cast<int>((static_cast<unsigned __int128>(next_u64()) *
                             static_cast<unsigned __int128>(n)) >>
                            64);
  }

  // Standard normal via Box-Muller; the spare is cached per stream.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  std::vector<double> gaussian_vector(int dim, double stddev) {
    std::vector<double> v(static_cast<std::size_t>(dim));
    for (auto& x : v) x = stddev * gaussian();
    return v;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace odyssey
