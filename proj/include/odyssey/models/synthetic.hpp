#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "odyssey/models/gmm.hpp"

namespace odyssey {

// Parameters of the desk-scale benchmark mixture: `modes` color/gradient
// patterns placed on a hypersphere of the given radius around mid-gray in
// pixel space. Each context concentrates weight (1 - confuser_weight) on its
// designated mode and spreads the rest uniformly over the shared confuser
// modes, so conditional sampling is imperfect and search has headroom.
struct BenchmarkParams {
  int channels = 3;
  int height = 8;
  int width = 8;
  int modes = 8;
  int contexts = 4;
  double tau = 0.4;
  double radius = 2.0;
  double confuser_weight = 0.82;
};

namespace detail {

// Deterministic base patterns in [0,1]^d: solid colors and simple gradients.
inline double base_pattern(int pattern, int c, int y, int x, int h, int w) {
  double fy = h > 1 ? static_cast<double>(y) / (h - 1) : 0.0;
  double fx = w > 1 ? static_cast<double>(x) / (w - 1) : 0.0;
  switch (pattern % 8) {
    case 0: return c == 0 ? 1.0 : 0.0;                       // red
    case 1: return c == 1 ? 1.0 : 0.0;                       // green
    case 2: return c == 2 ? 1.0 : 0.0;                       // blue
    case 3: return 1.0;                                      // white
    case 4: return fx;                                       // horizontal ramp
    case 5: return 1.0 - fy;                                 // vertical ramp
    case 6: return ((x / 2 + y / 2) % 2 == 0) ? 1.0 : 0.0;   // checker
    case 7: return 0.5 * (fx + fy) * (c == 0 ? 1.0 : 0.3);   // tinted diagonal
  }
  return 0.0;
}

}  // namespace detail

// Mode means: pattern k, centered, normalized and re-placed on a hypersphere
// of the requested radius around 0.5, then clamped to [0,1].
inline Vec make_pattern_mean(int pattern, const SyntheticImageSpec& spec, double radius) {
  int d = spec.dim();
  Vec m(static_cast<std::size_t>(d));
  std::size_t idx = 0;
  for (int c = 0; c < spec.channels; ++c)
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x)
        m[idx++] = detail::base_pattern(pattern, c, y, x, spec.height, spec.width);
  double mean = 0.0;
  for (double v : m) mean += v;
  mean /= d;
  double nrm = 0.0;
  for (auto& v : m) {
    v -= mean;
    nrm += v * v;
  }
  nrm = std::sqrt(nrm);
  for (auto& v : m) {
    v = 0.5 + radius * v / nrm;
    v = std::min(1.0, std::max(0.0, v));
  }
  return m;
}

inline GmmModel make_benchmark_model(const BenchmarkParams& p = {}) {
  if (p.contexts < 1 || p.contexts >= p.modes)
    throw ConfigError("benchmark model: need 1 <= contexts < modes");
  SyntheticImageSpec spec{p.channels, p.height, p.width};
  std::vector<GmmComponent> comps;
  comps.reserve(static_cast<std::size_t>(p.modes));
  for (int k = 0; k < p.modes; ++k)
    comps.push_back({make_pattern_mean(k, spec, p.radius), 1.0 / p.modes, p.tau});

  int confusers = p.modes - p.contexts;
  std::vector<std::string> names;
  std::vector<Vec> weights;
  for (int c = 0; c < p.contexts; ++c) {
    names.push_back("c" + std::to_string(c));
    Vec w(static_cast<std::size_t>(p.modes), 0.0);
    w[static_cast<std::size_t>(c)] = 1.0 - p.confuser_weight;
    for (int j = p.contexts; j < p.modes; ++j)
      w[static_cast<std::size_t>(j)] = p.confuser_weight / confusers;
    weights.push_back(std::move(w));
  }
  return GmmModel(std::move(comps), std::move(names), std::move(weights), spec);
}

// Small analytic fixtures used throughout the tests and builtin configs.

inline GmmModel make_point_mass(const Vec& mu) {
  return GmmModel({{mu, 1.0, 0.0}}, {}, {});
}

inline GmmModel make_single_gaussian(const Vec& mu, double tau) {
  return GmmModel({{mu, 1.0, tau}}, {}, {});
}

// Symmetric two-mode 1D mixture at +/-m.
inline GmmModel make_two_mode_1d(double m, double tau) {
  return GmmModel({{{-m}, 0.5, tau}, {{m}, 0.5, tau}}, {}, {});
}

// Named builtin models accepted wherever a gmm-v1 path is expected.
inline GmmModel make_builtin_model(const std::string& name) {
  if (name == "benchmark8") return make_benchmark_model();
  if (name == "point1d") return make_point_mass({0.75});
  if (name == "gauss1d") return make_single_gaussian({0.0}, 0.5);
  if (name == "twomode1d") return make_two_mode_1d(2.0, 0.5);
  throw ConfigError("unknown builtin model '" + name + "'");
}

}  // namespace odyssey
