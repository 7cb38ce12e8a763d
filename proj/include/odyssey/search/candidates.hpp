#pragma once

#include <cmath>

#include "odyssey/core/rng.hpp"
#include "odyssey/core/types.hpp"
#include "odyssey/search/config.hpp"

namespace odyssey {

// Global draw: z ~ N(0, sigma^2 I) from the given stream.
inline Vec draw_global(RngStream& rng, double sigma, int dim) {
  return rng.gaussian_vector(dim, sigma);
}

// Local draw around a pivot. uniform_radius scales a standard normal by
// u * sqrt(2d) with u ~ Unif(0, lambda); fixed_radius uses lambda * sqrt(2d).
inline Vec draw_local(RngStream& rng, const Vec& pivot, double lambda, int dim, LocalMode mode) {
  double scale = std::sqrt(2.0 * dim);
  if (mode == LocalMode::uniform_radius)
    scale *= rng.uniform(0.0, lambda);
  else
    scale *= lambda;
  Vec z = pivot;
  for (auto& v : z) v += scale * rng.gaussian();
  return z;
}

}  // namespace odyssey
