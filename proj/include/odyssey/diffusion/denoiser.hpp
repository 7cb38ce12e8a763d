#pragma once

#include "odyssey/core/types.hpp"

namespace odyssey {

// Posterior-mean denoiser contract. `level` is the schedule's value at the
// evaluation point: a sigma for VE-parameterized denoisers, a cumulative
// alpha for VP ones. Implementations must be deterministic and stateless
// (or internally synchronized); they are called concurrently.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual int dimension() const = 0;
  virtual Vec posterior_mean(const Vec& latent, double level, ContextId context) const = 0;
};

}  // namespace odyssey
