#pragma once

#include <string>
#include <vector>

#include "odyssey/core/types.hpp"

namespace odyssey {

// What kind of candidate a local-search round committed to.
enum class PivotChoice { global_draw, local_draw, keep };

struct PivotTraceEntry {
  int step = 0;       // t
  int iteration = 0;  // k, 1-based
  PivotChoice choice = PivotChoice::keep;
  double surrogate = 0.0;  // Tweedie-scored reward of the retained pivot
};

struct SearchResult {
  Vec sample;                 // x_0
  NoiseTrajectory trajectory; // the committed Z
  double reward = 0.0;        // reward fn re-evaluated on `sample`
  NfeMeter::Snapshot nfe;
  std::vector<PivotTraceEntry> pivot_trace;  // filled when tracing is enabled
};

}  // namespace odyssey
