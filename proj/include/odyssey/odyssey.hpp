#pragma once

#include "odyssey/core/rng.hpp"          // IWYU pragma: export
#include "odyssey/core/types.hpp"        // IWYU pragma: export
#include "odyssey/core/vec.hpp"          // IWYU pragma: export
#include "odyssey/diagnostics/kbar.hpp"  // IWYU pragma: export
#include "odyssey/diagnostics/lipschitz.hpp"  // IWYU pragma: export
#include "odyssey/diagnostics/regret.hpp"     // IWYU pragma: export
#include "odyssey/diffusion/denoiser.hpp"     // IWYU pragma: export
#include "odyssey/diffusion/sampler.hpp"      // IWYU pragma: export
#include "odyssey/diffusion/schedule.hpp"     // IWYU pragma: export
#include "odyssey/harness/config.hpp"         // IWYU pragma: export
#include "odyssey/harness/experiment.hpp"     // IWYU pragma: export
#include "odyssey/harness/report.hpp"         // IWYU pragma: export
#include "odyssey/harness/sweep.hpp"          // IWYU pragma: export
#include "odyssey/models/gmm.hpp"             // IWYU pragma: export
#include "odyssey/models/gmm_io.hpp"          // IWYU pragma: export
#include "odyssey/models/synthetic.hpp"       // IWYU pragma: export
#include "odyssey/rewards/rewards.hpp"        // IWYU pragma: export
#include "odyssey/search/algorithms.hpp"      // IWYU pragma: export
#include "odyssey/search/candidates.hpp"      // IWYU pragma: export
#include "odyssey/search/config.hpp"          // IWYU pragma: export
#include "odyssey/search/local_search.hpp"    // IWYU pragma: export
#include "odyssey/search/mcts.hpp"            // IWYU pragma: export
#include "odyssey/search/result.hpp"          // IWYU pragma: export
