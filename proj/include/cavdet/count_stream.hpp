// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cavdet/errors.hpp"

namespace cavdet {

// Binned photon counts, optionally with a trial axis (repetitions x bins),
// stored trial-major.
struct CountStream {
  double bin_us = 1.0;
  double t0_us = 0.0;
  size_t n_trials = 0;
  size_t n_bins = 0;
  std::vector<uint32_t> counts;

  uint32_t at(size_t trial, size_t bin) const {
    return counts[trial * n_bins + bin];
  }
  uint32_t& at(size_t trial, size_t bin) { return counts[trial * n_bins + bin]; }

  double bin_time_us(size_t bin) const { return t0_us + (bin + 0.5) * bin_us; }

  void validate() const {
    if (!(bin_us > 0.0)) throw ValidationError("bin width must be positive");
    if (counts.size() != n_trials * n_bins) {
      throw ValidationError("count buffer does not match trials x bins");
    }
  }
};

}  // namespace cavdet
