// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cavdet/fidelity.hpp"
#include "cavdet/physics.hpp"
#include "cavdet/signal.hpp"
#include "cavdet/transit.hpp"

#include <nlohmann/json_fwd.hpp>

namespace cavdet {

struct AnalysisOptions {
  double segment_us = 500.0;      // g2 averaging segment
  int max_lag_bins = 25;
  double running_avg_us = 100.0;  // variance-to-mean smoothing window
  int neff_grid_bins = 512;
  int neff_samples = 200000;
  double neff_mean = 1.24;        // target <N_eff> for distribution commands
  std::string neff_kind = "both";  // monte_carlo | gaussian | both

  void validate() const;
};

// Complete declarative description of one run. Unknown keys in the config
// file are rejected; every component invariant is validated before use.
struct RunConfig {
  int version = 1;
  PhysicalParams physical;
  DriveConfig drive;
  CloudProfile cloud;
  Branch mode = Branch::reflection;
  double bin_us = 2.0;
  int n_trials = 300;
  double t_start_ms = 0.0;
  double t_end_ms = 1.0;
  int refresh_bins = 0;
  double speed_m_per_s = 0.64;
  double background_per_ms = 0.0;
  double yield_per_atom_us = 0.42;
  double cooperativity_ratio = 0.53;
  DetectorRates detector;
  AnalysisOptions analysis;
  uint64_t seed = 1;

  ExperimentPlan plan() const;
  void validate() const;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::string& path);
  static RunConfig preset(const std::string& name);
  static std::vector<std::string> preset_names();
};

}  // namespace cavdet
