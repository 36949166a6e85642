// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cavdet/lindblad.hpp"

namespace cavdet {

struct JumpEvent {
  double time = 0.0;
  int channel = 0;  // 0 = cavity, j >= 1 = atom j
};

struct TrajectoryRecord {
  std::vector<JumpEvent> jumps;  // strictly increasing times
  Eigen::VectorXcd final_state;
  uint64_t seed = 0;
};

struct JumpOptions {
  double t_end = 0.0;
  double dt = 0.0;        // 0 = automatic from the fastest rate
  double t_burn = -1.0;   // < 0 = 20% of t_end
  int n_traj = 1;
  uint64_t seed = 0;
  int threads = 1;
};

// Ensemble averages of time-averaged observables (post burn-in), with
// standard errors across trajectories.
struct EnsembleStats {
  double mean_photon_number = 0.0;
  double se_photon_number = 0.0;
  double mean_excited = 0.0;
  double se_excited = 0.0;
  double jump_rate = 0.0;  // all channels, per unit time
  double se_jump_rate = 0.0;
  double cavity_jump_fraction = 0.0;  // per-trajectory mean
  double se_cavity_jump_fraction = 0.0;
  uint64_t total_jumps = 0;
  uint64_t cavity_jumps = 0;
};

// Monte Carlo wavefunction unravelling of the master equation. Trajectories
// use independently derived RNG streams, so the result is identical for any
// thread count under a fixed seed.
EnsembleStats quantum_jump_ensemble(const SystemSpec& spec,
                                    const JumpOptions& options,
                                    std::vector<TrajectoryRecord>* records = nullptr);

}  // namespace cavdet
