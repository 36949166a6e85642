// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "cavdet/count_stream.hpp"
#include "cavdet/physics.hpp"
#include "cavdet/signal.hpp"

namespace cavdet {

// Falling-cloud envelope: <N_eff>(t) is Gaussian in time; in fluorescence
// mode an exponential decay (heating by the drive beam, phenomenological)
// multiplies the envelope once the drive switches on.
struct CloudProfile {
  double peak_mean_neff = 0.0;
  double sigma_ms = 0.0;      // Gaussian envelope width
  double release_ms = 0.0;    // drop start (bookkeeping only)
  double arrival_ms = 0.0;    // envelope centre at the cavity
  double decay_us = 100.0;    // fluorescence-mode signal decay constant
  double drive_on_ms = 0.0;   // fluorescence-mode excitation start

  static double sigma_from_fwhm(double fwhm_ms);
  void validate() const;
};

struct ExperimentPlan {
  Branch mode = Branch::reflection;
  double bin_us = 2.0;
  int n_trials = 1;
  DriveConfig drive;
  PhysicalParams params;
  double t_start_ms = 0.0;
  double t_end_ms = 1.0;
  int refresh_bins = 0;           // 0 = transit time / bin width
  double speed_m_per_s = 0.64;    // cloud drop speed at the cavity
  double background_per_ms = 0.0;
  double yield_per_atom_us = 0.42;  // fluorescence calibration anchor
  double cooperativity_ratio = 0.53;  // C'_N / C_N
  uint64_t seed = 0;

  void validate() const;
  size_t n_bins() const;
  int effective_refresh_bins() const;
};

// <N_eff>(t) on the given grid (times in ms).
std::vector<double> mean_neff_timeline(const CloudProfile& profile,
                                       Branch mode,
                                       const std::vector<double>& t_ms);

// Per trial, per refresh block: draw an atomic configuration at the local
// mean <N_eff>, map to a detected rate, and draw Poisson counts per bin on
// top of homogeneous Poisson background. Deterministic per seed; trials use
// derived RNG streams so any thread count gives identical output.
CountStream simulate_counts(const ExperimentPlan& plan,
                            const CloudProfile& profile, int n_threads = 1);

// Transit through the mode "width" under the 2w convention.
double transit_time_us(const PhysicalParams& params, double speed_m_per_s);

struct CloudFit {
  CloudProfile profile;
  double peak_std_error = 0.0;
  double sigma_std_error = 0.0;
  double arrival_std_error = 0.0;
  double rms_residual = 0.0;
  int iterations = 0;
};

// Least-squares fit of the trial-averaged trace to the signal model with a
// Gaussian <N_eff>(t); free parameters are (peak, sigma, arrival).
CloudFit fit_cloud_profile(const CountStream& stream,
                           const ExperimentPlan& plan,
                           const CloudProfile& initial_guess);

}  // namespace cavdet
