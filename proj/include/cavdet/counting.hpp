// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "cavdet/count_stream.hpp"
#include "cavdet/neff.hpp"
#include "cavdet/physics.hpp"
#include "cavdet/signal.hpp"

namespace cavdet {

struct G2Point {
  double tau_us = 0.0;
  double g2 = 0.0;
  double std_error = 0.0;  // across trials; 0 when only one trial
};

// g2(tau) = mean_t[k(t) k(t+tau)] / mean_t[k(t)]^2, sliding time average
// within each trial; tau = 0 keeps the shot-noise self-term. Standard errors
// come from the trial axis when present.
std::vector<G2Point> g2_estimate(const CountStream& stream, int max_lag);

// Expected g2(tau) for rare single-atom transits: Gaussian-envelope crossings
// with random impact parameter and standing-wave phase, pushed through the
// reflection signal and ensemble averaged. One free parameter, the peak
// amplitude: g2(tau) = 1 + amplitude * C(tau)/C(0).
std::vector<G2Point> g2_transit_theory(const PhysicalParams& params,
                                       const DriveConfig& drive,
                                       double transit_time_us,
                                       double amplitude, double bin_us,
                                       int max_lag);

struct VarMeanPoint {
  double t_us = 0.0;
  double ratio = 0.0;
};

// Per-bin ensemble variance over trials divided by the ensemble mean, with
// an optional boxcar running average over time.
std::vector<VarMeanPoint> variance_to_mean(const CountStream& streams,
                                           double running_avg_us = 0.0);

// Var(k)/<k> = 1 + alpha Var(N)/<N> (linear per-atom-yield detection)
double mandel_linear_prediction(double alpha, double var_over_mean_n);

// Detection chain for the nonlinear prediction. Collection efficiencies are
// already folded into the calibrated rate maps, so only the counting window
// enters the formula; the remaining fields document the chain.
struct NoiseModel {
  double collection_eps = 1.0;
  double fibre_xi = 1.0;
  double kappa_mhz = 0.0;
  double bin_us = 1.0;
  double per_atom_yield = 0.0;  // photons per bin for a maximally coupled atom
};

// Var(k)/<k> = 1 + T Var(R)/<R> with R(N_eff) the detected rate and the
// statistics taken over the supplied N_eff distribution (quadrature over the
// density grid, or sample means when raw samples are present).
double nonlinear_noise_prediction(const NeffDistribution& distribution,
                                  const std::function<double(double)>& rate_map,
                                  const NoiseModel& model);

// Detected rate maps (photons per us) used by predictions and simulation.
// Fluorescence is anchored to the measured per-atom yield at N_eff = 1;
// reflection takes the detected flux scale j_in and fringe b directly.
std::function<double(double)> fluorescence_rate_map(
    const PhysicalParams& params, double cooperativity_ratio,
    double saturation_s, double yield_per_us, double background_per_us = 0.0);

std::function<double(double)> reflection_rate_map(
    const PhysicalParams& params, const DriveConfig& drive,
    double background_per_us = 0.0);

}  // namespace cavdet
