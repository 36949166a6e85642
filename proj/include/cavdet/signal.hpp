// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "cavdet/physics.hpp"

namespace cavdet {

// Probe/drive settings. Rates are unit-transparent: outputs carry the units
// of the rate inputs they scale with (j_in for reflection, gamma for
// fluorescence, eta/kappa ratios for the intracavity field).
struct DriveConfig {
  double j_in = 0.0;          // incident probe photons per time unit
  double fringe_b = 0.0;      // empty-cavity fringe amplitude, in [0, 1]
  double saturation_s = 0.0;  // s = (1/2)(Omega/gamma)^2
  double rabi = 0.0;          // Omega, same units as the gamma it pairs with
  double fibre_xi = 1.0;      // cavity-to-fibre escape probability
  double pump_eta = 0.0;      // cavity pump strength, same units as kappa

  // gamma > 0 enables the s <-> Omega consistency check.
  void validate(double gamma = 0.0) const;
};

struct SignalPoint {
  double c_n = 0.0;
  double j_out = 0.0;
  Branch branch = Branch::reflection;
};

// J_out = J_in [(b + 2 C_N) / (1 + 2 C_N)]^2
SignalPoint reflection_rate(double c_n, const DriveConfig& drive);

// J_out = 2 C'_N gamma xi s / [(1 + 2 C'_N)^2 + s]
SignalPoint fluorescence_rate(double c_n_prime, const DriveConfig& drive,
                              double gamma);

// argmax over C' of the fluorescence rate: (1/2) sqrt(1 + s)
double fluorescence_optimal_cooperativity(double saturation_s);

// alpha = (eta / kappa) / (1 + 2 C_N), weak-drive coherent amplitude
double intracavity_amplitude(double c_n, const DriveConfig& drive,
                             double kappa);

struct PurcellRates {
  double gamma_tot = 0.0;       // (1 + 2 C') gamma
  double cavity_fraction = 0.0; // 2 C' / (1 + 2 C')
};
PurcellRates purcell_rates(double c_n_prime, double gamma);

// <sigma+ sigma-> = (1/2) (|Omega|^2/2) / (gamma_tot^2 + |Omega|^2/2),
// valid for |Omega| >> 2|g| sqrt(n)
double excited_population(double c_n_prime, const DriveConfig& drive,
                          double gamma);

// Weak-excitation flags (warnings, not errors): <n> = alpha^2 >= 0.1.
std::vector<std::string> drive_regime_warnings(double c_n,
                                               const DriveConfig& drive,
                                               double kappa);

}  // namespace cavdet
