// SPDX-License-Identifier: Apache-2.0
#include "cavdet/signal.hpp"

#include <cmath>
#include <sstream>

#include "cavdet/errors.hpp"

namespace cavdet {

void DriveConfig::validate(double gamma) const {
  if (fringe_b < 0.0 || fringe_b > 1.0) {
    throw ValidationError("fringe amplitude b must lie in [0, 1]");
  }
  if (fibre_xi < 0.0 || fibre_xi > 1.0) {
    throw ValidationError("fibre coupling xi must lie in [0, 1]");
  }
  if (saturation_s < 0.0) {
    throw ValidationError("saturation parameter s must be non-negative");
  }
  if (j_in < 0.0) throw ValidationError("j_in must be non-negative");
  if (gamma > 0.0 && saturation_s > 0.0 && rabi != 0.0) {
    const double s_from_rabi = 0.5 * (rabi / gamma) * (rabi / gamma);
    if (std::abs(s_from_rabi - saturation_s) >
        1e-9 * std::max(1.0, saturation_s)) {
      std::ostringstream msg;
      msg << "inconsistent drive: s = " << saturation_s
          << " but (1/2)(Omega/gamma)^2 = " << s_from_rabi;
      throw ValidationError(msg.str());
    }
  }
}

SignalPoint reflection_rate(double c_n, const DriveConfig& drive) {
  if (c_n < 0.0) throw ValidationError("cooperativity must be non-negative");
  const double frac = (drive.fringe_b + 2.0 * c_n) / (1.0 + 2.0 * c_n);
  return {c_n, drive.j_in * frac * frac, Branch::reflection};
}

SignalPoint fluorescence_rate(double c_n_prime, const DriveConfig& drive,
                              double gamma) {
  if (c_n_prime < 0.0) throw ValidationError("cooperativity must be non-negative");
  const double s = drive.saturation_s;
  const double denom = (1.0 + 2.0 * c_n_prime) * (1.0 + 2.0 * c_n_prime) + s;
  const double j =
      2.0 * c_n_prime * gamma * drive.fibre_xi * s / denom;
  return {c_n_prime, j, Branch::fluorescence};
}

double fluorescence_optimal_cooperativity(double saturation_s) {
  return 0.5 * std::sqrt(1.0 + saturation_s);
}

double intracavity_amplitude(double c_n, const DriveConfig& drive,
                             double kappa) {
  if (c_n < 0.0) throw ValidationError("cooperativity must be non-negative");
  if (!(kappa > 0.0)) throw ValidationError("kappa must be positive");
  return (drive.pump_eta / kappa) / (1.0 + 2.0 * c_n);
}

PurcellRates purcell_rates(double c_n_prime, double gamma) {
  if (c_n_prime < 0.0) throw ValidationError("cooperativity must be non-negative");
  const double denom = 1.0 + 2.0 * c_n_prime;
  return {denom * gamma, 2.0 * c_n_prime / denom};
}

double excited_population(double c_n_prime, const DriveConfig& drive,
                          double gamma) {
  const double gamma_tot = purcell_rates(c_n_prime, gamma).gamma_tot;
  double omega_sq = drive.rabi * drive.rabi;
  if (omega_sq == 0.0 && drive.saturation_s > 0.0) {
    omega_sq = 2.0 * drive.saturation_s * gamma * gamma;
  }
  const double half_omega_sq = omega_sq / 2.0;
  if (half_omega_sq == 0.0) return 0.0;
  return 0.5 * half_omega_sq / (gamma_tot * gamma_tot + half_omega_sq);
}

std::vector<std::string> drive_regime_warnings(double c_n,
                                               const DriveConfig& drive,
                                               double kappa) {
  std::vector<std::string> warnings;
  const double alpha = intracavity_amplitude(c_n, drive, kappa);
  if (alpha * alpha >= 0.1) {
    std::ostringstream msg;
    msg << "<n> = " << alpha * alpha
        << " is not small; the weak-drive coherent amplitude assumes <n> << 1";
    warnings.push_back(msg.str());
  }
  return warnings;
}

}  // namespace cavdet
