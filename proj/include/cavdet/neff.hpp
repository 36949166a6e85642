// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "cavdet/physics.hpp"
#include "cavdet/rng.hpp"

namespace cavdet {

// Axis-aligned sampling region for atom positions. The region must enclose
// the mode to >= 4 waists radially and span an integer number of half
// wavelengths axially, otherwise truncation biases the N_eff statistics.
struct SampleBox {
  double radial_halfwidth_um = 0.0;
  int axial_half_waves = 0;

  static SampleBox default_for(const PhysicalParams& p);

  double axial_extent_um(const PhysicalParams& p) const;
  double volume_um3(const PhysicalParams& p) const;
  void validate(const PhysicalParams& p) const;
};

struct AtomConfiguration {
  std::vector<Vec3> positions;
  double neff = 0.0;
  double collective_coupling = 0.0;  // sqrt(neff)
};

// Recompute N_eff = sum_i |chi(r_i)|^2 from the stored positions.
double recompute_neff(const AtomConfiguration& cfg, const PhysicalParams& p);

// Atom count ~ Poisson(density * box volume), positions i.i.d. uniform.
AtomConfiguration sample_configuration(double density_per_um3,
                                       const SampleBox& box,
                                       const PhysicalParams& p, Rng& rng);

// <N_eff> for uniform density over the box, from the exact box integral of
// |chi|^2 (differs from rho * V_cav only by the radial tail and the axial
// rounding, both < 0.2% for the default box).
double analytic_mean_neff(double density_per_um3, const SampleBox& box,
                          const PhysicalParams& p);
double density_for_mean_neff(double mean_neff, const SampleBox& box,
                             const PhysicalParams& p);

enum class NeffKind { monte_carlo_empirical, gaussian_approx };

// P(N_eff) as either a Monte Carlo sample set (with histogram density) or
// the large-<N> Gaussian approximation
//   P(N) dN = N0 exp[-(4/3)(N - <N>)^2 / <N>] dN,   N >= 0,
// truncated at zero and renormalized. Var/mean = 3/8 before truncation.
struct NeffDistribution {
  double mean_neff = 0.0;
  NeffKind kind = NeffKind::gaussian_approx;
  std::vector<double> samples;  // raw draws (empirical only)
  std::vector<double> grid;     // bin centres / quadrature nodes
  std::vector<double> density;  // pdf at grid points
  double normalization = 0.0;   // prefactor N0 (gaussian kind)

  double grid_step() const;
  double integral() const;  // trapezoid over the grid
  double grid_mean() const;
  double grid_variance() const;
  double sample_mean() const;
  double sample_variance() const;
};

NeffDistribution gaussian_neff_distribution(double mean_neff, int nodes = 512);

NeffDistribution empirical_neff_distribution(double mean_neff, int n_samples,
                                             const PhysicalParams& p,
                                             uint64_t seed, int bins = 512);

// Kolmogorov-Smirnov distance between empirical samples and the truncated
// Gaussian with the same mean parameter.
double ks_distance_to_gaussian(const NeffDistribution& empirical);

// CDF of the truncated Gaussian approximation at x.
double gaussian_neff_cdf(double mean_neff, double x);

}  // namespace cavdet
