// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <complex>

namespace cavdet::zeeman {

inline constexpr int kGroundStates = 5;   // F = 2, m = -2..2
inline constexpr int kExcitedStates = 7;  // F' = 3, m' = -3..3
inline constexpr int kStates = kGroundStates + kExcitedStates;

// Squared Clebsch-Gordan couplings for F=2 -> F'=3, from the standard
// tables. Indexed by ground m and polarization q; coupling and decay
// branching are the same numbers read in opposite directions.
struct LevelScheme {
  static LevelScheme f2_to_f3();

  // |<2, m; 1, q | 3, m+q>|^2, zero outside the manifold
  double coupling_sq(int m_ground, int q) const;
  // decay branching of excited m' through polarization q
  double branching(int m_excited, int q) const;
  // sum rule: total branching out of each excited state
  double branching_sum(int m_excited) const;

  std::array<std::array<double, 3>, kGroundStates> table{};  // [m+2][q+1]
};

// Drive polarization in the spherical basis along the quantization (cavity)
// axis: amplitude[q+1] multiplies the sigma-/pi/sigma+ component.
struct DrivePolarization {
  std::array<std::complex<double>, 3> amplitude{};
  double saturation_s = 0.0;

  static DrivePolarization sigma_plus(double s);
  static DrivePolarization sigma_minus(double s);
  // linear, perpendicular to the cavity axis: equal sigma+/sigma-, no pi
  static DrivePolarization linear_perp(double s);

  double norm_sq() const;
  void validate() const;
};

struct Populations {
  std::array<double, kGroundStates> ground{};
  std::array<double, kExcitedStates> excited{};

  double total() const;
  double total_excited() const;
};

enum class ObeModel {
  rate_equations,  // populations only (default)
  full_bloch,      // 12-level master equation with coherences
};

// Stationary populations under resonant drive. Zero drive returns the
// uniform ground manifold.
Populations equilibrium_populations(const LevelScheme& scheme,
                                    const DrivePolarization& drive,
                                    ObeModel model = ObeModel::rate_equations);

// Fraction of the total excited-state decay carried by sigma+- channels.
double sigma_fraction(const Populations& populations,
                      const LevelScheme& scheme);

// C'_N / C_N for the fluorescence geometry against the circular-probe
// cycling reference (C_N uses the cycling-transition dipole, reference 1).
//
// For a linearly polarized drive the sigma+ and sigma- components are
// coherent: in the drive's own quantization basis the pumping is pure pi and
// the resonant equilibrium is exactly the rate-equation one. The emission
// reaching the detector is carried by the cavity polarization mode
// co-aligned with the drive-induced dipole, so the effective cooperativity
// weight is the equilibrium pi-branching fraction in that basis. Its value
// is independent of s (the equilibrium excited-state shape does not change
// with drive strength), matching the weak s-dependence of the published
// ratio. A pure circular drive pumps the cycling transition and returns 1.
double cooperativity_ratio(const LevelScheme& scheme,
                           const DrivePolarization& drive,
                           ObeModel model = ObeModel::rate_equations);

}  // namespace cavdet::zeeman
