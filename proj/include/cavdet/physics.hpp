// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace cavdet {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// Cavity and atom constants, quoted the way the lab quotes them: rates are
// angular frequency / 2pi in MHz, lengths in micrometres. Ratios such as the
// cooperativity are unaffected by the 2pi convention; photon fluxes are not,
// so conversions to angular rates happen at the point of use.
struct PhysicalParams {
  double g_mhz = 98.4;        // atom-cavity coupling
  double kappa_mhz = 5200.0;  // cavity half-linewidth (HWHM)
  double gamma_mhz = 3.0;     // atomic half-linewidth (HWHM)
  double lambda_um = 0.78;    // transition wavelength
  double length_um = 139.0;   // cavity length
  double waist_um = 4.46;     // 1/e field radius of the mode waist

  void validate() const;  // throws ValidationError unless all fields > 0
};

enum class Branch { reflection, fluorescence };

struct Cooperativity {
  double c1 = 0.0;
  Branch label = Branch::reflection;
};

// C1 = g^2 / (2 kappa gamma)
Cooperativity single_atom_cooperativity(const PhysicalParams& p,
                                        Branch label = Branch::reflection);

// V_cav = pi w^2 L / 4
double mode_volume_um3(const PhysicalParams& p);

// chi(r) = sin(2 pi z / lambda) exp(-(x^2 + y^2) / w^2), in [-1, 1]
double mode_function(const Vec3& r, const PhysicalParams& p);

// Closed-form signal expressions assume (g/kappa)^4 << 1; violations are
// reported as warnings, not errors (threshold 1e-3).
std::vector<std::string> regime_warnings(const PhysicalParams& p);

}  // namespace cavdet
