// SPDX-License-Identifier: Apache-2.0
#include "cavdet/physics.hpp"

#include <cmath>
#include <sstream>

#include "cavdet/errors.hpp"

namespace cavdet {

void PhysicalParams::validate() const {
  const struct {
    const char* name;
    double value;
  } fields[] = {
      {"g_mhz", g_mhz},         {"kappa_mhz", kappa_mhz},
      {"gamma_mhz", gamma_mhz}, {"lambda_um", lambda_um},
      {"length_um", length_um}, {"waist_um", waist_um},
  };
  for (const auto& f : fields) {
    if (!(f.value > 0.0) || !std::isfinite(f.value)) {
      std::ostringstream msg;
      msg << "PhysicalParams." << f.name << " must be strictly positive, got "
          << f.value;
      throw ValidationError(msg.str());
    }
  }
}

Cooperativity single_atom_cooperativity(const PhysicalParams& p, Branch label) {
  return {p.g_mhz * p.g_mhz / (2.0 * p.kappa_mhz * p.gamma_mhz), label};
}

double mode_volume_um3(const PhysicalParams& p) {
  return M_PI * p.waist_um * p.waist_um * p.length_um / 4.0;
}

double mode_function(const Vec3& r, const PhysicalParams& p) {
  const double radial = (r.x * r.x + r.y * r.y) / (p.waist_um * p.waist_um);
  return std::sin(kTwoPi * r.z / p.lambda_um) * std::exp(-radial);
}

std::vector<std::string> regime_warnings(const PhysicalParams& p) {
  std::vector<std::string> warnings;
  const double ratio = p.g_mhz / p.kappa_mhz;
  const double r4 = ratio * ratio * ratio * ratio;
  if (r4 >= 1e-3) {
    std::ostringstream msg;
    msg << "(g/kappa)^4 = " << r4
        << " is not small; the closed-form reflection signal assumes "
           "(g/kappa)^4 << 1";
    warnings.push_back(msg.str());
  }
  return warnings;
}

}  // namespace cavdet
