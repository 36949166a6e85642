// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "cavdet/errors.hpp"
#include "cavdet/physics.hpp"

using namespace cavdet;

TEST_CASE("single-atom cooperativity reproduces the measured value") {
  PhysicalParams p;  // g 98.4, kappa 5200, gamma 3
  const double c1 = single_atom_cooperativity(p).c1;
  CHECK(c1 == doctest::Approx(0.310338).epsilon(1e-5));
  // inside the quoted 0.307(11) band
  CHECK(std::abs(c1 - 0.307) < 0.011);
}

TEST_CASE("cooperativity limiting cases") {
  PhysicalParams p;
  p.g_mhz = 0.0;
  CHECK(single_atom_cooperativity(p).c1 == 0.0);

  PhysicalParams q;
  q.kappa_mhz = 17.0;
  q.gamma_mhz = 3.5;
  q.g_mhz = std::sqrt(2.0 * q.kappa_mhz * q.gamma_mhz);
  CHECK(single_atom_cooperativity(q).c1 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mode volume") {
  PhysicalParams p;  // w 4.46, L 139
  CHECK(mode_volume_um3(p) == doctest::Approx(2171.57).epsilon(1e-4));

  // 4.9e8 cm^-3 at this volume corresponds to about one effective atom
  const double density_um3 = 4.9e8 * 1e-12;
  const double mean_neff = density_um3 * mode_volume_um3(p);
  CHECK(mean_neff == doctest::Approx(1.064).epsilon(1e-3));
  CHECK(std::abs(mean_neff - 1.06) < 0.04);

  PhysicalParams degenerate = p;
  degenerate.waist_um = 1e-12;
  CHECK(mode_volume_um3(degenerate) < 1e-20);
}

TEST_CASE("mode function landmarks") {
  PhysicalParams p;
  CHECK(mode_function({0, 0, p.lambda_um / 4.0}, p) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mode_function({0, 0, p.lambda_um / 2.0}, p) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(mode_function({p.waist_um, 0, p.lambda_um / 4.0}, p) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  // bounded by construction
  for (double x : {0.1, 1.0, 3.0}) {
    for (double z : {0.05, 0.3, 0.77}) {
      const double chi = mode_function({x, 0.5, z}, p);
      CHECK(chi <= 1.0);
      CHECK(chi >= -1.0);
    }
  }
}

TEST_CASE("parameter validation") {
  PhysicalParams p;
  CHECK_NOTHROW(p.validate());
  p.kappa_mhz = -1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = PhysicalParams{};
  p.waist_um = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("regime warnings flag (g/kappa)^4") {
  PhysicalParams p;
  CHECK(regime_warnings(p).empty());  // (98.4/5200)^4 ~ 1e-7

  PhysicalParams strong = p;
  strong.kappa_mhz = 100.0;  // (g/kappa)^4 ~ 0.94
  CHECK(!regime_warnings(strong).empty());
}
