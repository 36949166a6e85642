// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "cavdet/errors.hpp"
#include "cavdet/special.hpp"

using namespace cavdet;

TEST_CASE("Poisson CDF edge cases") {
  CHECK(poisson_cdf_below(0, 3.0) == 0.0);
  CHECK(poisson_cdf_below(1, 0.0) == 1.0);
  CHECK(poisson_cdf_below(3, 0.0) == 1.0);
  CHECK(poisson_cdf_below(1, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(poisson_cdf_below(1, -1.0), ValidationError);
}

TEST_CASE("incomplete-gamma and Poisson-sum routes agree to 1e-12") {
  // Q(k, x) = P(Poisson(x) < k): two independent implementations
  for (int k = 1; k <= 10; ++k) {
    for (double x = 0.125; x <= 50.0; x += 0.676) {
      const double direct = poisson_cdf_below(k, x);
      const double gamma_route = regularized_gamma_q(static_cast<double>(k), x);
      CHECK(std::abs(direct - gamma_route) < 1e-12);
    }
  }
}

TEST_CASE("regularized gamma basics") {
  CHECK(regularized_gamma_q(1.0, 0.0) == 1.0);
  CHECK(regularized_gamma_q(1.0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK_THROWS_AS(regularized_gamma_q(0.0, 1.0), ValidationError);
}
