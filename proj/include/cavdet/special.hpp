// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace cavdet {

// P(Poisson(x) < k) = sum_{j<k} e^-x x^j / j!, the direct finite sum.
double poisson_cdf_below(int k, double x);

// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a),
// series for x < a+1, Lentz continued fraction otherwise. Independent of
// poisson_cdf_below; the two agree through the identity
// Q(k, x) = P(Poisson(x) < k) for integer k >= 1.
double regularized_gamma_q(double a, double x);

}  // namespace cavdet
