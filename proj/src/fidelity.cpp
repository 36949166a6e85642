// SPDX-License-Identifier: Apache-2.0
#include "cavdet/fidelity.hpp"

#include <algorithm>
#include <cmath>

#include "cavdet/errors.hpp"
#include "cavdet/special.hpp"

namespace cavdet {

void DetectorRates::validate() const {
  if (signal_per_ms < 0.0) throw ValidationError("signal rate must be >= 0");
  if (background_per_ms < 0.0) {
    throw ValidationError("background rate must be >= 0");
  }
  if (prior_bright < 0.0 || prior_bright > 1.0) {
    throw ValidationError("prior must lie in [0, 1]");
  }
}

namespace {
constexpr double kMsPerUs = 1e-3;
}

double efficiency(const DetectorRates& rates, double t_us) {
  rates.validate();
  if (t_us < 0.0) throw ValidationError("measurement time must be >= 0");
  return 1.0 - std::exp(-rates.signal_per_ms * t_us * kMsPerUs);
}

double fidelity(const DetectorRates& rates, int k_threshold, double t_us) {
  rates.validate();
  if (k_threshold < 1) throw ValidationError("threshold K must be >= 1");
  if (t_us < 0.0) throw ValidationError("measurement time must be >= 0");
  const double t_ms = t_us * kMsPerUs;
  const double p = rates.prior_bright;
  const double dark_ok = poisson_cdf_below(k_threshold, rates.background_per_ms * t_ms);
  const double bright_missed = poisson_cdf_below(
      k_threshold, (rates.signal_per_ms + rates.background_per_ms) * t_ms);
  return (1.0 - p) * dark_ok + p * (1.0 - bright_missed);
}

double optimal_time_closed_form(const DetectorRates& rates, int k_threshold) {
  rates.validate();
  if (!(rates.signal_per_ms > 0.0) || !(rates.background_per_ms > 0.0)) {
    throw ValidationError("closed-form optimum needs S > 0 and B > 0");
  }
  const double p = rates.prior_bright;
  if (!(p > 0.0) || !(p < 1.0)) {
    throw ValidationError("closed-form optimum needs 0 < p < 1");
  }
  const double s = rates.signal_per_ms;
  const double b = rates.background_per_ms;
  const double t_ms =
      (k_threshold * std::log((s + b) / b) + std::log(p / (1.0 - p))) / s;
  return std::max(0.0, t_ms) / kMsPerUs;
}

namespace {

// dF/dT in 1/ms units; the fidelity surface is too flat near the optimum for
// value-only search, so the optimizer finishes on the derivative sign.
double fidelity_slope(const DetectorRates& rates, int k, double t_ms) {
  const double p = rates.prior_bright;
  const double b = rates.background_per_ms;
  const double sb = rates.signal_per_ms + b;
  double log_fact = 0.0;
  for (int j = 2; j < k; ++j) log_fact += std::log(double(j));
  const double dark = (1.0 - p) * b *
                      std::exp(-b * t_ms + (k - 1) * std::log(b * t_ms) - log_fact);
  const double bright =
      p * sb * std::exp(-sb * t_ms + (k - 1) * std::log(sb * t_ms) - log_fact);
  return bright - dark;
}

}  // namespace

FidelityOptimum optimal_time(const DetectorRates& rates, int k_threshold) {
  rates.validate();
  if (!(rates.signal_per_ms > 0.0)) {
    throw ValidationError("optimal_time requires S > 0");
  }
  if (!(rates.background_per_ms > 0.0)) {
    throw ValidationError("optimal_time requires B > 0");
  }
  if (k_threshold < 1) throw ValidationError("threshold K must be >= 1");

  // Bracket around the closed-form seed (exact for p = 1/2); golden section.
  const double seed =
      k_threshold *
      std::log(1.0 + rates.signal_per_ms / rates.background_per_ms) /
      rates.signal_per_ms / kMsPerUs;
  double lo = 0.0;
  double hi = 10.0 * seed;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - gr * (hi - lo);
  double d = lo + gr * (hi - lo);
  double fc = fidelity(rates, k_threshold, c);
  double fd = fidelity(rates, k_threshold, d);
  for (int it = 0; it < 100 && (hi - lo) > 1e-6 * std::max(1.0, hi); ++it) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = fidelity(rates, k_threshold, c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + gr * (hi - lo);
      fd = fidelity(rates, k_threshold, d);
    }
  }

  // derivative-sign bisection through the flat top
  double a_ms = std::max(1e-12, 0.5 * lo * kMsPerUs);
  double b_ms = std::max(2.0 * hi, 1e-9) * kMsPerUs;
  if (fidelity_slope(rates, k_threshold, a_ms) <= 0.0) {
    return {0.0, fidelity(rates, k_threshold, 0.0)};
  }
  for (int it = 0; it < 200 && (b_ms - a_ms) > 1e-15 * b_ms; ++it) {
    const double mid = 0.5 * (a_ms + b_ms);
    if (fidelity_slope(rates, k_threshold, mid) > 0.0) {
      a_ms = mid;
    } else {
      b_ms = mid;
    }
  }
  const double t = 0.5 * (a_ms + b_ms) / kMsPerUs;
  return {t, fidelity(rates, k_threshold, t)};
}

ConfusionTable confusion_table(const DetectorRates& rates, int k_threshold,
                               double t_us) {
  rates.validate();
  if (k_threshold < 1) throw ValidationError("threshold K must be >= 1");
  const double t_ms = t_us * kMsPerUs;
  const double p = rates.prior_bright;
  const double dark_below =
      poisson_cdf_below(k_threshold, rates.background_per_ms * t_ms);
  const double bright_below = poisson_cdf_below(
      k_threshold, (rates.signal_per_ms + rates.background_per_ms) * t_ms);
  ConfusionTable table;
  table.dark_identified_dark = (1.0 - p) * dark_below;
  table.dark_identified_bright = (1.0 - p) * (1.0 - dark_below);
  table.bright_identified_dark = p * bright_below;
  table.bright_identified_bright = p * (1.0 - bright_below);
  return table;
}

FidelityCurve fidelity_curve(const DetectorRates& rates, int k_threshold,
                             double t_max_us, int n_points) {
  if (n_points < 2) throw ValidationError("curve needs at least 2 points");
  FidelityCurve curve;
  curve.k_threshold = k_threshold;
  curve.t_us.resize(n_points);
  curve.f.resize(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double t = t_max_us * i / (n_points - 1);
    curve.t_us[i] = t;
    curve.f[i] = fidelity(rates, k_threshold, t);
  }
  curve.optimum = optimal_time(rates, k_threshold);
  return curve;
}

namespace {

size_t count_above_threshold(const CountStream& stream, int k_threshold,
                             double t_us) {
  const size_t window_bins = std::min(
      stream.n_bins,
      static_cast<size_t>(std::llround(t_us / stream.bin_us)));
  size_t n_bright = 0;
  for (size_t trial = 0; trial < stream.n_trials; ++trial) {
    uint64_t total = 0;
    for (size_t b = 0; b < window_bins; ++b) total += stream.at(trial, b);
    if (total >= static_cast<uint64_t>(k_threshold)) ++n_bright;
  }
  return n_bright;
}

}  // namespace

EmpiricalFidelity fidelity_from_counts(const CountStream& bright,
                                       const CountStream& dark,
                                       int k_threshold, double t_us) {
  bright.validate();
  dark.validate();
  if (bright.n_trials == 0 || dark.n_trials == 0) {
    throw ValidationError("need at least one bright and one dark trial");
  }
  if (k_threshold < 1) throw ValidationError("threshold K must be >= 1");

  const size_t bright_hits = count_above_threshold(bright, k_threshold, t_us);
  const size_t dark_hits = count_above_threshold(dark, k_threshold, t_us);
  const size_t n = bright.n_trials + dark.n_trials;
  const size_t correct = bright_hits + (dark.n_trials - dark_hits);

  EmpiricalFidelity result;
  result.n_trials = n;
  result.resolution = 1.0 / static_cast<double>(n);
  result.fraction_correct = static_cast<double>(correct) / static_cast<double>(n);
  result.std_error = std::sqrt(result.fraction_correct *
                               (1.0 - result.fraction_correct) /
                               static_cast<double>(n));
  return result;
}

}  // namespace cavdet
