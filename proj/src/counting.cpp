// SPDX-License-Identifier: Apache-2.0
#include "cavdet/counting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cavdet/errors.hpp"

namespace cavdet {

std::vector<G2Point> g2_estimate(const CountStream& stream, int max_lag) {
  stream.validate();
  if (max_lag < 0) throw ValidationError("max_lag must be >= 0");
  if (static_cast<size_t>(max_lag) >= stream.n_bins) {
    throw ValidationError("max_lag exceeds the segment length");
  }

  std::vector<G2Point> result(max_lag + 1);
  std::vector<std::vector<double>> per_trial(max_lag + 1);

  for (size_t trial = 0; trial < stream.n_trials; ++trial) {
    double mean = 0.0;
    for (size_t b = 0; b < stream.n_bins; ++b) mean += stream.at(trial, b);
    mean /= static_cast<double>(stream.n_bins);
    if (mean <= 0.0) continue;

    for (int lag = 0; lag <= max_lag; ++lag) {
      const size_t n_pairs = stream.n_bins - lag;
      double corr = 0.0;
      for (size_t b = 0; b < n_pairs; ++b) {
        corr += static_cast<double>(stream.at(trial, b)) *
                static_cast<double>(stream.at(trial, b + lag));
      }
      corr /= static_cast<double>(n_pairs);
      per_trial[lag].push_back(corr / (mean * mean));
    }
  }

  if (per_trial[0].empty()) {
    throw ValidationError("g2 undefined: zero mean count in every trial");
  }

  for (int lag = 0; lag <= max_lag; ++lag) {
    const auto& xs = per_trial[lag];
    const double n = static_cast<double>(xs.size());
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    result[lag].tau_us = lag * stream.bin_us;
    result[lag].g2 = mean;
    result[lag].std_error = xs.size() > 1 ? std::sqrt(var / (n * (n - 1.0))) : 0.0;
  }
  return result;
}

std::vector<G2Point> g2_transit_theory(const PhysicalParams& params,
                                       const DriveConfig& drive,
                                       double transit_time_us,
                                       double amplitude, double bin_us,
                                       int max_lag) {
  if (!(transit_time_us > 0.0)) {
    throw ValidationError("transit time must be positive");
  }
  if (!(bin_us > 0.0)) throw ValidationError("bin width must be positive");
  if (max_lag < 0) throw ValidationError("max_lag must be >= 0");

  const double c1 = single_atom_cooperativity(params).c1;
  const double speed = 2.0 * params.waist_um / transit_time_us;  // um/us
  const double w = params.waist_um;

  // excess detected rate of one crossing, unit amplitude
  const double b = drive.fringe_b;
  auto excess = [&](double chi_sq) {
    const double c = c1 * chi_sq;
    const double frac = (b + 2.0 * c) / (1.0 + 2.0 * c);
    return frac * frac - b * b;
  };

  // C(tau) = < integral R(t) R(t+tau) dt > over impact parameter and
  // standing-wave phase; quadrature is deterministic.
  const int n_phase = 32;
  const int n_impact = 48;
  const double t_span = 4.0 * w / speed;
  const int n_time = 256;
  const double dt = 2.0 * t_span / n_time;

  std::vector<double> corr(max_lag + 1, 0.0);
  std::vector<double> rate(n_time + 1);
  for (int ip = 0; ip < n_impact; ++ip) {
    const double x = -4.0 * w + 8.0 * w * (ip + 0.5) / n_impact;
    const double radial = std::exp(-2.0 * x * x / (w * w));
    for (int iq = 0; iq < n_phase; ++iq) {
      const double phase = M_PI * (iq + 0.5) / n_phase;
      const double sin_sq = std::sin(phase) * std::sin(phase);
      for (int it = 0; it <= n_time; ++it) {
        const double t = -t_span + it * dt;
        const double axial = std::exp(-2.0 * speed * speed * t * t / (w * w));
        rate[it] = excess(sin_sq * radial * axial);
      }
      for (int lag = 0; lag <= max_lag; ++lag) {
        const int shift = static_cast<int>(std::lround(lag * bin_us / dt));
        double acc = 0.0;
        for (int it = 0; it + shift <= n_time; ++it) {
          acc += rate[it] * rate[it + shift];
        }
        corr[lag] += acc * dt;
      }
    }
  }

  std::vector<G2Point> out(max_lag + 1);
  const double c0 = corr[0] > 0.0 ? corr[0] : 1.0;
  for (int lag = 0; lag <= max_lag; ++lag) {
    out[lag].tau_us = lag * bin_us;
    out[lag].g2 = 1.0 + amplitude * corr[lag] / c0;
    out[lag].std_error = 0.0;
  }
  return out;
}

std::vector<VarMeanPoint> variance_to_mean(const CountStream& streams,
                                           double running_avg_us) {
  streams.validate();
  if (streams.n_trials < 2) {
    throw ValidationError("variance-to-mean needs at least 2 trials");
  }

  std::vector<VarMeanPoint> raw(streams.n_bins);
  for (size_t b = 0; b < streams.n_bins; ++b) {
    double mean = 0.0;
    for (size_t t = 0; t < streams.n_trials; ++t) mean += streams.at(t, b);
    mean /= static_cast<double>(streams.n_trials);
    double var = 0.0;
    for (size_t t = 0; t < streams.n_trials; ++t) {
      const double d = streams.at(t, b) - mean;
      var += d * d;
    }
    var /= static_cast<double>(streams.n_trials - 1);
    raw[b].t_us = streams.bin_time_us(b);
    raw[b].ratio = mean > 0.0 ? var / mean : 0.0;
  }

  if (running_avg_us <= streams.bin_us) return raw;

  // boxcar smoothing of the ratio curve
  const int half = static_cast<int>(running_avg_us / streams.bin_us / 2.0);
  std::vector<VarMeanPoint> smooth(raw.size());
  for (size_t b = 0; b < raw.size(); ++b) {
    const size_t lo = b >= static_cast<size_t>(half) ? b - half : 0;
    const size_t hi = std::min(raw.size() - 1, b + half);
    double acc = 0.0;
    for (size_t i = lo; i <= hi; ++i) acc += raw[i].ratio;
    smooth[b].t_us = raw[b].t_us;
    smooth[b].ratio = acc / static_cast<double>(hi - lo + 1);
  }
  return smooth;
}

double mandel_linear_prediction(double alpha, double var_over_mean_n) {
  if (alpha < 0.0) throw ValidationError("per-atom yield must be >= 0");
  return 1.0 + alpha * var_over_mean_n;
}

double nonlinear_noise_prediction(const NeffDistribution& distribution,
                                  const std::function<double(double)>& rate_map,
                                  const NoiseModel& model) {
  if (!(model.bin_us > 0.0)) throw ValidationError("bin width must be positive");
  if (!rate_map) throw ValidationError("rate map is required");

  double mean_r = 0.0;
  double mean_r2 = 0.0;
  if (!distribution.samples.empty()) {
    for (double x : distribution.samples) {
      const double r = rate_map(x);
      mean_r += r;
      mean_r2 += r * r;
    }
    const double n = static_cast<double>(distribution.samples.size());
    mean_r /= n;
    mean_r2 /= n;
  } else if (distribution.grid.size() >= 2) {
    double mass = 0.0;
    for (size_t i = 0; i + 1 < distribution.grid.size(); ++i) {
      const double dx = distribution.grid[i + 1] - distribution.grid[i];
      const double r0 = rate_map(distribution.grid[i]);
      const double r1 = rate_map(distribution.grid[i + 1]);
      const double d0 = distribution.density[i];
      const double d1 = distribution.density[i + 1];
      mass += 0.5 * (d0 + d1) * dx;
      mean_r += 0.5 * (d0 * r0 + d1 * r1) * dx;
      mean_r2 += 0.5 * (d0 * r0 * r0 + d1 * r1 * r1) * dx;
    }
    if (!(mass > 0.0)) throw ValidationError("distribution has zero mass");
    mean_r /= mass;
    mean_r2 /= mass;
  } else {
    throw ValidationError("distribution carries neither samples nor a grid");
  }

  if (!(mean_r > 0.0)) {
    throw ValidationError("rate map must be positive on the distribution");
  }
  const double var_r = std::max(0.0, mean_r2 - mean_r * mean_r);
  return 1.0 + model.bin_us * var_r / mean_r;
}

std::function<double(double)> fluorescence_rate_map(
    const PhysicalParams& params, double cooperativity_ratio,
    double saturation_s, double yield_per_us, double background_per_us) {
  if (!(saturation_s > 0.0)) throw ValidationError("saturation must be positive");
  if (yield_per_us < 0.0) throw ValidationError("yield must be >= 0");
  const double c1_prime =
      single_atom_cooperativity(params).c1 * cooperativity_ratio;
  auto shape = [c1_prime, saturation_s](double neff) {
    const double c = c1_prime * neff;
    return 2.0 * c * saturation_s /
           ((1.0 + 2.0 * c) * (1.0 + 2.0 * c) + saturation_s);
  };
  const double anchor = shape(1.0);  // maximally coupled single atom
  if (!(anchor > 0.0)) throw ValidationError("degenerate calibration anchor");
  return [=](double neff) {
    return yield_per_us * shape(neff) / anchor + background_per_us;
  };
}

std::function<double(double)> reflection_rate_map(
    const PhysicalParams& params, const DriveConfig& drive,
    double background_per_us) {
  const double c1 = single_atom_cooperativity(params).c1;
  const double b = drive.fringe_b;
  const double j_in = drive.j_in;
  return [=](double neff) {
    const double c = c1 * neff;
    const double frac = (b + 2.0 * c) / (1.0 + 2.0 * c);
    return j_in * frac * frac + background_per_us;
  };
}

}  // namespace cavdet
