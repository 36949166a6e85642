// SPDX-License-Identifier: Apache-2.0
#include "cavdet/neff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cavdet/errors.hpp"

namespace cavdet {

SampleBox SampleBox::default_for(const PhysicalParams& p) {
  SampleBox box;
  box.radial_halfwidth_um = 4.0 * p.waist_um;
  box.axial_half_waves =
      std::max(1, static_cast<int>(std::lround(p.length_um / (p.lambda_um / 2.0))));
  return box;
}

double SampleBox::axial_extent_um(const PhysicalParams& p) const {
  return axial_half_waves * p.lambda_um / 2.0;
}

double SampleBox::volume_um3(const PhysicalParams& p) const {
  const double side = 2.0 * radial_halfwidth_um;
  return side * side * axial_extent_um(p);
}

void SampleBox::validate(const PhysicalParams& p) const {
  if (radial_halfwidth_um < 4.0 * p.waist_um) {
    std::ostringstream msg;
    msg << "sampling box radial half-width " << radial_halfwidth_um
        << " um is below 4 waists (" << 4.0 * p.waist_um
        << " um); truncating the Gaussian tail would bias N_eff";
    throw ValidationError(msg.str());
  }
  if (axial_half_waves < 1) {
    throw ValidationError(
        "sampling box must span at least one half wavelength axially");
  }
}

double recompute_neff(const AtomConfiguration& cfg, const PhysicalParams& p) {
  double sum = 0.0;
  for (const auto& r : cfg.positions) {
    const double chi = mode_function(r, p);
    sum += chi * chi;
  }
  return sum;
}

AtomConfiguration sample_configuration(double density_per_um3,
                                       const SampleBox& box,
                                       const PhysicalParams& p, Rng& rng) {
  if (density_per_um3 < 0.0) {
    throw ValidationError("atomic density must be non-negative");
  }
  box.validate(p);

  AtomConfiguration cfg;
  if (density_per_um3 == 0.0) return cfg;

  const double half = box.radial_halfwidth_um;
  const double z_extent = box.axial_extent_um(p);
  const uint64_t n_atoms = rng.poisson(density_per_um3 * box.volume_um3(p));
  cfg.positions.reserve(n_atoms);
  double neff = 0.0;
  for (uint64_t i = 0; i < n_atoms; ++i) {
    Vec3 r{rng.uniform(-half, half), rng.uniform(-half, half),
           rng.uniform(0.0, z_extent)};
    const double chi = mode_function(r, p);
    neff += chi * chi;
    cfg.positions.push_back(r);
  }
  cfg.neff = neff;
  cfg.collective_coupling = std::sqrt(neff);
  return cfg;
}

double analytic_mean_neff(double density_per_um3, const SampleBox& box,
                          const PhysicalParams& p) {
  // integral of |chi|^2 over the box: axial sin^2 over whole half-waves gives
  // extent/2 exactly; the radial Gaussian integrates to (pi w^2/2) erf-style
  // over the square cross-section.
  const double w = p.waist_um;
  const double half = box.radial_halfwidth_um;
  const double erf_arg = std::sqrt(2.0) * half / w;
  const double erf_val = std::erf(erf_arg);
  // separable in x and y: (integral of exp(-2x^2/w^2) over [-h,h])^2
  const double radial = (M_PI * w * w / 2.0) * erf_val * erf_val;
  return density_per_um3 * radial * box.axial_extent_um(p) / 2.0;
}

double density_for_mean_neff(double mean_neff, const SampleBox& box,
                             const PhysicalParams& p) {
  if (!(mean_neff >= 0.0)) {
    throw ValidationError("mean N_eff must be non-negative");
  }
  const double per_unit = analytic_mean_neff(1.0, box, p);
  return mean_neff / per_unit;
}

double NeffDistribution::grid_step() const {
  return grid.size() > 1 ? grid[1] - grid[0] : 0.0;
}

// Empirical densities are histograms over bin centres (exact quadrature is
// the Riemann sum); the Gaussian grid is a smooth function (trapezoid).
double NeffDistribution::integral() const {
  if (grid.size() < 2) return 0.0;
  if (kind == NeffKind::monte_carlo_empirical) {
    double acc = 0.0;
    for (size_t i = 0; i < grid.size(); ++i) acc += density[i] * grid_step();
    return acc;
  }
  double acc = 0.0;
  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    acc += 0.5 * (density[i] + density[i + 1]) * (grid[i + 1] - grid[i]);
  }
  return acc;
}

double NeffDistribution::grid_mean() const {
  if (grid.size() < 2) return 0.0;
  if (kind == NeffKind::monte_carlo_empirical) {
    double acc = 0.0;
    for (size_t i = 0; i < grid.size(); ++i) {
      acc += density[i] * grid[i] * grid_step();
    }
    return acc;
  }
  double acc = 0.0;
  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    acc += 0.5 *
           (density[i] * grid[i] + density[i + 1] * grid[i + 1]) *
           (grid[i + 1] - grid[i]);
  }
  return acc;
}

double NeffDistribution::grid_variance() const {
  const double mu = grid_mean();
  double acc = 0.0;
  if (kind == NeffKind::monte_carlo_empirical) {
    for (size_t i = 0; i < grid.size(); ++i) {
      acc += density[i] * (grid[i] - mu) * (grid[i] - mu) * grid_step();
    }
    return acc;
  }
  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    const double a = density[i] * (grid[i] - mu) * (grid[i] - mu);
    const double b = density[i + 1] * (grid[i + 1] - mu) * (grid[i + 1] - mu);
    acc += 0.5 * (a + b) * (grid[i + 1] - grid[i]);
  }
  return acc;
}

double NeffDistribution::sample_mean() const {
  if (samples.empty()) return 0.0;
  return std::accumulate(samples.begin(), samples.end(), 0.0) /
         static_cast<double>(samples.size());
}

double NeffDistribution::sample_variance() const {
  if (samples.size() < 2) return 0.0;
  const double mu = sample_mean();
  double acc = 0.0;
  for (double x : samples) acc += (x - mu) * (x - mu);
  return acc / static_cast<double>(samples.size() - 1);
}

namespace {

double gaussian_sigma(double mean_neff) { return std::sqrt(3.0 * mean_neff / 8.0); }

double grid_upper_edge(double mean_neff) {
  return mean_neff + 6.0 * gaussian_sigma(mean_neff);
}

}  // namespace

NeffDistribution gaussian_neff_distribution(double mean_neff, int nodes) {
  if (!(mean_neff > 0.0)) {
    throw ValidationError("gaussian N_eff distribution requires mean > 0");
  }
  if (nodes < 8) throw ValidationError("need at least 8 grid nodes");

  NeffDistribution dist;
  dist.mean_neff = mean_neff;
  dist.kind = NeffKind::gaussian_approx;

  const double sigma = gaussian_sigma(mean_neff);
  // exact mass of the untruncated Gaussian on [0, inf)
  const double mass =
      sigma * std::sqrt(kTwoPi) * 0.5 *
      (1.0 + std::erf(mean_neff / (sigma * std::sqrt(2.0))));
  dist.normalization = 1.0 / mass;

  const double hi = grid_upper_edge(mean_neff);
  dist.grid.resize(nodes);
  dist.density.resize(nodes);
  const double dx = hi / (nodes - 1);
  for (int i = 0; i < nodes; ++i) {
    const double x = i * dx;
    const double d = (x - mean_neff);
    dist.grid[i] = x;
    dist.density[i] =
        dist.normalization * std::exp(-4.0 / 3.0 * d * d / mean_neff);
  }
  // remove the residual quadrature defect so the grid integrates to 1 exactly
  const double q = dist.integral();
  for (auto& v : dist.density) v /= q;
  return dist;
}

NeffDistribution empirical_neff_distribution(double mean_neff, int n_samples,
                                             const PhysicalParams& p,
                                             uint64_t seed, int bins) {
  if (!(mean_neff > 0.0)) {
    throw ValidationError("empirical N_eff distribution requires mean > 0");
  }
  if (n_samples < 100) throw ValidationError("need at least 100 samples");
  if (bins < 8) throw ValidationError("need at least 8 histogram bins");

  const SampleBox box = SampleBox::default_for(p);
  const double density = density_for_mean_neff(mean_neff, box, p);

  NeffDistribution dist;
  dist.mean_neff = mean_neff;
  dist.kind = NeffKind::monte_carlo_empirical;
  dist.samples.resize(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    Rng rng = Rng::derive_stream(seed, static_cast<uint64_t>(i));
    dist.samples[i] = sample_configuration(density, box, p, rng).neff;
  }

  // the histogram covers every draw, so the density integrates to one
  double hi = grid_upper_edge(mean_neff);
  for (double x : dist.samples) hi = std::max(hi, x * (1.0 + 1e-9));
  const double dx = hi / bins;
  std::vector<double> hist(bins, 0.0);
  for (double x : dist.samples) {
    const int b = std::min(bins - 1, static_cast<int>(x / dx));
    hist[b] += 1.0;
  }
  dist.grid.resize(bins);
  dist.density.resize(bins);
  for (int b = 0; b < bins; ++b) {
    dist.grid[b] = (b + 0.5) * dx;
    dist.density[b] = hist[b] / (static_cast<double>(dist.samples.size()) * dx);
  }
  return dist;
}

double gaussian_neff_cdf(double mean_neff, double x) {
  if (x <= 0.0) return 0.0;
  const double sigma = gaussian_sigma(mean_neff);
  const double root2 = std::sqrt(2.0);
  const double lo = std::erf(mean_neff / (sigma * root2));
  const double val = std::erf((x - mean_neff) / (sigma * root2));
  return (val + lo) / (1.0 + lo);
}

double ks_distance_to_gaussian(const NeffDistribution& empirical) {
  if (empirical.samples.empty()) {
    throw ValidationError("KS distance needs raw samples");
  }
  std::vector<double> sorted = empirical.samples;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (size_t i = 0; i < sorted.size(); ++i) {
    const double f = gaussian_neff_cdf(empirical.mean_neff, sorted[i]);
    d = std::max(d, std::abs((i + 1) / n - f));
    d = std::max(d, std::abs(f - i / n));
  }
  return d;
}

}  // namespace cavdet
