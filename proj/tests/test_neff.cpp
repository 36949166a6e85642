// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cavdet/errors.hpp"
#include "cavdet/neff.hpp"
#include "cavdet/rng.hpp"

using namespace cavdet;

namespace {

// ratio standard error from batch means
double ratio_std_error(const std::vector<double>& samples, int n_batches) {
  const size_t batch = samples.size() / n_batches;
  std::vector<double> ratios;
  for (int b = 0; b < n_batches; ++b) {
    double mean = 0.0;
    for (size_t i = b * batch; i < (b + 1) * batch; ++i) mean += samples[i];
    mean /= static_cast<double>(batch);
    double var = 0.0;
    for (size_t i = b * batch; i < (b + 1) * batch; ++i) {
      var += (samples[i] - mean) * (samples[i] - mean);
    }
    var /= static_cast<double>(batch - 1);
    ratios.push_back(var / mean);
  }
  double mean_r = 0.0;
  for (double r : ratios) mean_r += r;
  mean_r /= n_batches;
  double var_r = 0.0;
  for (double r : ratios) var_r += (r - mean_r) * (r - mean_r);
  return std::sqrt(var_r / (n_batches * (n_batches - 1.0)));
}

}  // namespace

TEST_CASE("sampled configuration is recomputable and deterministic") {
  PhysicalParams p;
  const SampleBox box = SampleBox::default_for(p);
  Rng rng(7);
  const auto cfg = sample_configuration(4.9e-4, box, p, rng);
  CHECK(cfg.neff == recompute_neff(cfg, p));
  CHECK(cfg.collective_coupling == doctest::Approx(std::sqrt(cfg.neff)));

  Rng rng2(7);
  const auto cfg2 = sample_configuration(4.9e-4, box, p, rng2);
  REQUIRE(cfg.positions.size() == cfg2.positions.size());
  CHECK(cfg.neff == cfg2.neff);
}

TEST_CASE("zero density gives the empty configuration") {
  PhysicalParams p;
  Rng rng(1);
  const auto cfg = sample_configuration(0.0, SampleBox::default_for(p), p, rng);
  CHECK(cfg.positions.empty());
  CHECK(cfg.neff == 0.0);
}

TEST_CASE("undersized box is rejected") {
  PhysicalParams p;
  SampleBox box = SampleBox::default_for(p);
  box.radial_halfwidth_um = 3.0 * p.waist_um;
  Rng rng(1);
  CHECK_THROWS_AS(sample_configuration(1e-4, box, p, rng), ValidationError);
}

TEST_CASE("Monte Carlo mean and variance-to-mean match the analytics") {
  PhysicalParams p;
  const SampleBox box = SampleBox::default_for(p);
  const double density = density_for_mean_neff(1.0, box, p);
  const int n = 100000;

  std::vector<double> samples(n);
  for (int i = 0; i < n; ++i) {
    Rng rng = Rng::derive_stream(12, i);
    samples[i] = sample_configuration(density, box, p, rng).neff;
  }
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : samples) var += (x - mean) * (x - mean);
  var /= (n - 1);

  const double se_mean = std::sqrt(var / n);
  CHECK(std::abs(mean - 1.0) < 3.0 * se_mean);

  // rho * V_cav approximation differs from the exact box integral by < 0.2%
  const double rho_vcav = density * mode_volume_um3(p);
  CHECK(std::abs(mean - rho_vcav) < 3.0 * se_mean + 0.002 * rho_vcav);

  // standing-wave geometry: Var/mean = 3/8
  const double se_ratio = ratio_std_error(samples, 20);
  CHECK(std::abs(var / mean - 0.375) < 3.0 * se_ratio);
}

TEST_CASE("radial box convergence: doubling the half-width moves the mean < 0.1%") {
  PhysicalParams p;
  SampleBox box = SampleBox::default_for(p);
  const double base = analytic_mean_neff(1e-4, box, p);
  SampleBox wide = box;
  wide.radial_halfwidth_um *= 2.0;
  const double wide_mean = analytic_mean_neff(1e-4, wide, p);
  CHECK(std::abs(wide_mean - base) / base < 1e-3);
}

TEST_CASE("gaussian distribution normalizes and matches its large-N prefactor") {
  const auto dist = gaussian_neff_distribution(1.24, 512);
  CHECK(std::abs(dist.integral() - 1.0) < 1e-6);
  for (double d : dist.density) CHECK(d >= 0.0);

  // N0 -> 2 / sqrt(3 pi <N>) once truncation is negligible
  const double mu = 1e4;
  const auto big = gaussian_neff_distribution(mu, 512);
  const double limit = 2.0 / std::sqrt(3.0 * M_PI * mu);
  CHECK(big.normalization == doctest::Approx(limit).epsilon(1e-9));

  // untruncated Var/mean = 3/8 read off the exponent
  CHECK(big.grid_variance() / big.grid_mean() ==
        doctest::Approx(0.375).epsilon(1e-3));
}

TEST_CASE("gaussian distribution rejects bad inputs") {
  CHECK_THROWS_AS(gaussian_neff_distribution(0.0, 512), ValidationError);
  CHECK_THROWS_AS(gaussian_neff_distribution(-1.0, 512), ValidationError);
}

TEST_CASE("empirical distribution at <N>=8 is close to the gaussian form") {
  PhysicalParams p;
  const auto dist = empirical_neff_distribution(8.0, 30000, p, 5, 256);
  CHECK(std::abs(dist.integral() - 1.0) < 1e-6);
  for (double d : dist.density) CHECK(d >= 0.0);
  const double se_mean = std::sqrt(dist.sample_variance() / dist.samples.size());
  CHECK(std::abs(dist.sample_mean() - 8.0) < 3.0 * se_mean);
  CHECK(ks_distance_to_gaussian(dist) < 0.05);
}

TEST_CASE("empirical distribution is deterministic per seed") {
  PhysicalParams p;
  const auto a = empirical_neff_distribution(0.5, 500, p, 9, 64);
  const auto b = empirical_neff_distribution(0.5, 500, p, 9, 64);
  CHECK(a.samples == b.samples);
}
