// SPDX-License-Identifier: Apache-2.0
#include "cavdet/transit.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "cavdet/counting.hpp"
#include "cavdet/errors.hpp"
#include "cavdet/neff.hpp"
#include "cavdet/rng.hpp"

namespace cavdet {

double CloudProfile::sigma_from_fwhm(double fwhm_ms) {
  return fwhm_ms / (2.0 * std::sqrt(2.0 * std::log(2.0)));
}

void CloudProfile::validate() const {
  if (peak_mean_neff < 0.0) throw ValidationError("peak <N_eff> must be >= 0");
  if (!(sigma_ms > 0.0)) throw ValidationError("cloud width must be positive");
  if (!(decay_us > 0.0)) throw ValidationError("decay constant must be positive");
}

void ExperimentPlan::validate() const {
  params.validate();
  drive.validate(params.gamma_mhz);
  if (!(bin_us > 0.0)) throw ValidationError("bin width must be positive");
  if (n_trials < 1) throw ValidationError("need at least one trial");
  if (!(t_end_ms > t_start_ms)) {
    throw ValidationError("simulation window must have positive length");
  }
  if (!(speed_m_per_s > 0.0)) throw ValidationError("drop speed must be positive");
  if (background_per_ms < 0.0) {
    throw ValidationError("background rate must be >= 0");
  }
  if (yield_per_atom_us < 0.0) throw ValidationError("yield must be >= 0");
  if (!(cooperativity_ratio > 0.0)) {
    throw ValidationError("cooperativity ratio must be positive");
  }
}

size_t ExperimentPlan::n_bins() const {
  return static_cast<size_t>(
      std::llround((t_end_ms - t_start_ms) * 1e3 / bin_us));
}

int ExperimentPlan::effective_refresh_bins() const {
  if (refresh_bins > 0) return refresh_bins;
  const double transit = transit_time_us(params, speed_m_per_s);
  return std::max(1, static_cast<int>(std::lround(transit / bin_us)));
}

std::vector<double> mean_neff_timeline(const CloudProfile& profile,
                                       Branch mode,
                                       const std::vector<double>& t_ms) {
  profile.validate();
  std::vector<double> out(t_ms.size());
  for (size_t i = 0; i < t_ms.size(); ++i) {
    const double d = t_ms[i] - profile.arrival_ms;
    double value = profile.peak_mean_neff *
                   std::exp(-d * d / (2.0 * profile.sigma_ms * profile.sigma_ms));
    if (mode == Branch::fluorescence && t_ms[i] >= profile.drive_on_ms) {
      value *= std::exp(-(t_ms[i] - profile.drive_on_ms) * 1e3 / profile.decay_us);
    }
    out[i] = value;
  }
  return out;
}

double transit_time_us(const PhysicalParams& params, double speed_m_per_s) {
  if (!(speed_m_per_s > 0.0)) throw ValidationError("speed must be positive");
  // 1 m/s = 1 um/us
  return 2.0 * params.waist_um / speed_m_per_s;
}

namespace {

// detected rate in photons/us as a function of N_eff, before background
std::function<double(double)> plan_rate_map(const ExperimentPlan& plan) {
  if (plan.mode == Branch::reflection) {
    return reflection_rate_map(plan.params, plan.drive);
  }
  return fluorescence_rate_map(plan.params, plan.cooperativity_ratio,
                               plan.drive.saturation_s, plan.yield_per_atom_us);
}

}  // namespace

CountStream simulate_counts(const ExperimentPlan& plan,
                            const CloudProfile& profile, int n_threads) {
  plan.validate();
  profile.validate();

  CountStream stream;
  stream.bin_us = plan.bin_us;
  stream.t0_us = plan.t_start_ms * 1e3;
  stream.n_trials = static_cast<size_t>(plan.n_trials);
  stream.n_bins = plan.n_bins();
  stream.counts.assign(stream.n_trials * stream.n_bins, 0);

  const SampleBox box = SampleBox::default_for(plan.params);
  const double neff_per_density = analytic_mean_neff(1.0, box, plan.params);
  const auto rate_map = plan_rate_map(plan);
  const int refresh = plan.effective_refresh_bins();
  const double bg_per_us = plan.background_per_ms * 1e-3;
  const double drive_on_us = profile.drive_on_ms * 1e3;

  auto run_trial = [&](size_t trial) {
    Rng rng = Rng::derive_stream(plan.seed, trial);
    for (size_t block = 0; block * refresh < stream.n_bins; ++block) {
      const size_t first = block * refresh;
      const size_t last = std::min(stream.n_bins, first + refresh);
      const double t_mid_ms =
          (stream.t0_us + 0.5 * (first + last) * plan.bin_us) * 1e-3;
      const double mean =
          mean_neff_timeline(profile, plan.mode, {t_mid_ms})[0];

      double neff = 0.0;
      if (mean > 0.0) {
        const double density = mean / neff_per_density;
        Rng cfg_rng(rng.next_u64());
        neff = sample_configuration(density, box, plan.params, cfg_rng).neff;
      }

      for (size_t b = first; b < last; ++b) {
        double rate = rate_map(neff);
        if (plan.mode == Branch::fluorescence &&
            stream.t0_us + (b + 0.5) * plan.bin_us < drive_on_us) {
          rate = 0.0;  // excitation beam still off
        }
        const double mean_counts = (rate + bg_per_us) * plan.bin_us;
        stream.at(trial, b) = static_cast<uint32_t>(rng.poisson(mean_counts));
      }
    }
  };

  const int workers =
      std::max(1, std::min<int>(n_threads, plan.n_trials));
  if (workers == 1) {
    for (size_t trial = 0; trial < stream.n_trials; ++trial) run_trial(trial);
  } else {
    std::atomic<size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const size_t trial = next.fetch_add(1);
        if (trial >= stream.n_trials) break;
        run_trial(trial);
      }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return stream;
}

namespace {

// The simulated average counts follow E[R(N_eff)] at the local mean, not
// R(<N_eff>): for the fit to recover the injected peak the model must carry
// the same N_eff statistics as the generator. The expectation is tabulated
// on a mean-<N_eff> grid with the production sampler and interpolated.
class ExpectedRateTable {
 public:
  ExpectedRateTable(const ExperimentPlan& plan,
                    const std::function<double(double)>& rate_map,
                    double mean_max) {
    const int grid_points = 41;
    const int samples_per_point = 20000;
    const SampleBox box = SampleBox::default_for(plan.params);
    const double per_density = analytic_mean_neff(1.0, box, plan.params);
    step_ = std::max(mean_max, 0.1) / (grid_points - 1);
    values_.resize(grid_points);
    values_[0] = rate_map(0.0);
    for (int k = 1; k < grid_points; ++k) {
      const double density = k * step_ / per_density;
      double acc = 0.0;
      for (int i = 0; i < samples_per_point; ++i) {
        Rng rng = Rng::derive_stream(0x5eedf17ULL + k, i);
        acc += rate_map(
            sample_configuration(density, box, plan.params, rng).neff);
      }
      values_[k] = acc / samples_per_point;
    }
  }

  double operator()(double mean_neff) const {
    if (mean_neff <= 0.0) return values_.front();
    const double pos = mean_neff / step_;
    const size_t k = static_cast<size_t>(pos);
    if (k + 1 >= values_.size()) return values_.back();
    const double frac = pos - k;
    return values_[k] * (1.0 - frac) + values_[k + 1] * frac;
  }

 private:
  double step_ = 1.0;
  std::vector<double> values_;
};

struct FitModel {
  const ExperimentPlan* plan;
  const ExpectedRateTable* expected_rate;
  double bg_per_us;

  // expected counts per bin at time t for parameters (peak, sigma, arrival)
  double operator()(double t_ms, const Eigen::Vector3d& p) const {
    const double d = t_ms - p(2);
    const double mean = p(0) * std::exp(-d * d / (2.0 * p(1) * p(1)));
    return ((*expected_rate)(std::max(0.0, mean)) + bg_per_us) * plan->bin_us;
  }
};

}  // namespace

CloudFit fit_cloud_profile(const CountStream& stream,
                           const ExperimentPlan& plan,
                           const CloudProfile& initial_guess) {
  stream.validate();
  plan.validate();
  initial_guess.validate();
  if (stream.n_trials < 1 || stream.n_bins < 8) {
    throw ValidationError("fit needs averaged data with at least 8 bins");
  }

  // trial-averaged trace
  std::vector<double> t_ms(stream.n_bins);
  std::vector<double> y(stream.n_bins);
  for (size_t b = 0; b < stream.n_bins; ++b) {
    t_ms[b] = stream.bin_time_us(b) * 1e-3;
    double acc = 0.0;
    for (size_t tr = 0; tr < stream.n_trials; ++tr) acc += stream.at(tr, b);
    y[b] = acc / static_cast<double>(stream.n_trials);
  }

  const ExpectedRateTable expected_rate(
      plan, plan_rate_map(plan), 2.5 * initial_guess.peak_mean_neff + 0.5);
  FitModel model{&plan, &expected_rate, plan.background_per_ms * 1e-3};
  Eigen::Vector3d p(initial_guess.peak_mean_neff, initial_guess.sigma_ms,
                    initial_guess.arrival_ms);

  // Levenberg-Marquardt with numerical Jacobian
  double lambda = 1e-3;
  double ssr_prev = 0.0;
  auto ssr_of = [&](const Eigen::Vector3d& q) {
    double ssr = 0.0;
    for (size_t b = 0; b < stream.n_bins; ++b) {
      const double r = y[b] - model(t_ms[b], q);
      ssr += r * r;
    }
    return ssr;
  };
  ssr_prev = ssr_of(p);

  const int n = static_cast<int>(stream.n_bins);
  Eigen::MatrixXd jac(n, 3);
  Eigen::VectorXd resid(n);
  int iterations = 0;
  bool converged = false;
  for (; iterations < 200; ++iterations) {
    for (int b = 0; b < n; ++b) {
      resid(b) = y[b] - model(t_ms[b], p);
      for (int k = 0; k < 3; ++k) {
        const double h = std::max(1e-7, 1e-6 * std::abs(p(k)));
        Eigen::Vector3d q = p;
        q(k) += h;
        jac(b, k) = (model(t_ms[b], q) - model(t_ms[b], p)) / h;
      }
    }
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d jtr = jac.transpose() * resid;
    Eigen::Matrix3d damped = jtj;
    damped.diagonal() *= 1.0 + lambda;
    const Eigen::Vector3d step = damped.ldlt().solve(jtr);
    Eigen::Vector3d trial = p + step;
    trial(0) = std::max(0.0, trial(0));
    trial(1) = std::max(1e-6, trial(1));
    const double ssr = ssr_of(trial);
    if (ssr < ssr_prev) {
      const double rel = (ssr_prev - ssr) / std::max(ssr_prev, 1e-300);
      p = trial;
      ssr_prev = ssr;
      lambda = std::max(1e-12, lambda * 0.3);
      if (rel < 1e-12 || step.cwiseAbs().maxCoeff() < 1e-10) {
        converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }
  if (!converged && iterations >= 200) {
    std::ostringstream msg;
    msg << "cloud fit did not converge after " << iterations
        << " iterations (ssr = " << ssr_prev << ", lambda = " << lambda << ")";
    throw NumericalError(msg.str());
  }

  // parameter covariance from the linearization at the optimum
  for (int b = 0; b < n; ++b) {
    for (int k = 0; k < 3; ++k) {
      const double h = std::max(1e-7, 1e-6 * std::abs(p(k)));
      Eigen::Vector3d q = p;
      q(k) += h;
      jac(b, k) = (model(t_ms[b], q) - model(t_ms[b], p)) / h;
    }
  }
  const double dof = std::max(1, n - 3);
  const double sigma_sq = ssr_prev / dof;
  const Eigen::Matrix3d cov =
      sigma_sq * (jac.transpose() * jac).inverse();

  CloudFit fit;
  fit.profile = initial_guess;
  fit.profile.peak_mean_neff = p(0);
  fit.profile.sigma_ms = p(1);
  fit.profile.arrival_ms = p(2);
  fit.peak_std_error = std::sqrt(std::max(0.0, cov(0, 0)));
  fit.sigma_std_error = std::sqrt(std::max(0.0, cov(1, 1)));
  fit.arrival_std_error = std::sqrt(std::max(0.0, cov(2, 2)));
  fit.rms_residual = std::sqrt(ssr_prev / n);
  fit.iterations = iterations;
  return fit;
}

}  // namespace cavdet
