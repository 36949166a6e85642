// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "cavdet/lindblad.hpp"
#include "cavdet/signal.hpp"
#include "cavdet/trajectories.hpp"

using namespace cavdet;

TEST_CASE("undriven vacuum trajectory never jumps") {
  SystemSpec spec;
  spec.n_atoms = 0;
  spec.kappa = 1.0;
  spec.gamma = 1.0;
  spec.fock_cutoff = 2;
  JumpOptions opt;
  opt.t_end = 50.0;
  opt.n_traj = 1;
  opt.seed = 5;
  std::vector<TrajectoryRecord> records;
  const auto stats = quantum_jump_ensemble(spec, opt, &records);
  CHECK(stats.total_jumps == 0);
  CHECK(records.size() == 1);
  CHECK(records[0].jumps.empty());
  CHECK(stats.mean_photon_number == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("driven empty cavity: jump rate converges to 2 kappa <n>") {
  SystemSpec spec;
  spec.n_atoms = 0;
  spec.kappa = 1.0;
  spec.gamma = 1.0;
  spec.pump_eta = 0.3;  // <n> = 0.09
  spec.fock_cutoff = 3;
  JumpOptions opt;
  opt.t_end = 150.0;
  opt.t_burn = 20.0;
  opt.dt = 0.01;
  opt.n_traj = 120;
  opt.seed = 17;
  opt.threads = 2;
  const auto stats = quantum_jump_ensemble(spec, opt);

  const double expected_rate = 2.0 * spec.kappa * 0.09;
  CHECK(std::abs(stats.jump_rate - expected_rate) <
        3.0 * stats.se_jump_rate + 1e-3);
  CHECK(std::abs(stats.mean_photon_number - 0.09) <
        3.0 * stats.se_photon_number + 1e-4);
}

TEST_CASE("jump times are strictly increasing and deterministic per seed") {
  SystemSpec spec;
  spec.n_atoms = 0;
  spec.kappa = 1.0;
  spec.gamma = 1.0;
  spec.pump_eta = 0.4;
  spec.fock_cutoff = 3;
  JumpOptions opt;
  opt.t_end = 60.0;
  opt.t_burn = 0.0;
  opt.dt = 0.01;
  opt.n_traj = 4;
  opt.seed = 23;

  std::vector<TrajectoryRecord> a, b;
  const auto stats_a = quantum_jump_ensemble(spec, opt, &a);
  JumpOptions opt_threaded = opt;
  opt_threaded.threads = 3;
  const auto stats_b = quantum_jump_ensemble(spec, opt_threaded, &b);

  CHECK(stats_a.total_jumps == stats_b.total_jumps);
  CHECK(stats_a.mean_photon_number == stats_b.mean_photon_number);
  REQUIRE(a.size() == b.size());
  for (size_t t = 0; t < a.size(); ++t) {
    REQUIRE(a[t].jumps.size() == b[t].jumps.size());
    for (size_t j = 0; j < a[t].jumps.size(); ++j) {
      CHECK(a[t].jumps[j].time == b[t].jumps[j].time);
      CHECK(a[t].jumps[j].channel == b[t].jumps[j].channel);
      if (j > 0) CHECK(a[t].jumps[j].time > a[t].jumps[j - 1].time);
    }
  }
}

TEST_CASE("one-atom fluorescence: cavity jump share equals the Purcell fraction") {
  const double kappa = 5.0;
  const double gamma = 0.5;
  const double c_prime = 0.2;  // g = sqrt(2 kappa gamma c) = 1
  SystemSpec spec;
  spec.n_atoms = 1;
  spec.kappa = kappa;
  spec.gamma = gamma;
  spec.couplings = {std::sqrt(2.0 * kappa * gamma * c_prime)};
  spec.rabi = {std::complex<double>(1.5, 0.0)};
  spec.fock_cutoff = 2;

  JumpOptions opt;
  opt.t_end = 150.0;
  opt.t_burn = 15.0;
  opt.dt = 0.004;
  opt.n_traj = 150;
  opt.seed = 29;
  opt.threads = 2;
  const auto stats = quantum_jump_ensemble(spec, opt);

  const double expected = purcell_rates(c_prime, gamma).cavity_fraction;
  CHECK(stats.total_jumps > 1000);
  CHECK(std::abs(stats.cavity_jump_fraction - expected) <
        3.0 * stats.se_cavity_jump_fraction + 5e-3);
}

TEST_CASE("ensemble mean approaches the steady state as trajectories grow") {
  SystemSpec spec;
  spec.n_atoms = 0;
  spec.kappa = 1.0;
  spec.gamma = 1.0;
  spec.pump_eta = 0.3;
  spec.fock_cutoff = 3;
  const Eigen::MatrixXcd rho = steady_state(spec);
  const double n_ss = steady_observables(spec, rho).photon_number;

  double prev_se = 1e9;
  for (int n_traj : {100, 400, 1600}) {
    JumpOptions opt;
    opt.t_end = 60.0;
    opt.t_burn = 10.0;
    opt.dt = 0.01;
    opt.n_traj = n_traj;
    opt.seed = 31;
    opt.threads = 2;
    const auto stats = quantum_jump_ensemble(spec, opt);
    CHECK(std::abs(stats.mean_photon_number - n_ss) <
          3.0 * stats.se_photon_number + 1e-4);
    CHECK(stats.se_photon_number < prev_se);
    prev_se = stats.se_photon_number;
  }
}
