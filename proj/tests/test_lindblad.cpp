// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <complex>

#include "cavdet/errors.hpp"
#include "cavdet/lindblad.hpp"
#include "cavdet/rng.hpp"
#include "cavdet/signal.hpp"
#include "weak_field_oracle.hpp"

using namespace cavdet;

namespace {

Eigen::MatrixXcd random_density(int dim, uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXcd m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      m(i, j) = std::complex<double>(rng.normal(), rng.normal());
    }
  }
  Eigen::MatrixXcd rho = m * m.adjoint();
  rho /= rho.trace().real();
  return rho;
}

}  // namespace

TEST_CASE("vacuum is stationary for the undriven empty cavity") {
  SystemSpec spec;
  spec.n_atoms = 0;
  spec.fock_cutoff = 4;
  Eigen::MatrixXcd vacuum = Eigen::MatrixXcd::Zero(spec.dim(), spec.dim());
  vacuum(0, 0) = 1.0;
  const Eigen::MatrixXcd lv = apply_generator(spec, vacuum);
  CHECK(lv.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("driven empty cavity reaches the analytic coherent state") {
  SystemSpec spec;
  spec.n_atoms = 0;
  spec.kappa = 5200.0;
  spec.gamma = 3.0;
  spec.pump_eta = 52.0;  // eta/kappa = 0.01
  spec.fock_cutoff = 4;
  const Eigen::MatrixXcd rho = steady_state(spec);
  const auto obs = steady_observables(spec, rho);
  CHECK(std::abs(obs.photon_number - 1e-4) < 1e-12);
  CHECK(hermiticity_defect(rho) < 1e-10);
  CHECK(trace_defect(rho) < 1e-10);
  CHECK(min_eigenvalue(rho) > -1e-10);
}

TEST_CASE("one weakly driven atom matches the closed-form amplitude") {
  // The closed form holds when both <n> << 1 and the atomic excitation is
  // negligible; with g/gamma ~ 33 the latter is the binding constraint, so
  // the drive is set well below eta/kappa = 0.01.
  PhysicalParams p;
  SystemSpec spec = SystemSpec::from_params(p, 1, 4);
  spec.pump_eta = 2e-4 * p.kappa_mhz;
  const Eigen::MatrixXcd rho = steady_state(spec);
  const auto obs = steady_observables(spec, rho);

  DriveConfig weak;
  weak.pump_eta = spec.pump_eta;
  const double c1 = single_atom_cooperativity(p).c1;
  const double alpha_model = intracavity_amplitude(c1, weak, p.kappa_mhz);
  const double alpha_solver = std::sqrt(obs.photon_number);
  CHECK(std::abs(alpha_solver - alpha_model) / alpha_model < 1e-4);

  // a generic weak-coupling system meets the same tolerance at eta/kappa 0.01
  SystemSpec generic;
  generic.n_atoms = 1;
  generic.kappa = 40.0;
  generic.gamma = 8.0;
  generic.couplings = {4.0};
  generic.rabi = {std::complex<double>(0.0, 0.0)};
  generic.pump_eta = 0.01 * generic.kappa;
  generic.fock_cutoff = 4;
  const auto obs_g = steady_observables(generic, steady_state(generic));
  const double c_g = 16.0 / (2.0 * 40.0 * 8.0);
  DriveConfig weak_g;
  weak_g.pump_eta = generic.pump_eta;
  const double model_g = intracavity_amplitude(c_g, weak_g, generic.kappa);
  CHECK(std::abs(std::sqrt(obs_g.photon_number) - model_g) / model_g < 1e-4);
}

TEST_CASE("reflected flux reconstruction matches the reflection branch") {
  PhysicalParams p;
  SystemSpec spec = SystemSpec::from_params(p, 1, 4);
  spec.pump_eta = 5e-4 * p.kappa_mhz;
  const double c1 = single_atom_cooperativity(p).c1;
  for (double b : {0.0, 0.3, 0.5, 0.9}) {
    DriveConfig drive;
    drive.j_in = 1.0;
    drive.fringe_b = b;
    const double model = reflection_rate(c1, drive).j_out;
    const double solver = reflected_flux(spec, b, 1.0);
    CHECK(std::abs(solver - model) / model < 1e-3);
  }
}

TEST_CASE("fluorescence cavity emission tracks the closed form within 5%") {
  // bad-cavity regime, external drive much stronger than the cavity field
  const double kappa = 50.0;
  const double gamma = 1.0;
  for (double s : {0.5, 3.0, 10.0}) {
    for (double c : {0.05, 0.2, 0.5}) {
      SystemSpec spec;
      spec.n_atoms = 1;
      spec.kappa = kappa;
      spec.gamma = gamma;
      spec.couplings = {std::sqrt(2.0 * kappa * gamma * c)};
      spec.rabi = {std::complex<double>(gamma * std::sqrt(2.0 * s), 0.0)};
      spec.fock_cutoff = 3;
      const Eigen::MatrixXcd rho = steady_state(spec);
      const auto obs = steady_observables(spec, rho);
      const double solver_flux = 2.0 * kappa * obs.photon_number;

      DriveConfig drive;
      drive.saturation_s = s;
      drive.fibre_xi = 1.0;
      const double model_flux = fluorescence_rate(c, drive, gamma).j_out;
      CHECK(std::abs(solver_flux - model_flux) / model_flux < 0.05);
    }
  }
}

TEST_CASE("generator conserves trace on random densities") {
  SystemSpec spec;
  spec.n_atoms = 1;
  spec.kappa = 2.0;
  spec.gamma = 0.4;
  spec.couplings = {1.3};
  spec.rabi = {std::complex<double>(0.7, 0.2)};
  spec.pump_eta = 0.5;
  spec.fock_cutoff = 3;
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    const Eigen::MatrixXcd rho = random_density(spec.dim(), seed);
    const Eigen::MatrixXcd lr = apply_generator(spec, rho);
    CHECK(std::abs(lr.trace()) < 1e-12);
  }
}

TEST_CASE("short evolution preserves hermiticity") {
  SystemSpec spec;
  spec.n_atoms = 1;
  spec.kappa = 2.0;
  spec.gamma = 0.4;
  spec.couplings = {1.0};
  spec.rabi = {std::complex<double>(0.4, 0.0)};
  spec.pump_eta = 0.3;
  spec.fock_cutoff = 3;
  Eigen::MatrixXcd rho = random_density(spec.dim(), 4);
  const double dt = 1e-3;
  for (int step = 0; step < 200; ++step) {
    // RK4 on d rho/dt = L[rho]
    const Eigen::MatrixXcd k1 = apply_generator(spec, rho);
    const Eigen::MatrixXcd k2 = apply_generator(spec, rho + 0.5 * dt * k1);
    const Eigen::MatrixXcd k3 = apply_generator(spec, rho + 0.5 * dt * k2);
    const Eigen::MatrixXcd k4 = apply_generator(spec, rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  CHECK(hermiticity_defect(rho) < 1e-10);
  CHECK(std::abs(rho.trace().real() - 1.0) < 1e-10);
}

TEST_CASE("vectorized generator agrees with the direct action") {
  SystemSpec spec;
  spec.n_atoms = 1;
  spec.kappa = 1.5;
  spec.gamma = 0.3;
  spec.couplings = {0.8};
  spec.rabi = {std::complex<double>(0.2, 0.1)};
  spec.pump_eta = 0.4;
  spec.fock_cutoff = 2;
  const int d = spec.dim();
  const SpMat gen = build_generator(spec);
  const Eigen::MatrixXcd rho = random_density(d, 11);
  const Eigen::Map<const Eigen::VectorXcd> vec_rho(rho.data(), d * d);
  const Eigen::VectorXcd lhs = gen * vec_rho;
  const Eigen::MatrixXcd rhs = apply_generator(spec, rho);
  const Eigen::Map<const Eigen::VectorXcd> vec_rhs(rhs.data(), d * d);
  CHECK((lhs - vec_rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("field g2(0): coherent empty cavity; atoms match the weak-field oracle") {
  SystemSpec empty;
  empty.n_atoms = 0;
  empty.kappa = 1.0;
  empty.gamma = 1.0;
  empty.pump_eta = 0.05;
  empty.fock_cutoff = 5;
  CHECK(field_g2_zero(empty) == doctest::Approx(1.0).epsilon(1e-6));

  // one and two atoms against the independent amplitude-equation oracle;
  // a single strongly coupled atom is visibly antibunched
  const double kappa = 100.0, gamma = 1.0;
  const double g1 = std::sqrt(2.0 * kappa * gamma * 0.31);
  {
    SystemSpec spec;
    spec.n_atoms = 1;
    spec.kappa = kappa;
    spec.gamma = gamma;
    spec.couplings = {g1};
    spec.pump_eta = 0.005 * kappa;
    spec.fock_cutoff = 4;
    const double oracle = testing::weak_field_g2({g1}, kappa, gamma);
    const double solver = field_g2_zero(spec);
    CHECK(oracle < 0.5);  // far from coherent
    CHECK(std::abs(solver - oracle) / oracle < 0.05);

    // the residual is a finite-drive correction: it shrinks with eta
    SystemSpec weaker = spec;
    weaker.pump_eta = 0.002 * kappa;
    CHECK(std::abs(field_g2_zero(weaker) - oracle) <
          std::abs(solver - oracle));
  }
  {
    const double g2a = std::sqrt(2.0 * kappa * gamma * 0.2);
    const double g2b = std::sqrt(2.0 * kappa * gamma * 0.1);
    SystemSpec spec;
    spec.n_atoms = 2;
    spec.kappa = kappa;
    spec.gamma = gamma;
    spec.couplings = {g2a, g2b};
    spec.pump_eta = 0.005 * kappa;
    spec.fock_cutoff = 4;
    const double oracle = testing::weak_field_g2({g2a, g2b}, kappa, gamma);
    CHECK(std::abs(field_g2_zero(spec) - oracle) / oracle < 0.05);
  }
}

TEST_CASE("dilute arrangements at the published parameters are near-coherent") {
  // the coherent-state description applies to the experiment's dilute
  // many-atom configurations: the two-photon suppression dilutes away as
  // the collective coupling spreads over more atoms
  PhysicalParams p;
  const double c_total = single_atom_cooperativity(p).c1 * 1.24;
  double prev_dev = 1.0;
  for (int n : {1, 10, 30}) {
    std::vector<double> g(
        n, std::sqrt(2.0 * p.kappa_mhz * p.gamma_mhz * c_total / n));
    const double g2 = testing::weak_field_g2(g, p.kappa_mhz, p.gamma_mhz);
    const double dev = std::abs(g2 - 1.0);
    CHECK(dev < prev_dev + 1e-12);
    prev_dev = dev;
    if (n == 30) CHECK(dev < 0.05);
  }
}

TEST_CASE("g2(0) is undefined without photons") {
  SystemSpec spec;
  spec.n_atoms = 0;
  spec.pump_eta = 0.0;
  spec.fock_cutoff = 2;
  CHECK_THROWS_AS(field_g2_zero(spec), NumericalError);
}

TEST_CASE("strong-coupling toy regression anchor") {
  // g >> kappa, gamma: the field is manifestly non-coherent; value frozen
  // from this solver as a regression reference.
  SystemSpec spec;
  spec.n_atoms = 1;
  spec.kappa = 0.5;
  spec.gamma = 0.25;
  spec.couplings = {5.0};
  spec.pump_eta = 0.05;
  spec.fock_cutoff = 6;
  const double g2 = field_g2_zero(spec);
  CHECK(g2 > 100.0);  // photon blockade physics, nowhere near coherent
  CHECK(g2 == doctest::Approx(132810.614413).epsilon(1e-6));
}

TEST_CASE("cutoff convergence in the weak-drive regime") {
  SystemSpec spec;
  spec.n_atoms = 1;
  spec.kappa = 40.0;
  spec.gamma = 1.0;
  spec.couplings = {3.0};
  spec.pump_eta = 0.4;
  spec.fock_cutoff = 5;

  const Eigen::MatrixXcd rho5 = steady_state(spec);
  const double n5 =
      (Eigen::MatrixXcd(build_operators(spec).photon_number) * rho5)
          .trace()
          .real();
  SystemSpec doubled = spec;
  doubled.fock_cutoff = 10;
  const Eigen::MatrixXcd rho10 = steady_state(doubled);
  const double n10 =
      (Eigen::MatrixXcd(build_operators(doubled).photon_number) * rho10)
          .trace()
          .real();
  CHECK(std::abs(n10 - n5) < 1e-8);

  int final_cutoff = 0;
  steady_state_converged(spec, 1e-8, &final_cutoff);
  CHECK(final_cutoff >= 5);
}

TEST_CASE("dimension overflow raises a validation error naming the limit") {
  SystemSpec spec;
  spec.n_atoms = 3;
  spec.couplings = {1.0, 1.0, 1.0};
  spec.rabi = {{}, {}, {}};
  spec.fock_cutoff = 1000;
  try {
    spec.validate();
    FAIL("expected overflow rejection");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("maximum") != std::string::npos);
  }
}
