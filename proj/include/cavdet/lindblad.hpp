// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <vector>

#include "cavdet/physics.hpp"

namespace cavdet {

using SpMat = Eigen::SparseMatrix<std::complex<double>>;

// Driven atoms-cavity system on a truncated Fock space x n two-level atoms.
// All rates share one frequency unit (any consistent choice; from_params
// uses the /2pi MHz values directly, so times are in units of 1/(2pi MHz)).
struct SystemSpec {
  int n_atoms = 0;
  std::vector<double> couplings;              // g_j; defaults to params.g
  std::vector<std::complex<double>> rabi;     // Omega_j; empty = undriven
  double pump_eta = 0.0;                      // eta
  double kappa = 1.0;
  double gamma = 1.0;
  int fock_cutoff = 5;
  int max_dim = 4096;

  static SystemSpec from_params(const PhysicalParams& p, int n_atoms,
                                int fock_cutoff = 5);

  int dim() const { return (fock_cutoff + 1) << n_atoms; }
  std::complex<double> rabi_of(int atom) const {
    return atom < static_cast<int>(rabi.size()) ? rabi[atom]
                                                : std::complex<double>(0.0);
  }
  void validate() const;  // throws on dimension overflow / bad rates
};

struct Operators {
  int dim = 0;
  SpMat annihilate;                 // a
  SpMat create;                     // a^dagger
  SpMat photon_number;              // a^dagger a
  std::vector<SpMat> lower;         // sigma_j
  std::vector<SpMat> raise;         // sigma_j^dagger
};

Operators build_operators(const SystemSpec& spec);

// H = -i eta (a - a^dag) - i sum_j [(g_j a + Omega_j / 2) sigma_j^dag - h.c.]
SpMat build_hamiltonian(const SystemSpec& spec, const Operators& ops);

// A_0 = sqrt(2 kappa) a, A_j = sqrt(2 gamma) sigma_j
std::vector<SpMat> collapse_operators(const SystemSpec& spec,
                                      const Operators& ops);

// Vectorized generator L with d rho/dt = L vec(rho) (column-major stacking).
SpMat build_generator(const SystemSpec& spec);

// Apply the generator to a density matrix without forming L.
Eigen::MatrixXcd apply_generator(const SystemSpec& spec,
                                 const Eigen::MatrixXcd& rho);

// Unique stationary state: bordered sparse solve of [L, t; t^T, 0] with the
// trace row t, residual checked against 1e-10.
Eigen::MatrixXcd steady_state(const SystemSpec& spec);

// Re-solve with doubled Fock cutoff until <a^dag a> moves by < tol.
Eigen::MatrixXcd steady_state_converged(SystemSpec spec, double tol = 1e-8,
                                        int* final_cutoff = nullptr);

struct SteadyObservables {
  double photon_number = 0.0;        // <a^dag a>
  double excited_population = 0.0;   // mean over atoms of <sigma+ sigma->
  std::complex<double> field_amplitude;  // <a>
  double g2_zero = 0.0;              // <a^dag a^dag a a> / <a^dag a>^2
};

SteadyObservables steady_observables(const SystemSpec& spec,
                                     const Eigen::MatrixXcd& rho);

// <a^dag a^dag a a> / <a^dag a>^2 of the steady state; errors when <n> = 0.
double field_g2_zero(const SystemSpec& spec);

// Reflected flux via input-output reconstruction: the promptly reflected
// fringe amplitude b interferes with the emitted intracavity field,
// r = 1 - (1 - b) alpha kappa / eta, J_out = J_in r^2.
double reflected_flux(const SystemSpec& spec, double fringe_b, double j_in);

// Density-matrix health checks used by tests and the steady-state solver.
double hermiticity_defect(const Eigen::MatrixXcd& rho);
double trace_defect(const Eigen::MatrixXcd& rho);
double min_eigenvalue(const Eigen::MatrixXcd& rho);

}  // namespace cavdet
