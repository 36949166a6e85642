// SPDX-License-Identifier: Apache-2.0
#include "cavdet/lindblad.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>

#include "cavdet/errors.hpp"

namespace cavdet {

using Complex = std::complex<double>;
using Triplet = Eigen::Triplet<Complex>;

SystemSpec SystemSpec::from_params(const PhysicalParams& p, int n_atoms,
                                   int fock_cutoff) {
  SystemSpec spec;
  spec.n_atoms = n_atoms;
  spec.couplings.assign(n_atoms, p.g_mhz);
  spec.rabi.assign(n_atoms, Complex(0.0, 0.0));
  spec.kappa = p.kappa_mhz;
  spec.gamma = p.gamma_mhz;
  spec.fock_cutoff = fock_cutoff;
  return spec;
}

void SystemSpec::validate() const {
  if (n_atoms < 0) throw ValidationError("n_atoms must be >= 0");
  if (fock_cutoff < 1) throw ValidationError("fock_cutoff must be >= 1");
  if (!(kappa > 0.0) || !(gamma > 0.0)) {
    throw ValidationError("kappa and gamma must be positive");
  }
  if (static_cast<int>(couplings.size()) != n_atoms) {
    throw ValidationError("per-atom coupling list must have n_atoms entries");
  }
  if (!rabi.empty() && static_cast<int>(rabi.size()) != n_atoms) {
    throw ValidationError("per-atom rabi list must be empty or n_atoms long");
  }
  for (double g : couplings) {
    if (g < 0.0) throw ValidationError("couplings must be non-negative");
  }
  const long long d = static_cast<long long>(fock_cutoff + 1) << n_atoms;
  if (d > max_dim) {
    std::ostringstream msg;
    msg << "Hilbert dimension " << d << " exceeds the configured maximum "
        << max_dim << "; lower fock_cutoff (need <= "
        << (max_dim >> n_atoms) - 1 << " for " << n_atoms << " atoms)";
    throw ValidationError(msg.str());
  }
}

namespace {

SpMat sparse_identity(int n) {
  SpMat id(n, n);
  id.setIdentity();
  return id;
}

SpMat kron(const SpMat& a, const SpMat& b) {
  SpMat out(a.rows() * b.rows(), a.cols() * b.cols());
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(a.nonZeros()) * b.nonZeros());
  for (int ka = 0; ka < a.outerSize(); ++ka) {
    for (SpMat::InnerIterator ita(a, ka); ita; ++ita) {
      for (int kb = 0; kb < b.outerSize(); ++kb) {
        for (SpMat::InnerIterator itb(b, kb); itb; ++itb) {
          trips.emplace_back(ita.row() * b.rows() + itb.row(),
                             ita.col() * b.cols() + itb.col(),
                             ita.value() * itb.value());
        }
      }
    }
  }
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace

Operators build_operators(const SystemSpec& spec) {
  spec.validate();
  const int n_fock = spec.fock_cutoff + 1;

  SpMat a_fock(n_fock, n_fock);
  {
    std::vector<Triplet> trips;
    for (int n = 1; n < n_fock; ++n) {
      trips.emplace_back(n - 1, n, Complex(std::sqrt(double(n)), 0.0));
    }
    a_fock.setFromTriplets(trips.begin(), trips.end());
  }

  SpMat sm(2, 2);  // |g><e| with basis order {g, e}
  sm.insert(0, 1) = Complex(1.0, 0.0);
  sm.makeCompressed();

  Operators ops;
  ops.dim = spec.dim();

  SpMat atom_identity = sparse_identity(1 << spec.n_atoms);
  ops.annihilate = kron(a_fock, atom_identity);
  ops.create = SpMat(ops.annihilate.adjoint());
  ops.photon_number = ops.create * ops.annihilate;

  for (int j = 0; j < spec.n_atoms; ++j) {
    SpMat op = sparse_identity(n_fock);
    for (int k = 0; k < spec.n_atoms; ++k) {
      op = kron(op, k == j ? sm : sparse_identity(2));
    }
    ops.lower.push_back(op);
    ops.raise.emplace_back(op.adjoint());
  }
  return ops;
}

SpMat build_hamiltonian(const SystemSpec& spec, const Operators& ops) {
  const Complex i_unit(0.0, 1.0);
  SpMat h = -i_unit * spec.pump_eta * (ops.annihilate - ops.create);
  for (int j = 0; j < spec.n_atoms; ++j) {
    const SpMat coupling =
        spec.couplings[j] * ops.annihilate +
        0.5 * spec.rabi_of(j) * sparse_identity(ops.dim);
    const SpMat term = coupling * ops.raise[j];
    h += -i_unit * (term - SpMat(term.adjoint()));
  }
  h.makeCompressed();
  return h;
}

std::vector<SpMat> collapse_operators(const SystemSpec& spec,
                                      const Operators& ops) {
  std::vector<SpMat> out;
  out.push_back(std::sqrt(2.0 * spec.kappa) * ops.annihilate);
  for (int j = 0; j < spec.n_atoms; ++j) {
    out.push_back(std::sqrt(2.0 * spec.gamma) * ops.lower[j]);
  }
  return out;
}

SpMat build_generator(const SystemSpec& spec) {
  const Operators ops = build_operators(spec);
  const SpMat h = build_hamiltonian(spec, ops);
  const std::vector<SpMat> jumps = collapse_operators(spec, ops);
  const int d = ops.dim;
  const SpMat id = sparse_identity(d);
  const Complex i_unit(0.0, 1.0);

  // column-major stacking: vec(A rho B) = (B^T (x) A) vec(rho)
  SpMat gen = -i_unit * (kron(id, h) - kron(SpMat(h.transpose()), id));
  for (const auto& a : jumps) {
    const SpMat adag_a = SpMat(a.adjoint()) * a;
    gen += kron(SpMat(a.conjugate()), a);
    gen -= 0.5 * kron(id, adag_a);
    gen -= 0.5 * kron(SpMat(adag_a.transpose()), id);
  }
  gen.makeCompressed();
  return gen;
}

Eigen::MatrixXcd apply_generator(const SystemSpec& spec,
                                 const Eigen::MatrixXcd& rho) {
  const Operators ops = build_operators(spec);
  const SpMat h = build_hamiltonian(spec, ops);
  const std::vector<SpMat> jumps = collapse_operators(spec, ops);
  const Complex i_unit(0.0, 1.0);

  Eigen::MatrixXcd out = -i_unit * (h * rho - rho * h);
  for (const auto& a : jumps) {
    const Eigen::MatrixXcd a_rho = a * rho;
    const SpMat adag = a.adjoint();
    out += a_rho * Eigen::MatrixXcd(adag);
    const Eigen::MatrixXcd adag_a_rho = adag * a_rho;
    out -= 0.5 * adag_a_rho;
    out -= 0.5 * adag_a_rho.adjoint();
  }
  return out;
}

Eigen::MatrixXcd steady_state(const SystemSpec& spec) {
  spec.validate();
  const SpMat gen = build_generator(spec);
  const int d = spec.dim();
  const int n = d * d;

  // bordered system: [L, t; t^T, 0] [x; mu] = [0; 1] forces L x = 0, tr x = 1
  SpMat bordered(n + 1, n + 1);
  {
    std::vector<Triplet> trips;
    trips.reserve(gen.nonZeros() + 2 * d);
    for (int k = 0; k < gen.outerSize(); ++k) {
      for (SpMat::InnerIterator it(gen, k); it; ++it) {
        trips.emplace_back(it.row(), it.col(), it.value());
      }
    }
    for (int i = 0; i < d; ++i) {
      const int diag = i * d + i;
      trips.emplace_back(n, diag, Complex(1.0, 0.0));
      trips.emplace_back(diag, n, Complex(1.0, 0.0));
    }
    bordered.setFromTriplets(trips.begin(), trips.end());
  }

  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n + 1);
  rhs(n) = Complex(1.0, 0.0);
  Eigen::VectorXcd sol;

  // direct sparse LU for moderate dimensions, preconditioned BiCGSTAB as the
  // fallback for larger systems or a failed factorization
  bool solved = false;
  if (n + 1 <= 70000) {
    Eigen::SparseLU<SpMat> solver;
    solver.compute(bordered);
    if (solver.info() == Eigen::Success) {
      sol = solver.solve(rhs);
      // refinement: the weakly populated components (multi-photon sectors)
      // sit many orders below the trace and need the extra accuracy
      for (int round = 0; round < 3; ++round) {
        const Eigen::VectorXcd residual = rhs - bordered * sol;
        sol += solver.solve(residual);
      }
      solved = solver.info() == Eigen::Success;
    }
  }
  if (!solved) {
    Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<Complex>> iterative;
    iterative.setTolerance(1e-14);
    iterative.setMaxIterations(20000);
    iterative.compute(bordered);
    sol = iterative.solve(rhs);
    if (iterative.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "steady-state solve did not converge (iterative residual "
          << iterative.error() << ")";
      throw NumericalError(msg.str());
    }
  }

  const Eigen::VectorXcd x = sol.head(n);
  const double residual = (gen * x).cwiseAbs().maxCoeff();
  if (!(residual < 1e-10)) {
    std::ostringstream msg;
    msg << "steady state did not converge: |L rho|_inf = " << residual;
    throw NumericalError(msg.str());
  }

  Eigen::MatrixXcd rho = Eigen::Map<const Eigen::MatrixXcd>(x.data(), d, d);
  rho = 0.5 * (rho + rho.adjoint().eval());
  rho /= rho.trace().real();
  return rho;
}

Eigen::MatrixXcd steady_state_converged(SystemSpec spec, double tol,
                                        int* final_cutoff) {
  Eigen::MatrixXcd rho = steady_state(spec);
  Operators ops = build_operators(spec);
  double n_prev = (Eigen::MatrixXcd(ops.photon_number) * rho).trace().real();
  for (int round = 0; round < 6; ++round) {
    SystemSpec next = spec;
    next.fock_cutoff = 2 * spec.fock_cutoff;
    if (next.dim() > next.max_dim) break;
    Eigen::MatrixXcd rho_next = steady_state(next);
    Operators ops_next = build_operators(next);
    const double n_next =
        (Eigen::MatrixXcd(ops_next.photon_number) * rho_next).trace().real();
    const bool converged = std::abs(n_next - n_prev) < tol;
    spec = next;
    rho = std::move(rho_next);
    n_prev = n_next;
    if (converged) break;
  }
  if (final_cutoff != nullptr) *final_cutoff = spec.fock_cutoff;
  return rho;
}

SteadyObservables steady_observables(const SystemSpec& spec,
                                     const Eigen::MatrixXcd& rho) {
  const Operators ops = build_operators(spec);
  SteadyObservables obs;
  obs.photon_number =
      (Eigen::MatrixXcd(ops.photon_number) * rho).trace().real();
  obs.field_amplitude = (Eigen::MatrixXcd(ops.annihilate) * rho).trace();
  double excited = 0.0;
  for (int j = 0; j < spec.n_atoms; ++j) {
    excited += (Eigen::MatrixXcd(ops.raise[j] * ops.lower[j]) * rho)
                   .trace()
                   .real();
  }
  obs.excited_population = spec.n_atoms > 0 ? excited / spec.n_atoms : 0.0;
  const Eigen::MatrixXcd a2 =
      Eigen::MatrixXcd(ops.create) * Eigen::MatrixXcd(ops.create) *
      Eigen::MatrixXcd(ops.annihilate) * Eigen::MatrixXcd(ops.annihilate);
  const double numer = (a2 * rho).trace().real();
  obs.g2_zero = obs.photon_number > 0.0
                    ? numer / (obs.photon_number * obs.photon_number)
                    : 0.0;
  return obs;
}

double field_g2_zero(const SystemSpec& spec) {
  const Eigen::MatrixXcd rho = steady_state(spec);
  const SteadyObservables obs = steady_observables(spec, rho);
  if (!(obs.photon_number > 0.0)) {
    throw NumericalError("g2(0) undefined: <a^dag a> = 0");
  }
  return obs.g2_zero;
}

double reflected_flux(const SystemSpec& spec, double fringe_b, double j_in) {
  if (!(spec.pump_eta != 0.0)) {
    throw ValidationError("reflected flux needs a nonzero pump");
  }
  const Eigen::MatrixXcd rho = steady_state(spec);
  const SteadyObservables obs = steady_observables(spec, rho);
  const double alpha = std::abs(obs.field_amplitude);
  const double r = 1.0 - (1.0 - fringe_b) * alpha * spec.kappa / spec.pump_eta;
  return j_in * r * r;
}

double hermiticity_defect(const Eigen::MatrixXcd& rho) {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double trace_defect(const Eigen::MatrixXcd& rho) {
  return std::abs(rho.trace() - Complex(1.0, 0.0));
}

double min_eigenvalue(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      0.5 * (rho + rho.adjoint().eval()));
  return es.eigenvalues().minCoeff();
}

}  // namespace cavdet
