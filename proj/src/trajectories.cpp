// SPDX-License-Identifier: Apache-2.0
#include "cavdet/trajectories.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "cavdet/errors.hpp"
#include "cavdet/rng.hpp"

namespace cavdet {

namespace {

using Complex = std::complex<double>;

struct TrajectoryResult {
  double mean_n = 0.0;
  double mean_excited = 0.0;
  double observed_time = 0.0;
  uint64_t jumps = 0;
  uint64_t cavity_jumps = 0;
};

struct Workspace {
  SpMat h_eff;                       // H - (i/2) sum A^dag A
  std::vector<SpMat> jumps;
  std::vector<SpMat> jump_weight;    // A^dag A per channel
  Eigen::MatrixXcd number_op;
  Eigen::MatrixXcd excited_op;       // sum_j sigma+_j sigma-_j
  int dim = 0;
};

Workspace make_workspace(const SystemSpec& spec) {
  const Operators ops = build_operators(spec);
  Workspace ws;
  ws.dim = ops.dim;
  ws.jumps = collapse_operators(spec, ops);
  SpMat decay(ops.dim, ops.dim);
  for (const auto& a : ws.jumps) {
    SpMat w = SpMat(a.adjoint()) * a;
    decay += w;
    ws.jump_weight.push_back(std::move(w));
  }
  ws.h_eff = build_hamiltonian(spec, ops) - Complex(0.0, 0.5) * decay;
  ws.number_op = Eigen::MatrixXcd(ops.photon_number);
  ws.excited_op = Eigen::MatrixXcd::Zero(ops.dim, ops.dim);
  for (int j = 0; j < spec.n_atoms; ++j) {
    ws.excited_op += Eigen::MatrixXcd(ops.raise[j] * ops.lower[j]);
  }
  return ws;
}

double auto_step(const SystemSpec& spec) {
  double fastest = 2.0 * spec.kappa * (spec.fock_cutoff + 1) +
                   2.0 * spec.gamma * std::max(1, spec.n_atoms);
  fastest = std::max(fastest, std::abs(spec.pump_eta));
  for (double g : spec.couplings) {
    fastest = std::max(fastest, g * std::sqrt(double(spec.fock_cutoff + 1)));
  }
  for (const auto& om : spec.rabi) fastest = std::max(fastest, std::abs(om));
  return 0.02 / fastest;
}

// one RK4 step of d psi / dt = -i H_eff psi (norm decays)
void rk4_step(const SpMat& h_eff, double dt, Eigen::VectorXcd& psi,
              Eigen::VectorXcd& k1, Eigen::VectorXcd& k2, Eigen::VectorXcd& k3,
              Eigen::VectorXcd& k4) {
  const Complex mi(0.0, -1.0);
  k1 = mi * (h_eff * psi);
  k2 = mi * (h_eff * (psi + 0.5 * dt * k1));
  k3 = mi * (h_eff * (psi + 0.5 * dt * k2));
  k4 = mi * (h_eff * (psi + dt * k3));
  psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

TrajectoryResult run_trajectory(const Workspace& ws, const JumpOptions& opt,
                                double dt, double t_burn, uint64_t traj_index,
                                TrajectoryRecord* record) {
  Rng rng = Rng::derive_stream(opt.seed, traj_index);

  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(ws.dim);
  psi(0) = Complex(1.0, 0.0);  // vacuum, all atoms in the ground state
  Eigen::VectorXcd k1(ws.dim), k2(ws.dim), k3(ws.dim), k4(ws.dim);
  Eigen::VectorXcd psi_prev(ws.dim);

  TrajectoryResult result;
  double threshold = rng.uniform_pos();
  double weighted_n = 0.0;
  double weighted_exc = 0.0;

  double t = 0.0;
  while (t < opt.t_end) {
    const double step = std::min(dt, opt.t_end - t);
    psi_prev = psi;
    rk4_step(ws.h_eff, step, psi, k1, k2, k3, k4);
    double norm2 = psi.squaredNorm();

    if (norm2 <= threshold) {
      // bisect inside [t, t + step] for the crossing time
      double lo = 0.0, hi = step;
      for (int it = 0; it < 30 && (hi - lo) > 1e-6 * step; ++it) {
        const double mid = 0.5 * (lo + hi);
        psi = psi_prev;
        rk4_step(ws.h_eff, mid, psi, k1, k2, k3, k4);
        if (psi.squaredNorm() <= threshold) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      psi = psi_prev;
      rk4_step(ws.h_eff, hi, psi, k1, k2, k3, k4);
      const double t_jump = t + hi;

      if (t >= t_burn && hi > 0.0) {
        // the partial segment before the jump still counts
        const double norm2_pre = psi.squaredNorm();
        weighted_n += (ws.number_op * psi).dot(psi).real() / norm2_pre * hi;
        weighted_exc += (ws.excited_op * psi).dot(psi).real() / norm2_pre * hi;
        result.observed_time += hi;
      }

      // pick the channel with probability ~ <psi| A^dag A |psi>
      double total = 0.0;
      std::vector<double> weights(ws.jumps.size());
      for (size_t c = 0; c < ws.jumps.size(); ++c) {
        weights[c] = (ws.jump_weight[c] * psi).dot(psi).real();
        total += weights[c];
      }
      if (!(total > 0.0)) throw NumericalError("jump with zero total weight");
      double pick = rng.uniform() * total;
      size_t channel = 0;
      for (; channel + 1 < weights.size(); ++channel) {
        if (pick < weights[channel]) break;
        pick -= weights[channel];
      }
      psi = ws.jumps[channel] * psi;
      psi /= psi.norm();
      threshold = rng.uniform_pos();

      if (t >= t_burn) {
        ++result.jumps;
        if (channel == 0) ++result.cavity_jumps;
      }
      if (record != nullptr) {
        record->jumps.push_back({t_jump, static_cast<int>(channel)});
      }
      t = t_jump;
      continue;
    }

    if (t >= t_burn) {
      // normalized expectations, weighted by the step
      const double n_val = (ws.number_op * psi).dot(psi).real() / norm2;
      const double e_val = (ws.excited_op * psi).dot(psi).real() / norm2;
      weighted_n += n_val * step;
      weighted_exc += e_val * step;
      result.observed_time += step;
    }
    t += step;
  }

  if (result.observed_time > 0.0) {
    result.mean_n = weighted_n / result.observed_time;
    result.mean_excited = weighted_exc / result.observed_time;
  }
  if (record != nullptr) {
    record->final_state = psi / psi.norm();
    record->seed = traj_index;
  }
  return result;
}

void mean_and_se(const std::vector<double>& xs, double& mean, double& se) {
  const double n = static_cast<double>(xs.size());
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  se = xs.size() > 1 ? std::sqrt(var / (n * (n - 1.0))) : 0.0;
}

}  // namespace

EnsembleStats quantum_jump_ensemble(const SystemSpec& spec,
                                    const JumpOptions& options,
                                    std::vector<TrajectoryRecord>* records) {
  spec.validate();
  if (!(options.t_end > 0.0)) throw ValidationError("t_end must be positive");
  if (options.n_traj < 1) throw ValidationError("need at least one trajectory");

  const Workspace ws = make_workspace(spec);
  const double dt = options.dt > 0.0 ? options.dt : auto_step(spec);
  const double t_burn =
      options.t_burn >= 0.0 ? options.t_burn : 0.2 * options.t_end;

  std::vector<TrajectoryResult> results(options.n_traj);
  if (records != nullptr) records->assign(options.n_traj, {});

  const int n_threads =
      std::max(1, std::min(options.threads, options.n_traj));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= options.n_traj) break;
      TrajectoryRecord* rec = records != nullptr ? &(*records)[i] : nullptr;
      results[i] = run_trajectory(ws, options, dt, t_burn,
                                  static_cast<uint64_t>(i), rec);
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<double> ns, excs, rates, fractions;
  EnsembleStats stats;
  for (const auto& r : results) {
    ns.push_back(r.mean_n);
    excs.push_back(r.mean_excited);
    rates.push_back(r.observed_time > 0.0 ? r.jumps / r.observed_time : 0.0);
    if (r.jumps > 0) {
      fractions.push_back(static_cast<double>(r.cavity_jumps) / r.jumps);
    }
    stats.total_jumps += r.jumps;
    stats.cavity_jumps += r.cavity_jumps;
  }
  mean_and_se(ns, stats.mean_photon_number, stats.se_photon_number);
  mean_and_se(excs, stats.mean_excited, stats.se_excited);
  mean_and_se(rates, stats.jump_rate, stats.se_jump_rate);
  if (!fractions.empty()) {
    mean_and_se(fractions, stats.cavity_jump_fraction,
                stats.se_cavity_jump_fraction);
  }
  return stats;
}

}  // namespace cavdet
