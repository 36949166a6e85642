// SPDX-License-Identifier: Apache-2.0
#include "cavdet/zeeman.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "cavdet/errors.hpp"

namespace cavdet::zeeman {

using Complex = std::complex<double>;

LevelScheme LevelScheme::f2_to_f3() {
  LevelScheme s;
  // rows m = -2..2; columns q = -1, 0, +1
  s.table = {{
      {1.0, 1.0 / 3.0, 1.0 / 15.0},       // m = -2
      {2.0 / 3.0, 8.0 / 15.0, 1.0 / 5.0},  // m = -1
      {2.0 / 5.0, 3.0 / 5.0, 2.0 / 5.0},   // m =  0
      {1.0 / 5.0, 8.0 / 15.0, 2.0 / 3.0},  // m = +1
      {1.0 / 15.0, 1.0 / 3.0, 1.0},        // m = +2
  }};
  return s;
}

double LevelScheme::coupling_sq(int m_ground, int q) const {
  if (m_ground < -2 || m_ground > 2 || q < -1 || q > 1) return 0.0;
  const int m_excited = m_ground + q;
  if (m_excited < -3 || m_excited > 3) return 0.0;
  return table[m_ground + 2][q + 1];
}

double LevelScheme::branching(int m_excited, int q) const {
  const int m_ground = m_excited - q;
  return coupling_sq(m_ground, q);
}

double LevelScheme::branching_sum(int m_excited) const {
  double sum = 0.0;
  for (int q = -1; q <= 1; ++q) sum += branching(m_excited, q);
  return sum;
}

DrivePolarization DrivePolarization::sigma_plus(double s) {
  DrivePolarization d;
  d.amplitude = {Complex(0.0), Complex(0.0), Complex(1.0)};
  d.saturation_s = s;
  return d;
}

DrivePolarization DrivePolarization::sigma_minus(double s) {
  DrivePolarization d;
  d.amplitude = {Complex(1.0), Complex(0.0), Complex(0.0)};
  d.saturation_s = s;
  return d;
}

DrivePolarization DrivePolarization::linear_perp(double s) {
  DrivePolarization d;
  const double r = 1.0 / std::sqrt(2.0);
  d.amplitude = {Complex(r), Complex(0.0), Complex(-r)};
  d.saturation_s = s;
  return d;
}

double DrivePolarization::norm_sq() const {
  double n = 0.0;
  for (const auto& a : amplitude) n += std::norm(a);
  return n;
}

void DrivePolarization::validate() const {
  if (saturation_s < 0.0) {
    throw ValidationError("saturation parameter must be non-negative");
  }
  if (std::abs(norm_sq() - 1.0) > 1e-9) {
    throw ValidationError("drive polarization vector must be normalized");
  }
}

double Populations::total() const {
  double t = 0.0;
  for (double p : ground) t += p;
  for (double p : excited) t += p;
  return t;
}

double Populations::total_excited() const {
  double t = 0.0;
  for (double p : excited) t += p;
  return t;
}

namespace {

constexpr int kGammaUnit = 1;  // all rates in units of gamma

Populations uniform_ground() {
  Populations p;
  p.ground.fill(1.0 / kGroundStates);
  p.excited.fill(0.0);
  return p;
}

Populations solve_rate_equations(const LevelScheme& scheme,
                                 const DrivePolarization& drive) {
  // state vector: 5 ground then 7 excited populations
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(kStates, kStates);
  const double big_gamma = 2.0 * kGammaUnit;  // population decay rate

  auto gidx = [](int mg) { return mg + 2; };
  auto eidx = [](int me) { return kGroundStates + me + 3; };

  for (int mg = -2; mg <= 2; ++mg) {
    for (int q = -1; q <= 1; ++q) {
      const double pump_sq = std::norm(drive.amplitude[q + 1]);
      const double w = kGammaUnit * drive.saturation_s * pump_sq *
                       scheme.coupling_sq(mg, q);
      if (w == 0.0) continue;
      const int me = mg + q;
      m(gidx(mg), gidx(mg)) -= w;
      m(gidx(mg), eidx(me)) += w;
      m(eidx(me), gidx(mg)) += w;
      m(eidx(me), eidx(me)) -= w;
    }
  }
  for (int me = -3; me <= 3; ++me) {
    m(eidx(me), eidx(me)) -= big_gamma;
    for (int q = -1; q <= 1; ++q) {
      const int mg = me - q;
      if (mg < -2 || mg > 2) continue;
      m(gidx(mg), eidx(me)) += big_gamma * scheme.branching(me, q);
    }
  }

  // stationary distribution with the trace row appended
  Eigen::MatrixXd sys(kStates + 1, kStates);
  sys.topRows(kStates) = m;
  sys.bottomRows(1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(kStates + 1);
  rhs(kStates) = 1.0;
  const Eigen::VectorXd p =
      sys.colPivHouseholderQr().solve(rhs);

  const double residual = (m * p).cwiseAbs().maxCoeff();
  if (!(residual < 1e-9)) {
    throw NumericalError("rate-equation equilibrium did not converge");
  }

  Populations out;
  for (int i = 0; i < kGroundStates; ++i) out.ground[i] = std::max(0.0, p(i));
  for (int i = 0; i < kExcitedStates; ++i) {
    out.excited[i] = std::max(0.0, p(kGroundStates + i));
  }
  return out;
}

Populations solve_full_bloch(const LevelScheme& scheme,
                             const DrivePolarization& drive) {
  // 12-level master equation; H couples g(m) <-> e(m+q) with amplitude
  // (Omega/2) u_q c(m, q), collapse operators are the three polarization
  // channels sqrt(2 gamma) sum_m c(m, q) |g m><e m+q|.
  const int d = kStates;
  auto gidx = [](int mg) { return mg + 2; };
  auto eidx = [](int me) { return kGroundStates + me + 3; };

  const double omega = kGammaUnit * std::sqrt(2.0 * drive.saturation_s);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
  for (int mg = -2; mg <= 2; ++mg) {
    for (int q = -1; q <= 1; ++q) {
      const int me = mg + q;
      if (me < -3 || me > 3) continue;
      const Complex amp = 0.5 * omega * drive.amplitude[q + 1] *
                          std::sqrt(scheme.coupling_sq(mg, q));
      if (amp == Complex(0.0)) continue;
      h(eidx(me), gidx(mg)) += amp;
      h(gidx(mg), eidx(me)) += std::conj(amp);
    }
  }

  std::vector<Eigen::MatrixXcd> jumps;
  for (int q = -1; q <= 1; ++q) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
    for (int me = -3; me <= 3; ++me) {
      const int mg = me - q;
      if (mg < -2 || mg > 2) continue;
      a(gidx(mg), eidx(me)) =
          std::sqrt(2.0 * kGammaUnit * scheme.branching(me, q));
    }
    jumps.push_back(std::move(a));
  }

  const int n = d * d;
  Eigen::MatrixXcd gen = Eigen::MatrixXcd::Zero(n, n);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
  auto kron_into = [&](const Eigen::MatrixXcd& left,
                       const Eigen::MatrixXcd& right, Complex scale) {
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        if (left(i, j) == Complex(0.0)) continue;
        gen.block(i * d, j * d, d, d) += scale * left(i, j) * right;
      }
    }
  };
  const Complex mi(0.0, -1.0);
  kron_into(id, h, mi);
  kron_into(h.transpose(), id, -mi);
  for (const auto& a : jumps) {
    const Eigen::MatrixXcd adag_a = a.adjoint() * a;
    kron_into(a.conjugate(), a, Complex(1.0));
    kron_into(id, adag_a, Complex(-0.5));
    kron_into(adag_a.transpose(), id, Complex(-0.5));
  }

  Eigen::MatrixXcd bordered = Eigen::MatrixXcd::Zero(n + 1, n + 1);
  bordered.topLeftCorner(n, n) = gen;
  for (int i = 0; i < d; ++i) {
    bordered(n, i * d + i) = Complex(1.0);
    bordered(i * d + i, n) = Complex(1.0);
  }
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n + 1);
  rhs(n) = Complex(1.0);
  const Eigen::VectorXcd sol = bordered.partialPivLu().solve(rhs);
  const Eigen::VectorXcd x = sol.head(n);
  const double residual = (gen * x).cwiseAbs().maxCoeff();
  if (!(residual < 1e-9)) {
    throw NumericalError("Bloch equilibrium did not converge");
  }

  Populations out;
  for (int i = 0; i < kGroundStates; ++i) {
    out.ground[i] = std::max(0.0, x(i * d + i).real());
  }
  for (int i = 0; i < kExcitedStates; ++i) {
    const int k = kGroundStates + i;
    out.excited[i] = std::max(0.0, x(k * d + k).real());
  }
  return out;
}

}  // namespace

Populations equilibrium_populations(const LevelScheme& scheme,
                                    const DrivePolarization& drive,
                                    ObeModel model) {
  if (drive.saturation_s == 0.0) return uniform_ground();
  drive.validate();
  return model == ObeModel::rate_equations ? solve_rate_equations(scheme, drive)
                                           : solve_full_bloch(scheme, drive);
}

double sigma_fraction(const Populations& populations,
                      const LevelScheme& scheme) {
  const double total = populations.total_excited();
  if (total <= 0.0) {
    throw ValidationError("sigma fraction needs excited population");
  }
  double sigma = 0.0;
  for (int me = -3; me <= 3; ++me) {
    const double p = populations.excited[me + 3];
    sigma += p * (scheme.branching(me, -1) + scheme.branching(me, +1));
  }
  return sigma / total;
}

double cooperativity_ratio(const LevelScheme& scheme,
                           const DrivePolarization& drive,
                           ObeModel model) {
  drive.validate();
  const double p_minus = std::norm(drive.amplitude[0]);
  const double p_pi = std::norm(drive.amplitude[1]);
  const double p_plus = std::norm(drive.amplitude[2]);

  const bool circular = (p_pi == 0.0) && (p_minus == 0.0 || p_plus == 0.0);
  if (circular) {
    // cycling-transition pumping; the induced dipole is the reference itself
    return 1.0;
  }
  const bool linear_perp =
      p_pi == 0.0 && std::abs(p_plus - p_minus) < 1e-12;
  if (!linear_perp) {
    throw ValidationError(
        "cooperativity_ratio supports circular or linear-perpendicular "
        "drive polarizations");
  }

  // In the drive basis the pumping is pure pi; solve the coherence-free
  // equilibrium there and weight the decay by the co-polarized (pi) dipole
  // fraction, which carries the detected cavity polarization mode.
  DrivePolarization pi_drive;
  pi_drive.amplitude = {std::complex<double>(0.0), std::complex<double>(1.0),
                        std::complex<double>(0.0)};
  pi_drive.saturation_s = drive.saturation_s;
  const Populations eq = equilibrium_populations(scheme, pi_drive, model);
  const double total = eq.total_excited();
  if (!(total > 0.0)) {
    throw NumericalError("no excited population in the pumping equilibrium");
  }
  double co_polarized = 0.0;
  for (int me = -3; me <= 3; ++me) {
    co_polarized += eq.excited[me + 3] * scheme.branching(me, 0);
  }
  return co_polarized / total;
}

}  // namespace cavdet::zeeman
