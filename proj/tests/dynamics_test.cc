// Copyright 2026 The hybridqs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hybridqs/dynamics.h"

#include <gtest/gtest.h>

#include <cmath>

namespace hybridqs {
namespace {

DeviceSpec closed(DeviceSpec d) {
  d.Q = kInf;
  d.T2_tr = kInf;
  return d;
}

PulseSchedule two_qubit_schedule() {
  DeviceSpec d = device_preset("highband");
  PulseSchedule s;
  s.add({ResonatorId::logical(0), d.spin_detuning(0), ns(1), ns(6)});
  s.add({ResonatorId::auxiliary(0), d.omega_c0 - d.omega_tc0, ns(8), ns(5)});
  s.add({ResonatorId::logical(1), ghz(-1.5), ns(9), ns(4)});
  s.set_t_end(ns(15));
  return s;
}

Vector plus_state(const DeviceModel& m) {
  Vector q = Vector::Constant(4, cplx(0.5));
  q[1] = cplx(0.0, 0.5);
  return m.embed(q);
}

TEST(FrameInvariance, PiecewiseMatchesBothRk4Frames) {
  DeviceModel m(closed(device_preset("highband")), build_cell({Topology::Kind::kChain, 2}));
  PulseSchedule s = two_qubit_schedule();
  Vector psi0 = plus_state(m);
  IntegratorConfig pw;
  IntegratorConfig idle;
  idle.method = Method::kRk4;
  idle.phase_bound = 0.01;
  IntegratorConfig co = idle;
  co.method = Method::kRk4CoMoving;
  Vector a = *evolve_unitary(m, psi0, s, pw).final_pure;
  Vector b = *evolve_unitary(m, psi0, s, idle).final_pure;
  Vector c = *evolve_unitary(m, psi0, s, co).final_pure;
  EXPECT_LE((a - b).norm(), 1e-8);
  EXPECT_LE((a - c).norm(), 1e-8);
  EXPECT_NEAR(a.norm(), 1.0, 1e-12);
}

TEST(FrameInvariance, RampsAgreeWithRk4) {
  DeviceModel m(closed(device_preset("highband")), build_cell({Topology::Kind::kChain, 1}));
  PulseSchedule s;
  s.add({ResonatorId::logical(0), ghz(4), ns(1), ns(10), ns(1)});
  s.set_t_end(ns(12));
  Vector psi0 = m.computational_state(1);
  IntegratorConfig idle;
  idle.method = Method::kRk4;
  idle.phase_bound = 0.01;
  Vector a = *evolve_unitary(m, psi0, s, {}).final_pure;
  Vector b = *evolve_unitary(m, psi0, s, idle).final_pure;
  EXPECT_LE((a - b).norm(), 1e-3);
}

TEST(Unitary, VacuumRabiMatchesAnalytic) {
  DeviceSpec d = closed(device_preset("highband"));
  d.Gbar_p1 = 0.0;
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 1}));
  double T = ns(40);
  PulseSchedule s;
  s.add({ResonatorId::logical(0), d.spin_detuning(0), 0.0, T});
  IntegratorConfig cfg;
  for (int k = 1; k <= 8; ++k) cfg.record_times.push_back(T * k / 8);
  auto spin = operator_observable("spin", number_op(m.space(), spin_minus_mode_id(0)));
  Trajectory tr = evolve_unitary(m, m.computational_state(1), s, cfg, {spin});
  double g = d.spin_matrix_element(-1);
  ASSERT_EQ(tr.times.size(), 8u);
  for (size_t k = 0; k < tr.times.size(); ++k)
    EXPECT_NEAR(tr.series("spin")[k], std::pow(std::sin(g * tr.times[k]), 2), 1e-9);
}

double max_qubit_leakage(const DeviceModel& m, const PulseSchedule& s, double t) {
  IntegratorConfig cfg;
  cfg.record_times = {t};
  double worst = 0.0;
  for (uint64_t b = 0; b < (1u << m.n_qubits()); ++b) {
    Trajectory tr = evolve_unitary(m, m.computational_state(b), s, cfg);
    worst = std::max(worst, tr.leakage.back());
  }
  return worst;
}

TEST(Unitary, IdleSingleQubitIsStable) {
  DeviceModel m(closed(device_preset("highband")), build_cell({Topology::Kind::kChain, 1}));
  PulseSchedule s;
  s.set_t_end(ns(100));
  EXPECT_LE(max_qubit_leakage(m, s, ns(100)), 1e-3);
  Trajectory tr = evolve_unitary(m, m.computational_state(1), s, {});
  EXPECT_LE(tr.diagnostics.norm_drift, 1e-12);
}

// Degenerate logical cavities exchange a photon through the shared auxiliary
// with amplitude ~ sin(J t), J = kappa^2 / (omega_c0 - omega_tc0).
TEST(Unitary, DegenerateLogicalsExchangeAtSecondOrder) {
  DeviceSpec d = closed(device_preset("highband"));
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 2}));
  PulseSchedule s;
  s.set_t_end(ns(100));
  double J = d.kappa * d.kappa / (d.omega_c0 - d.omega_tc0);
  IntegratorConfig cfg;
  cfg.record_times = {ns(100)};
  double leak = evolve_unitary(m, m.computational_state(0b01), s, cfg).leakage.back();
  EXPECT_NEAR(leak / std::pow(std::sin(J * ns(100)), 2), 1.0, 0.1);
}

TEST(Unitary, StaggeredIdleIsStable) {
  TopologyRequest req{Topology::Kind::kChain, 2};
  DeviceSpec d = stagger_logical(closed(device_preset("highband")), build_topology(req), mhz(30));
  EXPECT_NEAR(to_ghz(d.logical_frequency(1)), 31.03, 1e-12);
  DeviceModel m(d, build_cell(req));
  PulseSchedule s;
  s.set_t_end(ns(100));
  EXPECT_LE(max_qubit_leakage(m, s, ns(100)), 1e-3);
}

TEST(Lindblad, ClosedLimitMatchesUnitary) {
  DeviceModel m(closed(device_preset("highband")), build_cell({Topology::Kind::kChain, 2}));
  PulseSchedule s = two_qubit_schedule();
  Vector psi0 = plus_state(m);
  Vector a = *evolve_unitary(m, psi0, s, {}).final_pure;
  Matrix rho = *evolve_lindblad(m, psi0 * psi0.adjoint(), s, {}).final_mixed;
  EXPECT_LE((rho - a * a.adjoint()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Lindblad, PhotonLossIsExponential) {
  DeviceSpec d = device_preset("highband");
  d.Gbar_m1 = d.Gbar_p1 = 0.0;
  d.T2_tr = kInf;
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 1}));
  PulseSchedule s;
  s.set_t_end(us(2));
  IntegratorConfig cfg;
  cfg.record_times = {us(0.5), us(1), us(2)};
  Vector psi0 = m.computational_state(1);
  auto n = operator_observable("n", number_op(m.space(), photon_mode_id(0)));
  Trajectory tr = evolve_lindblad(m, psi0 * psi0.adjoint(), s, cfg, {n});
  double gamma = d.loss_rate(d.omega_c0);
  EXPECT_NEAR(gamma / kTwoPi, 31e3, 1e-6);
  for (size_t k = 0; k < tr.times.size(); ++k)
    EXPECT_NEAR(tr.series("n")[k], std::exp(-gamma * tr.times[k]), 1e-9);
  EXPECT_NEAR(tr.trace.back(), 1.0, 1e-9);
}

// Two-level Bloch equations for a resonantly driven pair with pure dephasing
// of the upper level, integrated independently by fine RK4.
double bloch_excited(double G, double gamma, double t) {
  double w = 1.0, y = 0.0;
  int n = 20000;
  double h = t / n;
  auto f = [&](double w0, double y0) { return std::array<double, 2>{-4 * G * y0, G * w0 - 0.5 * gamma * y0}; };
  for (int i = 0; i < n; ++i) {
    auto k1 = f(w, y);
    auto k2 = f(w + h / 2 * k1[0], y + h / 2 * k1[1]);
    auto k3 = f(w + h / 2 * k2[0], y + h / 2 * k2[1]);
    auto k4 = f(w + h * k3[0], y + h * k3[1]);
    w += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    y += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
  }
  return (1.0 - w) / 2.0;
}

TEST(Lindblad, DephasedAbsorptionMatchesBloch) {
  DeviceSpec d = device_preset("highband");
  d.Q = kInf;
  d.kappa = 0.0;
  d.T2_tr = us(0.05);
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 2}));
  std::vector<int> occ(m.space().modes().size(), 0);
  occ[m.space().mode_index(aux_photon_mode_id(0))] = 1;
  Vector psi0 = Vector::Zero(static_cast<Eigen::Index>(m.dim()));
  psi0[static_cast<Eigen::Index>(m.space().find(occ).value())] = 1.0;
  double T = ns(60);
  PulseSchedule s;
  s.add({ResonatorId::auxiliary(0), d.Omega01 - d.omega_tc0, 0.0, T});
  IntegratorConfig cfg;
  cfg.step = ns(0.05);
  for (int k = 1; k <= 6; ++k) cfg.record_times.push_back(T * k / 6);
  auto e = operator_observable("e", number_op(m.space(), transmon_mode_id(0)));
  Trajectory tr = evolve_lindblad(m, psi0 * psi0.adjoint(), s, cfg, {e});
  for (size_t k = 0; k < tr.times.size(); ++k)
    EXPECT_NEAR(tr.series("e")[k], bloch_excited(d.G01, d.dephasing_rate(), tr.times[k]), 1e-5);
}

TEST(Lindblad, InvariantsHoldUnderLossAndDephasing) {
  DeviceSpec d = device_preset("highband");
  d.Q = 1e5;
  d.T2_tr = us(0.2);
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 2}));
  Vector psi0 = plus_state(m);
  IntegratorConfig cfg;
  Trajectory tr = evolve_lindblad(m, psi0 * psi0.adjoint(), two_qubit_schedule(), cfg);
  StateCheck c = check_density_matrix(*tr.final_mixed);
  EXPECT_NEAR(c.trace, 1.0, 1e-6);
  EXPECT_LE(c.hermiticity, 1e-10);
  EXPECT_GE(c.min_eigenvalue, -1e-6);
  EXPECT_LE(tr.diagnostics.trace_drift, 1e-6);
  EXPECT_GE(tr.diagnostics.min_eigenvalue, -1e-6);
}

TEST(Lindblad, Rk4ReferenceAgrees) {
  DeviceSpec d = device_preset("highband");
  d.Q = 1e4;
  d.T2_tr = us(0.2);
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 2}));
  Vector psi0 = plus_state(m);
  PulseSchedule s = two_qubit_schedule();
  IntegratorConfig rk;
  rk.method = Method::kRk4;
  rk.phase_bound = 0.03;
  Matrix b = *evolve_lindblad(m, psi0 * psi0.adjoint(), s, rk).final_mixed;
  // The split is second order in the dissipator step.
  std::vector<double> err;
  for (double h : {0.2, 0.1, 0.05}) {
    IntegratorConfig pw;
    pw.step = ns(h);
    err.push_back((*evolve_lindblad(m, psi0 * psi0.adjoint(), s, pw).final_mixed - b).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(err[2], 3e-7);
  EXPECT_GT(err[1] / err[2], 3.0);
}

TEST(QubitReduce, LeakageAndRenormalization) {
  DeviceModel m(closed(device_preset("highband")), build_cell({Topology::Kind::kChain, 1}));
  Vector psi = 0.6 * m.computational_state(1);
  std::vector<int> occ(m.space().modes().size(), 0);
  occ[m.space().mode_index(spin_minus_mode_id(0))] = 0;
  occ[m.space().mode_index(photon_mode_id(0))] = 0;
  psi[static_cast<Eigen::Index>(m.space().find(occ).value())] = 0.8;
  QubitReduction r = qubit_reduce(m, psi);
  EXPECT_NEAR(r.leakage, 0.64, 1e-12);
  EXPECT_NEAR(std::real(r.rho(1, 1)), 1.0, 1e-12);
}

TEST(Convergence, ShortGateConverges) {
  RunRequest req;
  req.device = device_preset("highband");
  req.topology = {Topology::Kind::kChain, 1};
  req.schedule.add({ResonatorId::logical(0), req.device.spin_detuning(0), ns(1), ns(5)});
  req.schedule.set_t_end(ns(8));
  req.initial_state = [](const DeviceModel& m) { return m.computational_state(1); };
  req.observables = [](const DeviceModel& m) {
    return std::vector<Observable>{operator_observable("n", number_op(m.space(), photon_mode_id(0)))};
  };
  ConvergenceReport rep = check_convergence(req, 1e-3);
  EXPECT_TRUE(rep.passed) << rep.max_deviation;
}

}  // namespace
}  // namespace hybridqs
