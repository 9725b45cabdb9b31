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

#include "hybridqs/gates.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hybridqs/dynamics.h"
#include "hybridqs/oracle.h"
#include "hybridqs/program.h"

namespace hybridqs {
namespace {

DeviceSpec closed(const std::string& preset) {
  DeviceSpec d = device_preset(preset);
  d.Q = kInf;
  d.T2_tr = kInf;
  return d;
}

// Calibrations are deterministic; compute each once.
const GateCalibration& highband_calibration() {
  static const GateCalibration c = [] {
    GateCalibration c = calibrate(closed("highband"));
    calibrate_cphase(c, closed("highband"), kPi / 2);
    calibrate_cphase(c, closed("highband"), kPi);
    calibrate_cphase(c, closed("highband"), 3 * kPi / 2);
    return c;
  }();
  return c;
}

const GateCalibration& protected_calibration() {
  static const GateCalibration c = [] {
    GateCalibration c = calibrate(closed("protected"));
    calibrate_cphase(c, closed("protected"), kPi / 2);
    return c;
  }();
  return c;
}

Matrix layer_process(const DeviceModel& m, const GateCalibration& c, const std::vector<Layer>& layers,
                     ProgramOptions opt = {}) {
  ProgramScheduler ps(m, c, opt);
  ps.append_all(layers);
  PiecewisePropagator prop(m);
  Matrix W = m.computational_isometry(ps.stored());
  Matrix W0 = m.computational_isometry();
  return W.adjoint() * prop.propagate(W0, ps.schedule(), 0.0, ps.t_end());
}

double layer_fidelity(const DeviceModel& m, const GateCalibration& c, const Layer& layer) {
  Matrix M = layer_process(m, c, {layer});
  return unitary_process_fidelity(M, layer_unitary(m.n_qubits(), layer));
}

TEST(SemiResonant, FullRabiAtPi) {
  const double G = mhz(40);
  EXPECT_NEAR(semi_resonant_detuning(kPi, G), 0.0, 1e-9);
  EXPECT_NEAR(semi_resonant_duration(0.0, G), kPi / G, 1e-18);
}

TEST(SemiResonant, HalfPiInversion) {
  const double G = mhz(40);
  double d = semi_resonant_detuning(kPi / 2, G);
  EXPECT_NEAR(d, 2 * G / std::sqrt(3.0), 1e-6);
  EXPECT_NEAR(semi_resonant_phase(d, G), kPi / 2, 1e-12);
}

TEST(SemiResonant, ForwardInverseRoundTrip) {
  const double G = mhz(20);
  for (double phi = 0.1; phi < kTwoPi - 0.05; phi += 0.37) {
    EXPECT_NEAR(semi_resonant_phase(semi_resonant_detuning(phi, G), G), phi, 1e-12) << phi;
  }
  EXPECT_THROW(semi_resonant_detuning(0.0, G), std::invalid_argument);
  EXPECT_THROW(semi_resonant_detuning(kTwoPi, G), std::invalid_argument);
}

TEST(Calibration, SeedDurationsHighband) {
  GateCalibration c = seed_calibration(device_preset("highband"));
  EXPECT_NEAR(to_ns(c.t_hop), 8.3333, 1e-3);
  EXPECT_NEAR(to_ns(c.t_absorb), 8.3333, 1e-3);
  EXPECT_NEAR(to_ns(c.t_store), 12.5, 1e-3);
  EXPECT_NEAR(to_ns(c.rotation_time(kPi / 2)), 6.25, 1e-3);
  EXPECT_FALSE(c.protected_timing);
}

TEST(Calibration, RefinedTransfersAboveThreshold) {
  CalibrationReport rep;
  GateCalibration c = calibrate(closed("highband"), &rep);
  EXPECT_GE(rep.hop_transfer, 0.999);
  EXPECT_GE(rep.absorb_transfer, 0.999);
  EXPECT_GE(rep.store_transfer, 0.999);
  EXPECT_GE(rep.rotation_transfer, 0.999);
  EXPECT_NEAR(to_ns(c.rotation_time(kPi / 2)), 6.25, 0.1);
  EXPECT_TRUE(c.refined);
}

TEST(Calibration, JsonRoundTrip) {
  const GateCalibration& c = protected_calibration();
  GateCalibration r = calibration_from_json(calibration_to_json(c));
  EXPECT_NEAR(r.t_hop, c.t_hop, 1e-18);
  EXPECT_NEAR(r.rotation_rate, c.rotation_rate, 1e-3);
  EXPECT_EQ(r.protected_timing, c.protected_timing);
  EXPECT_NEAR(r.protection_period, c.protection_period, 1e-18);
  EXPECT_NEAR(r.spin_coupling, c.spin_coupling, 1e-3);
  ASSERT_EQ(r.semi.size(), c.semi.size());
  auto s = r.semi_resonant(kPi / 2, mhz(20));
  EXPECT_TRUE(s.refined);
  EXPECT_NEAR(s.delta12, c.semi_resonant(kPi / 2, mhz(20)).delta12, 1e-3);
}

TEST(Calibration, RejectsNonPositiveDurations) {
  GateCalibration c = seed_calibration(device_preset("highband"));
  c.t_hop = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(PhaseGate, DurationsAtHalfGigahertz) {
  DeviceSpec d = device_preset("highband");
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 1}));
  GateCalibration c = seed_calibration(d);
  GateContext ctx{d, m.topology(), c};
  GateSchedule a = schedule_phase(ctx, 0, kPi / 2, 0.0);
  EXPECT_NEAR(to_ns(a.t_end), 0.5, 1e-9);
  GateSchedule b = schedule_phase(ctx, 0, kPi, 0.0);
  EXPECT_NEAR(to_ns(b.t_end), 1.0, 1e-9);
  ASSERT_EQ(b.pulses.segments().size(), 1u);
  const auto& s = b.pulses.segments()[0];
  EXPECT_NEAR(std::remainder(s.delta * s.duration - kPi, kTwoPi), 0.0, 1e-12);
  EXPECT_TRUE(schedule_phase(ctx, 0, 0.0, 0.0).pulses.empty());
}

TEST(PhaseGate, PhysicalActionIsDiagonal) {
  DeviceSpec d = closed("highband");
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 1}));
  GateCalibration c = seed_calibration(d);
  GateContext ctx{d, m.topology(), c};
  GateSchedule g = schedule_phase(ctx, 0, kPi, 0.0);
  PiecewisePropagator prop(m);
  Matrix W = m.computational_isometry();
  Matrix M = W.adjoint() * prop.propagate(W, g.pulses, 0.0, g.t_end);
  Matrix Z = Matrix::Identity(2, 2);
  Z(1, 1) = -1.0;
  EXPECT_GE(unitary_process_fidelity(M, Z), 0.999);
}

TEST(Rotation, PiPulseTransfersPhoton) {
  DeviceSpec d = closed("highband");
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 1}));
  GateCalibration c = highband_calibration();
  GateContext ctx{d, m.topology(), c};
  GateSchedule g = schedule_rotation(ctx, 0, kPi, Axis::kX, 0.0);
  PiecewisePropagator prop(m);
  Vector out = prop.propagate(m.computational_state(1), g.pulses, 0.0, g.t_end).col(0);
  EXPECT_GE(std::norm(m.computational_state(0).dot(out)), 0.999);
}

TEST(Rotation, AxisAlignmentWaitsForPhase) {
  DeviceSpec d = device_preset("highband");
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 1}));
  GateCalibration c = seed_calibration(d);
  GateContext ctx{d, m.topology(), c};
  GateSchedule x = schedule_rotation(ctx, 0, kPi / 2, Axis::kX, ns(3.3));
  double ax = d.spin_detuning(0) * (x.t_start + x.wait);
  EXPECT_NEAR(std::remainder(ax, kTwoPi), 0.0, 1e-6);
  GateSchedule y = schedule_rotation(ctx, 0, kPi / 2, Axis::kY, ns(3.3));
  double ay = d.spin_detuning(0) * (y.t_start + y.wait);
  EXPECT_NEAR(std::remainder(ay - kPi / 2, kTwoPi), 0.0, 1e-6);
  EXPECT_LT(to_ns(y.wait), 2 * kPi / d.spin_detuning(0) * 1e9);
  EXPECT_TRUE(schedule_rotation(ctx, 0, 0.0, Axis::kX, 0.0).pulses.empty());
}

TEST(Rotation, MatchesIdealWithoutFit) {
  DeviceSpec d = closed("highband");
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 1}));
  GateCalibration c = highband_calibration();
  GateContext ctx{d, m.topology(), c};
  PiecewisePropagator prop(m);
  Matrix W = m.computational_isometry();
  for (Axis axis : {Axis::kX, Axis::kY}) {
    GateSchedule g = schedule_rotation(ctx, 0, kPi / 2, axis, ns(1.7));
    Matrix M = W.adjoint() * prop.propagate(W, g.pulses, 0.0, g.t_end);
    GateOp op = axis == Axis::kX ? GateOp::rot_x(0, kPi / 2) : GateOp::rot_y(0, kPi / 2);
    EXPECT_GE(unitary_process_fidelity(M, ideal_gate_matrix(op)), 0.998);
  }
}

TEST(ProcessFidelity, SingleQubitGatesHighband) {
  DeviceModel m(closed("highband"), build_cell({Topology::Kind::kChain, 1}));
  const GateCalibration& c = highband_calibration();
  EXPECT_GE(layer_fidelity(m, c, {GateOp::rot_x(0, kPi / 2)}), 0.998);
  EXPECT_GE(layer_fidelity(m, c, {GateOp::rot_y(0, kPi / 2)}), 0.998);
  EXPECT_GE(layer_fidelity(m, c, {GateOp::phase(0, kPi / 2)}), 0.998);
  EXPECT_GE(layer_fidelity(m, c, {GateOp::rot_x(0, 3 * kPi / 2)}), 0.998);
}

TEST(ProcessFidelity, TwoQubitGatesHighband) {
  DeviceModel m(closed("highband"), build_cell({Topology::Kind::kChain, 2}));
  const GateCalibration& c = highband_calibration();
  EXPECT_GE(layer_fidelity(m, c, {GateOp::cphase(0, 1, kPi / 2)}), 0.998);
  EXPECT_GE(layer_fidelity(m, c, {GateOp::cz(0, 1)}), 0.998);
}

TEST(ProcessFidelity, TransmonReturnsToGround) {
  DeviceSpec d = closed("highband");
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 2}));
  const GateCalibration& c = highband_calibration();
  GateContext ctx{d, m.topology(), c};
  GateSchedule g = schedule_cphase(ctx, 0, 1, kPi / 2, 0.0);
  PiecewisePropagator prop(m);
  size_t tr = m.space().mode_index(transmon_mode_id(0));
  for (uint64_t b = 0; b < 4; ++b) {
    Vector out = prop.propagate(m.computational_state(b), g.pulses, 0.0, g.t_end).col(0);
    double excited = 0.0;
    for (size_t i = 0; i < m.dim(); ++i) {
      if (m.space().occupations(i)[tr] > 0) excited += std::norm(out[static_cast<Eigen::Index>(i)]);
    }
    EXPECT_LE(excited, 2e-3) << "input " << b;
  }
}

TEST(ControlledPhase, InverseCancelsConditionalPhase) {
  DeviceModel m(closed("highband"), build_cell({Topology::Kind::kChain, 2}));
  const GateCalibration& c = highband_calibration();
  ProgramOptions raw;
  raw.virtual_phases = false;
  Matrix M = layer_process(m, c, {{GateOp::cphase(0, 1, kPi / 2)}, {GateOp::cphase(0, 1, -kPi / 2)}}, raw);
  cplx z = M(3, 3) * M(0, 0) / (M(1, 1) * M(2, 2));
  // Each gate carries ~1.3e-3 of bare-state mixing error; the pair doubles it.
  EXPECT_LE(std::abs(std::arg(z)), 3e-3);
  Matrix F = layer_process(m, c, {{GateOp::cphase(0, 1, kPi / 2)}, {GateOp::cphase(0, 1, -kPi / 2)}});
  EXPECT_GE(unitary_process_fidelity(F, Matrix::Identity(4, 4)), 0.996);
}

TEST(ControlledPhase, RequiresSharedAuxiliary) {
  DeviceSpec d = device_preset("highband");
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 3}));
  GateCalibration c = seed_calibration(d);
  GateContext ctx{d, m.topology(), c};
  EXPECT_THROW(schedule_cphase(ctx, 0, 2, kPi, 0.0), ScheduleError);
  EXPECT_THROW(schedule_cphase(ctx, 1, 1, kPi, 0.0), ScheduleError);
  EXPECT_TRUE(schedule_cphase(ctx, 0, 1, kTwoPi, 0.0).pulses.empty());
}

TEST(ControlledPhase, SevenSteps) {
  DeviceSpec d = device_preset("highband");
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 2}));
  GateCalibration c = seed_calibration(d);
  GateContext ctx{d, m.topology(), c};
  GateSchedule g = schedule_cphase(ctx, 0, 1, kPi, 0.0);
  std::vector<std::string> labels;
  for (const auto& s : g.pulses.segments()) labels.push_back(s.label);
  std::sort(labels.begin(), labels.end());
  EXPECT_EQ(std::count(labels.begin(), labels.end(), "hop"), 4);
  EXPECT_EQ(std::count(labels.begin(), labels.end(), "absorb"), 2);
  EXPECT_EQ(std::count(labels.begin(), labels.end(), "semi"), 1);
  double expect = 4 * c.t_hop + 2 * c.t_absorb + kPi / d.G12;
  EXPECT_NEAR(g.t_end, expect, 1e-15);
}

TEST(Storage, RoundTripOnRandomState) {
  DeviceSpec d = closed("highband");
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 1}));
  const GateCalibration& c = highband_calibration();
  GateContext ctx{d, m.topology(), c};
  PulseSchedule s;
  s.merge(schedule_storage(ctx, 0, 0.0).pulses);
  s.merge(schedule_retrieve(ctx, 0, c.t_store).pulses);
  s.set_t_end(2 * c.t_store);
  PiecewisePropagator prop(m);
  Matrix W = m.computational_isometry();
  Matrix M = W.adjoint() * prop.propagate(W, s, 0.0, s.t_end());
  // Residual Z phase is compensated by the program-level fit.
  PhaseFit fit = fit_frame_phases(M, Matrix::Identity(2, 2), 1);
  EXPECT_GE(fit.fidelity, 0.999);

  PulseSchedule st = schedule_storage(ctx, 0, 0.0).pulses;
  Vector out = prop.propagate(m.computational_state(0), st, 0.0, c.t_store).col(0);
  EXPECT_GE(std::norm(m.computational_state(0).dot(out)), 0.999);
  Vector moved = prop.propagate(m.computational_state(1), st, 0.0, c.t_store).col(0);
  EXPECT_GE(std::norm(m.computational_state(1, 1).dot(moved)), 0.999);
}

TEST(Storage, ReducesLossDuringIdle) {
  DeviceSpec d = device_preset("highband");
  d.T2_tr = kInf;
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 1}));
  const GateCalibration& c = highband_calibration();
  GateContext ctx{d, m.topology(), c};
  const double T = ns(100);
  PulseSchedule idle;
  idle.set_t_end(T);
  PulseSchedule kept;
  kept.merge(schedule_storage(ctx, 0, 0.0).pulses);
  kept.merge(schedule_retrieve(ctx, 0, T - c.t_store).pulses);
  kept.set_t_end(T);
  IntegratorConfig cfg;
  Vector psi = m.computational_state(1);
  DensityMatrix rho0 = psi * psi.adjoint();
  auto a = evolve_lindblad(m, rho0, idle, cfg);
  auto b = evolve_lindblad(m, rho0, kept, cfg);
  double fa = fidelity(*a.final_mixed, psi);
  double fb = fidelity(*b.final_mixed, psi);
  EXPECT_GT(fb, fa + 1e-3);
}

TEST(LongRange, CzOnThreeChainTruthTable) {
  Cell cell = build_cell({Topology::Kind::kChain, 3});
  DeviceSpec d = stagger_logical(closed("highband"), cell.topology, mhz(30));
  DeviceModel m(d, cell);
  const GateCalibration& c = highband_calibration();
  GateContext ctx{d, m.topology(), c};
  GateSchedule g = schedule_long_range_cphase(ctx, 0, 2, kPi, 0.0);
  ASSERT_EQ(g.qubits.size(), 3u);
  PiecewisePropagator prop(m);
  Matrix W = m.computational_isometry();
  Matrix M = W.adjoint() * prop.propagate(W, g.pulses, 0.0, g.t_end);
  for (Eigen::Index k = 0; k < 8; ++k) EXPECT_GE(std::norm(M(k, k)), 0.985) << k;
  // The stored middle qubit comes back.
  EXPECT_GE(std::norm(M(2, 2)), 0.99);
  Matrix F = layer_process(m, c, {{GateOp::cz(0, 2)}});
  EXPECT_GE(unitary_process_fidelity(F, layer_unitary(3, {GateOp::cz(0, 2)})), 0.99);
}

TEST(LongRange, AdjacentReducesToCphase) {
  DeviceSpec d = device_preset("highband");
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 3}));
  GateCalibration c = seed_calibration(d);
  GateContext ctx{d, m.topology(), c};
  GateSchedule a = schedule_long_range_cphase(ctx, 1, 2, kPi, 0.0);
  GateSchedule b = schedule_cphase(ctx, 1, 2, kPi, 0.0);
  EXPECT_EQ(a.pulses.segments().size(), b.pulses.segments().size());
  EXPECT_DOUBLE_EQ(a.t_end, b.t_end);
}

TEST(Parallelism, DisjointGatesCommute) {
  // Qubits 0 and 2 of a chain share no auxiliary; the stagger suppresses
  // idle exchange with the middle qubit.
  Cell cell = build_cell({Topology::Kind::kChain, 3});
  DeviceSpec d = stagger_logical(closed("highband"), cell.topology, ghz(1));
  DeviceModel m(d, cell);
  const GateCalibration& c = highband_calibration();
  GateContext ctx{d, m.topology(), c};
  auto run = [&](double ta, double tb) {
    PulseSchedule s;
    s.merge(schedule_phase(ctx, 0, kPi / 2, ta).pulses);
    s.merge(schedule_phase(ctx, 2, kPi / 3, tb).pulses);
    s.set_t_end(ns(3));
    PiecewisePropagator prop(m);
    Vector psi = m.embed(Vector::Constant(8, cplx(1.0 / std::sqrt(8.0))));
    return Vector(prop.propagate(psi, s, 0.0, s.t_end()).col(0));
  };
  Vector ab = run(0.0, ns(1.0));
  Vector ba = run(ns(1.0), 0.0);
  Vector both = run(0.0, 0.0);
  EXPECT_GE(std::norm(ab.dot(ba)), 1 - 1e-6);
  EXPECT_GE(std::norm(ab.dot(both)), 1 - 1e-6);
}

TEST(Protection, PeriodMatchesOscillationFrequency) {
  DeviceSpec d = device_preset("protected");
  double P = protection_period(d);
  EXPECT_NEAR(1.0 / P / 1e6, 94.87, 0.5);
  EXPECT_NEAR(to_ns(P), 10.54, 0.05);
  GateCalibration c = seed_calibration(d);
  EXPECT_TRUE(c.protected_timing);
  EXPECT_DOUBLE_EQ(c.protection_period, P);
}

TEST(Protection, StartAtZeroIsUnchanged) {
  DeviceSpec d = device_preset("protected");
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 1}));
  GateCalibration c = seed_calibration(d);
  GateContext ctx{d, m.topology(), c};
  GateSchedule g = schedule_phase(ctx, 0, kPi / 2, 0.0);
  double end = 0.0;
  PulseSchedule p = apply_protection_timing(g.pulses, {0}, 0.0, c, &end);
  EXPECT_DOUBLE_EQ(p.segments_on(ResonatorId::logical(0)).front().t_start, 0.0);
  EXPECT_NEAR(end, c.protection_period, 1e-18);
}

TEST(Protection, SnapsStartAndFreezesGaps) {
  DeviceSpec d = device_preset("protected");
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 2}));
  GateCalibration c = seed_calibration(d);
  c.idle_whole_periods = false;
  GateContext ctx{d, m.topology(), c};
  GateSchedule g = schedule_hop(ctx, 0, 0, 0.0);
  double end = 0.0;
  PulseSchedule p = apply_protection_timing(g.pulses, {0, 1}, ns(3), c, &end);
  const double P = c.protection_period;
  auto l0 = p.segments_on(ResonatorId::logical(0));
  EXPECT_NEAR(l0.front().t_start, P, 1e-18);
  EXPECT_NEAR(end, 2 * P, 1e-15);
  // Qubit 1 has no pulse and is frozen for the whole fragment.
  auto l1 = p.segments_on(ResonatorId::logical(1));
  ASSERT_EQ(l1.size(), 1u);
  EXPECT_EQ(l1[0].label, "freeze");
  EXPECT_NEAR(l1[0].duration, P, 1e-15);
  EXPECT_GE(l1[0].delta, c.freeze_detuning);
}

TEST(Protection, IdlesWholePeriodsAndFreezesRemainder) {
  DeviceSpec d = device_preset("protected");
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 2}));
  GateCalibration c = seed_calibration(d);
  ASSERT_TRUE(c.idle_whole_periods);
  GateContext ctx{d, m.topology(), c};
  GateSchedule g = schedule_hop(ctx, 0, 0, 0.0);
  double end = 0.0;
  PulseSchedule p = apply_protection_timing(g.pulses, {0, 1}, 0.0, c, &end);
  const double P = c.protection_period;
  EXPECT_TRUE(p.segments_on(ResonatorId::logical(1)).empty());
  auto l0 = p.segments_on(ResonatorId::logical(0));
  ASSERT_EQ(l0.size(), 2u);
  EXPECT_EQ(l0[1].label, "freeze");
  EXPECT_NEAR(l0[1].t_start, c.t_hop, 1e-15);
  EXPECT_NEAR(l0[1].duration, P - c.t_hop, 1e-15);
}

TEST(Protection, FreezeClosesFrozenOscillation) {
  GateCalibration c = seed_calibration(device_preset("protected"));
  for (double D : {ns(0.7), ns(2.47), ns(10.54), ns(37.0)}) {
    double delta = freeze_detuning_for(c, D);
    EXPECT_GE(delta, c.freeze_detuning);
    double dd = c.spin_detuning - delta;
    double nu = std::sqrt(c.spin_coupling * c.spin_coupling + 0.25 * dd * dd);
    double cycles = nu * D / kTwoPi;
    EXPECT_NEAR(cycles, std::round(cycles), 1e-9) << D;
  }
}

TEST(Protection, ProtectedGatesClosedSystem) {
  DeviceSpec d = closed("protected");
  const GateCalibration& c = protected_calibration();
  DeviceModel m1(d, build_cell({Topology::Kind::kChain, 1}));
  EXPECT_GE(layer_fidelity(m1, c, {GateOp::rot_x(0, kPi / 2)}), 0.998);
  EXPECT_GE(layer_fidelity(m1, c, {GateOp::phase(0, kPi / 2)}), 0.998);
  DeviceModel m2(d, build_cell({Topology::Kind::kChain, 2}));
  EXPECT_GE(layer_fidelity(m2, c, {GateOp::cphase(0, 1, kPi / 2)}), 0.99);
}

}  // namespace
}  // namespace hybridqs
