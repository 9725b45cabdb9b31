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

#include "hybridqs/device.h"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "hybridqs/model.h"
#include "hybridqs/schedule.h"

namespace hybridqs {
namespace {

double d_norm(const Matrix& m) { return std::max(1.0, m.cwiseAbs().maxCoeff()); }

TEST(Presets, HighbandValues) {
  DeviceSpec d = device_preset("highband");
  EXPECT_NEAR(to_ghz(d.omega_p1), 37.0, 1e-12);
  EXPECT_NEAR(to_ghz(d.omega_m1), 35.0, 1e-12);
  EXPECT_NEAR(to_ghz(d.omega_c0), 31.0, 1e-12);
  EXPECT_NEAR(to_ghz(d.omega_tc0), 28.0, 1e-12);
  EXPECT_NEAR(to_ghz(d.Omega01), 21.7, 1e-12);
  EXPECT_NEAR(to_ghz(d.Omega12), 19.6, 1e-12);
  EXPECT_NEAR(to_mhz(d.Gbar_m1), 40.0, 1e-12);
  EXPECT_NEAR(to_mhz(d.kappa), 30.0, 1e-12);
}

TEST(Presets, ProtectedDetuningIsSixG) {
  DeviceSpec d = device_preset("protected");
  EXPECT_NEAR(d.spin_detuning(0) / d.Gbar_m1, 6.0, 1e-9);
  EXPECT_THROW(device_preset("nope"), std::invalid_argument);
}

TEST(DeviceJson, RoundTripAndErrors) {
  DeviceSpec d = device_preset("highband");
  DeviceSpec e = device_from_json(device_to_json(d));
  EXPECT_NEAR(e.omega_c0, d.omega_c0, 1e-3);
  EXPECT_NEAR(e.Gbar_m1, d.Gbar_m1, 1e-6);
  EXPECT_EQ(e.spin_coupling_convention, d.spin_coupling_convention);
  nlohmann::json j = {{"preset", "protected"}, {"Q", "inf"}, {"T2_tr_us", 1.0}};
  DeviceSpec p = device_from_json(j);
  EXPECT_TRUE(std::isinf(p.Q));
  EXPECT_NEAR(p.T2_tr, 1e-6, 1e-18);
  EXPECT_THROW(device_from_json({{"preset", "highband"}, {"bogus", 1}}), std::invalid_argument);
  EXPECT_THROW(device_from_json({{"preset", "highband"}, {"Q", -1}}), std::invalid_argument);
}

TEST(BuildCell, Counts) {
  Topology t1 = build_topology({Topology::Kind::kChain, 1});
  EXPECT_EQ(t1.n_logical, 1);
  EXPECT_EQ(t1.n_auxiliary(), 0);
  Topology t3 = build_topology({Topology::Kind::kChain, 3});
  EXPECT_EQ(t3.n_logical, 3);
  EXPECT_EQ(t3.n_auxiliary(), 2);
  std::vector<std::array<int, 2>> adj{{0, 0}, {1, 0}, {1, 1}, {2, 1}};
  EXPECT_EQ(t3.adjacency, adj);
  Topology g = build_topology({Topology::Kind::kGrid, 0, 2, 2});
  EXPECT_EQ(g.n_logical, 4);
  EXPECT_EQ(g.n_auxiliary(), 4);
  EXPECT_TRUE(g.connected());
  EXPECT_EQ(g.logical_path(0, 3).size(), 3u);
  EXPECT_THROW(build_topology({Topology::Kind::kChain, 0}), std::invalid_argument);
  EXPECT_EQ(t3.common_auxiliary(0, 2), -1);
  EXPECT_EQ(t3.common_auxiliary(2, 1), 1);
}

TEST(Schedule, DetuningPiecewise) {
  PulseSchedule s;
  s.set_t_end(ns(30));
  EXPECT_EQ(s.detuning(ResonatorId::logical(0), ns(5)), 0.0);
  s.add({ResonatorId::logical(0), ghz(4), ns(10), ns(10)});
  EXPECT_EQ(s.detuning(ResonatorId::logical(0), ns(15)), ghz(4));
  EXPECT_EQ(s.detuning(ResonatorId::logical(0), ns(25)), 0.0);
  s.add({ResonatorId::auxiliary(0), ghz(2), ns(0), ns(4), ns(1)});
  EXPECT_NEAR(s.detuning(ResonatorId::auxiliary(0), ns(0.5)), ghz(1), 1.0);
  EXPECT_THROW(s.add({ResonatorId::logical(0), ghz(1), ns(19), ns(3)}), std::invalid_argument);
  EXPECT_THROW(s.detuning(ResonatorId::logical(0), ns(31)), std::out_of_range);
  std::ostringstream os;
  s.write_csv(os);
  EXPECT_EQ(os.str(), "resonator,delta_GHz,t_start_ns,duration_ns\nA0,2,0,4\nL0,4,10,10\n");
}

TEST(Hamiltonian, ZeroCouplingsNoPulsesIsZero) {
  DeviceSpec d = device_preset("highband");
  d.Gbar_m1 = d.Gbar_p1 = d.G01 = d.G12 = d.kappa = 0.0;
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 2}));
  PulseSchedule s;
  s.set_t_end(ns(10));
  EXPECT_EQ(m.hamiltonian_at(s, ns(3)).nnz(), 0u);
}

TEST(Hamiltonian, SingleCavitySpinBlock) {
  DeviceSpec d = device_preset("protected");
  d.Gbar_p1 = 0.0;
  DeviceModel m(d, build_cell({Topology::Kind::kChain, 1}));
  PulseSchedule s;
  Matrix H = m.hamiltonian_at(s, 0.0).dense();
  size_t ph = m.space().find(std::vector<int>{1, 0, 0}).value();
  size_t sp = m.space().find(std::vector<int>{0, 1, 0}).value();
  EXPECT_NEAR(std::abs(H(static_cast<Eigen::Index>(ph), static_cast<Eigen::Index>(sp))), d.Gbar_m1, 1e-6);
  H(static_cast<Eigen::Index>(ph), static_cast<Eigen::Index>(sp)) = 0.0;
  H(static_cast<Eigen::Index>(sp), static_cast<Eigen::Index>(ph)) = 0.0;
  EXPECT_EQ(H.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Hamiltonian, HermitianAndConservesExcitations) {
  DeviceModel m(device_preset("highband"), build_cell({Topology::Kind::kChain, 2}));
  PulseSchedule s;
  s.add({ResonatorId::logical(1), ghz(-3), ns(2), ns(8)});
  s.add({ResonatorId::auxiliary(0), ghz(-6.3), ns(5), ns(8)});
  s.set_t_end(ns(20));
  Matrix N = total_excitation_op(m.space()).dense();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, ns(20));
  double herm = 0.0, comm = 0.0;
  for (int k = 0; k < 100; ++k) {
    Matrix H = m.hamiltonian_at(s, u(rng)).dense();
    herm = std::max(herm, (H - H.adjoint()).cwiseAbs().maxCoeff());
    comm = std::max(comm, (H * N - N * H).cwiseAbs().maxCoeff() / d_norm(H));
  }
  EXPECT_LE(herm, 1e-12 * m.device().Omega01);
  EXPECT_LE(comm, 1e-10);
}

TEST(JumpOperators, RatesAndKinds) {
  DeviceModel m(device_preset("highband"), build_cell({Topology::Kind::kChain, 2}));
  const auto& j = m.jump_operators();
  int loss = 0, deph = 0;
  for (const auto& op : j) {
    if (op.kind == JumpOperator::Kind::kLoss) {
      ++loss;
      if (op.label == "loss_L0") EXPECT_NEAR(op.rate / kTwoPi, 31e3, 1e-6);
    } else {
      ++deph;
      EXPECT_NEAR(op.rate, 1.0 / us(10), 1e-6);
    }
  }
  EXPECT_EQ(loss, 3);
  EXPECT_EQ(deph, 2);
  DeviceSpec d = device_preset("highband");
  d.Q = kInf;
  d.T2_tr = kInf;
  EXPECT_TRUE(DeviceModel(d, build_cell({Topology::Kind::kChain, 2})).jump_operators().empty());
}

TEST(Model, ComputationalStates) {
  DeviceModel m(device_preset("highband"), build_cell({Topology::Kind::kChain, 2}));
  Vector v = m.computational_state(0b10);
  size_t i = m.space().find(std::vector<int>{1, 0, 0, 0, 1, 0, 0, 0}).value();
  EXPECT_EQ(v[static_cast<Eigen::Index>(i)], cplx(1.0));
  Matrix W = m.computational_isometry();
  EXPECT_LT((W.adjoint() * W - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-15);
  CellOptions o;
  o.bath = {{-1e6, 0.25}, {0.0, 0.5}, {1e6, 0.25}};
  DeviceModel mb(device_preset("protected"), build_cell({Topology::Kind::kChain, 1}, o));
  Vector z = mb.computational_state(0);
  EXPECT_NEAR(z.norm(), 1.0, 1e-15);
  EXPECT_EQ((z.array().abs() > 0).count(), 3);
}

}  // namespace
}  // namespace hybridqs
