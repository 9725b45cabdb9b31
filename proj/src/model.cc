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

#include "hybridqs/model.h"

#include <stdexcept>

namespace hybridqs {

DeviceModel::DeviceModel(DeviceSpec device, Cell cell) : device_(std::move(device)), cell_(std::move(cell)) {
  device_.validate();
  const SpaceDescriptor& sp = cell_.space;
  const Topology& topo = cell_.topology;
  const size_t d = sp.dim();
  const auto& modes = sp.modes();
  const auto& bath = cell_.options.bath;

  double wsum = 0.0;
  for (const auto& b : bath) wsum += b.weight;

  // Mode frequencies (nominal) and static offsets.
  std::vector<double> freq(modes.size(), 0.0), offset(modes.size(), 0.0);
  for (size_t m = 0; m < modes.size(); ++m) {
    const ModeSpec& ms = modes[m];
    switch (ms.kind) {
      case ModeKind::kPhotonLogical:
        freq[m] = device_.logical_frequency(ResonatorId::parse(ms.cavity).index);
        break;
      case ModeKind::kPhotonAuxiliary:
        freq[m] = device_.auxiliary_frequency(ResonatorId::parse(ms.cavity).index);
        break;
      case ModeKind::kSpinOscMinus:
        freq[m] = device_.omega_m1;
        break;
      case ModeKind::kSpinBath: {
        freq[m] = device_.omega_m1;
        size_t k = std::stoul(ms.id.substr(ms.id.find('_') + 1));
        offset[m] = bath.at(k).detuning;
        break;
      }
      case ModeKind::kSpinOscPlus:
        freq[m] = device_.omega_p1;
        break;
      case ModeKind::kTransmon:
        break;
    }
  }

  idle_energy_.assign(d, 0.0);
  static_offset_.assign(d, 0.0);
  for (size_t i = 0; i < d; ++i) {
    for (size_t m = 0; m < modes.size(); ++m) {
      int n = sp.occupation(i, m);
      if (!n) continue;
      if (modes[m].kind == ModeKind::kTransmon) {
        idle_energy_[i] += device_.Omega01 + (n == 2 ? device_.Omega12 : 0.0);
      } else {
        idle_energy_[i] += n * freq[m];
        static_offset_[i] += n * offset[m];
      }
    }
  }

  // Rotating-wave coupling V.
  SparseOperator V(d);
  auto add_exchange = [&](const SparseOperator& raise_lower, double g) {
    if (g == 0.0) return;
    SparseOperator term = cplx(g) * raise_lower;
    V = V + term + term.adjoint();
  };
  for (int mu = 0; mu < topo.n_logical; ++mu) {
    SparseOperator ad = ladder(sp, photon_mode_id(mu), Ladder::kRaise);
    if (bath.empty()) {
      add_exchange(ad * ladder(sp, spin_minus_mode_id(mu), Ladder::kLower), device_.spin_matrix_element(-1));
    } else {
      for (size_t k = 0; k < bath.size(); ++k) {
        double g = device_.spin_matrix_element(-1) * std::sqrt(bath[k].weight / wsum);
        add_exchange(ad * ladder(sp, bath_mode_id(mu, static_cast<int>(k)), Ladder::kLower), g);
      }
    }
    if (sp.has_mode(spin_plus_mode_id(mu))) {
      add_exchange(ad * ladder(sp, spin_plus_mode_id(mu), Ladder::kLower), device_.spin_matrix_element(+1));
    }
  }
  for (int j = 0; j < topo.n_auxiliary(); ++j) {
    SparseOperator atd = ladder(sp, aux_photon_mode_id(j), Ladder::kRaise);
    add_exchange(atd * transmon_transition(sp, auxiliary_cavity_id(j), 0), device_.G01);
    add_exchange(atd * transmon_transition(sp, auxiliary_cavity_id(j), 1), device_.G12);
  }
  for (const auto& [mu, j] : topo.adjacency) {
    add_exchange(ladder(sp, photon_mode_id(mu), Ladder::kRaise) * ladder(sp, aux_photon_mode_id(j), Ladder::kLower),
                 -device_.kappa);
  }
  coupling_ = V;

  // Resonator photon numbers.
  for (int mu = 0; mu < topo.n_logical; ++mu) resonators_.push_back(ResonatorId::logical(mu));
  for (int j = 0; j < topo.n_auxiliary(); ++j) resonators_.push_back(ResonatorId::auxiliary(j));
  for (const auto& r : resonators_) {
    std::string id = r.kind == ResonatorId::Kind::kLogical ? photon_mode_id(r.index) : aux_photon_mode_id(r.index);
    size_t m = sp.mode_index(id);
    std::vector<double> n(d);
    for (size_t i = 0; i < d; ++i) n[i] = sp.occupation(i, m);
    resonator_number_.push_back(std::move(n));
  }

  for (int q = 0; q < topo.n_logical; ++q) {
    size_t ma = sp.mode_index(photon_mode_id(q));
    photon_mode_.push_back(ma);
    plus_mode_.push_back(sp.has_mode(spin_plus_mode_id(q)) ? static_cast<int64_t>(sp.mode_index(spin_plus_mode_id(q))) : -1);
    std::vector<double> n(d, 0.0);
    bool has_plus = sp.has_mode(spin_plus_mode_id(q));
    size_t mp = has_plus ? sp.mode_index(spin_plus_mode_id(q)) : 0;
    for (size_t i = 0; i < d; ++i) {
      n[i] = sp.occupation(i, ma) + (has_plus ? sp.occupation(i, mp) : 0);
    }
    qubit_excitation_.push_back(std::move(n));
    std::vector<std::pair<size_t, double>> zm;
    if (bath.empty()) {
      zm.push_back({sp.mode_index(spin_minus_mode_id(q)), 1.0});
    } else {
      for (size_t k = 0; k < bath.size(); ++k) {
        zm.push_back({sp.mode_index(bath_mode_id(q, static_cast<int>(k))), std::sqrt(bath[k].weight / wsum)});
      }
    }
    zero_modes_.push_back(std::move(zm));
  }

  int nmax = 0;
  for (size_t i = 0; i < d; ++i) nmax = std::max(nmax, sp.total_excitation(i));
  sectors_.assign(static_cast<size_t>(nmax) + 1, {});
  for (size_t i = 0; i < d; ++i) sectors_[static_cast<size_t>(sp.total_excitation(i))].push_back(i);

  // Jump operators.
  for (int mu = 0; mu < topo.n_logical; ++mu) {
    double rate = device_.loss_rate(device_.logical_frequency(mu));
    if (rate > 0.0) {
      jumps_.push_back({ladder(sp, photon_mode_id(mu), Ladder::kLower), rate, JumpOperator::Kind::kLoss,
                        "loss_" + logical_cavity_id(mu)});
    }
  }
  for (int j = 0; j < topo.n_auxiliary(); ++j) {
    double rate = device_.loss_rate(device_.auxiliary_frequency(j));
    if (rate > 0.0) {
      jumps_.push_back({ladder(sp, aux_photon_mode_id(j), Ladder::kLower), rate, JumpOperator::Kind::kLoss,
                        "loss_" + auxiliary_cavity_id(j)});
    }
  }
  double gamma = device_.dephasing_rate();
  if (gamma > 0.0) {
    for (int j = 0; j < topo.n_auxiliary(); ++j) {
      for (int k = 0; k < 2; ++k) {
        SparseOperator x = transmon_transition(sp, auxiliary_cavity_id(j), k);
        jumps_.push_back({x.adjoint() * x, gamma, JumpOperator::Kind::kDephasing,
                          "dephasing_" + auxiliary_cavity_id(j) + "_" + std::to_string(k)});
      }
    }
  }
}

const std::vector<double>& DeviceModel::resonator_number(ResonatorId r) const {
  return resonator_number_[resonator_slot(r)];
}

size_t DeviceModel::resonator_slot(ResonatorId r) const {
  for (size_t i = 0; i < resonators_.size(); ++i) {
    if (resonators_[i] == r) return i;
  }
  throw std::invalid_argument("unknown resonator " + r.str());
}

double DeviceModel::detuning(const PulseSchedule& schedule, ResonatorId r, double t) const {
  resonator_slot(r);
  return schedule.detuning(r, t);
}

SparseOperator DeviceModel::hamiltonian_with(const std::vector<double>& deltas, double t) const {
  const size_t d = dim();
  if (deltas.size() != resonators_.size()) throw std::invalid_argument("hamiltonian_with: wrong detuning count");
  std::vector<SparseEntry> e;
  e.reserve(coupling_.nnz() + d);
  const SparseMatrix& V = coupling_.matrix();
  for (int r = 0; r < V.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(V, r); it; ++it) {
      double ph = (idle_energy_[static_cast<size_t>(it.row())] - idle_energy_[static_cast<size_t>(it.col())]) * t;
      e.push_back({static_cast<size_t>(it.row()), static_cast<size_t>(it.col()), it.value() * std::polar(1.0, ph)});
    }
  }
  for (size_t i = 0; i < d; ++i) {
    double diag = static_offset_[i];
    for (size_t k = 0; k < deltas.size(); ++k) diag += deltas[k] * resonator_number_[k][i];
    if (diag != 0.0) e.push_back({i, i, diag});
  }
  return SparseOperator(d, e);
}

SparseOperator DeviceModel::hamiltonian_at(const PulseSchedule& schedule, double t) const {
  std::vector<double> deltas(resonators_.size());
  for (size_t k = 0; k < resonators_.size(); ++k) deltas[k] = schedule.detuning(resonators_[k], t);
  return hamiltonian_with(deltas, t);
}

Vector DeviceModel::computational_state(uint64_t bits) const { return computational_state(bits, 0); }

Vector DeviceModel::computational_state(uint64_t bits, uint64_t stored) const {
  const int nq = n_qubits();
  if (nq < 64 && bits >= (uint64_t{1} << nq)) throw std::out_of_range("computational_state: bits out of range");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim()));
  std::vector<int> tuple(space().num_modes(), 0);
  for (int q = 0; q < nq; ++q) {
    if (!((bits >> (nq - 1 - q)) & 1u)) continue;
    size_t m = photon_mode_[static_cast<size_t>(q)];
    if ((stored >> (nq - 1 - q)) & 1u) {
      if (plus_mode_[static_cast<size_t>(q)] < 0) throw std::logic_error("stored encoding needs the m=+1 oscillator");
      m = static_cast<size_t>(plus_mode_[static_cast<size_t>(q)]);
    }
    tuple[m] = 1;
  }
  // Expand the product of |0>-type superpositions.
  auto rec = [&](auto&& self, int q, double amp) -> void {
    if (q == nq) {
      auto idx = space().find(tuple);
      if (!idx) throw std::logic_error("computational state outside truncated space");
      v[static_cast<Eigen::Index>(*idx)] += amp;
      return;
    }
    if ((bits >> (nq - 1 - q)) & 1u) {
      self(self, q + 1, amp);
      return;
    }
    for (const auto& [m, a] : zero_modes_[static_cast<size_t>(q)]) {
      tuple[m] = 1;
      self(self, q + 1, amp * a);
      tuple[m] = 0;
    }
  };
  rec(rec, 0, 1.0);
  return v;
}

Matrix DeviceModel::computational_isometry() const { return computational_isometry(0); }

Matrix DeviceModel::computational_isometry(uint64_t stored) const {
  const size_t n = size_t{1} << n_qubits();
  Matrix W(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(n));
  for (size_t b = 0; b < n; ++b) W.col(static_cast<Eigen::Index>(b)) = computational_state(b, stored);
  return W;
}

Vector DeviceModel::embed(const Vector& qubit_state) const {
  const size_t n = size_t{1} << n_qubits();
  if (static_cast<size_t>(qubit_state.size()) != n) throw std::invalid_argument("embed: wrong qubit dimension");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim()));
  for (size_t b = 0; b < n; ++b) {
    if (qubit_state[static_cast<Eigen::Index>(b)] != cplx(0.0)) v += qubit_state[static_cast<Eigen::Index>(b)] * computational_state(b);
  }
  return v;
}

std::vector<JumpOperator> jump_operators(const DeviceModel& model) { return model.jump_operators(); }

SparseOperator hamiltonian_at(const DeviceModel& model, const PulseSchedule& schedule, double t) {
  return model.hamiltonian_at(schedule, t);
}

}  // namespace hybridqs
