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

#ifndef HYBRIDQS_MODEL_H_
#define HYBRIDQS_MODEL_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hybridqs/device.h"
#include "hybridqs/hilbert.h"
#include "hybridqs/schedule.h"

namespace hybridqs {

struct JumpOperator {
  enum class Kind { kLoss, kDephasing };
  SparseOperator op;
  double rate = 0.0;
  Kind kind = Kind::kLoss;
  std::string label;
};

/// Device Hamiltonian data on a concrete cell. The Hamiltonian is
///   H_lab(t) = H0 + S + sum_r delta_r(t) n_r + V,
/// with H0 diagonal (idle frequencies, all m=-1 components at omega_-1),
/// S the static offsets of discretized bath components, and V the
/// rotating-wave coupling. Immutable after construction.
class DeviceModel {
 public:
  DeviceModel(DeviceSpec device, Cell cell);

  const DeviceSpec& device() const { return device_; }
  const Cell& cell() const { return cell_; }
  const SpaceDescriptor& space() const { return cell_.space; }
  const Topology& topology() const { return cell_.topology; }
  size_t dim() const { return cell_.space.dim(); }
  int n_qubits() const { return cell_.topology.n_logical; }

  const std::vector<double>& idle_energy() const { return idle_energy_; }
  const std::vector<double>& static_offset() const { return static_offset_; }
  const SparseOperator& coupling() const { return coupling_; }
  const std::vector<ResonatorId>& resonators() const { return resonators_; }
  /// Photon number of resonator r on each basis state.
  const std::vector<double>& resonator_number(ResonatorId r) const;
  size_t resonator_slot(ResonatorId r) const;
  /// Number of |1>-type quanta of qubit q (logical photon + m=+1) per basis state.
  const std::vector<double>& qubit_excitation(int q) const { return qubit_excitation_[static_cast<size_t>(q)]; }
  /// Basis indices grouped by total excitation number.
  const std::vector<std::vector<size_t>>& sectors() const { return sectors_; }
  const std::vector<JumpOperator>& jump_operators() const { return jumps_; }

  /// Interaction-picture Hamiltonian w.r.t. H0 at time t.
  SparseOperator hamiltonian_at(const PulseSchedule& schedule, double t) const;
  /// Same, with explicit detunings per resonator slot.
  SparseOperator hamiltonian_with(const std::vector<double>& deltas, double t) const;
  double detuning(const PulseSchedule& schedule, ResonatorId r, double t) const;

  /// Computational basis state, qubit 0 is the most significant bit;
  /// bit 0 = spin (bright) excitation, bit 1 = photon.
  Vector computational_state(uint64_t bits) const;
  /// Same, with the |1> of every qubit set in `stored` (same bit order) held
  /// in its m=+1 oscillator instead of the photon.
  Vector computational_state(uint64_t bits, uint64_t stored) const;
  /// dim x 2^N isometry onto the computational subspace.
  Matrix computational_isometry() const;
  Matrix computational_isometry(uint64_t stored) const;
  /// Embeds an N-qubit vector (length 2^N) into the device space.
  Vector embed(const Vector& qubit_state) const;

 private:
  DeviceSpec device_;
  Cell cell_;
  std::vector<double> idle_energy_;
  std::vector<double> static_offset_;
  SparseOperator coupling_;
  std::vector<ResonatorId> resonators_;
  std::vector<std::vector<double>> resonator_number_;
  std::vector<std::vector<double>> qubit_excitation_;
  std::vector<std::vector<size_t>> sectors_;
  std::vector<JumpOperator> jumps_;
  // Per qubit: (basis index, amplitude) components of the |0> excitation.
  std::vector<std::vector<std::pair<size_t, double>>> zero_modes_;
  std::vector<size_t> photon_mode_;
  std::vector<int64_t> plus_mode_;
};

std::vector<JumpOperator> jump_operators(const DeviceModel& model);
SparseOperator hamiltonian_at(const DeviceModel& model, const PulseSchedule& schedule, double t);

}  // namespace hybridqs

#endif  // HYBRIDQS_MODEL_H_
