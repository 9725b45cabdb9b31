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

#ifndef HYBRIDQS_DEVICE_H_
#define HYBRIDQS_DEVICE_H_

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "hybridqs/hilbert.h"
#include "json.hpp"

namespace hybridqs {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Angular frequency (rad/s) of a frequency given in GHz.
inline double ghz(double f) { return kTwoPi * f * 1e9; }
inline double mhz(double f) { return kTwoPi * f * 1e6; }
inline double khz(double f) { return kTwoPi * f * 1e3; }
inline double to_ghz(double w) { return w / (kTwoPi * 1e9); }
inline double to_mhz(double w) { return w / (kTwoPi * 1e6); }
inline double ns(double t) { return t * 1e-9; }
inline double us(double t) { return t * 1e-6; }
inline double to_ns(double t) { return t * 1e9; }

/// How the collective spin couplings enter the Hamiltonian.
///  kMatrixElement: <1_ph| H |1_spin> = Gbar.
///  kRotationRate:  Gbar is the Bloch rotation rate of the hybrid qubit
///                  (theta = Gbar T), i.e. the matrix element is Gbar / 2.
enum class CouplingConvention { kMatrixElement, kRotationRate };

/// Rate given to each of the two transmon dephasing operators.
enum class DephasingConvention { kInverseT2, kHalfInverseT2 };

struct DeviceSpec {
  std::string name = "custom";
  double omega_p1 = 0.0;
  double omega_m1 = 0.0;
  double omega_c0 = 0.0;
  double omega_tc0 = 0.0;
  /// Optional per-cavity idle frequencies; empty means all equal omega_c0 / omega_tc0.
  std::vector<double> omega_c0_list;
  std::vector<double> omega_tc0_list;
  double Omega01 = 0.0;
  double Omega12 = 0.0;
  double Gbar_p1 = 0.0;
  double Gbar_m1 = 0.0;
  double G01 = 0.0;
  double G12 = 0.0;
  double kappa = 0.0;
  double Q = kInf;
  double T2_tr = kInf;
  double ensemble_size_note = 0.0;
  CouplingConvention spin_coupling_convention = CouplingConvention::kMatrixElement;
  DephasingConvention dephasing_rate_convention = DephasingConvention::kInverseT2;

  double logical_frequency(int mu) const;
  double auxiliary_frequency(int j) const;
  /// Hamiltonian matrix element between photon and spin oscillator m = +1/-1.
  double spin_matrix_element(int m) const;
  double loss_rate(double omega_idle) const;
  double dephasing_rate() const;
  /// Detuning Delta = omega_-1 - omega_c(0) of logical cavity mu.
  double spin_detuning(int mu) const { return omega_m1 - logical_frequency(mu); }

  void validate() const;
};

DeviceSpec device_preset(std::string_view name);
std::vector<std::string> device_preset_names();
DeviceSpec device_from_json(const nlohmann::json& j);
nlohmann::json device_to_json(const DeviceSpec& d);

struct ResonatorId {
  enum class Kind { kLogical, kAuxiliary };
  Kind kind = Kind::kLogical;
  int index = 0;

  static ResonatorId logical(int i) { return {Kind::kLogical, i}; }
  static ResonatorId auxiliary(int j) { return {Kind::kAuxiliary, j}; }
  std::string str() const;
  static ResonatorId parse(std::string_view s);
  friend bool operator==(const ResonatorId&, const ResonatorId&) = default;
  friend auto operator<=>(const ResonatorId&, const ResonatorId&) = default;
};

struct Topology {
  enum class Kind { kChain, kGrid };
  Kind kind = Kind::kChain;
  int rows = 1;
  int cols = 1;
  int n_logical = 0;
  /// Logical endpoints of each auxiliary cavity.
  std::vector<std::array<int, 2>> aux_ends;
  /// (logical, auxiliary) capacitively coupled pairs.
  std::vector<std::array<int, 2>> adjacency;

  int n_auxiliary() const { return static_cast<int>(aux_ends.size()); }
  /// Auxiliary cavity shared by logical cavities a and b, or -1.
  int common_auxiliary(int a, int b) const;
  std::vector<int> auxiliaries_of(int mu) const;
  /// Shortest chain of logical cavities from a to b (inclusive).
  std::vector<int> logical_path(int a, int b) const;
  bool connected() const;
};

struct TopologyRequest {
  Topology::Kind kind = Topology::Kind::kChain;
  int n_qubits = 1;
  int rows = 1;
  int cols = 1;
};

/// Frequency offset and relative weight of one discretized bath component.
struct BathComponent {
  double detuning = 0.0;
  double weight = 1.0;
};

struct CellOptions {
  int photon_cutoff = 2;
  int spin_cutoff = 1;
  bool include_spin_plus = true;
  /// Extra total-excitation headroom above the number of qubits.
  int cutoff_margin = 0;
  /// When nonempty, every m=-1 oscillator is replaced by these components.
  std::vector<BathComponent> bath;
};

struct Cell {
  Topology topology;
  SpaceDescriptor space;
  CellOptions options;
};

Topology build_topology(const TopologyRequest& request);
Cell build_cell(const TopologyRequest& request, const CellOptions& options = {});

/// Returns `device` with per-cavity logical frequencies: cavities of one
/// sublattice of `topology` are shifted by `offset` (rad/s). Degenerate logical
/// cavities otherwise exchange photons at second order through a shared
/// auxiliary at rate ~kappa^2 / (omega_c0 - omega_tc0).
DeviceSpec stagger_logical(const DeviceSpec& device, const Topology& topology, double offset);

std::string logical_cavity_id(int mu);
std::string auxiliary_cavity_id(int j);
std::string photon_mode_id(int mu);
std::string spin_minus_mode_id(int mu);
std::string spin_plus_mode_id(int mu);
std::string bath_mode_id(int mu, int k);
std::string aux_photon_mode_id(int j);
std::string transmon_mode_id(int j);

}  // namespace hybridqs

#endif  // HYBRIDQS_DEVICE_H_
