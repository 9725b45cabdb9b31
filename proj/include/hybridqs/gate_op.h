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

#ifndef HYBRIDQS_GATE_OP_H_
#define HYBRIDQS_GATE_OP_H_

#include <string>
#include <vector>

#include "json.hpp"

namespace hybridqs {

/// Logical gate on hybrid qubits. Angles in radians.
struct GateOp {
  enum class Kind { kPhase, kRotX, kRotY, kCPhase, kCZ, kStore, kRetrieve };
  Kind kind = Kind::kPhase;
  int qubit = 0;
  int qubit_b = -1;
  double angle = 0.0;

  static GateOp phase(int q, double phi) { return {Kind::kPhase, q, -1, phi}; }
  static GateOp rot_x(int q, double theta) { return {Kind::kRotX, q, -1, theta}; }
  static GateOp rot_y(int q, double theta) { return {Kind::kRotY, q, -1, theta}; }
  static GateOp cphase(int a, int b, double phi) { return {Kind::kCPhase, a, b, phi}; }
  static GateOp cz(int a, int b) { return {Kind::kCZ, a, b, 0.0}; }
  static GateOp store(int q) { return {Kind::kStore, q, -1, 0.0}; }
  static GateOp retrieve(int q) { return {Kind::kRetrieve, q, -1, 0.0}; }

  bool two_qubit() const { return kind == Kind::kCPhase || kind == Kind::kCZ; }
  std::vector<int> support() const;
  /// Throws std::invalid_argument on out-of-range angles or qA == qB.
  void validate(int n_qubits = -1) const;
  std::string str() const;

  friend bool operator==(const GateOp&, const GateOp&) = default;
};

/// Gates on disjoint qubits, executed together.
using Layer = std::vector<GateOp>;

std::string gate_kind_name(GateOp::Kind kind);
GateOp::Kind gate_kind_from_name(const std::string& name);

nlohmann::json gate_to_json(const GateOp& op);
GateOp gate_from_json(const nlohmann::json& j);
nlohmann::json gates_to_json(const std::vector<GateOp>& ops);
std::vector<GateOp> gates_from_json(const nlohmann::json& j);

}  // namespace hybridqs

#endif  // HYBRIDQS_GATE_OP_H_
