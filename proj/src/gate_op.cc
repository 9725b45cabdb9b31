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

#include "hybridqs/gate_op.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hybridqs {

namespace {
constexpr double kTwoPiOp = 6.283185307179586476925286766559;
}  // namespace

std::vector<int> GateOp::support() const {
  if (two_qubit()) return {qubit, qubit_b};
  return {qubit};
}

void GateOp::validate(int n_qubits) const {
  auto in_range = [&](int q) { return q >= 0 && (n_qubits < 0 || q < n_qubits); };
  if (!in_range(qubit)) throw std::invalid_argument("gate " + str() + ": qubit out of range");
  switch (kind) {
    case Kind::kPhase:
    case Kind::kCPhase:
      if (!(angle > -kTwoPiOp && angle <= kTwoPiOp)) throw std::invalid_argument("gate " + str() + ": phi outside (-2pi, 2pi]");
      break;
    case Kind::kRotX:
    case Kind::kRotY:
      if (!(angle >= 0.0 && angle <= kTwoPiOp + 1e-12)) throw std::invalid_argument("gate " + str() + ": theta outside [0, 2pi]");
      break;
    default:
      break;
  }
  if (two_qubit()) {
    if (!in_range(qubit_b)) throw std::invalid_argument("gate " + str() + ": qubit out of range");
    if (qubit == qubit_b) throw std::invalid_argument("gate " + str() + ": qA == qB");
  }
}

std::string GateOp::str() const {
  std::ostringstream os;
  os << gate_kind_name(kind) << "(" << qubit;
  if (two_qubit()) os << "," << qubit_b;
  if (kind != Kind::kCZ && kind != Kind::kStore && kind != Kind::kRetrieve) os << "," << angle;
  os << ")";
  return os.str();
}

std::string gate_kind_name(GateOp::Kind kind) {
  switch (kind) {
    case GateOp::Kind::kPhase: return "Phase";
    case GateOp::Kind::kRotX: return "RotX";
    case GateOp::Kind::kRotY: return "RotY";
    case GateOp::Kind::kCPhase: return "CPhase";
    case GateOp::Kind::kCZ: return "CZ";
    case GateOp::Kind::kStore: return "Store";
    case GateOp::Kind::kRetrieve: return "Retrieve";
  }
  return "?";
}

GateOp::Kind gate_kind_from_name(const std::string& name) {
  for (auto k : {GateOp::Kind::kPhase, GateOp::Kind::kRotX, GateOp::Kind::kRotY, GateOp::Kind::kCPhase,
                 GateOp::Kind::kCZ, GateOp::Kind::kStore, GateOp::Kind::kRetrieve}) {
    if (gate_kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown gate kind '" + name + "'");
}

nlohmann::json gate_to_json(const GateOp& op) {
  nlohmann::json j;
  j["gate"] = gate_kind_name(op.kind);
  if (op.two_qubit()) {
    j["qubits"] = {op.qubit, op.qubit_b};
  } else {
    j["qubit"] = op.qubit;
  }
  switch (op.kind) {
    case GateOp::Kind::kPhase:
    case GateOp::Kind::kCPhase: j["phi"] = op.angle; break;
    case GateOp::Kind::kRotX:
    case GateOp::Kind::kRotY: j["theta"] = op.angle; break;
    default: break;
  }
  return j;
}

GateOp gate_from_json(const nlohmann::json& j) {
  GateOp op;
  op.kind = gate_kind_from_name(j.at("gate").get<std::string>());
  if (op.two_qubit()) {
    const auto& q = j.at("qubits");
    if (!q.is_array() || q.size() != 2) throw std::invalid_argument("two-qubit gate needs \"qubits\": [a, b]");
    op.qubit = q[0].get<int>();
    op.qubit_b = q[1].get<int>();
  } else {
    op.qubit = j.at("qubit").get<int>();
  }
  if (j.contains("phi")) op.angle = j["phi"].get<double>();
  if (j.contains("theta")) op.angle = j["theta"].get<double>();
  if (op.kind == GateOp::Kind::kCZ) op.angle = 0.0;
  op.validate();
  return op;
}

nlohmann::json gates_to_json(const std::vector<GateOp>& ops) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& op : ops) a.push_back(gate_to_json(op));
  return a;
}

std::vector<GateOp> gates_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("gate list must be a JSON array");
  std::vector<GateOp> out;
  for (const auto& e : j) out.push_back(gate_from_json(e));
  return out;
}

}  // namespace hybridqs
