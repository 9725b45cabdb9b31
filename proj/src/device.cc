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

#include <algorithm>
#include <charconv>
#include <queue>
#include <set>
#include <stdexcept>

namespace hybridqs {

double DeviceSpec::logical_frequency(int mu) const {
  if (!omega_c0_list.empty()) return omega_c0_list.at(static_cast<size_t>(mu));
  return omega_c0;
}

double DeviceSpec::auxiliary_frequency(int j) const {
  if (!omega_tc0_list.empty()) return omega_tc0_list.at(static_cast<size_t>(j));
  return omega_tc0;
}

double DeviceSpec::spin_matrix_element(int m) const {
  double g = m > 0 ? Gbar_p1 : Gbar_m1;
  return spin_coupling_convention == CouplingConvention::kRotationRate ? 0.5 * g : g;
}

double DeviceSpec::loss_rate(double omega_idle) const {
  if (std::isinf(Q)) return 0.0;
  return omega_idle / Q;
}

double DeviceSpec::dephasing_rate() const {
  if (std::isinf(T2_tr)) return 0.0;
  return dephasing_rate_convention == DephasingConvention::kInverseT2 ? 1.0 / T2_tr : 0.5 / T2_tr;
}

void DeviceSpec::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string("device: ") + what + " must be > 0");
  };
  auto nonneg = [](double v, const char* what) {
    if (!(v >= 0.0) || std::isinf(v)) throw std::invalid_argument(std::string("device: ") + what + " must be >= 0");
  };
  positive(omega_p1, "omega_p1");
  positive(omega_m1, "omega_m1");
  positive(omega_c0, "omega_c0");
  positive(omega_tc0, "omega_tc0");
  for (double w : omega_c0_list) positive(w, "omega_c0_list entry");
  for (double w : omega_tc0_list) positive(w, "omega_tc0_list entry");
  positive(Omega01, "Omega01");
  positive(Omega12, "Omega12");
  nonneg(Gbar_p1, "Gbar_p1");
  nonneg(Gbar_m1, "Gbar_m1");
  nonneg(G01, "G01");
  nonneg(G12, "G12");
  nonneg(kappa, "kappa");
  positive(Q, "Q");
  positive(T2_tr, "T2_tr");
}

DeviceSpec device_preset(std::string_view name) {
  DeviceSpec d;
  if (name == "highband") {
    d.name = "highband";
    d.omega_p1 = ghz(37.0);
    d.omega_m1 = ghz(35.0);
    d.omega_c0 = ghz(31.0);
    d.omega_tc0 = ghz(28.0);
    d.Omega01 = ghz(21.7);
    d.Omega12 = ghz(19.6);
    d.Gbar_p1 = mhz(40.0);
    d.Gbar_m1 = mhz(40.0);
    d.G01 = mhz(30.0);
    d.G12 = mhz(40.0);
    d.kappa = mhz(30.0);
    d.Q = 1e6;
    d.T2_tr = us(10.0);
    d.spin_coupling_convention = CouplingConvention::kRotationRate;
  } else if (name == "protected") {
    d.name = "protected";
    d.omega_c0 = ghz(14.0);
    d.omega_m1 = ghz(14.18);
    d.omega_p1 = ghz(12.0);
    d.omega_tc0 = ghz(10.2);
    d.Omega01 = ghz(9.2);
    d.Omega12 = ghz(8.3);
    d.Gbar_m1 = mhz(30.0);
    d.Gbar_p1 = mhz(33.0);
    d.G01 = mhz(15.0);
    d.G12 = mhz(20.0);
    d.kappa = mhz(30.0);
    d.Q = 1e6;
    d.T2_tr = us(10.0);
    d.spin_coupling_convention = CouplingConvention::kMatrixElement;
  } else {
    throw std::invalid_argument("unknown device preset '" + std::string(name) + "'");
  }
  return d;
}

std::vector<std::string> device_preset_names() { return {"highband", "protected"}; }

namespace {

double read_inf(const nlohmann::json& v) {
  if (v.is_null()) return kInf;
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s == "inf" || s == "infinity" || s == "Infinity") return kInf;
    throw std::invalid_argument("device: expected number or \"inf\", got '" + s + "'");
  }
  return v.get<double>();
}

void read_list(const nlohmann::json& v, double scale, double& scalar, std::vector<double>& list) {
  if (v.is_array()) {
    list.clear();
    for (const auto& x : v) list.push_back(x.get<double>() * scale);
    if (list.empty()) throw std::invalid_argument("device: empty frequency list");
    scalar = list.front();
  } else {
    scalar = v.get<double>() * scale;
    list.clear();
  }
}

}  // namespace

DeviceSpec device_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("device config must be a JSON object");
  DeviceSpec d;
  if (j.contains("preset")) d = device_preset(j.at("preset").get<std::string>());
  for (const auto& [key, v] : j.items()) {
    if (key == "preset") continue;
    if (key == "name") d.name = v.get<std::string>();
    else if (key == "omega_p1_GHz") d.omega_p1 = ghz(v.get<double>());
    else if (key == "omega_m1_GHz") d.omega_m1 = ghz(v.get<double>());
    else if (key == "omega_c0_GHz") read_list(v, ghz(1.0), d.omega_c0, d.omega_c0_list);
    else if (key == "omega_tc0_GHz") read_list(v, ghz(1.0), d.omega_tc0, d.omega_tc0_list);
    else if (key == "Omega01_GHz") d.Omega01 = ghz(v.get<double>());
    else if (key == "Omega12_GHz") d.Omega12 = ghz(v.get<double>());
    else if (key == "Gbar_p1_MHz") d.Gbar_p1 = mhz(v.get<double>());
    else if (key == "Gbar_m1_MHz") d.Gbar_m1 = mhz(v.get<double>());
    else if (key == "G01_MHz") d.G01 = mhz(v.get<double>());
    else if (key == "G12_MHz") d.G12 = mhz(v.get<double>());
    else if (key == "kappa_MHz") d.kappa = mhz(v.get<double>());
    else if (key == "Q") d.Q = read_inf(v);
    else if (key == "T2_tr_us") d.T2_tr = us(read_inf(v));
    else if (key == "ensemble_size_note") d.ensemble_size_note = v.get<double>();
    else if (key == "spin_coupling_convention") {
      std::string s = v.get<std::string>();
      if (s == "matrix_element") d.spin_coupling_convention = CouplingConvention::kMatrixElement;
      else if (s == "rotation_rate") d.spin_coupling_convention = CouplingConvention::kRotationRate;
      else throw std::invalid_argument("device: unknown spin_coupling_convention '" + s + "'");
    } else if (key == "dephasing_rate_convention") {
      std::string s = v.get<std::string>();
      if (s == "inverse_T2") d.dephasing_rate_convention = DephasingConvention::kInverseT2;
      else if (s == "half_inverse_T2") d.dephasing_rate_convention = DephasingConvention::kHalfInverseT2;
      else throw std::invalid_argument("device: unknown dephasing_rate_convention '" + s + "'");
    } else {
      throw std::invalid_argument("device: unknown key '" + key + "'");
    }
  }
  d.validate();
  return d;
}

nlohmann::json device_to_json(const DeviceSpec& d) {
  nlohmann::json j;
  auto list_or_scalar = [](double s, const std::vector<double>& l) {
    if (l.empty()) return nlohmann::json(to_ghz(s));
    nlohmann::json a = nlohmann::json::array();
    for (double w : l) a.push_back(to_ghz(w));
    return a;
  };
  auto inf_or = [](double v, double scale) {
    return std::isinf(v) ? nlohmann::json("inf") : nlohmann::json(v * scale);
  };
  j["name"] = d.name;
  j["omega_p1_GHz"] = to_ghz(d.omega_p1);
  j["omega_m1_GHz"] = to_ghz(d.omega_m1);
  j["omega_c0_GHz"] = list_or_scalar(d.omega_c0, d.omega_c0_list);
  j["omega_tc0_GHz"] = list_or_scalar(d.omega_tc0, d.omega_tc0_list);
  j["Omega01_GHz"] = to_ghz(d.Omega01);
  j["Omega12_GHz"] = to_ghz(d.Omega12);
  j["Gbar_p1_MHz"] = to_mhz(d.Gbar_p1);
  j["Gbar_m1_MHz"] = to_mhz(d.Gbar_m1);
  j["G01_MHz"] = to_mhz(d.G01);
  j["G12_MHz"] = to_mhz(d.G12);
  j["kappa_MHz"] = to_mhz(d.kappa);
  j["Q"] = inf_or(d.Q, 1.0);
  j["T2_tr_us"] = inf_or(d.T2_tr, 1e6);
  j["ensemble_size_note"] = d.ensemble_size_note;
  j["spin_coupling_convention"] =
      d.spin_coupling_convention == CouplingConvention::kMatrixElement ? "matrix_element" : "rotation_rate";
  j["dephasing_rate_convention"] =
      d.dephasing_rate_convention == DephasingConvention::kInverseT2 ? "inverse_T2" : "half_inverse_T2";
  return j;
}

std::string ResonatorId::str() const {
  return (kind == Kind::kLogical ? "L" : "A") + std::to_string(index);
}

ResonatorId ResonatorId::parse(std::string_view s) {
  if (s.size() < 2 || (s[0] != 'L' && s[0] != 'A')) {
    throw std::invalid_argument("bad resonator id '" + std::string(s) + "'");
  }
  int idx = 0;
  auto [p, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), idx);
  if (ec != std::errc() || p != s.data() + s.size() || idx < 0) {
    throw std::invalid_argument("bad resonator id '" + std::string(s) + "'");
  }
  return {s[0] == 'L' ? Kind::kLogical : Kind::kAuxiliary, idx};
}

int Topology::common_auxiliary(int a, int b) const {
  for (int j = 0; j < n_auxiliary(); ++j) {
    const auto& e = aux_ends[static_cast<size_t>(j)];
    if ((e[0] == a && e[1] == b) || (e[0] == b && e[1] == a)) return j;
  }
  return -1;
}

std::vector<int> Topology::auxiliaries_of(int mu) const {
  std::vector<int> r;
  for (const auto& p : adjacency) {
    if (p[0] == mu) r.push_back(p[1]);
  }
  return r;
}

std::vector<int> Topology::logical_path(int a, int b) const {
  std::vector<int> prev(static_cast<size_t>(n_logical), -1);
  std::vector<bool> seen(static_cast<size_t>(n_logical), false);
  std::queue<int> q;
  q.push(a);
  seen[static_cast<size_t>(a)] = true;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    if (u == b) break;
    for (const auto& e : aux_ends) {
      int v = e[0] == u ? e[1] : (e[1] == u ? e[0] : -1);
      if (v >= 0 && !seen[static_cast<size_t>(v)]) {
        seen[static_cast<size_t>(v)] = true;
        prev[static_cast<size_t>(v)] = u;
        q.push(v);
      }
    }
  }
  if (!seen[static_cast<size_t>(b)]) return {};
  std::vector<int> path;
  for (int v = b; v != -1; v = prev[static_cast<size_t>(v)]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

bool Topology::connected() const {
  if (n_logical <= 1) return true;
  for (int b = 1; b < n_logical; ++b) {
    if (logical_path(0, b).empty()) return false;
  }
  return true;
}

Topology build_topology(const TopologyRequest& request) {
  Topology t;
  t.kind = request.kind;
  if (request.kind == Topology::Kind::kChain) {
    if (request.n_qubits < 1) throw std::invalid_argument("build_cell: N_q must be >= 1");
    t.rows = 1;
    t.cols = request.n_qubits;
    t.n_logical = request.n_qubits;
    for (int j = 0; j + 1 < t.n_logical; ++j) t.aux_ends.push_back({j, j + 1});
  } else {
    if (request.rows < 1 || request.cols < 1) throw std::invalid_argument("build_cell: empty grid");
    t.rows = request.rows;
    t.cols = request.cols;
    t.n_logical = request.rows * request.cols;
    for (int r = 0; r < t.rows; ++r) {
      for (int c = 0; c < t.cols; ++c) {
        int mu = r * t.cols + c;
        if (c + 1 < t.cols) t.aux_ends.push_back({mu, mu + 1});
        if (r + 1 < t.rows) t.aux_ends.push_back({mu, mu + t.cols});
      }
    }
  }
  for (int j = 0; j < t.n_auxiliary(); ++j) {
    t.adjacency.push_back({t.aux_ends[static_cast<size_t>(j)][0], j});
    t.adjacency.push_back({t.aux_ends[static_cast<size_t>(j)][1], j});
  }
  std::sort(t.adjacency.begin(), t.adjacency.end());
  return t;
}

DeviceSpec stagger_logical(const DeviceSpec& device, const Topology& topology, double offset) {
  DeviceSpec d = device;
  d.omega_c0_list.clear();
  for (int mu = 0; mu < topology.n_logical; ++mu) {
    int parity = (mu / topology.cols + mu % topology.cols) % 2;
    d.omega_c0_list.push_back(device.logical_frequency(mu) + (parity ? offset : 0.0));
  }
  d.validate();
  return d;
}

std::string logical_cavity_id(int mu) { return "L" + std::to_string(mu); }
std::string auxiliary_cavity_id(int j) { return "A" + std::to_string(j); }
std::string photon_mode_id(int mu) { return "a" + std::to_string(mu); }
std::string spin_minus_mode_id(int mu) { return "bm" + std::to_string(mu); }
std::string spin_plus_mode_id(int mu) { return "bp" + std::to_string(mu); }
std::string bath_mode_id(int mu, int k) { return "bm" + std::to_string(mu) + "_" + std::to_string(k); }
std::string aux_photon_mode_id(int j) { return "at" + std::to_string(j); }
std::string transmon_mode_id(int j) { return "tr" + std::to_string(j); }

Cell build_cell(const TopologyRequest& request, const CellOptions& options) {
  Cell cell;
  cell.topology = build_topology(request);
  cell.options = options;
  if (options.photon_cutoff < 1 || options.spin_cutoff < 1 || options.cutoff_margin < 0) {
    throw std::invalid_argument("build_cell: invalid cutoffs");
  }
  std::vector<ModeSpec> modes;
  std::vector<ExcitationGroup> groups;
  for (int mu = 0; mu < cell.topology.n_logical; ++mu) {
    std::string cav = logical_cavity_id(mu);
    modes.push_back({photon_mode_id(mu), ModeKind::kPhotonLogical, options.photon_cutoff, cav});
    if (options.bath.empty()) {
      modes.push_back({spin_minus_mode_id(mu), ModeKind::kSpinOscMinus, options.spin_cutoff, cav});
    } else {
      ExcitationGroup g{"ensemble" + std::to_string(mu), {}, options.spin_cutoff};
      for (size_t k = 0; k < options.bath.size(); ++k) {
        std::string id = bath_mode_id(mu, static_cast<int>(k));
        modes.push_back({id, ModeKind::kSpinBath, 1, cav});
        g.mode_ids.push_back(id);
      }
      groups.push_back(std::move(g));
    }
    if (options.include_spin_plus) {
      modes.push_back({spin_plus_mode_id(mu), ModeKind::kSpinOscPlus, options.spin_cutoff, cav});
    }
  }
  for (int j = 0; j < cell.topology.n_auxiliary(); ++j) {
    std::string cav = auxiliary_cavity_id(j);
    modes.push_back({aux_photon_mode_id(j), ModeKind::kPhotonAuxiliary, options.photon_cutoff, cav});
    modes.push_back({transmon_mode_id(j), ModeKind::kTransmon, 2, cav});
  }
  cell.space = enumerate_basis(std::move(modes), cell.topology.n_logical + options.cutoff_margin, std::move(groups));
  return cell;
}

}  // namespace hybridqs
