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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hybridqs/experiments.h"

namespace hybridqs {
namespace {

using nlohmann::json;

// Allowed params per preset with their defaults.
const std::map<std::string, json>& param_defaults() {
  static const std::map<std::string, json> m = {
      {"table1",
       {{"attach_bath", true},
        {"bath_modes", 16},
        {"fwhm_MHz", 1.0},
        {"bath_free_column", true},
        {"bath_dissipator_step_ns", 5.0}}},
      {"tim",
       {{"n_sites", 3},
        {"lambda", 1.0},
        {"b_over_lambda", 0.5},
        {"lambda_t", 10.0},
        {"per_point_runs", true},
        {"dissipator_step_ns", 2.0}}},
      {"spin1", {{"D_over_E", -12.0}, {"periods", 2.0}, {"points", 21}, {"dissipator_step_ns", 2.0}}},
      {"xy_protected",
       {{"periods", 1.0},
        {"points", 13},
        {"bath_modes", 16},
        {"fwhm_MHz", 1.0},
        {"dissipator_step_ns", 5.0}}},
      {"hubbard_hop", {{"lambda", 1.0}, {"lambda_t", 1.0}, {"pulse_level", true}}},
      {"leakage",
       {{"fwhm_MHz", 1.0},
        {"n_modes", 64},
        {"t_max_ns", 5000.0},
        {"dt_ns", 1.0},
        {"late_from_ns", 2000.0},
        {"check_modes", 128}}},
      {"calibrate", json::object()},
      {"convergence", json::object()},
  };
  return m;
}

double read_inf(const json& v, const char* what) {
  if (v.is_null()) return kInf;
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return kInf;
    throw ConfigError(std::string(what) + ": expected number or \"inf\", got '" + s + "'");
  }
  if (!v.is_number()) throw ConfigError(std::string(what) + ": expected a number");
  return v.get<double>();
}

json write_inf(double x, double scale) {
  if (std::isinf(x)) return "inf";
  return x / scale;
}

std::vector<double> read_list(const json& v, double scale, const char* what) {
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& x : v) out.push_back(scale * read_inf(x, what));
  } else {
    out.push_back(scale * read_inf(v, what));
  }
  return out;
}

}  // namespace

std::vector<std::string> experiment_presets() {
  std::vector<std::string> out;
  for (const auto& [k, v] : param_defaults()) out.push_back(k);
  return out;
}

ExperimentConfig default_config(std::string_view preset) {
  if (!param_defaults().count(std::string(preset))) throw ConfigError("unknown preset '" + std::string(preset) + "'");
  ExperimentConfig c;
  c.preset = preset;
  c.output_dir = "out/" + c.preset;
  if (preset == "table1") {
    c.n_trotter = 1;
  } else if (preset == "tim") {
    c.Q = {kInf, 1e7, 1e6};
    c.store_idle = true;
  } else if (preset == "spin1") {
    c.Q = {1e6, 1e5};
    c.T2_tr = {us(10), us(1)};
    c.n_trotter = 1;
  } else if (preset == "xy_protected") {
    c.device = "protected";
    c.T2_tr = {us(1), us(10)};
    c.n_trotter = 1;
  } else if (preset == "hubbard_hop") {
    c.n_trotter = 1000;
  } else if (preset == "leakage") {
    c.device = "protected";
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (!param_defaults().count(preset)) throw ConfigError("unknown preset '" + preset + "'");
  const auto names = device_preset_names();
  if (std::find(names.begin(), names.end(), device) == names.end()) {
    throw ConfigError("unknown device preset '" + device + "'");
  }
  if (Q.empty()) throw ConfigError("Q list is empty");
  if (T2_tr.empty()) throw ConfigError("T2_tr list is empty");
  for (double q : Q) {
    if (!(q > 0.0)) throw ConfigError("Q must be > 0");
  }
  for (double t : T2_tr) {
    if (!(t > 0.0)) throw ConfigError("T2_tr must be > 0");
  }
  if (n_trotter < 1) throw ConfigError("n_trotter must be >= 1");
  if (samples < 1) throw ConfigError("samples must be >= 1");
  if (!params.is_object()) throw ConfigError("params must be an object");
  const json& allowed = param_defaults().at(preset);
  for (const auto& [k, v] : params.items()) {
    if (!allowed.contains(k)) throw ConfigError("preset " + preset + ": unknown param '" + k + "'");
    if (allowed.at(k).is_boolean() ? !v.is_boolean() : !v.is_number()) {
      throw ConfigError("preset " + preset + ": param '" + k + "' has the wrong type");
    }
  }
  try {
    device_spec();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

DeviceSpec ExperimentConfig::device_spec() const {
  json j = device_overrides;
  if (!j.is_object()) throw ConfigError("device_overrides must be an object");
  j["preset"] = device;
  return device_from_json(j);
}

double ExperimentConfig::param(const std::string& key) const {
  auto it = param_defaults().find(preset);
  if (it == param_defaults().end() || !it->second.contains(key)) {
    throw ConfigError("preset " + preset + " has no param '" + key + "'");
  }
  const json& v = params.contains(key) ? params.at(key) : it->second.at(key);
  return v.get<double>();
}

bool ExperimentConfig::flag(const std::string& key) const {
  auto it = param_defaults().find(preset);
  if (it == param_defaults().end() || !it->second.contains(key)) {
    throw ConfigError("preset " + preset + " has no param '" + key + "'");
  }
  const json& v = params.contains(key) ? params.at(key) : it->second.at(key);
  return v.get<bool>();
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (!j.contains("preset") || !j.at("preset").is_string()) throw ConfigError("config needs a string 'preset'");
  ExperimentConfig c = default_config(j.at("preset").get<std::string>());
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "preset") continue;
      if (k == "device") {
        c.device = v.get<std::string>();
      } else if (k == "device_overrides") {
        c.device_overrides = v;
      } else if (k == "Q") {
        c.Q = read_list(v, 1.0, "Q");
      } else if (k == "T2_tr_us") {
        c.T2_tr = read_list(v, 1e-6, "T2_tr_us");
      } else if (k == "n_trotter") {
        c.n_trotter = v.get<int>();
      } else if (k == "store_idle") {
        c.store_idle = v.get<bool>();
      } else if (k == "seed") {
        c.seed = v.get<unsigned long long>();
      } else if (k == "samples") {
        c.samples = v.get<int>();
      } else if (k == "output_dir") {
        c.output_dir = v.get<std::string>();
      } else if (k == "params") {
        c.params = v;
      } else {
        throw ConfigError("unknown config key '" + k + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json q = json::array(), t2 = json::array();
  for (double x : c.Q) q.push_back(write_inf(x, 1.0));
  for (double x : c.T2_tr) t2.push_back(write_inf(x, 1e-6));
  return {{"preset", c.preset},         {"device", c.device},         {"device_overrides", c.device_overrides},
          {"Q", q},                     {"T2_tr_us", t2},             {"n_trotter", c.n_trotter},
          {"store_idle", c.store_idle}, {"seed", c.seed},             {"samples", c.samples},
          {"output_dir", c.output_dir}, {"params", c.params}};
}

uint64_t config_hash(const ExperimentConfig& c) {
  // The output directory does not change results.
  json j = config_to_json(c);
  j.erase("output_dir");
  const std::string s = j.dump();
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string Check::describe() const {
  std::ostringstream os;
  os.precision(6);
  os << name << " = " << value;
  if (std::isfinite(lo) && std::isfinite(hi)) {
    os << " in [" << lo << ", " << hi << "]";
  } else if (std::isfinite(lo)) {
    os << " >= " << lo;
  } else if (std::isfinite(hi)) {
    os << " <= " << hi;
  }
  return os.str();
}

bool ExperimentResult::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed(); });
}

json RunRecord::to_json() const {
  return {{"preset", preset}, {"config_hash", config_hash}, {"version", version},       {"config", config},
          {"summary", summary}, {"checks", checks},         {"files", files}, {"wall_times_s", wall_times}};
}

std::string percent(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * f);
  return buf;
}

}  // namespace hybridqs
