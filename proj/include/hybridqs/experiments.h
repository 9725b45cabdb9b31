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

// Experiment presets, their configuration and persisted run records.

#ifndef HYBRIDQS_EXPERIMENTS_H_
#define HYBRIDQS_EXPERIMENTS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hybridqs/device.h"
#include "json.hpp"

namespace hybridqs {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::string preset;
  std::string device = "highband";
  /// Keys of device_to_json applied on top of the device preset.
  nlohmann::json device_overrides = nlohmann::json::object();
  /// Quality factors; kInf means no photon loss.
  std::vector<double> Q = {1e6};
  /// Transmon dephasing times (s).
  std::vector<double> T2_tr = {10e-6};
  int n_trotter = 10;
  bool store_idle = false;
  unsigned long long seed = 2026;
  int samples = 20;
  std::string output_dir = "out";
  /// Preset-specific knobs; unknown keys are rejected by validate().
  nlohmann::json params = nlohmann::json::object();

  void validate() const;
  DeviceSpec device_spec() const;
  /// params[key] or the preset default.
  double param(const std::string& key) const;
  bool flag(const std::string& key) const;
};

std::vector<std::string> experiment_presets();
/// Shipped defaults of a preset (what configs/<preset>.json contains).
ExperimentConfig default_config(std::string_view preset);
/// Missing keys take the preset defaults. Throws ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
/// FNV-1a 64 of the canonical (sorted-key, compact) JSON of the config.
uint64_t config_hash(const ExperimentConfig& c);
std::string hash_hex(uint64_t h);

/// One acceptance threshold evaluated by a run.
struct Check {
  /// Acceptance criterion number (1-7).
  int criterion = 0;
  std::string name;
  double value = 0.0;
  double lo = -kInf;
  double hi = kInf;

  bool passed() const { return value >= lo && value <= hi; }
  std::string describe() const;
};

struct ExperimentResult {
  std::string preset;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<Check> checks;
  /// File name -> CSV text.
  std::map<std::string, std::string> files;
  /// Stage -> seconds.
  std::map<std::string, double> wall_times;

  bool all_passed() const;
};

struct RunRecord {
  std::string preset;
  std::string config_hash;
  std::string version;
  nlohmann::json config;
  nlohmann::json summary;
  nlohmann::json checks;
  std::vector<std::string> files;
  std::map<std::string, double> wall_times;

  nlohmann::json to_json() const;
};

/// Thrown when a calibration or convergence requirement fails.
class RunFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ExperimentResult run_table1(const ExperimentConfig& c);
ExperimentResult run_tim(const ExperimentConfig& c);
ExperimentResult run_spin1(const ExperimentConfig& c);
ExperimentResult run_xy_protected(const ExperimentConfig& c);
ExperimentResult run_hubbard_hop(const ExperimentConfig& c);
ExperimentResult run_leakage(const ExperimentConfig& c);
ExperimentResult run_calibrate(const ExperimentConfig& c);
/// Structural invariant suite plus a step/cutoff convergence report.
ExperimentResult run_convergence(const ExperimentConfig& c);

/// Dispatches on c.preset.
ExperimentResult run_experiment(const ExperimentConfig& c);

/// Writes the CSVs and run.json into `dir` (created if needed).
RunRecord write_run(const ExperimentConfig& c, const ExperimentResult& r, const std::filesystem::path& dir);

/// Fidelity in percent with two decimals, as written to CSV.
std::string percent(double f);

}  // namespace hybridqs

#endif  // HYBRIDQS_EXPERIMENTS_H_
