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

// hybridqs run|calibrate|validate|sweep|presets
//
// Exit codes: 0 success, 2 configuration error, 3 calibration, scheduling or
// convergence failure, 4 acceptance threshold missed (--check).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hybridqs/dynamics.h"
#include "hybridqs/experiments.h"
#include "hybridqs/gates.h"

namespace {

using hybridqs::ConfigError;
using hybridqs::ExperimentConfig;
using nlohmann::json;

constexpr int kConfigError = 2;
constexpr int kRunFailure = 3;
constexpr int kCheckFailure = 4;

// A path to a JSON config or the name of a preset.
ExperimentConfig load_config(const std::string& arg) {
  if (std::filesystem::exists(arg)) {
    std::ifstream in(arg);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError(arg + ": " + e.what());
    }
    return hybridqs::config_from_json(j);
  }
  if (arg.find(".json") != std::string::npos) throw ConfigError("no such config file: " + arg);
  ExperimentConfig c = hybridqs::default_config(arg);
  c.validate();
  return c;
}

int execute(const ExperimentConfig& c, const std::string& out, bool check) {
  const std::filesystem::path dir = out.empty() ? std::filesystem::path(c.output_dir) : std::filesystem::path(out);
  std::cerr << "running " << c.preset << " (config " << hybridqs::hash_hex(hybridqs::config_hash(c)) << ")\n";
  hybridqs::ExperimentResult r = hybridqs::run_experiment(c);
  hybridqs::write_run(c, r, dir);
  for (const auto& ch : r.checks) {
    std::printf("%s [%d] %s\n", ch.passed() ? "PASS" : "FAIL", ch.criterion, ch.describe().c_str());
  }
  std::printf("wrote %s\n", (dir / "run.json").string().c_str());
  return check && !r.all_passed() ? kCheckFailure : 0;
}

// Applies --param/--value to a config; params.<key> addresses preset knobs.
void set_param(ExperimentConfig& c, const std::string& param, const std::string& value) {
  json j = hybridqs::config_to_json(c);
  json v;
  try {
    v = json::parse(value);
  } catch (const json::exception&) {
    v = value;
  }
  if (param.rfind("params.", 0) == 0) {
    j["params"][param.substr(7)] = v;
  } else if (param == "Q" || param == "T2_tr_us") {
    j[param] = json::array({v});
  } else {
    j[param] = v;
  }
  c = hybridqs::config_from_json(j);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulse-level simulator of a hybrid spin-photon quantum simulator"};
  app.require_subcommand(1);

  std::string config_arg, out;
  bool check = false;
  auto* run = app.add_subcommand("run", "Run an experiment config (file or preset name)");
  run->add_option("config", config_arg, "Config JSON or preset name")->required();
  run->add_option("--out", out, "Output directory (default: config output_dir)");
  run->add_flag("--check", check, "Exit 4 if an acceptance threshold is missed");

  std::string device = "highband";
  auto* cal = app.add_subcommand("calibrate", "Calibrate gate durations and write calibration.json");
  cal->add_option("--device", device, "Device preset");
  cal->add_option("--out", out, "Output directory");

  std::vector<std::string> validate_args;
  auto* val = app.add_subcommand("validate", "Validate configs without running them");
  val->add_option("configs", validate_args, "Config JSON files or preset names")->required();

  std::string param, values;
  auto* sweep = app.add_subcommand("sweep", "Run a config once per value of one parameter");
  sweep->add_option("config", config_arg, "Config JSON or preset name")->required();
  sweep->add_option("--param", param, "Q, T2_tr_us, n_trotter, samples, seed or params.<key>")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--out", out, "Output root (one subdirectory per value)");
  sweep->add_flag("--check", check, "Exit 4 if an acceptance threshold is missed");

  auto* presets = app.add_subcommand("presets", "List experiment presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*presets) {
      for (const auto& p : hybridqs::experiment_presets()) std::printf("%s\n", p.c_str());
      return 0;
    }
    if (*val) {
      for (const auto& a : validate_args) {
        ExperimentConfig c = load_config(a);
        std::printf("ok %s (%s, config %s)\n", a.c_str(), c.preset.c_str(),
                    hybridqs::hash_hex(hybridqs::config_hash(c)).c_str());
      }
      return 0;
    }
    if (*run) return execute(load_config(config_arg), out, check);
    if (*cal) {
      ExperimentConfig c = hybridqs::default_config("calibrate");
      c.device = device;
      c.validate();
      return execute(c, out, false);
    }
    if (*sweep) {
      const ExperimentConfig base = load_config(config_arg);
      const std::filesystem::path root = out.empty() ? std::filesystem::path(base.output_dir) : std::filesystem::path(out);
      const std::vector<std::string> vs = split(values);
      if (vs.empty()) throw ConfigError("--values is empty");
      std::vector<ExperimentConfig> configs;
      for (const auto& v : vs) {
        configs.push_back(base);
        set_param(configs.back(), param, v);
      }
      int code = 0;
      for (size_t i = 0; i < vs.size(); ++i) {
        const int rc = execute(configs[i], (root / (param + "=" + vs[i])).string(), check);
        code = std::max(code, rc);
      }
      return code;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const hybridqs::RunFailure& e) {
    std::cerr << "run failure: " << e.what() << '\n';
    return kRunFailure;
  } catch (const hybridqs::ScheduleError& e) {
    std::cerr << "schedule error: " << e.what() << '\n';
    return kRunFailure;
  } catch (const hybridqs::IntegrationError& e) {
    std::cerr << "integration error: " << e.what() << '\n';
    return kRunFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kConfigError;
  }
  return 0;
}
