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

// Acceptance criteria 1-7: runs the shipped presets and prints one
// PASS/FAIL line per criterion followed by its individual checks.
//
//   acceptance_test [--out DIR] [--only 1,4,...]

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hybridqs/experiments.h"

namespace {

using hybridqs::Check;
using hybridqs::ExperimentConfig;
using hybridqs::ExperimentResult;

const char* kTitles[] = {"",
                         "elementary terms, highband",
                         "transverse-field Ising, 3 qubits",
                         "spin-1 tunneling",
                         "cavity protection",
                         "XY evolution, protected regime",
                         "Jordan-Wigner correctness",
                         "structural invariants"};

struct Outcome {
  std::vector<Check> checks;
  std::vector<std::string> notes;
  std::vector<std::string> errors;
  double seconds = 0.0;
};

std::string num(double x, int digits = 2) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  std::filesystem::path out = "acceptance";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--out") && i + 1 < argc) {
      out = argv[++i];
    } else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) {
      for (const char* p = argv[++i]; *p; ++p) {
        if (*p >= '1' && *p <= '7') only.insert(*p - '0');
      }
    } else {
      std::fprintf(stderr, "usage: %s [--out DIR] [--only 1,2,...]\n", argv[0]);
      return 2;
    }
  }

  struct Job {
    std::string name;
    ExperimentConfig config;
    std::set<int> criteria;
  };
  std::vector<Job> jobs;
  auto add = [&](std::string name, ExperimentConfig c, std::set<int> crit) {
    jobs.push_back({std::move(name), std::move(c), std::move(crit)});
  };
  add("convergence", hybridqs::default_config("convergence"), {7});
  add("hubbard_hop", hybridqs::default_config("hubbard_hop"), {6});
  add("leakage", hybridqs::default_config("leakage"), {4});
  add("spin1", hybridqs::default_config("spin1"), {3});
  add("table1", hybridqs::default_config("table1"), {1});
  ExperimentConfig prot = hybridqs::default_config("table1");
  prot.device = "protected";
  add("table1_protected", prot, {4});
  add("xy_protected", hybridqs::default_config("xy_protected"), {5});
  add("tim", hybridqs::default_config("tim"), {2});

  std::map<int, Outcome> outcomes;
  for (auto& job : jobs) {
    bool wanted = only.empty();
    for (int k : job.criteria) wanted = wanted || only.count(k);
    if (!wanted) continue;
    std::fprintf(stderr, "running %s ...\n", job.name.c_str());
    const auto t0 = std::chrono::steady_clock::now();
    try {
      ExperimentResult r = hybridqs::run_experiment(job.config);
      hybridqs::write_run(job.config, r, out / job.name);
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      for (int k : job.criteria) outcomes[k].seconds += s;
      for (const auto& ch : r.checks) outcomes[ch.criterion].checks.push_back(ch);

      // Context printed next to the thresholds.
      if (job.name == "table1_protected") {
        for (const auto& row : r.summary["rows"]) {
          std::string note = row["term"].get<std::string>() + ": F_D^CP with bath " + num(row["F_D"].get<double>());
          if (row.contains("F_D_bath_free")) note += ", without bath " + num(row["F_D_bath_free"].get<double>());
          outcomes[4].notes.push_back(note);
        }
      } else if (job.name == "leakage") {
        outcomes[4].notes.push_back("long-time leakage, state averaged: " +
                                    num(100 * r.summary["late_leakage_state_averaged"].get<double>()) + "%");
      } else if (job.name == "tim") {
        for (const auto& v : r.summary["variants"]) {
          std::string note = v["label"].get<std::string>() + ": step-output avg F " +
                             num(v["step_output_average_F"].get<double>()) + ", final " +
                             num(v["step_output_final_F"].get<double>()) + ", max |dSz| " +
                             num(v["step_output_max_sz_deviation"].get<double>(), 3);
          if (v.contains("per_point_average_F")) {
            note += "; per-point runs avg F " + num(v["per_point_average_F"].get<double>()) + ", max |dSz| " +
                    num(v["per_point_max_sz_deviation"].get<double>(), 3);
          }
          outcomes[2].notes.push_back(note);
        }
      } else if (job.name == "xy_protected") {
        for (const auto& v : r.summary["runs"]) {
          outcomes[5].notes.push_back(v["label"].get<std::string>() + ": max |d<s1z>| " +
                                      num(v["max_sz_deviation"].get<double>(), 4) + ", avg F " +
                                      num(v["average_F"].get<double>()));
        }
      }
    } catch (const std::exception& e) {
      for (int k : job.criteria) outcomes[k].errors.push_back(job.name + ": " + e.what());
    }
  }

  int failed = 0;
  for (int k = 1; k <= 7; ++k) {
    if (!outcomes.count(k)) continue;
    const Outcome& o = outcomes[k];
    int pass = 0;
    for (const auto& ch : o.checks) pass += ch.passed();
    const bool ok = o.errors.empty() && !o.checks.empty() && pass == static_cast<int>(o.checks.size());
    failed += !ok;
    std::printf("%s criterion %d (%s): %d/%zu checks within tolerance, %.0f s\n", ok ? "PASS" : "FAIL", k, kTitles[k],
                pass, o.checks.size(), o.seconds);
    for (const auto& ch : o.checks) std::printf("    %s %s\n", ch.passed() ? "ok  " : "MISS", ch.describe().c_str());
    for (const auto& n : o.notes) std::printf("    note: %s\n", n.c_str());
    for (const auto& e : o.errors) std::printf("    error: %s\n", e.c_str());
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
