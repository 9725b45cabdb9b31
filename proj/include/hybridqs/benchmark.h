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

// State fidelities of compiled elementary terms on a device.

#ifndef HYBRIDQS_BENCHMARK_H_
#define HYBRIDQS_BENCHMARK_H_

#include <string>
#include <vector>

#include "hybridqs/compiler.h"
#include "hybridqs/device.h"
#include "hybridqs/gates.h"
#include "hybridqs/program.h"

namespace hybridqs {

struct ElementaryTerm {
  std::string name;
  TargetHamiltonian H;
  double tau = 0.0;
};

/// H_x^(1), H_z^(1), H_yy^(2), H_zz^(2), H_yz^(2) with b tau = lambda tau = pi/2.
std::vector<ElementaryTerm> elementary_terms();

struct TermBenchmarkOptions {
  int samples = 20;
  unsigned long long seed = 2026;
  bool ideal = true;
  bool lindblad = true;
  CellOptions cell;
  /// Sublattice stagger of the logical frequencies (rad/s) on multi-qubit cells.
  double stagger = 0.0;
  ProgramOptions program;
  /// Dissipator substep of the Lindblad runs; 0 selects the engine default.
  double dissipator_step = 0.0;
};

struct TermFidelity {
  std::string name;
  double time = 0.0;
  int n_layers = 0;
  /// Mean and standard deviation of sqrt(<psi|rho|psi>) over the samples.
  double ideal_mean = 0.0;
  double ideal_std = 0.0;
  double lindblad_mean = 0.0;
  double lindblad_std = 0.0;
};

/// Haar-random single-qubit states, one per qubit, as a 2^n product vector.
Vector random_product_state(int n_qubits, unsigned long long seed, int sample);

/// Compiles `term` to one Trotter step, schedules it with `calib` and
/// averages the final-state fidelity over random product inputs. The
/// Lindblad run uses `device` as given; the ideal run drops Q and T2.
TermFidelity benchmark_term(const DeviceSpec& device, const GateCalibration& calib, const ElementaryTerm& term,
                            const TermBenchmarkOptions& options = {});

/// Every conditional phase the elementary terms need, refined on `device`.
GateCalibration calibrate_for_terms(const DeviceSpec& device, const std::vector<ElementaryTerm>& terms);

}  // namespace hybridqs

#endif  // HYBRIDQS_BENCHMARK_H_
