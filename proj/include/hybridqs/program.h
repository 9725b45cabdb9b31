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

#ifndef HYBRIDQS_PROGRAM_H_
#define HYBRIDQS_PROGRAM_H_

#include <cstdint>
#include <memory>
#include <vector>

#include "hybridqs/dynamics.h"
#include "hybridqs/gate_op.h"
#include "hybridqs/gates.h"
#include "hybridqs/model.h"

namespace hybridqs {

struct ProgramOptions {
  /// Fit per-layer virtual Z frame updates on every qubit against the ideal
  /// layer unitary (closed-system propagation).
  bool virtual_phases = true;
  /// Park idle qubits in their m=+1 oscillator during long layers.
  bool store_idle = false;
  /// Extra idle time beyond the two storage pulses before storing pays off.
  double store_min_extra = 2e-9;
};

struct ScheduledLayer {
  Layer gates;
  double t_start = 0.0;
  double t_end = 0.0;
  uint64_t stored_in = 0;
  uint64_t stored_out = 0;
  /// Process fidelity of the layer after the fit (1 when not fitted).
  double fit_fidelity = 1.0;
  std::vector<int> stored_idle;
};

/// Fits Z frame phases a (before) and b (after) maximizing
/// |Tr(V^dag Phi(b) M Phi(a))|. Qubit q is bit (n-1-q) of the basis index.
struct PhaseFit {
  std::vector<double> pre;
  std::vector<double> post;
  double fidelity = 0.0;
};
PhaseFit fit_frame_phases(const Matrix& M, const Matrix& V, int n_qubits);

/// Turns layers of gates into one pulse schedule on `model`, layer after
/// layer, with calibrated virtual phases. Each layer is a fragment that
/// starts when the previous one ends.
class ProgramScheduler {
 public:
  ProgramScheduler(const DeviceModel& model, GateCalibration calib, ProgramOptions options = {});
  ~ProgramScheduler();
  ProgramScheduler(const ProgramScheduler&) = delete;
  ProgramScheduler& operator=(const ProgramScheduler&) = delete;

  /// Appends one layer (gates on disjoint qubits). Empty layers are skipped.
  void append(const Layer& layer);
  void append_all(const std::vector<Layer>& layers);
  /// Marks the current end time as a measurement point.
  void mark();

  const PulseSchedule& schedule() const { return schedule_; }
  const std::vector<ScheduledLayer>& layers() const { return layers_; }
  const std::vector<double>& marks() const { return marks_; }
  double t_end() const { return schedule_.t_end(); }
  uint64_t stored() const { return stored_; }
  const GateCalibration& calibration() const { return calib_; }

 private:
  const DeviceModel& model_;
  GateCalibration calib_;
  ProgramOptions options_;
  std::unique_ptr<PiecewisePropagator> prop_;
  PulseSchedule schedule_;
  std::vector<ScheduledLayer> layers_;
  std::vector<double> marks_;
  uint64_t stored_ = 0;
};

/// Duration of `op` when scheduled alone at t0 = 0.
double gate_duration(const GateContext& ctx, const GateOp& op);

/// Ideal unitary of one layer on the whole register.
Matrix layer_unitary(int n_qubits, const Layer& layer);

/// Makes sure every conditional phase used by `layers` has a refined
/// semi-resonant entry.
void calibrate_program_phases(GateCalibration& calib, const DeviceSpec& device, const std::vector<Layer>& layers);

}  // namespace hybridqs

#endif  // HYBRIDQS_PROGRAM_H_
