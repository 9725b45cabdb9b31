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

#ifndef HYBRIDQS_GATES_H_
#define HYBRIDQS_GATES_H_

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hybridqs/device.h"
#include "hybridqs/gate_op.h"
#include "hybridqs/schedule.h"
#include "json.hpp"

namespace hybridqs {

class ScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Semi-resonant 1<->2 pulse realizing a conditional phase.
struct SemiResonant {
  double phi = 0.0;
  /// Shifted auxiliary frequency minus Omega12.
  double delta12 = 0.0;
  double duration = 0.0;
  bool refined = false;
};

/// phi = pi - pi d / sqrt(d^2 + 4 G12^2).
double semi_resonant_phase(double delta12, double G12);
/// Inverse of semi_resonant_phase for phi in (0, 2 pi).
double semi_resonant_detuning(double phi, double G12);
/// pi / sqrt(G12^2 + delta12^2 / 4).
double semi_resonant_duration(double delta12, double G12);

struct GateCalibration {
  std::string device_name;
  /// Off-resonant shift used for phase gates; the sign follows phi.
  double phase_detuning = ghz(0.5);
  /// Shift of auxiliaries that must stay out of a hop.
  double park_detuning = ghz(-2.0);
  /// Rotation angle per unit time of a resonant spin pulse.
  double rotation_rate = 0.0;
  double t_hop = 0.0;
  double t_absorb = 0.0;
  double t_store = 0.0;
  double step_gap = 0.0;
  /// Start rotations when the accumulated detuning phase selects the axis.
  bool align_rotation_axis = true;
  /// Cavity-protected timing: fragments start and end on multiples of
  /// protection_period and involved cavities are parked at freeze_detuning
  /// between their pulses.
  bool protected_timing = false;
  double protection_period = 0.0;
  /// Lower bound of the freeze shift. With spin_coupling > 0 each freeze
  /// segment gets the smallest shift above it for which the frozen spin
  /// oscillation completes an integer number of periods.
  double freeze_detuning = ghz(2.0);
  /// Spend whole protection periods of a gap at the idle point and freeze
  /// only the remainder; otherwise the whole gap is frozen.
  bool idle_whole_periods = true;
  double spin_coupling = 0.0;
  double spin_detuning = 0.0;
  bool refined = false;
  std::map<long long, SemiResonant> semi;

  /// Calibrated entry for phi if present, the analytic one otherwise.
  SemiResonant semi_resonant(double phi, double G12) const;
  double rotation_time(double theta) const { return theta / rotation_rate; }
  void validate() const;
};

long long phase_key(double phi);

/// Analytic durations: pi/(2 kappa), pi/(2 G01), pi/(2 g+1), rate 2 g-1 with
/// g the spin matrix elements. Protected devices get protected timing.
GateCalibration seed_calibration(const DeviceSpec& device);

struct CalibrationReport {
  double hop_transfer = 0.0;
  double absorb_transfer = 0.0;
  double store_transfer = 0.0;
  double rotation_transfer = 0.0;
  std::map<long long, double> cphase_error;
};

/// Numeric refinement of the pi-pulse durations by maximizing transfer
/// under closed-system propagation on minimal cells.
GateCalibration calibrate(const DeviceSpec& device, CalibrationReport* report = nullptr);
/// Refines delta12 so that the pulse-level gate hits the conditional phase
/// phi (closed system, two-qubit chain). Returns the residual phase error.
double calibrate_cphase(GateCalibration& calib, const DeviceSpec& device, double phi);

nlohmann::json calibration_to_json(const GateCalibration& c);
GateCalibration calibration_from_json(const nlohmann::json& j);

enum class Axis { kX, kY };

/// Pulses of one gate placed at t0; t_end() is the time the gate is done.
struct GateSchedule {
  PulseSchedule pulses;
  double t_start = 0.0;
  double t_end = 0.0;
  /// Wait inserted before a rotation to align its axis.
  double wait = 0.0;
  std::vector<int> qubits;
};

struct GateContext {
  const DeviceSpec& device;
  const Topology& topology;
  const GateCalibration& calib;
};

GateSchedule schedule_phase(const GateContext& ctx, int qubit, double phi, double t0);
GateSchedule schedule_rotation(const GateContext& ctx, int qubit, double theta, Axis axis, double t0);
GateSchedule schedule_storage(const GateContext& ctx, int qubit, double t0);
GateSchedule schedule_retrieve(const GateContext& ctx, int qubit, double t0);
/// Moves the photon of logical cavity mu into auxiliary j (or back); other
/// auxiliaries adjacent to mu are parked for the duration.
GateSchedule schedule_hop(const GateContext& ctx, int mu, int j, double t0);
GateSchedule schedule_cphase(const GateContext& ctx, int qa, int qb, double phi, double t0);
/// Hops the photon of qb along the logical path until it sits next to qa,
/// storing the interposed qubits on the way, applies the controlled phase
/// and undoes the transport.
GateSchedule schedule_long_range_cphase(const GateContext& ctx, int qa, int qb, double phi, double t0);
GateSchedule schedule_gate(const GateContext& ctx, const GateOp& op, double t0);

/// Protected-regime timing on a fragment: shifts it to the next multiple of
/// the protection period, parks `involved` logical cavities at the freeze
/// detuning whenever they are not pulsed, and pads the end to a multiple of
/// the period. `fragment` must start at 0.
PulseSchedule apply_protection_timing(const PulseSchedule& fragment, const std::vector<int>& involved, double t0,
                                      const GateCalibration& calib, double* t_end = nullptr);

/// Oscillation period 2 pi / nu of a qubit with spin matrix element g and
/// detuning Delta, nu = sqrt(g^2 + Delta^2 / 4).
double protection_period(const DeviceSpec& device, int mu = 0);

/// Shift >= calib.freeze_detuning for which a freeze of length D closes an
/// integer number of frozen oscillations.
double freeze_detuning_for(const GateCalibration& calib, double D);

}  // namespace hybridqs

#endif  // HYBRIDQS_GATES_H_
