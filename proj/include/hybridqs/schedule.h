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

#ifndef HYBRIDQS_SCHEDULE_H_
#define HYBRIDQS_SCHEDULE_H_

#include <ostream>
#include <string>
#include <vector>

#include "hybridqs/device.h"

namespace hybridqs {

/// Step-like frequency shift of one resonator. With ramp > 0 the shift rises
/// linearly over the first `ramp` seconds and falls over the last `ramp`.
struct PulseSegment {
  ResonatorId resonator;
  double delta = 0.0;
  double t_start = 0.0;
  double duration = 0.0;
  double ramp = 0.0;
  std::string label;

  double t_end() const { return t_start + duration; }
};

/// Zero-duration frame update exp(-i phase n_q), where n_q counts the
/// |1> component of qubit q (photon or stored m=+1 excitation).
struct FramePhase {
  int qubit = 0;
  double time = 0.0;
  double phase = 0.0;
};

class PulseSchedule {
 public:
  PulseSchedule() = default;

  void add(const PulseSegment& s);
  void add_frame_phase(const FramePhase& p);
  /// Appends all segments and frame phases of `other`, shifted by `offset`.
  void merge(const PulseSchedule& other, double offset = 0.0);

  const std::vector<PulseSegment>& segments() const { return segments_; }
  const std::vector<FramePhase>& frame_phases() const { return phases_; }
  double t_end() const { return t_end_; }
  void set_t_end(double t);
  bool empty() const { return segments_.empty() && phases_.empty(); }

  /// Detuning of `r` at time t (rad/s). Throws outside [0, t_end].
  double detuning(ResonatorId r, double t) const;
  /// Segments on `r`, sorted by start time.
  std::vector<PulseSegment> segments_on(ResonatorId r) const;
  /// Sorted, deduplicated segment edges, ramp corners and frame-phase times
  /// inside [t0, t1], including both ends.
  std::vector<double> breakpoints(double t0, double t1) const;
  /// Latest segment end on `r` (0 if none).
  double busy_until(ResonatorId r) const;

  void validate() const;
  void write_csv(std::ostream& out) const;

 private:
  std::vector<PulseSegment> segments_;
  std::vector<FramePhase> phases_;
  double t_end_ = 0.0;
};

double detuning(const PulseSchedule& schedule, ResonatorId resonator, double t);

}  // namespace hybridqs

#endif  // HYBRIDQS_SCHEDULE_H_
