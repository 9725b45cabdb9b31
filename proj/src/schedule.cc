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

#include "hybridqs/schedule.h"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace hybridqs {

namespace {

// Intervals closer than this are treated as touching rather than overlapping.
constexpr double kTimeSlack = 1e-15;

}  // namespace

void PulseSchedule::add(const PulseSegment& s) {
  if (!(s.duration > 0.0)) throw std::invalid_argument("pulse segment duration must be > 0");
  if (s.t_start < -kTimeSlack) throw std::invalid_argument("pulse segment starts before t=0");
  if (s.ramp < 0.0 || 2.0 * s.ramp > s.duration * (1.0 + 1e-12)) {
    throw std::invalid_argument("pulse segment ramp must be in [0, duration/2]");
  }
  for (const auto& o : segments_) {
    if (o.resonator != s.resonator) continue;
    if (s.t_start < o.t_end() - kTimeSlack && o.t_start < s.t_end() - kTimeSlack) {
      throw std::invalid_argument("overlapping segments on resonator " + s.resonator.str());
    }
  }
  segments_.push_back(s);
  t_end_ = std::max(t_end_, s.t_end());
}

void PulseSchedule::add_frame_phase(const FramePhase& p) {
  if (p.time < -kTimeSlack) throw std::invalid_argument("frame phase before t=0");
  phases_.push_back(p);
  t_end_ = std::max(t_end_, p.time);
}

void PulseSchedule::merge(const PulseSchedule& other, double offset) {
  for (auto s : other.segments_) {
    s.t_start += offset;
    add(s);
  }
  for (auto p : other.phases_) {
    p.time += offset;
    add_frame_phase(p);
  }
  t_end_ = std::max(t_end_, other.t_end_ + offset);
}

void PulseSchedule::set_t_end(double t) {
  for (const auto& s : segments_) {
    if (s.t_end() > t + kTimeSlack) throw std::invalid_argument("t_end before last segment end");
  }
  t_end_ = t;
}

double PulseSchedule::detuning(ResonatorId r, double t) const {
  if (t < -kTimeSlack || t > t_end_ * (1.0 + 1e-12) + kTimeSlack) {
    throw std::out_of_range("detuning: t outside schedule horizon");
  }
  for (const auto& s : segments_) {
    if (s.resonator != r) continue;
    if (t < s.t_start || t >= s.t_end()) continue;
    if (s.ramp > 0.0) {
      double up = (t - s.t_start) / s.ramp;
      double down = (s.t_end() - t) / s.ramp;
      return s.delta * std::clamp(std::min(up, down), 0.0, 1.0);
    }
    return s.delta;
  }
  return 0.0;
}

std::vector<PulseSegment> PulseSchedule::segments_on(ResonatorId r) const {
  std::vector<PulseSegment> v;
  for (const auto& s : segments_) {
    if (s.resonator == r) v.push_back(s);
  }
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.t_start < b.t_start; });
  return v;
}

std::vector<double> PulseSchedule::breakpoints(double t0, double t1) const {
  std::vector<double> b{t0, t1};
  auto push = [&](double t) {
    if (t > t0 && t < t1) b.push_back(t);
  };
  for (const auto& s : segments_) {
    push(s.t_start);
    push(s.t_end());
    if (s.ramp > 0.0) {
      push(s.t_start + s.ramp);
      push(s.t_end() - s.ramp);
    }
  }
  for (const auto& p : phases_) push(p.time);
  std::sort(b.begin(), b.end());
  std::vector<double> out;
  for (double t : b) {
    if (out.empty() || t - out.back() > 1e-16) out.push_back(t);
  }
  return out;
}

double PulseSchedule::busy_until(ResonatorId r) const {
  double t = 0.0;
  for (const auto& s : segments_) {
    if (s.resonator == r) t = std::max(t, s.t_end());
  }
  return t;
}

void PulseSchedule::validate() const {
  for (size_t i = 0; i < segments_.size(); ++i) {
    const auto& a = segments_[i];
    if (!(a.duration > 0.0)) throw std::invalid_argument("segment duration must be > 0");
    if (a.t_start < -kTimeSlack || a.t_end() > t_end_ + kTimeSlack) {
      throw std::invalid_argument("segment outside [0, t_end]");
    }
    for (size_t j = i + 1; j < segments_.size(); ++j) {
      const auto& b = segments_[j];
      if (a.resonator == b.resonator && a.t_start < b.t_end() - kTimeSlack && b.t_start < a.t_end() - kTimeSlack) {
        throw std::invalid_argument("overlapping segments on resonator " + a.resonator.str());
      }
    }
  }
}

void PulseSchedule::write_csv(std::ostream& out) const {
  out << "resonator,delta_GHz,t_start_ns,duration_ns\n";
  std::vector<PulseSegment> v = segments_;
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    if (a.t_start != b.t_start) return a.t_start < b.t_start;
    return a.resonator < b.resonator;
  });
  char buf[160];
  for (const auto& s : v) {
    std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%.9g\n", s.resonator.str().c_str(), to_ghz(s.delta),
                  to_ns(s.t_start), to_ns(s.duration));
    out << buf;
  }
}

double detuning(const PulseSchedule& schedule, ResonatorId resonator, double t) {
  return schedule.detuning(resonator, t);
}

}  // namespace hybridqs
