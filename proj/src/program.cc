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

#include "hybridqs/program.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "hybridqs/oracle.h"

namespace hybridqs {

namespace {

double wrap_pi(double a) {
  a = std::fmod(a, kTwoPi);
  if (a <= -kPi) a += kTwoPi;
  if (a > kPi) a -= kTwoPi;
  return a;
}

uint64_t qubit_bit(int n, int q) { return uint64_t{1} << (n - 1 - q); }

double normalized_phase(const GateOp& op) {
  double a = op.kind == GateOp::Kind::kCZ ? kPi : op.angle;
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

// Merges gate fragments; overlapping "park" segments on one auxiliary are
// joined into a single interval.
PulseSchedule combine(const std::vector<PulseSchedule>& parts) {
  PulseSchedule out;
  std::map<ResonatorId, std::vector<std::pair<double, double>>> parks;
  double park_delta = 0.0;
  for (const auto& p : parts) {
    for (const auto& s : p.segments()) {
      if (s.label == "park") {
        parks[s.resonator].push_back({s.t_start, s.t_end()});
        park_delta = s.delta;
      } else {
        try {
          out.add(s);
        } catch (const std::invalid_argument& e) {
          throw ScheduleError(std::string("layer has conflicting pulses: ") + e.what());
        }
      }
    }
    for (const auto& f : p.frame_phases()) out.add_frame_phase(f);
    out.set_t_end(std::max(out.t_end(), p.t_end()));
  }
  for (auto& [r, iv] : parks) {
    std::sort(iv.begin(), iv.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& x : iv) {
      if (!merged.empty() && x.first <= merged.back().second + 1e-15) {
        merged.back().second = std::max(merged.back().second, x.second);
      } else {
        merged.push_back(x);
      }
    }
    for (const auto& [a, b] : merged) {
      try {
        out.add({r, park_delta, a, b - a, 0.0, "park"});
      } catch (const std::invalid_argument&) {
        throw ScheduleError("auxiliary " + r.str() + " is parked while another gate uses it");
      }
    }
  }
  return out;
}

}  // namespace

PhaseFit fit_frame_phases(const Matrix& M, const Matrix& V, int n) {
  const Eigen::Index d = M.rows();
  if (M.cols() != d || V.rows() != d || V.cols() != d || d != (Eigen::Index{1} << n)) {
    throw std::invalid_argument("fit_frame_phases: dimension mismatch");
  }
  Matrix C = V.conjugate().cwiseProduct(M);
  auto bit = [n](Eigen::Index x, int q) { return ((x >> (n - 1 - q)) & 1) != 0; };
  auto trace = [&](const std::vector<double>& a, const std::vector<double>& b) {
    cplx t = 0.0;
    for (Eigen::Index y = 0; y < d; ++y) {
      for (Eigen::Index x = 0; x < d; ++x) {
        double ph = 0.0;
        for (int q = 0; q < n; ++q) ph += (bit(y, q) ? b[q] : 0.0) + (bit(x, q) ? a[q] : 0.0);
        t += C(y, x) * std::polar(1.0, -ph);
      }
    }
    return t;
  };
  // T = A + B exp(-i theta) for one coordinate theta.
  auto ascend = [&](std::vector<double>& a, std::vector<double>& b) {
    for (int sweep = 0; sweep < 200; ++sweep) {
      double change = 0.0;
      for (int k = 0; k < 2 * n; ++k) {
        bool post = k >= n;
        int q = k % n;
        cplx A = 0.0, B = 0.0;
        for (Eigen::Index y = 0; y < d; ++y) {
          for (Eigen::Index x = 0; x < d; ++x) {
            double ph = 0.0;
            for (int r = 0; r < n; ++r) {
              if (post && r == q) continue;
              if (!post && r == q) {
                ph += bit(y, r) ? b[r] : 0.0;
                continue;
              }
              ph += (bit(y, r) ? b[r] : 0.0) + (bit(x, r) ? a[r] : 0.0);
            }
            if (post) ph += bit(x, q) ? a[q] : 0.0;
            cplx v = C(y, x) * std::polar(1.0, -ph);
            if (post ? bit(y, q) : bit(x, q)) B += v;
            else A += v;
          }
        }
        if (std::abs(B) < 1e-300) continue;
        double theta = std::abs(A) < 1e-300 ? std::arg(B) : std::arg(B) - std::arg(A);
        double& slot = post ? b[q] : a[q];
        change = std::max(change, std::abs(wrap_pi(theta - slot)));
        slot = wrap_pi(theta);
      }
      if (change < 1e-13) break;
    }
  };
  PhaseFit best;
  best.fidelity = -1.0;
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int start = 0; start < 6; ++start) {
    std::vector<double> a(n, 0.0), b(n, 0.0);
    if (start > 0) {
      for (int q = 0; q < n; ++q) {
        a[q] = u(rng);
        b[q] = u(rng);
      }
    }
    ascend(a, b);
    double f = std::norm(trace(a, b)) / static_cast<double>(d * d);
    if (f > best.fidelity + 1e-14) {
      best.fidelity = f;
      best.pre = a;
      best.post = b;
    }
  }
  return best;
}

Matrix layer_unitary(int n_qubits, const Layer& layer) { return ideal_circuit_unitary(n_qubits, layer); }

double gate_duration(const GateContext& ctx, const GateOp& op) {
  GateSchedule g = schedule_gate(ctx, op, 0.0);
  return g.t_end - g.t_start;
}

void calibrate_program_phases(GateCalibration& calib, const DeviceSpec& device, const std::vector<Layer>& layers) {
  for (const auto& layer : layers) {
    for (const auto& op : layer) {
      if (!op.two_qubit()) continue;
      double a = normalized_phase(op);
      if (a < 1e-12 || a > kTwoPi - 1e-12) continue;
      auto it = calib.semi.find(phase_key(a));
      if (it != calib.semi.end() && it->second.refined) continue;
      calibrate_cphase(calib, device, a);
    }
  }
}

ProgramScheduler::ProgramScheduler(const DeviceModel& model, GateCalibration calib, ProgramOptions options)
    : model_(model),
      calib_(std::move(calib)),
      options_(options),
      prop_(std::make_unique<PiecewisePropagator>(model)) {
  calib_.validate();
}

ProgramScheduler::~ProgramScheduler() = default;

void ProgramScheduler::append_all(const std::vector<Layer>& layers) {
  for (const auto& l : layers) append(l);
}

void ProgramScheduler::mark() { marks_.push_back(schedule_.t_end()); }

void ProgramScheduler::append(const Layer& layer) {
  const int n = model_.n_qubits();
  const DeviceSpec& dev = model_.device();
  GateContext ctx{dev, model_.topology(), calib_};

  std::set<int> busy;
  for (const auto& op : layer) {
    op.validate(n);
    // Long-range gates also occupy the cavities along the path.
    std::vector<int> sup = op.support();
    if (op.two_qubit()) sup = model_.topology().logical_path(op.qubit, op.qubit_b);
    for (int q : sup) {
      if (!busy.insert(q).second) throw ScheduleError("layer gates overlap on qubit " + std::to_string(q));
    }
  }
  const double t_s = schedule_.t_end();
  const double base = calib_.protected_timing ? 0.0 : t_s;

  std::vector<PulseSchedule> parts;
  double end = base;
  uint64_t stored_out = stored_;
  for (const auto& op : layer) {
    GateSchedule g = schedule_gate(ctx, op, base);
    end = std::max(end, g.t_end);
    parts.push_back(std::move(g.pulses));
    if (op.kind == GateOp::Kind::kStore) {
      if (stored_ & qubit_bit(n, op.qubit)) throw ScheduleError("qubit " + std::to_string(op.qubit) + " already stored");
      stored_out |= qubit_bit(n, op.qubit);
    } else if (op.kind == GateOp::Kind::kRetrieve) {
      if (!(stored_ & qubit_bit(n, op.qubit))) throw ScheduleError("qubit " + std::to_string(op.qubit) + " not stored");
      stored_out &= ~qubit_bit(n, op.qubit);
    } else {
      for (int q : op.support()) {
        if (stored_ & qubit_bit(n, q)) throw ScheduleError("gate on stored qubit " + std::to_string(q));
      }
    }
  }
  if (end <= base) return;

  ScheduledLayer rec;
  rec.gates = layer;
  if (options_.store_idle && end - base >= 2.0 * calib_.t_store + options_.store_min_extra) {
    for (int q = 0; q < n; ++q) {
      if (busy.count(q) || (stored_ & qubit_bit(n, q))) continue;
      PulseSchedule s;
      s.merge(schedule_storage(ctx, q, base).pulses);
      s.merge(schedule_retrieve(ctx, q, end - calib_.t_store).pulses);
      parts.push_back(std::move(s));
      rec.stored_idle.push_back(q);
      busy.insert(q);
    }
  }
  PulseSchedule frag = combine(parts);
  frag.set_t_end(std::max(frag.t_end(), end));
  double start = t_s;
  double stop = end;
  if (calib_.protected_timing) {
    std::vector<int> involved(busy.begin(), busy.end());
    frag = apply_protection_timing(frag, involved, t_s, calib_, &stop);
    start = std::ceil(t_s / calib_.protection_period - 1e-9) * calib_.protection_period;
    start = std::max(start, t_s);
  }
  if (stop - start <= 0.0) return;

  rec.t_start = start;
  rec.t_end = stop;
  rec.stored_in = stored_;
  rec.stored_out = stored_out;
  if (options_.virtual_phases) {
    Matrix W_in = model_.computational_isometry(stored_);
    Matrix W_out = model_.computational_isometry(stored_out);
    Matrix M = W_out.adjoint() * prop_->propagate(W_in, frag, start, stop, true);
    Matrix V = layer_unitary(n, layer);
    PhaseFit fit = fit_frame_phases(M, V, n);
    rec.fit_fidelity = fit.fidelity;
    for (int q = 0; q < n; ++q) {
      if (std::abs(fit.pre[q]) > 1e-12) frag.add_frame_phase({q, start, fit.pre[q]});
      if (std::abs(fit.post[q]) > 1e-12) frag.add_frame_phase({q, stop, fit.post[q]});
    }
  }
  schedule_.merge(frag);
  schedule_.set_t_end(std::max(schedule_.t_end(), stop));
  stored_ = stored_out;
  layers_.push_back(std::move(rec));
}

}  // namespace hybridqs
