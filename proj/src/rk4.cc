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
#include <chrono>
#include <cmath>

#include "hybridqs/dynamics.h"

namespace hybridqs {

namespace {

// H_I(t) applied without materializing it: coupling entries carry their
// idle-frequency phases; detunings enter either as diagonal terms (idle
// frame) or as accumulated phases on the couplings (co-moving frame).
struct InteractionOperator {
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::Index> cols;
  std::vector<cplx> vals;
  std::vector<double> freqs;
  Eigen::VectorXd static_diag;
  std::vector<Eigen::VectorXd> numbers;
  double norm_bound = 0.0;
  double fastest = 0.0;

  explicit InteractionOperator(const DeviceModel& m) {
    const SparseMatrix& V = m.coupling().matrix();
    Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.dim()));
    for (int r = 0; r < V.outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(V, r); it; ++it) {
        rows.push_back(it.row());
        cols.push_back(it.col());
        vals.push_back(it.value());
        double f = m.idle_energy()[static_cast<size_t>(it.row())] - m.idle_energy()[static_cast<size_t>(it.col())];
        freqs.push_back(f);
        fastest = std::max(fastest, std::abs(f));
        rowsum[it.row()] += std::abs(it.value());
      }
    }
    static_diag = Eigen::Map<const Eigen::VectorXd>(m.static_offset().data(), static_cast<Eigen::Index>(m.dim()));
    for (const auto& r : m.resonators()) {
      const auto& n = m.resonator_number(r);
      numbers.push_back(Eigen::Map<const Eigen::VectorXd>(n.data(), static_cast<Eigen::Index>(n.size())));
    }
    norm_bound = (rowsum.size() ? rowsum.maxCoeff() : 0.0) + (static_diag.size() ? static_diag.cwiseAbs().maxCoeff() : 0.0);
  }

  // y = H x. `theta` holds per-basis accumulated phases (co-moving) or is empty.
  Matrix apply(double t, const std::vector<double>& deltas, const Eigen::VectorXd* theta, const Matrix& x) const {
    Matrix y = Matrix::Zero(x.rows(), x.cols());
    for (size_t k = 0; k < vals.size(); ++k) {
      double ph = freqs[k] * t;
      if (theta) ph += (*theta)[rows[k]] - (*theta)[cols[k]];
      y.row(rows[k]) += (vals[k] * std::polar(1.0, ph)) * x.row(cols[k]);
    }
    Eigen::VectorXd diag = static_diag;
    if (!theta) {
      for (size_t r = 0; r < deltas.size(); ++r) {
        if (deltas[r] != 0.0) diag += deltas[r] * numbers[r];
      }
    }
    y += diag.cast<cplx>().asDiagonal() * x;
    return y;
  }
};

double segment_integral(const PulseSegment& s, double t) {
  if (t <= s.t_start) return 0.0;
  double D = s.duration;
  double u = std::min(t - s.t_start, D);
  if (s.ramp <= 0.0) return s.delta * u;
  double r = s.ramp;
  if (u <= r) return s.delta * u * u / (2.0 * r);
  if (u <= D - r) return s.delta * (r / 2.0 + (u - r));
  double total = s.delta * (D - r);
  double w = D - u;
  return total - s.delta * w * w / (2.0 * r);
}

double max_detuning(const PulseSchedule& schedule) {
  double m = 0.0;
  for (const auto& s : schedule.segments()) m = std::max(m, std::abs(s.delta));
  return m;
}

std::vector<double> deltas_at(const DeviceModel& m, const PulseSchedule& schedule, double t) {
  std::vector<double> d;
  for (const auto& r : m.resonators()) d.push_back(schedule.detuning(r, std::min(t, schedule.t_end())));
  return d;
}

Eigen::VectorXd theta_at(const DeviceModel& m, const PulseSchedule& schedule, double t) {
  Eigen::VectorXd th = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.dim()));
  for (const auto& r : m.resonators()) {
    double a = accumulated_phase(schedule, r, t);
    if (a == 0.0) continue;
    const auto& n = m.resonator_number(r);
    th += a * Eigen::Map<const Eigen::VectorXd>(n.data(), static_cast<Eigen::Index>(n.size()));
  }
  return th;
}

Vector diag_phase(const DeviceModel& m, const std::vector<FramePhase>& ph) {
  Vector f = Vector::Ones(static_cast<Eigen::Index>(m.dim()));
  for (const auto& p : ph) {
    const auto& q = m.qubit_excitation(p.qubit);
    for (size_t i = 0; i < q.size(); ++i) {
      if (q[i] != 0.0) f[static_cast<Eigen::Index>(i)] *= std::polar(1.0, -p.phase * q[i]);
    }
  }
  return f;
}

struct Stepper {
  const DeviceModel& model;
  const PulseSchedule& schedule;
  const IntegratorConfig& config;
  InteractionOperator op;
  double h_max;
  double t0;
  double t1;
  std::vector<double> cuts;
  std::vector<double> rec;

  Stepper(const DeviceModel& m, const PulseSchedule& s, const IntegratorConfig& c)
      : model(m), schedule(s), config(c), op(m) {
    t0 = c.t_begin;
    t1 = c.t_end < 0.0 ? s.t_end() : c.t_end;
    double maxn = 0.0;
    for (const auto& n : op.numbers) maxn = std::max(maxn, n.size() ? n.maxCoeff() : 0.0);
    double bound = std::max(op.norm_bound + max_detuning(s) * maxn, op.fastest);
    h_max = bound > 0.0 ? c.phase_bound / bound : (t1 - t0);
    if (c.step > 0.0) h_max = std::min(h_max, c.step);
    rec = c.record_times;
    std::sort(rec.begin(), rec.end());
    std::vector<double> b = s.breakpoints(t0, t1);
    b.insert(b.end(), rec.begin(), rec.end());
    std::sort(b.begin(), b.end());
    for (double t : b) {
      if (t < t0 || t > t1) continue;
      if (cuts.empty() || t - cuts.back() > 1e-16) cuts.push_back(t);
    }
  }
};

}  // namespace

double accumulated_phase(const PulseSchedule& schedule, ResonatorId r, double t) {
  double a = 0.0;
  for (const auto& s : schedule.segments()) {
    if (s.resonator == r) a += segment_integral(s, t);
  }
  return a;
}

Trajectory rk4_evolve_pure(const DeviceModel& model, const PureState& psi0, const PulseSchedule& schedule,
                           const IntegratorConfig& config, const std::vector<Observable>& observables,
                           bool co_moving) {
  auto start = std::chrono::steady_clock::now();
  Stepper st(model, schedule, config);
  Trajectory tr;
  for (const auto& o : observables) tr.names.push_back(o.name);
  tr.values.resize(observables.size());
  Matrix W = model.computational_isometry();
  std::vector<FramePhase> phases = schedule.frame_phases();
  std::stable_sort(phases.begin(), phases.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  size_t np = 0;

  // x holds the state in the integration frame.
  auto to_frame = [&](const Vector& psi_i, double t) -> Vector {
    if (!co_moving) return psi_i;
    Eigen::VectorXd th = theta_at(model, schedule, t);
    Vector f(th.size());
    for (Eigen::Index i = 0; i < th.size(); ++i) f[i] = std::polar(1.0, th[i]);
    return f.asDiagonal() * psi_i;
  };
  auto from_frame = [&](const Vector& x, double t) -> Vector {
    if (!co_moving) return x;
    Eigen::VectorXd th = theta_at(model, schedule, t);
    Vector f(th.size());
    for (Eigen::Index i = 0; i < th.size(); ++i) f[i] = std::polar(1.0, -th[i]);
    return f.asDiagonal() * x;
  };
  auto rhs = [&](double t, const std::vector<double>& deltas, const Vector& x) -> Vector {
    if (co_moving) {
      Eigen::VectorXd th = theta_at(model, schedule, t);
      return cplx(0.0, -1.0) * st.op.apply(t, deltas, &th, x);
    }
    return cplx(0.0, -1.0) * st.op.apply(t, deltas, nullptr, x);
  };

  Vector x = to_frame(psi0, st.t0);
  size_t ri = 0;
  size_t steps = 0;
  for (size_t k = 0; k < st.cuts.size(); ++k) {
    double a = st.cuts[k];
    std::vector<FramePhase> now;
    while (np < phases.size() && phases[np].time <= a + 1e-18) {
      if (phases[np].time >= st.t0 - 1e-18) now.push_back(phases[np]);
      ++np;
    }
    if (!now.empty()) x = diag_phase(model, now).asDiagonal() * x;
    while (ri < st.rec.size() && std::abs(st.rec[ri] - a) <= 1e-15) {
      Vector psi = from_frame(x, a);
      tr.times.push_back(a);
      for (size_t o = 0; o < observables.size(); ++o) tr.values[o].push_back(observables[o].pure(psi));
      tr.trace.push_back(psi.squaredNorm());
      tr.leakage.push_back(psi.squaredNorm() - (W.adjoint() * psi).squaredNorm());
      ++ri;
    }
    if (k + 1 == st.cuts.size()) break;
    double b = st.cuts[k + 1];
    int n = std::max(1, static_cast<int>(std::ceil((b - a) / st.h_max - 1e-9)));
    double h = (b - a) / n;
    for (int i = 0; i < n; ++i) {
      double t = a + i * h;
      // Detunings are piecewise constant between cuts except on ramps.
      // Endpoints are nudged inward so a cut does not pick up the next segment.
      auto d1 = deltas_at(model, schedule, t + 1e-6 * h);
      auto d2 = deltas_at(model, schedule, t + 0.5 * h);
      auto d3 = deltas_at(model, schedule, t + (1.0 - 1e-6) * h);
      Vector k1 = rhs(t, d1, x);
      Vector k2 = rhs(t + 0.5 * h, d2, x + 0.5 * h * k1);
      Vector k3 = rhs(t + 0.5 * h, d2, x + 0.5 * h * k2);
      Vector k4 = rhs(t + h, d3, x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      ++steps;
    }
  }
  Vector psi = from_frame(x, st.t1);
  tr.final_pure = psi;
  tr.diagnostics.norm_drift = std::abs(psi.norm() - psi0.norm());
  tr.diagnostics.steps = steps;
  tr.diagnostics.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (tr.diagnostics.norm_drift > 1e-9) throw IntegrationError("norm drift exceeds 1e-9");
  return tr;
}

Trajectory rk4_evolve_mixed(const DeviceModel& model, const DensityMatrix& rho0, const PulseSchedule& schedule,
                            const IntegratorConfig& config, const std::vector<Observable>& observables) {
  auto start = std::chrono::steady_clock::now();
  Stepper st(model, schedule, config);
  Trajectory tr;
  for (const auto& o : observables) tr.names.push_back(o.name);
  tr.values.resize(observables.size());
  Matrix W = model.computational_isometry();
  std::vector<FramePhase> phases = schedule.frame_phases();
  std::stable_sort(phases.begin(), phases.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  size_t np = 0;

  struct Jump {
    SparseMatrix L;
    SparseMatrix LdL;
    double rate;
  };
  std::vector<Jump> jumps;
  for (const auto& j : model.jump_operators()) {
    if (j.rate > 0.0) jumps.push_back({j.op.matrix(), SparseMatrix(j.op.matrix().adjoint() * j.op.matrix()), j.rate});
  }
  auto rhs = [&](double t, const std::vector<double>& deltas, const Matrix& r) -> Matrix {
    Matrix hr = st.op.apply(t, deltas, nullptr, r);
    Matrix rh = st.op.apply(t, deltas, nullptr, Matrix(r.adjoint())).adjoint();
    Matrix out = cplx(0.0, -1.0) * (hr - rh);
    for (const auto& j : jumps) {
      Matrix lr = j.L * r;
      out += j.rate * (lr * j.L.adjoint() - 0.5 * (j.LdL * r) - 0.5 * (r * j.LdL));
    }
    return out;
  };

  Matrix x = rho0;
  size_t ri = 0;
  size_t steps = 0;
  double min_eig = 0.0;
  for (size_t k = 0; k < st.cuts.size(); ++k) {
    double a = st.cuts[k];
    std::vector<FramePhase> now;
    while (np < phases.size() && phases[np].time <= a + 1e-18) {
      if (phases[np].time >= st.t0 - 1e-18) now.push_back(phases[np]);
      ++np;
    }
    if (!now.empty()) {
      Vector f = diag_phase(model, now);
      x = f.asDiagonal() * x * f.conjugate().asDiagonal();
    }
    while (ri < st.rec.size() && std::abs(st.rec[ri] - a) <= 1e-15) {
      tr.times.push_back(a);
      for (size_t o = 0; o < observables.size(); ++o) tr.values[o].push_back(observables[o].mixed(x));
      tr.trace.push_back(x.trace().real());
      tr.leakage.push_back(x.trace().real() - (W.adjoint() * x * W).trace().real());
      ++ri;
    }
    if (k + 1 == st.cuts.size()) break;
    double b = st.cuts[k + 1];
    int n = std::max(1, static_cast<int>(std::ceil((b - a) / st.h_max - 1e-9)));
    double h = (b - a) / n;
    for (int i = 0; i < n; ++i) {
      double t = a + i * h;
      auto d1 = deltas_at(model, schedule, t + 1e-6 * h);
      auto d2 = deltas_at(model, schedule, t + 0.5 * h);
      auto d3 = deltas_at(model, schedule, t + (1.0 - 1e-6) * h);
      Matrix k1 = rhs(t, d1, x);
      Matrix k2 = rhs(t + 0.5 * h, d2, x + 0.5 * h * k1);
      Matrix k3 = rhs(t + 0.5 * h, d2, x + 0.5 * h * k2);
      Matrix k4 = rhs(t + h, d3, x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      tr.diagnostics.hermiticity_drift = std::max(tr.diagnostics.hermiticity_drift, (x - x.adjoint()).cwiseAbs().maxCoeff());
      x = 0.5 * (x + x.adjoint()).eval();
      ++steps;
    }
  }
  if (config.monitor_positivity && !config.tomography_input) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(x, Eigen::EigenvaluesOnly);
    min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -config.positivity_tolerance) throw IntegrationError("positivity floor below tolerance");
  }
  tr.diagnostics.min_eigenvalue = min_eig;
  tr.diagnostics.trace_drift = x.trace().real() - rho0.trace().real();
  tr.diagnostics.steps = steps;
  tr.final_mixed = x;
  tr.diagnostics.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return tr;
}

}  // namespace hybridqs
