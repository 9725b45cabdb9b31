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

#include "hybridqs/gates.h"

#include <algorithm>
#include <cmath>
#include <functional>

#include "hybridqs/dynamics.h"
#include "hybridqs/model.h"

namespace hybridqs {

namespace {

constexpr double kTimeEps = 1e-15;

double wrap_pi(double a) {
  a = std::fmod(a, kTwoPi);
  if (a <= -kPi) a += kTwoPi;
  if (a > kPi) a -= kTwoPi;
  return a;
}

// Maximizes f on [a, b] by golden-section search.
double golden_max(const std::function<double(double)>& f, double a, double b, int iters) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

DeviceSpec uniform_copy(const DeviceSpec& d) {
  DeviceSpec u = d;
  u.omega_c0_list.clear();
  u.omega_tc0_list.clear();
  u.Q = kInf;
  u.T2_tr = kInf;
  return u;
}

size_t basis_index(const DeviceModel& model, const std::vector<std::pair<std::string, int>>& occ) {
  std::vector<int> tuple(model.space().num_modes(), 0);
  for (const auto& [id, n] : occ) tuple[model.space().mode_index(id)] = n;
  auto idx = model.space().find(tuple);
  if (!idx) throw std::logic_error("basis state outside truncated space");
  return *idx;
}

Vector basis_vector(const DeviceModel& model, const std::vector<std::pair<std::string, int>>& occ) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(model.dim()));
  v[static_cast<Eigen::Index>(basis_index(model, occ))] = 1.0;
  return v;
}

double population(const DeviceModel& model, const Vector& psi, const std::vector<std::pair<std::string, int>>& occ) {
  return std::norm(psi[static_cast<Eigen::Index>(basis_index(model, occ))]);
}

void add_segment(PulseSchedule& s, ResonatorId r, double delta, double t0, double dt, const std::string& label) {
  if (dt <= 0.0) return;
  s.add({r, delta, t0, dt, 0.0, label});
}

GateSchedule finish(PulseSchedule p, double t0, double t1, std::vector<int> qubits) {
  GateSchedule g;
  p.set_t_end(std::max(p.t_end(), t1));
  g.pulses = std::move(p);
  g.t_start = t0;
  g.t_end = t1;
  g.qubits = std::move(qubits);
  return g;
}

int auxiliary_between(const Topology& topo, int a, int b) {
  int j = topo.common_auxiliary(a, b);
  if (j < 0) {
    throw ScheduleError("no auxiliary cavity shared by logical cavities " + std::to_string(a) + " and " +
                        std::to_string(b));
  }
  return j;
}

void check_qubit(const GateContext& ctx, int q) {
  if (q < 0 || q >= ctx.topology.n_logical) throw ScheduleError("qubit " + std::to_string(q) + " out of range");
}

}  // namespace

double semi_resonant_phase(double delta12, double G12) {
  return kPi - kPi * delta12 / std::sqrt(delta12 * delta12 + 4.0 * G12 * G12);
}

double semi_resonant_detuning(double phi, double G12) {
  if (!(phi > 0.0 && phi < kTwoPi)) throw std::invalid_argument("semi-resonant phase must lie in (0, 2 pi)");
  double r = (kPi - phi) / kPi;
  return 2.0 * G12 * r / std::sqrt(1.0 - r * r);
}

double semi_resonant_duration(double delta12, double G12) {
  return kPi / std::sqrt(G12 * G12 + 0.25 * delta12 * delta12);
}

long long phase_key(double phi) { return std::llround(phi * 1e9); }

SemiResonant GateCalibration::semi_resonant(double phi, double G12) const {
  auto it = semi.find(phase_key(phi));
  if (it != semi.end()) return it->second;
  SemiResonant s;
  s.phi = phi;
  s.delta12 = semi_resonant_detuning(phi, G12);
  s.duration = semi_resonant_duration(s.delta12, G12);
  return s;
}

void GateCalibration::validate() const {
  if (!(rotation_rate > 0.0 && t_hop > 0.0 && t_absorb > 0.0 && t_store > 0.0)) {
    throw std::invalid_argument("calibration: durations and rotation rate must be > 0");
  }
  if (!(phase_detuning != 0.0) || step_gap < 0.0) throw std::invalid_argument("calibration: bad phase detuning or gap");
  if (protected_timing && !(protection_period > 0.0)) {
    throw std::invalid_argument("calibration: protected timing needs a period");
  }
  for (const auto& [k, s] : semi) {
    if (!(s.duration > 0.0)) throw std::invalid_argument("calibration: semi-resonant duration must be > 0");
  }
}

double protection_period(const DeviceSpec& device, int mu) {
  double g = device.spin_matrix_element(-1);
  double delta = device.spin_detuning(mu);
  return kTwoPi / std::sqrt(g * g + 0.25 * delta * delta);
}

GateCalibration seed_calibration(const DeviceSpec& device) {
  device.validate();
  GateCalibration c;
  c.device_name = device.name;
  c.rotation_rate = 2.0 * device.spin_matrix_element(-1);
  c.t_hop = kPi / (2.0 * device.kappa);
  c.t_absorb = kPi / (2.0 * device.G01);
  c.t_store = kPi / (2.0 * device.spin_matrix_element(+1));
  if (device.name == "protected") {
    c.protected_timing = true;
    c.protection_period = protection_period(device);
    c.spin_coupling = device.spin_matrix_element(-1);
    c.spin_detuning = device.spin_detuning(0);
    c.phase_detuning = ghz(2.0);
    c.align_rotation_axis = false;
  }
  c.validate();
  return c;
}

GateCalibration calibrate(const DeviceSpec& device, CalibrationReport* report) {
  GateCalibration c = seed_calibration(device);
  DeviceSpec u = uniform_copy(device);
  CalibrationReport rep;

  {
    DeviceModel m(u, build_cell({Topology::Kind::kChain, 1, 1, 1}));
    PiecewisePropagator prop(m);
    Vector photon = basis_vector(m, {{photon_mode_id(0), 1}});
    auto transfer = [&](double delta, double T, const std::string& target) {
      PulseSchedule s;
      s.add({ResonatorId::logical(0), delta, 0.0, T, 0.0, "cal"});
      Matrix out = prop.propagate(photon, s, 0.0, T);
      return population(m, out.col(0), {{target, 1}});
    };
    double d_rot = u.spin_detuning(0);
    double t_pi = kPi / c.rotation_rate;
    t_pi = golden_max([&](double T) { return transfer(d_rot, T, spin_minus_mode_id(0)); }, 0.9 * t_pi, 1.1 * t_pi, 60);
    c.rotation_rate = kPi / t_pi;
    rep.rotation_transfer = transfer(d_rot, t_pi, spin_minus_mode_id(0));

    double d_store = u.omega_p1 - u.logical_frequency(0);
    c.t_store = golden_max([&](double T) { return transfer(d_store, T, spin_plus_mode_id(0)); }, 0.9 * c.t_store,
                           1.1 * c.t_store, 60);
    rep.store_transfer = transfer(d_store, c.t_store, spin_plus_mode_id(0));
  }
  {
    DeviceModel m(u, build_cell({Topology::Kind::kChain, 2, 1, 2}));
    PiecewisePropagator prop(m);
    Vector photon = basis_vector(m, {{photon_mode_id(0), 1}});
    auto hop = [&](double T) {
      PulseSchedule s;
      s.add({ResonatorId::logical(0), u.auxiliary_frequency(0) - u.logical_frequency(0), 0.0, T, 0.0, "cal"});
      Matrix out = prop.propagate(photon, s, 0.0, T);
      return population(m, out.col(0), {{aux_photon_mode_id(0), 1}});
    };
    c.t_hop = golden_max(hop, 0.9 * c.t_hop, 1.1 * c.t_hop, 60);
    rep.hop_transfer = hop(c.t_hop);

    Vector aux = basis_vector(m, {{aux_photon_mode_id(0), 1}});
    auto absorb = [&](double T) {
      PulseSchedule s;
      s.add({ResonatorId::auxiliary(0), u.Omega01 - u.auxiliary_frequency(0), 0.0, T, 0.0, "cal"});
      Matrix out = prop.propagate(aux, s, 0.0, T);
      return population(m, out.col(0), {{transmon_mode_id(0), 1}});
    };
    c.t_absorb = golden_max(absorb, 0.9 * c.t_absorb, 1.1 * c.t_absorb, 60);
    rep.absorb_transfer = absorb(c.t_absorb);
  }
  c.refined = true;
  c.validate();
  if (report) *report = rep;
  return c;
}

double calibrate_cphase(GateCalibration& calib, const DeviceSpec& device, double phi) {
  if (!(phi > 0.0 && phi < kTwoPi)) throw std::invalid_argument("calibrate_cphase: phi must lie in (0, 2 pi)");
  DeviceSpec u = uniform_copy(device);
  DeviceModel m(u, build_cell({Topology::Kind::kChain, 2, 1, 2}));
  PiecewisePropagator prop(m);
  Matrix W = m.computational_isometry();
  const Topology& topo = m.topology();

  auto measured = [&](double delta12) {
    GateCalibration trial = calib;
    trial.protected_timing = false;
    SemiResonant s{phi, delta12, semi_resonant_duration(delta12, u.G12), true};
    trial.semi[phase_key(phi)] = s;
    GateContext ctx{u, topo, trial};
    GateSchedule g = schedule_cphase(ctx, 0, 1, phi, 0.0);
    Matrix M = W.adjoint() * prop.propagate(W, g.pulses, 0.0, g.t_end);
    // Conditional phase on |11> relative to the product of the singles.
    cplx z = M(3, 3) * M(0, 0) / (M(1, 1) * M(2, 2));
    return -std::arg(z);
  };
  auto residual = [&](double d) { return wrap_pi(measured(d) - phi); };

  double d0 = semi_resonant_detuning(phi, u.G12);
  double d1 = d0 + 0.02 * u.G12;
  double r0 = residual(d0), r1 = residual(d1);
  for (int it = 0; it < 30 && std::abs(r1) > 1e-9; ++it) {
    if (r1 == r0) break;
    double d2 = d1 - r1 * (d1 - d0) / (r1 - r0);
    d0 = d1;
    r0 = r1;
    d1 = d2;
    r1 = residual(d1);
  }
  calib.semi[phase_key(phi)] = {phi, d1, semi_resonant_duration(d1, u.G12), true};
  return std::abs(r1);
}

nlohmann::json calibration_to_json(const GateCalibration& c) {
  nlohmann::json j;
  j["device"] = c.device_name;
  j["phase_detuning_GHz"] = to_ghz(c.phase_detuning);
  j["park_detuning_GHz"] = to_ghz(c.park_detuning);
  j["rotation_rate_MHz"] = to_mhz(c.rotation_rate);
  j["t_hop_ns"] = to_ns(c.t_hop);
  j["t_absorb_ns"] = to_ns(c.t_absorb);
  j["t_store_ns"] = to_ns(c.t_store);
  j["step_gap_ns"] = to_ns(c.step_gap);
  j["align_rotation_axis"] = c.align_rotation_axis;
  j["protected_timing"] = c.protected_timing;
  j["protection_period_ns"] = to_ns(c.protection_period);
  j["freeze_detuning_GHz"] = to_ghz(c.freeze_detuning);
  j["idle_whole_periods"] = c.idle_whole_periods;
  j["spin_coupling_MHz"] = to_mhz(c.spin_coupling);
  j["spin_detuning_MHz"] = to_mhz(c.spin_detuning);
  j["refined"] = c.refined;
  nlohmann::json semi = nlohmann::json::array();
  for (const auto& [k, s] : c.semi) {
    semi.push_back({{"phi", s.phi},
                    {"delta12_MHz", to_mhz(s.delta12)},
                    {"duration_ns", to_ns(s.duration)},
                    {"refined", s.refined}});
  }
  j["semi_resonant"] = semi;
  return j;
}

GateCalibration calibration_from_json(const nlohmann::json& j) {
  GateCalibration c;
  c.device_name = j.value("device", std::string("custom"));
  c.phase_detuning = ghz(j.at("phase_detuning_GHz").get<double>());
  c.park_detuning = ghz(j.at("park_detuning_GHz").get<double>());
  c.rotation_rate = mhz(j.at("rotation_rate_MHz").get<double>());
  c.t_hop = ns(j.at("t_hop_ns").get<double>());
  c.t_absorb = ns(j.at("t_absorb_ns").get<double>());
  c.t_store = ns(j.at("t_store_ns").get<double>());
  c.step_gap = ns(j.value("step_gap_ns", 0.0));
  c.align_rotation_axis = j.value("align_rotation_axis", true);
  c.protected_timing = j.value("protected_timing", false);
  c.protection_period = ns(j.value("protection_period_ns", 0.0));
  c.freeze_detuning = ghz(j.value("freeze_detuning_GHz", 2.0));
  c.idle_whole_periods = j.value("idle_whole_periods", true);
  c.spin_coupling = mhz(j.value("spin_coupling_MHz", 0.0));
  c.spin_detuning = mhz(j.value("spin_detuning_MHz", 0.0));
  c.refined = j.value("refined", false);
  if (j.contains("semi_resonant")) {
    for (const auto& e : j.at("semi_resonant")) {
      SemiResonant s{e.at("phi").get<double>(), mhz(e.at("delta12_MHz").get<double>()),
                     ns(e.at("duration_ns").get<double>()), e.value("refined", false)};
      c.semi[phase_key(s.phi)] = s;
    }
  }
  c.validate();
  return c;
}

GateSchedule schedule_phase(const GateContext& ctx, int qubit, double phi, double t0) {
  check_qubit(ctx, qubit);
  PulseSchedule p;
  double a = wrap_pi(phi);
  if (std::abs(a) < 1e-12) return finish(p, t0, t0, {qubit});
  double delta = std::abs(ctx.calib.phase_detuning) * (a > 0 ? 1.0 : -1.0);
  double T = a / delta;
  add_segment(p, ResonatorId::logical(qubit), delta, t0, T, "phase");
  return finish(p, t0, t0 + T, {qubit});
}

GateSchedule schedule_rotation(const GateContext& ctx, int qubit, double theta, Axis axis, double t0) {
  check_qubit(ctx, qubit);
  PulseSchedule p;
  if (std::abs(theta) < 1e-12) return finish(p, t0, t0, {qubit});
  const double delta = ctx.device.spin_detuning(qubit);
  const double T = ctx.calib.rotation_time(theta);
  // A resonant pulse started at ts rotates about the axis at angle delta*ts
  // from x towards y and leaves a phase delta*T on |1>.
  const double target = axis == Axis::kX ? 0.0 : 0.5 * kPi;
  double ts = t0;
  double pre = 0.0;
  if (ctx.calib.align_rotation_axis) {
    double mis = std::fmod(target - delta * t0, kTwoPi);
    if (mis < 0.0) mis += kTwoPi;
    if (mis > kTwoPi - 1e-9) mis = 0.0;
    ts = t0 + mis / std::abs(delta);
    if (delta < 0.0) ts = t0 + (mis > 0.0 ? (kTwoPi - mis) : 0.0) / std::abs(delta);
  } else {
    pre = wrap_pi(delta * t0 - target);
  }
  // Frame updates: rotate the pulse axis onto the target one and undo delta*T.
  if (pre != 0.0) p.add_frame_phase({qubit, ts, pre});
  add_segment(p, ResonatorId::logical(qubit), delta, ts, T, "rot");
  double post = wrap_pi(-pre - delta * T);
  if (std::abs(post) > 1e-12) p.add_frame_phase({qubit, ts + T, post});
  GateSchedule g = finish(p, t0, ts + T, {qubit});
  g.wait = ts - t0;
  return g;
}

GateSchedule schedule_storage(const GateContext& ctx, int qubit, double t0) {
  check_qubit(ctx, qubit);
  PulseSchedule p;
  double T = ctx.calib.t_store;
  add_segment(p, ResonatorId::logical(qubit), ctx.device.omega_p1 - ctx.device.logical_frequency(qubit), t0, T,
              "store");
  return finish(p, t0, t0 + T, {qubit});
}

GateSchedule schedule_retrieve(const GateContext& ctx, int qubit, double t0) {
  GateSchedule g = schedule_storage(ctx, qubit, t0);
  return g;
}

GateSchedule schedule_hop(const GateContext& ctx, int mu, int j, double t0) {
  check_qubit(ctx, mu);
  const Topology& topo = ctx.topology;
  auto auxs = topo.auxiliaries_of(mu);
  if (std::find(auxs.begin(), auxs.end(), j) == auxs.end()) {
    throw ScheduleError("auxiliary " + std::to_string(j) + " is not adjacent to logical " + std::to_string(mu));
  }
  PulseSchedule p;
  double T = ctx.calib.t_hop;
  add_segment(p, ResonatorId::logical(mu), ctx.device.auxiliary_frequency(j) - ctx.device.logical_frequency(mu), t0,
              T, "hop");
  for (int k : auxs) {
    if (k != j) add_segment(p, ResonatorId::auxiliary(k), ctx.calib.park_detuning, t0, T, "park");
  }
  return finish(p, t0, t0 + T, {mu});
}

GateSchedule schedule_cphase(const GateContext& ctx, int qa, int qb, double phi, double t0) {
  check_qubit(ctx, qa);
  check_qubit(ctx, qb);
  if (qa == qb) throw ScheduleError("controlled phase needs two distinct qubits");
  const int j = auxiliary_between(ctx.topology, qa, qb);
  double a = std::fmod(phi, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  PulseSchedule p;
  if (a < 1e-12 || a > kTwoPi - 1e-12) return finish(p, t0, t0, {qa, qb});

  const DeviceSpec& d = ctx.device;
  const GateCalibration& c = ctx.calib;
  SemiResonant semi = c.semi_resonant(a, d.G12);
  const ResonatorId aux = ResonatorId::auxiliary(j);
  const double w_aux = d.auxiliary_frequency(j);
  double t = t0;
  auto hop = [&](int mu) {
    GateSchedule h = schedule_hop(ctx, mu, j, t);
    p.merge(h.pulses);
    t = h.t_end + c.step_gap;
  };
  auto absorb = [&]() {
    add_segment(p, aux, d.Omega01 - w_aux, t, c.t_absorb, "absorb");
    t += c.t_absorb + c.step_gap;
  };
  hop(qb);
  absorb();
  hop(qa);
  // With the resonator at Omega12 + delta12 the |11> branch picks up
  // exp(-i phi), phi = semi_resonant_phase(delta12).
  add_segment(p, aux, d.Omega12 + semi.delta12 - w_aux, t, semi.duration, "semi");
  t += semi.duration + c.step_gap;
  hop(qa);
  absorb();
  hop(qb);
  t -= c.step_gap;
  return finish(p, t0, t, {qa, qb});
}

GateSchedule schedule_long_range_cphase(const GateContext& ctx, int qa, int qb, double phi, double t0) {
  check_qubit(ctx, qa);
  check_qubit(ctx, qb);
  if (qa == qb) throw ScheduleError("controlled phase needs two distinct qubits");
  std::vector<int> path = ctx.topology.logical_path(qa, qb);
  if (path.size() < 2) throw ScheduleError("no path between qubits");
  if (path.size() == 2) return schedule_cphase(ctx, qa, qb, phi, t0);

  const GateCalibration& c = ctx.calib;
  PulseSchedule p;
  std::vector<int> inner(path.begin() + 1, path.end() - 1);
  for (int m : inner) p.merge(schedule_storage(ctx, m, t0).pulses);
  double t = t0 + c.t_store + c.step_gap;
  auto hop = [&](int mu, int j) {
    GateSchedule h = schedule_hop(ctx, mu, j, t);
    p.merge(h.pulses);
    t = h.t_end + c.step_gap;
  };
  const size_t last = path.size() - 1;
  for (size_t i = last; i >= 2; --i) {
    int j = auxiliary_between(ctx.topology, path[i], path[i - 1]);
    hop(path[i], j);
    hop(path[i - 1], j);
  }
  GateSchedule core = schedule_cphase(ctx, path[0], path[1], phi, t);
  p.merge(core.pulses);
  t = core.t_end + c.step_gap;
  for (size_t i = 2; i <= last; ++i) {
    int j = auxiliary_between(ctx.topology, path[i], path[i - 1]);
    hop(path[i - 1], j);
    hop(path[i], j);
  }
  for (int m : inner) p.merge(schedule_retrieve(ctx, m, t).pulses);
  t += c.t_store;
  std::vector<int> qs = path;
  std::sort(qs.begin(), qs.end());
  return finish(p, t0, t, qs);
}

GateSchedule schedule_gate(const GateContext& ctx, const GateOp& op, double t0) {
  op.validate(ctx.topology.n_logical);
  switch (op.kind) {
    case GateOp::Kind::kPhase:
      return schedule_phase(ctx, op.qubit, op.angle, t0);
    case GateOp::Kind::kRotX:
      return schedule_rotation(ctx, op.qubit, op.angle, Axis::kX, t0);
    case GateOp::Kind::kRotY:
      return schedule_rotation(ctx, op.qubit, op.angle, Axis::kY, t0);
    case GateOp::Kind::kCPhase:
      return schedule_long_range_cphase(ctx, op.qubit, op.qubit_b, op.angle, t0);
    case GateOp::Kind::kCZ:
      return schedule_long_range_cphase(ctx, op.qubit, op.qubit_b, kPi, t0);
    case GateOp::Kind::kStore:
      return schedule_storage(ctx, op.qubit, t0);
    case GateOp::Kind::kRetrieve:
      return schedule_retrieve(ctx, op.qubit, t0);
  }
  throw std::logic_error("unhandled gate kind");
}

double freeze_detuning_for(const GateCalibration& calib, double D) {
  const double g = calib.spin_coupling;
  if (!(g > 0.0) || !(D > 0.0)) return calib.freeze_detuning;
  auto nu = [&](double delta) {
    double d = calib.spin_detuning - delta;
    return std::sqrt(g * g + 0.25 * d * d);
  };
  double n = std::ceil(nu(calib.freeze_detuning) * D / kTwoPi - 1e-9);
  double w = kTwoPi * n / D;
  return calib.spin_detuning + 2.0 * std::sqrt(std::max(0.0, w * w - g * g));
}

PulseSchedule apply_protection_timing(const PulseSchedule& fragment, const std::vector<int>& involved, double t0,
                                      const GateCalibration& calib, double* t_end) {
  const double P = calib.protection_period;
  if (!(P > 0.0)) throw ScheduleError("protection timing needs a positive period");
  double start = std::ceil(t0 / P - 1e-9) * P;
  if (start < t0) start = t0;
  double len = fragment.t_end();
  double padded = std::ceil(len / P - 1e-9) * P;
  if (padded <= 0.0) padded = 0.0;
  PulseSchedule out;
  out.merge(fragment, start);
  auto fill = [&](ResonatorId r, double from, double D) {
    if (calib.idle_whole_periods) {
      double idle = std::floor(D / P + 1e-9) * P;
      from += idle;
      D -= idle;
    }
    if (D > kTimeEps) out.add({r, freeze_detuning_for(calib, D), from, D, 0.0, "freeze"});
  };
  for (int q : involved) {
    ResonatorId r = ResonatorId::logical(q);
    double cursor = start;
    for (const auto& s : out.segments_on(r)) {
      if (s.label == "freeze") continue;
      if (s.t_start > cursor + kTimeEps) fill(r, cursor, s.t_start - cursor);
      cursor = std::max(cursor, s.t_end());
    }
    if (start + padded > cursor + kTimeEps) fill(r, cursor, start + padded - cursor);
  }
  out.set_t_end(std::max(out.t_end(), start + padded));
  if (t_end) *t_end = start + padded;
  return out;
}

}  // namespace hybridqs
