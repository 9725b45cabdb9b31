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

#include "hybridqs/experiments.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hybridqs/benchmark.h"
#include "hybridqs/broadening.h"
#include "hybridqs/compiler.h"
#include "hybridqs/dynamics.h"
#include "hybridqs/gates.h"
#include "hybridqs/oracle.h"
#include "hybridqs/program.h"

namespace hybridqs {
namespace {

using nlohmann::json;

class Stopwatch {
 public:
  double lap() {
    auto now = std::chrono::steady_clock::now();
    double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

DeviceSpec closed(DeviceSpec d) {
  d.Q = kInf;
  d.T2_tr = kInf;
  return d;
}

DeviceSpec with_noise(DeviceSpec d, double Q, double T2) {
  d.Q = Q;
  d.T2_tr = T2;
  return d;
}

std::string fmt(double x, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string q_label(double Q) {
  if (std::isinf(Q)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", Q);
  return buf;
}

std::string variant_label(double Q, double T2, bool stored) {
  std::string s = "Q=" + q_label(Q);
  if (std::isfinite(T2)) s += " T2=" + fmt(T2 * 1e6, 1) + "us";
  if (stored) s += " stored";
  return s;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

Check check_near(int criterion, std::string name, double value, double target, double tol) {
  return {criterion, std::move(name), value, target - tol, target + tol};
}

Matrix sum_sz(int n) {
  Matrix S = Matrix::Zero(Eigen::Index{1} << n, Eigen::Index{1} << n);
  for (int q = 0; q < n; ++q) S += embed_operator(n, {q}, spin_half('z'));
  return S;
}

Vector basis_state(int n, uint64_t bits) {
  Vector v = Vector::Zero(Eigen::Index{1} << n);
  v[static_cast<Eigen::Index>(bits)] = 1.0;
  return v;
}

Matrix plan_step_unitary(const TrotterPlan& p) {
  const Eigen::Index d = Eigen::Index{1} << p.n_qubits;
  Matrix U = Matrix::Identity(d, d);
  for (const auto& l : p.layers) U = layer_unitary(p.n_qubits, l) * U;
  return std::polar(1.0, p.step_phase) * U;
}

// Output of one program evaluated at its marks (or at the end).
struct PointValues {
  std::vector<double> fidelity;
  std::vector<double> sz;
};

// Runs `schedule` on `model` from the embedded qubit state psi0 and
// evaluates fidelity with `targets[k]` and <Sz> at times[k].
PointValues evaluate(const DeviceModel& model, const PulseSchedule& schedule, const Vector& psi0,
                     const std::vector<double>& times, const std::vector<Vector>& targets, const Matrix& Sz,
                     double dissipator_step) {
  PointValues out;
  const Vector s0 = model.embed(psi0);
  const bool open = std::isfinite(model.device().Q) || std::isfinite(model.device().T2_tr);
  if (!open) {
    PiecewisePropagator prop(model);
    const Matrix W = model.computational_isometry();
    Vector s = s0;
    double tp = 0.0;
    for (size_t k = 0; k < times.size(); ++k) {
      if (times[k] > tp) s = prop.propagate(s, schedule, tp, times[k], tp == 0.0).col(0);
      tp = std::max(tp, times[k]);
      out.fidelity.push_back(std::abs(model.embed(targets[k]).dot(s)));
      Vector q = W.adjoint() * s;
      out.sz.push_back(q.dot(Sz * q).real());
    }
    return out;
  }
  IntegratorConfig cfg;
  cfg.step = dissipator_step;
  cfg.t_end = times.back();
  std::vector<Observable> obs;
  for (size_t k = 0; k < times.size(); ++k) {
    Vector tgt = model.embed(targets[k]);
    Observable o;
    o.name = "F" + std::to_string(k);
    o.mixed = [tgt](const Matrix& r) { return std::sqrt(std::max(0.0, tgt.dot(r * tgt).real())); };
    obs.push_back(o);
  }
  obs.push_back(qubit_observable(model, "Sz", Sz));
  if (times.back() <= 0.0) {
    // Nothing to evolve.
    Matrix rho = s0 * s0.adjoint();
    for (size_t k = 0; k < times.size(); ++k) {
      out.fidelity.push_back(obs[k].mixed(rho));
      out.sz.push_back(obs.back().mixed(rho));
    }
    return out;
  }
  std::vector<double> record;
  for (double t : times) record.push_back(std::max(t, 0.0));
  cfg.record_times = record;
  Trajectory tr = evolve_lindblad(model, s0 * s0.adjoint(), schedule, cfg, obs);
  if (tr.times.size() != times.size()) throw RunFailure("recorded times do not match the requested marks");
  for (size_t k = 0; k < times.size(); ++k) {
    out.fidelity.push_back(tr.values[k][k]);
    out.sz.push_back(tr.values[times.size()][k]);
  }
  return out;
}

// Schedules `steps` repetitions of the plan layers, marking after each step.
struct Program {
  PulseSchedule schedule;
  std::vector<double> marks;
  double t_end = 0.0;
};

Program build_program(const DeviceModel& model, const GateCalibration& calib, const std::vector<Layer>& layers,
                      int steps, bool store_idle) {
  ProgramOptions po;
  po.store_idle = store_idle;
  ProgramScheduler ps(model, calib, po);
  for (int k = 0; k < steps; ++k) {
    ps.append_all(layers);
    ps.mark();
  }
  if (ps.stored() != 0) throw RunFailure("program ends with stored qubits");
  return {ps.schedule(), ps.marks(), ps.t_end()};
}

// Least-squares fit of a + b cos(w t) + c sin(w t); returns the best w.
double fit_angular_frequency(const std::vector<double>& t, const std::vector<double>& y) {
  const double span = t.back() - t.front();
  auto residual = [&](double w) {
    Eigen::MatrixXd A(static_cast<Eigen::Index>(t.size()), 3);
    Eigen::VectorXd b(static_cast<Eigen::Index>(t.size()));
    for (size_t i = 0; i < t.size(); ++i) {
      A(static_cast<Eigen::Index>(i), 0) = 1.0;
      A(static_cast<Eigen::Index>(i), 1) = std::cos(w * t[i]);
      A(static_cast<Eigen::Index>(i), 2) = std::sin(w * t[i]);
      b[static_cast<Eigen::Index>(i)] = y[i];
    }
    Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
    return (A * x - b).squaredNorm();
  };
  const double w_lo = kPi / span;
  const double w_hi = kPi * static_cast<double>(t.size() - 1) / span;
  const int grid = 4000;
  double best = w_lo, best_r = residual(w_lo);
  for (int i = 1; i <= grid; ++i) {
    double w = w_lo + (w_hi - w_lo) * i / grid;
    double r = residual(w);
    if (r < best_r) {
      best_r = r;
      best = w;
    }
  }
  double a = best - (w_hi - w_lo) / grid, b = best + (w_hi - w_lo) / grid;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    double c = b - g * (b - a), d = a + g * (b - a);
    if (residual(c) < residual(d)) {
      b = d;
    } else {
      a = c;
    }
  }
  return 0.5 * (a + b);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Target values for the elementary-term table: time (ns), F_I, F_D,
// F_D with cavity protection (percent).
struct TermTarget {
  const char* name;
  double time_ns, fi, fd, fcp;
};
constexpr TermTarget kTermTargets[] = {
    {"H_x^(1)", 6.4, 99.99, 99.94, 99.76},  {"H_z^(1)", 0.5, 99.99, 99.98, 99.86},
    {"H_yy^(2)", 85.8, 99.87, 99.24, 98.69}, {"H_zz^(2)", 61.0, 99.91, 99.45, 99.00},
    {"H_yz^(2)", 85.8, 99.79, 99.13, 98.57},
};

}  // namespace

ExperimentResult run_table1(const ExperimentConfig& c) {
  ExperimentResult r;
  r.preset = "table1";
  Stopwatch sw;
  const DeviceSpec d = with_noise(c.device_spec(), c.Q.front(), c.T2_tr.front());
  const auto terms = elementary_terms();
  GateCalibration calib = calibrate_for_terms(d, terms);
  r.wall_times["calibrate"] = sw.lap();

  TermBenchmarkOptions bo;
  bo.samples = c.samples;
  bo.seed = c.seed;
  const bool prot = calib.protected_timing;
  const bool bath = prot && c.flag("attach_bath");
  std::vector<TermFidelity> main, free;
  if (prot) {
    ProtectedGateOptions po;
    po.benchmark = bo;
    po.n_modes = static_cast<int>(c.param("bath_modes"));
    po.fwhm = mhz(c.param("fwhm_MHz"));
    po.attach_bath = bath;
    if (bath) po.benchmark.dissipator_step = ns(c.param("bath_dissipator_step_ns"));
    main = protected_gate_fidelities(d, calib, po);
    r.wall_times["terms"] = sw.lap();
    if (bath && c.flag("bath_free_column")) {
      po.attach_bath = false;
      po.benchmark.dissipator_step = 0.0;
      po.benchmark.ideal = false;
      free = protected_gate_fidelities(d, calib, po);
      r.wall_times["terms_bath_free"] = sw.lap();
    }
  } else {
    for (const auto& t : terms) main.push_back(benchmark_term(d, calib, t, bo));
    r.wall_times["terms"] = sw.lap();
  }

  std::ostringstream csv;
  csv << "term,time_ns,layers,F_I,F_I_std,F_D,F_D_std" << (free.empty() ? "" : ",F_D_bath_free") << '\n';
  json rows = json::array();
  for (size_t i = 0; i < main.size(); ++i) {
    const TermFidelity& f = main[i];
    csv << f.name << ',' << fmt(to_ns(f.time), 2) << ',' << f.n_layers << ',' << percent(f.ideal_mean) << ','
        << percent(f.ideal_std) << ',' << percent(f.lindblad_mean) << ',' << percent(f.lindblad_std);
    json row = {{"term", f.name},
                {"time_ns", to_ns(f.time)},
                {"F_I", 100 * f.ideal_mean},
                {"F_D", 100 * f.lindblad_mean}};
    if (!free.empty()) {
      csv << ',' << percent(free[i].lindblad_mean);
      row["F_D_bath_free"] = 100 * free[i].lindblad_mean;
    }
    csv << '\n';
    rows.push_back(row);

    const TermTarget& tt = kTermTargets[i];
    if (prot) {
      r.checks.push_back(check_near(4, f.name + " F_D^CP (%)", 100 * f.lindblad_mean, tt.fcp, 0.5));
    } else {
      r.checks.push_back({1, f.name + " time (ns)", to_ns(f.time), 0.9 * tt.time_ns, 1.1 * tt.time_ns});
      r.checks.push_back(check_near(1, f.name + " F_I (%)", 100 * f.ideal_mean, tt.fi, 0.3));
      r.checks.push_back(check_near(1, f.name + " F_D (%)", 100 * f.lindblad_mean, tt.fd, 0.5));
    }
  }
  r.files["table1.csv"] = csv.str();
  r.summary = {{"device", d.name},
               {"protected_timing", prot},
               {"bath_attached", bath},
               {"Q", q_label(d.Q)},
               {"T2_tr_us", d.T2_tr * 1e6},
               {"rows", rows}};
  return r;
}

ExperimentResult run_tim(const ExperimentConfig& c) {
  ExperimentResult r;
  r.preset = "tim";
  Stopwatch sw;
  const int N = static_cast<int>(c.param("n_sites"));
  const double lambda = c.param("lambda");
  const double b = c.param("b_over_lambda") * lambda;
  const double T = c.param("lambda_t") / lambda;
  const int n = c.n_trotter;
  const double step = ns(c.param("dissipator_step_ns"));
  const TargetHamiltonian H = tim_hamiltonian(N, lambda, b);
  const TrotterPlan plan = trotterize(H, T, n);
  const Vector psi0 = basis_state(N, 0);
  const Matrix Sz = sum_sz(N);

  std::vector<double> lt;
  for (int k = 1; k <= n; ++k) lt.push_back(T * k / n);
  const std::vector<Vector> ref = exact_trotter_steps(N, plan.local_terms(), psi0, T, n);
  const std::vector<Vector> exact = exact_evolution(target_matrix(H), psi0, lt);
  std::vector<double> ref_sz, exact_sz;
  for (int k = 0; k < n; ++k) {
    ref_sz.push_back(ref[k].dot(Sz * ref[k]).real());
    exact_sz.push_back(exact[k].dot(Sz * exact[k]).real());
  }

  const DeviceSpec d0 = c.device_spec();
  const DeviceSpec dc = closed(d0);
  GateCalibration calib = calibrate(dc);
  calibrate_program_phases(calib, dc, plan.layers);
  const Cell cell = build_cell({Topology::Kind::kChain, N});
  const DeviceModel m0(dc, cell);
  r.wall_times["calibrate"] = sw.lap();

  struct Variant {
    std::string label;
    double Q, T2;
    bool stored;
  };
  std::vector<Variant> variants;
  for (double Q : c.Q) {
    if (std::isinf(Q)) {
      variants.push_back({"ideal", kInf, kInf, false});
      continue;
    }
    variants.push_back({variant_label(Q, c.T2_tr.front(), false), Q, c.T2_tr.front(), false});
    if (c.store_idle) variants.push_back({variant_label(Q, c.T2_tr.front(), true), Q, c.T2_tr.front(), true});
  }

  const Program plain = build_program(m0, calib, plan.layers, n, false);
  const Program stored = c.store_idle ? build_program(m0, calib, plan.layers, n, true) : plain;

  // Per-time-point runs: each point is its own n-step program to time t_k.
  const bool per_point = c.flag("per_point_runs");
  std::vector<TrotterPlan> point_plans;
  std::vector<Vector> point_ref;
  std::vector<Program> point_plain, point_stored;
  if (per_point) {
    for (int k = 0; k < n; ++k) {
      point_plans.push_back(trotterize(H, lt[k], n));
      calibrate_program_phases(calib, dc, point_plans.back().layers);
      point_ref.push_back(exact_trotter(N, point_plans.back().local_terms(), psi0, lt[k], n));
    }
    for (int k = 0; k < n; ++k) {
      point_plain.push_back(build_program(m0, calib, point_plans[k].layers, n, false));
      if (c.store_idle) point_stored.push_back(build_program(m0, calib, point_plans[k].layers, n, true));
    }
    r.wall_times["per_point_schedules"] = sw.lap();
  }

  json summary_variants = json::array();
  std::vector<PointValues> step_values, point_values;
  for (const auto& v : variants) {
    const DeviceModel model(with_noise(d0, v.Q, v.T2), cell);
    const Program& prog = v.stored ? stored : plain;
    PointValues sv = evaluate(model, prog.schedule, psi0, prog.marks, ref, Sz, step);
    r.wall_times["steps " + v.label] = sw.lap();
    PointValues pv;
    if (per_point) {
      for (int k = 0; k < n; ++k) {
        const Program& p = v.stored ? point_stored[k] : point_plain[k];
        PointValues one = evaluate(model, p.schedule, psi0, {p.t_end}, {point_ref[k]}, Sz, step);
        pv.fidelity.push_back(one.fidelity[0]);
        pv.sz.push_back(one.sz[0]);
      }
      r.wall_times["points " + v.label] = sw.lap();
    }
    json js = {{"label", v.label},
               {"Q", q_label(v.Q)},
               {"stored", v.stored},
               {"duration_ns", to_ns(prog.t_end)},
               {"step_output_average_F", 100 * mean(sv.fidelity)},
               {"step_output_final_F", 100 * sv.fidelity.back()},
               {"step_output_max_sz_deviation", max_abs_diff(sv.sz, ref_sz)}};
    if (per_point) {
      js["per_point_average_F"] = 100 * mean(pv.fidelity);
      js["per_point_final_F"] = 100 * pv.fidelity.back();
      js["per_point_max_sz_deviation"] = max_abs_diff(pv.sz, ref_sz);
    }
    summary_variants.push_back(js);
    step_values.push_back(sv);
    point_values.push_back(pv);

    const double avg = 100 * mean(sv.fidelity);
    if (v.stored) {
      if (v.Q == 1e6) r.checks.push_back(check_near(2, "avg F " + v.label + " (%)", avg, 92.0, 2.0));
    } else if (std::isinf(v.Q)) {
      r.checks.push_back(check_near(2, "avg F ideal (%)", avg, 96.5, 1.0));
    } else if (v.Q == 1e7) {
      r.checks.push_back(check_near(2, "avg F " + v.label + " (%)", avg, 94.6, 1.5));
    } else if (v.Q == 1e6) {
      r.checks.push_back(check_near(2, "avg F " + v.label + " (%)", avg, 84.6, 2.0));
    }
  }
  r.checks.push_back({2, "<Sz>(0) + 3/2", psi0.dot(Sz * psi0).real() + 0.5 * N, -1e-12, 1e-12});

  auto series_csv = [&](const std::vector<PointValues>& vals) {
    std::ostringstream os;
    os << "step,lambda_t,exact,exact_trotter";
    for (const auto& v : variants) os << ",Sz " << v.label;
    for (const auto& v : variants) os << ",F " << v.label;
    os << '\n';
    os << "0,0," << fmt(-0.5 * N) << ',' << fmt(-0.5 * N);
    for (size_t i = 0; i < variants.size(); ++i) os << ',' << fmt(-0.5 * N);
    for (size_t i = 0; i < variants.size(); ++i) os << ",100.00";
    os << '\n';
    for (int k = 0; k < n; ++k) {
      os << k + 1 << ',' << fmt(lambda * lt[k], 4) << ',' << fmt(exact_sz[k]) << ',' << fmt(ref_sz[k]);
      for (const auto& v : vals) os << ',' << fmt(v.sz[k]);
      for (const auto& v : vals) os << ',' << percent(v.fidelity[k]);
      os << '\n';
    }
    return os.str();
  };
  r.files["tim_steps.csv"] = series_csv(step_values);
  if (per_point) r.files["tim_points.csv"] = series_csv(point_values);
  r.summary = {{"n_sites", N},
               {"lambda_t", lambda * T},
               {"b_over_lambda", b / lambda},
               {"n_trotter", n},
               {"step_duration_ns", to_ns(plain.marks.front())},
               {"variants", summary_variants}};
  return r;
}

ExperimentResult run_spin1(const ExperimentConfig& c) {
  ExperimentResult r;
  r.preset = "spin1";
  Stopwatch sw;
  const double E = 1.0;
  const double D = c.param("D_over_E") * E;
  const int K = static_cast<int>(c.param("points"));
  if (K < 5) throw ConfigError("spin1 needs at least 5 points");
  const double t_max = c.param("periods") * kPi / std::abs(E);
  const double step = ns(c.param("dissipator_step_ns"));
  std::vector<double> t;
  for (int k = 0; k < K; ++k) t.push_back(t_max * k / (K - 1));

  // Spin-1 oracle from m = -1, which maps to |00>.
  const Matrix Sz1 = spin_one('z'), Sx1 = spin_one('x'), Sy1 = spin_one('y');
  const Matrix H1 = D * Sz1 * Sz1 + E * (Sx1 * Sx1 - Sy1 * Sy1);
  Vector m_minus = Vector::Zero(3);
  m_minus[2] = 1.0;
  std::vector<double> oracle_sz;
  for (const auto& s : exact_evolution(H1, m_minus, t)) oracle_sz.push_back(s.dot(Sz1 * s).real());

  const Matrix Sz = sum_sz(2);
  const Vector psi0 = basis_state(2, 0);
  const DeviceSpec d0 = c.device_spec();
  const DeviceSpec dc = closed(d0);
  GateCalibration calib = calibrate(dc);
  const Cell cell = build_cell({Topology::Kind::kChain, 2});
  const DeviceModel m0(dc, cell);

  auto point_programs = [&](double e, std::vector<Program>* progs, std::vector<Vector>* targets) {
    const TargetHamiltonian H = map_spin1({1, 0.0, D, e});
    const Matrix Hq = target_matrix(H);
    for (double tk : t) {
      targets->push_back(exact_evolution(Hq, psi0, {tk}).front());
      if (tk <= 0.0) {
        progs->push_back({});
        continue;
      }
      TrotterPlan p = trotterize(H, tk, c.n_trotter);
      calibrate_program_phases(calib, dc, p.layers);
      progs->push_back(build_program(m0, calib, p.layers, c.n_trotter, false));
    }
  };
  std::vector<Program> progs, control;
  std::vector<Vector> targets, control_targets;
  point_programs(E, &progs, &targets);
  point_programs(0.0, &control, &control_targets);
  r.wall_times["schedules"] = sw.lap();

  auto run_points = [&](const DeviceModel& model, const std::vector<Program>& ps, const std::vector<Vector>& tg) {
    PointValues out;
    for (size_t k = 0; k < ps.size(); ++k) {
      PointValues one = evaluate(model, ps[k].schedule, psi0, {ps[k].t_end}, {tg[k]}, Sz, step);
      out.fidelity.push_back(one.fidelity[0]);
      out.sz.push_back(one.sz[0]);
    }
    return out;
  };

  const double w_oracle = fit_angular_frequency(t, oracle_sz);
  std::vector<std::string> labels;
  std::vector<PointValues> vals;
  json runs = json::array();
  std::map<double, std::map<double, double>> avg_f;
  for (double Q : c.Q) {
    for (double T2 : c.T2_tr) {
      const DeviceModel model(with_noise(d0, Q, T2), cell);
      PointValues pv = run_points(model, progs, targets);
      const std::string label = variant_label(Q, T2, false);
      r.wall_times[label] = sw.lap();
      const double w = fit_angular_frequency(t, pv.sz);
      const auto [lo, hi] = std::minmax_element(pv.sz.begin(), pv.sz.end());
      const double amplitude = 0.5 * (*hi - *lo);
      avg_f[Q][T2] = mean(pv.fidelity);
      runs.push_back({{"label", label},
                      {"period", kTwoPi / w},
                      {"amplitude", amplitude},
                      {"average_F", 100 * mean(pv.fidelity)},
                      {"max_sz_deviation", max_abs_diff(pv.sz, oracle_sz)}});
      r.checks.push_back({3, "period ratio " + label, w_oracle / w, 0.95, 1.05});
      if (Q == 1e5) r.checks.push_back({3, "amplitude " + label, amplitude, 0.5, kInf});
      labels.push_back(label);
      vals.push_back(pv);
    }
  }
  for (double Q : c.Q) {
    if (avg_f[Q].count(us(10)) && avg_f[Q].count(us(1))) {
      const double diff = 100 * (avg_f[Q][us(10)] - avg_f[Q][us(1)]);
      r.checks.push_back({3, "F(T2=10us) - F(T2=1us) at Q=" + q_label(Q) + " (pp)", std::abs(diff), 0.0, 1.0});
    }
  }
  const DeviceModel ideal_model(dc, cell);
  PointValues ctrl = run_points(ideal_model, control, control_targets);
  std::vector<double> flat(ctrl.sz.size(), -1.0);
  r.wall_times["control"] = sw.lap();

  std::ostringstream csv;
  csv << "t,oracle";
  for (const auto& l : labels) csv << ",Sz " << l;
  for (const auto& l : labels) csv << ",F " << l;
  csv << ",Sz E=0\n";
  for (int k = 0; k < K; ++k) {
    csv << fmt(t[k], 4) << ',' << fmt(oracle_sz[k]);
    for (const auto& v : vals) csv << ',' << fmt(v.sz[k]);
    for (const auto& v : vals) csv << ',' << percent(v.fidelity[k]);
    csv << ',' << fmt(ctrl.sz[k]) << '\n';
  }
  r.files["spin1.csv"] = csv.str();
  r.summary = {{"D_over_E", D / E},
               {"oracle_period", kTwoPi / w_oracle},
               {"analytic_period", kPi / std::abs(E)},
               {"runs", runs},
               {"control_max_sz_deviation", max_abs_diff(ctrl.sz, flat)}};
  return r;
}

ExperimentResult run_xy_protected(const ExperimentConfig& c) {
  ExperimentResult r;
  r.preset = "xy_protected";
  Stopwatch sw;
  const int K = static_cast<int>(c.param("points"));
  if (K < 2) throw ConfigError("xy_protected needs at least 2 points");
  const double t_max = c.param("periods") * kTwoPi;
  const double step = ns(c.param("dissipator_step_ns"));
  std::vector<double> t;
  for (int k = 0; k < K; ++k) t.push_back(t_max * k / (K - 1));

  const TargetHamiltonian H = xy_hamiltonian(1.0);
  const Matrix Hq = target_matrix(H);
  const Vector psi0 = basis_state(2, 0b10);
  const Matrix S1 = embed_operator(2, {0}, spin_half('z'));
  std::vector<double> exact_sz;
  std::vector<Vector> targets = exact_evolution(Hq, psi0, t);
  for (const auto& s : targets) exact_sz.push_back(s.dot(S1 * s).real());

  const DeviceSpec d0 = c.device_spec();
  const DeviceSpec dc = closed(d0);
  GateCalibration calib = calibrate(dc);
  if (!calib.protected_timing) throw RunFailure("xy_protected needs a device with protected timing");
  CellOptions co;
  co.bath = bath_components(bath_for_device(d0, mhz(c.param("fwhm_MHz")), static_cast<int>(c.param("bath_modes"))));
  const Cell cell = build_cell({Topology::Kind::kChain, 2}, co);
  const DeviceModel m0(dc, cell);
  std::vector<Program> progs;
  for (double tk : t) {
    if (tk <= 0.0) {
      progs.push_back({});
      continue;
    }
    TrotterPlan p = trotterize(H, tk, c.n_trotter);
    calibrate_program_phases(calib, dc, p.layers);
    progs.push_back(build_program(m0, calib, p.layers, c.n_trotter, false));
  }
  r.wall_times["schedules"] = sw.lap();

  std::vector<std::string> labels;
  std::vector<PointValues> vals;
  json runs = json::array();
  for (double Q : c.Q) {
    for (double T2 : c.T2_tr) {
      const DeviceModel model(with_noise(d0, Q, T2), cell);
      PointValues pv;
      for (size_t k = 0; k < t.size(); ++k) {
        PointValues one = evaluate(model, progs[k].schedule, psi0, {progs[k].t_end}, {targets[k]}, S1, step);
        pv.fidelity.push_back(one.fidelity[0]);
        pv.sz.push_back(one.sz[0]);
      }
      const std::string label = variant_label(Q, T2, false);
      r.wall_times[label] = sw.lap();
      const double dev = max_abs_diff(pv.sz, exact_sz);
      runs.push_back({{"label", label}, {"max_sz_deviation", dev}, {"average_F", 100 * mean(pv.fidelity)}});
      if (Q == 1e6 && std::abs(T2 - us(1)) < 1e-12) r.checks.push_back({5, "max |d<s1z>| " + label, dev, 0.0, 0.1});
      labels.push_back(label);
      vals.push_back(pv);
    }
  }
  std::ostringstream csv;
  csv << "lambda_t,time_ns,exact";
  for (const auto& l : labels) csv << ",s1z " << l;
  for (const auto& l : labels) csv << ",F " << l;
  csv << '\n';
  for (int k = 0; k < K; ++k) {
    csv << fmt(t[k], 4) << ',' << fmt(to_ns(progs[k].t_end), 2) << ',' << fmt(exact_sz[k]);
    for (const auto& v : vals) csv << ',' << fmt(v.sz[k]);
    for (const auto& v : vals) csv << ',' << percent(v.fidelity[k]);
    csv << '\n';
  }
  r.files["xy_protected.csv"] = csv.str();
  r.summary = {{"device", d0.name},
               {"protection_period_ns", to_ns(calib.protection_period)},
               {"bath_modes", static_cast<int>(c.param("bath_modes"))},
               {"runs", runs}};
  return r;
}

ExperimentResult run_hubbard_hop(const ExperimentConfig& c) {
  ExperimentResult r;
  r.preset = "hubbard_hop";
  Stopwatch sw;
  const double lambda = c.param("lambda");
  const double t = c.param("lambda_t") / lambda;
  json summary;

  // Vertical hop between sites 0 and 4 of a 2 x 4 lattice (the interposed
  // sites 1, 2, 3 carry the parity string).
  ParityHop hop;
  bool found = false;
  for (const auto& h : jw_spinless(2, 4, lambda)) {
    if (h.mu == 0 && h.nu == 4) {
      hop = h;
      found = true;
    }
  }
  if (!found) throw RunFailure("2x4 lattice has no 0-4 hop");
  const TermCircuit tc = decompose_parity_hop(hop, t);
  std::vector<GateOp> ops;
  for (const auto& l : tc.layers) ops.insert(ops.end(), l.begin(), l.end());
  size_t lead = 0, tail = 0;
  while (lead < ops.size() && ops[lead].kind == GateOp::Kind::kCZ) ++lead;
  while (tail < ops.size() && ops[ops.size() - 1 - tail].kind == GateOp::Kind::kCZ) ++tail;
  summary["hop_0_4"] = {{"string", hop.string}, {"cz_before", lead}, {"cz_after", tail}, {"gates", ops.size()}};
  r.checks.push_back({6, "CZ gates before the 0-4 XY block", static_cast<double>(lead), 3, 3});
  r.checks.push_back({6, "CZ gates after the 0-4 XY block", static_cast<double>(tail), 3, 3});

  // The hop circuit against exp(-i t H_hop) of the fermions, one-particle sector.
  {
    const int modes = 8;
    Matrix Hf = -lambda * (fermion_creation(modes, 0) * fermion_creation(modes, 4).adjoint());
    Hf += Hf.adjoint().eval();
    ExactModel em{Hf, {}};
    const Matrix F = em.propagator(t);
    const Matrix U = std::polar(1.0, tc.global_phase) * ideal_circuit_unitary(modes, ops);
    double err = 0.0;
    for (int k = 0; k < modes; ++k) {
      Vector psi = basis_state(modes, uint64_t{1} << k);
      err = std::max(err, (U * psi - F * psi).norm());
    }
    summary["hop_0_4_propagator_error"] = err;
    r.checks.push_back({6, "0-4 hop circuit vs fermion propagator", err, 0.0, 1e-3});
  }

  // Trotterized 2 x 2 lattice against the fermionic single-particle propagator.
  {
    TargetHamiltonian H;
    H.n_qubits = 4;
    H.terms.push_back(HubbardSpinless{2, 2, lambda});
    const TrotterPlan p = trotterize(H, t, c.n_trotter);
    const Matrix S = plan_step_unitary(p);
    Matrix U = Matrix::Identity(16, 16);
    for (int k = 0; k < c.n_trotter; ++k) U = S * U;
    const Matrix F = fermion_brute_force(2, 2, lambda, 0.0, false).propagator(t);
    double err = 0.0;
    for (int k = 0; k < 4; ++k) {
      Vector psi = basis_state(4, uint64_t{1} << k);
      err = std::max(err, (U * psi - F * psi).norm());
    }
    int cz = 0;
    for (const auto& l : p.layers) {
      for (const auto& g : l) cz += g.kind == GateOp::Kind::kCZ;
    }
    summary["lattice_2x2"] = {{"n_trotter", c.n_trotter},
                              {"propagator_error", err},
                              {"layers_per_step", p.layers.size()},
                              {"cz_per_step", cz}};
    r.checks.push_back({6, "2x2 single-particle propagator error", err, 0.0, 1e-3});
  }

  // Spectra of the compiled spin Hamiltonians against fermion brute force.
  std::ostringstream csv;
  csv << "lattice,spinful,dim,max_spectrum_error\n";
  auto spectrum_error = [](const Matrix& Hs, const ExactModel& f) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(Hs);
    return (es.eigenvalues() - f.spectrum()).cwiseAbs().maxCoeff();
  };
  struct Lattice {
    int N, M;
    bool spinful;
  };
  for (Lattice L : {Lattice{1, 2, false}, Lattice{1, 3, false}, Lattice{2, 2, false}, Lattice{2, 3, false},
                    Lattice{1, 2, true}, Lattice{2, 2, true}}) {
    const double U = L.spinful ? 1.5 * lambda : 0.0;
    TargetHamiltonian H;
    if (L.spinful) {
      H = jw_spinful(L.N, L.M, lambda, U);
    } else {
      H.n_qubits = L.N * L.M;
      H.terms.push_back(HubbardSpinless{L.N, L.M, lambda});
    }
    const Matrix Hs = target_matrix(H);
    const double err = spectrum_error(Hs, fermion_brute_force(L.N, L.M, lambda, U, L.spinful));
    const std::string name = std::to_string(L.N) + "x" + std::to_string(L.M);
    csv << name << ',' << (L.spinful ? 1 : 0) << ',' << Hs.rows() << ',' << err << '\n';
    r.checks.push_back({6, name + (L.spinful ? " spinful" : " spinless") + " spectrum error", err, 0.0, 1e-10});
  }
  {
    TargetHamiltonian H;
    H.n_qubits = 9;
    H.terms.push_back(HubbardSpinless{3, 3, lambda});
    const Matrix Hs = target_matrix(H);
    Matrix h1(9, 9);
    for (int i = 0; i < 9; ++i) {
      for (int j = 0; j < 9; ++j) h1(i, j) = Hs(Eigen::Index{1} << (8 - i), Eigen::Index{1} << (8 - j));
    }
    const double err = spectrum_error(h1, particle_sector(fermion_brute_force(3, 3, lambda, 0.0, false), 9, 1));
    csv << "3x3 (1 particle),0,9," << err << '\n';
    r.checks.push_back({6, "3x3 spinless one-particle spectrum error", err, 0.0, 1e-10});
  }
  r.files["hubbard_spectra.csv"] = csv.str();
  r.wall_times["gate_ideal"] = sw.lap();

  if (c.flag("pulse_level")) {
    // Full transfer on a two-site chain at pulse level (closed system).
    const DeviceSpec dc = closed(c.device_spec());
    ElementaryTerm term{"hop 1x2", {}, kPi / (2 * lambda)};
    term.H.n_qubits = 2;
    term.H.terms.push_back(HubbardSpinless{1, 2, lambda});
    GateCalibration calib = calibrate_for_terms(dc, {term});
    TermBenchmarkOptions bo;
    bo.samples = c.samples;
    bo.seed = c.seed;
    bo.lindblad = false;
    TermFidelity f = benchmark_term(dc, calib, term, bo);
    summary["pulse_level_1x2"] = {{"time_ns", to_ns(f.time)}, {"F_I", 100 * f.ideal_mean}};
    r.wall_times["pulse_level"] = sw.lap();
  }
  r.summary = summary;
  return r;
}

ExperimentResult run_leakage(const ExperimentConfig& c) {
  ExperimentResult r;
  r.preset = "leakage";
  Stopwatch sw;
  const DeviceSpec d = c.device_spec();
  const SpinBathSpec spec = bath_for_device(d, mhz(c.param("fwhm_MHz")), static_cast<int>(c.param("n_modes")));
  std::vector<double> grid;
  const double t_max = c.param("t_max_ns"), dt = c.param("dt_ns");
  if (!(dt > 0.0) || !(t_max > dt)) throw ConfigError("leakage needs 0 < dt_ns < t_max_ns");
  for (long i = 0; i * dt <= t_max + 1e-9; ++i) grid.push_back(ns(i * dt));
  const LeakageCurve bright = leakage_dynamics(spec, grid);
  const LeakageCurve avg = state_averaged_leakage(spec, grid);
  const double late_from = ns(c.param("late_from_ns"));
  const double late = bright.mean_leakage(late_from, grid.back());
  const double late_avg = avg.mean_leakage(late_from, grid.back());
  const double bound = leakage_bound(spec);
  const double nu = oscillation_frequency(spec);
  SpinBathSpec fine = spec;
  fine.n_modes = static_cast<int>(c.param("check_modes"));
  const double l100 = leakage_dynamics(spec, {ns(100)}).leakage[0];
  const double l100_fine = leakage_dynamics(fine, {ns(100)}).leakage[0];
  r.wall_times["dynamics"] = sw.lap();

  std::ostringstream a, b;
  bright.write_csv(a);
  avg.write_csv(b);
  r.files["leakage.csv"] = a.str();
  r.files["leakage_state_averaged.csv"] = b.str();
  r.summary = {{"bath", bath_to_json(spec)},
               {"nu_MHz", to_mhz(nu)},
               {"bound", bound},
               {"late_leakage", late},
               {"late_leakage_state_averaged", late_avg},
               {"max_leakage", bright.max_leakage()},
               {"leakage_100ns", l100},
               {"leakage_100ns_refined", l100_fine},
               {"refined_modes", fine.n_modes}};
  r.checks.push_back(check_near(4, "nu (MHz)", to_mhz(nu), 94.9, 0.5));
  r.checks.push_back({4, "leakage bound", bound, 0.028, 0.029});
  r.checks.push_back({4, "long-time leakage", late, 0.005, 0.015});
  r.checks.push_back({4, "max leakage - bound", bright.max_leakage() - bound, -kInf, 0.0});
  return r;
}

ExperimentResult run_calibrate(const ExperimentConfig& c) {
  ExperimentResult r;
  r.preset = "calibrate";
  Stopwatch sw;
  const DeviceSpec dc = closed(c.device_spec());
  CalibrationReport rep;
  GateCalibration calib = calibrate(dc, &rep);
  json cph = json::object();
  for (double phi : {kPi / 2, kPi, 3 * kPi / 2}) cph[fmt(phi, 6)] = calibrate_cphase(calib, dc, phi);
  r.wall_times["calibrate"] = sw.lap();
  const double worst = std::min({rep.hop_transfer, rep.absorb_transfer, rep.store_transfer, rep.rotation_transfer});
  r.summary = {{"device", dc.name},
               {"hop_transfer", rep.hop_transfer},
               {"absorb_transfer", rep.absorb_transfer},
               {"store_transfer", rep.store_transfer},
               {"rotation_transfer", rep.rotation_transfer},
               {"cphase_residual", cph}};
  r.files["calibration.json"] = calibration_to_json(calib).dump(2) + "\n";
  if (worst < 0.99) throw RunFailure("calibration transfer below 0.99: " + fmt(worst));
  return r;
}

ExperimentResult run_convergence(const ExperimentConfig& c) {
  ExperimentResult r;
  r.preset = "convergence";
  Stopwatch sw;
  const DeviceSpec hb = c.device_spec();
  const DeviceSpec hbc = closed(hb);
  GateCalibration calib = calibrate(hbc);
  for (double phi : {kPi / 2, kPi}) calibrate_cphase(calib, hbc, phi);
  r.wall_times["calibrate"] = sw.lap();

  const Cell cell2 = build_cell({Topology::Kind::kChain, 2});
  const DeviceModel m2(hbc, cell2);
  const std::vector<Layer> program = {{GateOp::rot_x(0, kPi / 2), GateOp::rot_y(1, kPi / 2)},
                                      {GateOp::cphase(0, 1, kPi / 2)},
                                      {GateOp::phase(0, kPi / 3)}};
  ProgramScheduler ps(m2, calib);
  ps.append_all(program);
  const PulseSchedule& sched = ps.schedule();
  Vector q = Vector::Constant(4, cplx(0.5));
  q[1] = cplx(0.0, 0.5);
  const Vector psi0 = m2.embed(q);

  // Lindblad invariants under strong loss and dephasing.
  {
    DeviceSpec noisy = hb;
    noisy.Q = 1e5;
    noisy.T2_tr = us(0.2);
    const DeviceModel mn(noisy, cell2);
    Trajectory tr = evolve_lindblad(mn, psi0 * psi0.adjoint(), sched, {});
    StateCheck sc = check_density_matrix(*tr.final_mixed);
    r.checks.push_back({7, "Lindblad |trace drift|", std::abs(tr.diagnostics.trace_drift), 0.0, 1e-6});
    r.checks.push_back({7, "Lindblad min eigenvalue", tr.diagnostics.min_eigenvalue, -1e-6, kInf});
    r.checks.push_back({7, "Lindblad final hermiticity", sc.hermiticity, 0.0, 1e-10});
    Trajectory tc = evolve_lindblad(m2, psi0 * psi0.adjoint(), sched, {});
    r.checks.push_back({7, "closed Lindblad |trace - 1|", std::abs(check_density_matrix(*tc.final_mixed).trace - 1.0),
                        0.0, 1e-9});
  }
  r.wall_times["lindblad"] = sw.lap();

  // Total excitation number commutes with H(t) and is conserved.
  {
    const SparseOperator N = total_excitation_op(m2.space());
    double comm = 0.0;
    for (int k = 0; k <= 20; ++k) {
      const SparseOperator H = m2.hamiltonian_at(sched, ps.t_end() * k / 20);
      comm = std::max(comm, (H * N - N * H).dense().cwiseAbs().maxCoeff());
    }
    r.checks.push_back({7, "max |[H(t), N_tot]|", comm, 0.0, 1e-10});
    Trajectory tr = evolve_unitary(m2, psi0, sched, {});
    const double drift = std::abs(expectation(*tr.final_pure, N) - expectation(psi0, N));
    r.checks.push_back({7, "N_tot drift", drift, 0.0, 1e-10});
  }

  // Frame invariance: idle-frame piecewise vs co-moving RK4.
  {
    PulseSchedule s;
    s.add({ResonatorId::logical(0), hb.spin_detuning(0), ns(1), ns(6), 0.0, ""});
    s.add({ResonatorId::auxiliary(0), hb.omega_c0 - hb.omega_tc0, ns(8), ns(5), 0.0, ""});
    s.add({ResonatorId::logical(1), ghz(-1.5), ns(9), ns(4), 0.0, ""});
    s.set_t_end(ns(15));
    IntegratorConfig co;
    co.method = Method::kRk4CoMoving;
    co.phase_bound = 0.01;
    Vector a = *evolve_unitary(m2, psi0, s, {}).final_pure;
    Vector b = *evolve_unitary(m2, psi0, s, co).final_pure;
    r.checks.push_back({7, "frame invariance 1 - F", 1.0 - std::norm(a.dot(b)), -1e-12, 1e-8});
  }
  r.wall_times["frames"] = sw.lap();

  // First-order Trotter error halves when n doubles.
  {
    const TargetHamiltonian H = tim_hamiltonian(3, 1.0, 0.5);
    const TrotterPlan p = trotterize(H, 1.0, 1);
    const Vector psi = basis_state(3, 0);
    const Vector ex = exact_evolution(target_matrix(H), psi, {2.0}).front();
    std::vector<double> err;
    for (int n : {5, 10, 20, 40}) err.push_back((exact_trotter(3, p.local_terms(), psi, 2.0, n) - ex).norm());
    double lo = kInf, hi = 0.0;
    for (size_t i = 0; i + 1 < err.size(); ++i) {
      lo = std::min(lo, err[i] / err[i + 1]);
      hi = std::max(hi, err[i] / err[i + 1]);
    }
    r.checks.push_back({7, "Trotter error ratio n->2n (min)", lo, 1.6, 2.4});
    r.checks.push_back({7, "Trotter error ratio n->2n (max)", hi, 1.6, 2.4});
    // One step of gates against prod_k exp(-i H_k tau), and layered vs sequential.
    const TrotterPlan q3 = trotterize(H, 0.7, 1);
    const Matrix step = plan_step_unitary(q3);
    const Matrix ref = trotter_step_unitary(3, q3.local_terms(), 0.7);
    r.checks.push_back({7, "gate step vs exact step (phase-free)", distance_up_to_phase(step, ref), 0.0, 1e-9});
    std::vector<GateOp> flat;
    for (const auto& l : q3.layers) flat.insert(flat.end(), l.begin(), l.end());
    r.checks.push_back({7, "layered vs sequential gates",
                        (std::polar(1.0, q3.step_phase) * ideal_circuit_unitary(3, flat) - step).cwiseAbs().maxCoeff(),
                        0.0, 1e-10});
  }

  // Ideal process fidelities of every gate kind.
  {
    auto process = [&](const DeviceModel& m, const Layer& layer) {
      ProgramScheduler p(m, calib);
      p.append(layer);
      PiecewisePropagator prop(m);
      Matrix M = m.computational_isometry(p.stored()).adjoint() *
                 prop.propagate(m.computational_isometry(), p.schedule(), 0.0, p.t_end());
      return unitary_process_fidelity(M, layer_unitary(m.n_qubits(), layer));
    };
    const DeviceModel m1(hbc, build_cell({Topology::Kind::kChain, 1}));
    double worst = 1.0;
    for (const GateOp& g : {GateOp::rot_x(0, kPi / 2), GateOp::rot_y(0, kPi / 2), GateOp::phase(0, kPi / 2),
                            GateOp::rot_x(0, 3 * kPi / 2)}) {
      worst = std::min(worst, process(m1, {g}));
    }
    for (const GateOp& g : {GateOp::cphase(0, 1, kPi / 2), GateOp::cz(0, 1)}) worst = std::min(worst, process(m2, {g}));
    r.checks.push_back({7, "min ideal gate process fidelity", worst, 0.998, 1.0 + 1e-12});
  }
  r.wall_times["gates"] = sw.lap();

  // Disjoint gates in either order or overlapped.
  {
    const Cell cell3 = build_cell({Topology::Kind::kChain, 3});
    const DeviceSpec ds = stagger_logical(hbc, cell3.topology, ghz(1));
    const DeviceModel m3(ds, cell3);
    GateContext ctx{ds, m3.topology(), calib};
    auto run = [&](double ta, double tb) {
      PulseSchedule s;
      s.merge(schedule_phase(ctx, 0, kPi / 2, ta).pulses);
      s.merge(schedule_phase(ctx, 2, kPi / 3, tb).pulses);
      s.set_t_end(ns(3));
      PiecewisePropagator prop(m3);
      Vector psi = m3.embed(Vector::Constant(8, cplx(1.0 / std::sqrt(8.0))));
      return Vector(prop.propagate(psi, s, 0.0, s.t_end()).col(0));
    };
    const Vector ab = run(0.0, ns(1.0)), ba = run(ns(1.0), 0.0), both = run(0.0, 0.0);
    const double worst = std::max(1.0 - std::norm(ab.dot(ba)), 1.0 - std::norm(ab.dot(both)));
    r.checks.push_back({7, "parallel order 1 - F", worst, -1e-12, 1e-6});
  }

  // Step and cutoff convergence of a short gate.
  {
    RunRequest req;
    req.device = hb;
    req.topology = {Topology::Kind::kChain, 1};
    req.schedule.add({ResonatorId::logical(0), hb.spin_detuning(0), ns(1), ns(5), 0.0, ""});
    req.schedule.set_t_end(ns(8));
    req.initial_state = [](const DeviceModel& m) { return m.computational_state(1); };
    req.observables = [](const DeviceModel& m) {
      return std::vector<Observable>{operator_observable("n", number_op(m.space(), photon_mode_id(0)))};
    };
    ConvergenceReport rep = check_convergence(req, 1e-3);
    r.summary["convergence"] = {{"step_deviation", rep.step_deviation},
                                {"cutoff_deviation", rep.cutoff_deviation},
                                {"max_deviation", rep.max_deviation}};
    if (!rep.passed) throw RunFailure("convergence check failed: " + fmt(rep.max_deviation, 8));
  }
  r.wall_times["rest"] = sw.lap();

  std::ostringstream csv;
  csv << "check,value,lo,hi,passed\n";
  for (const auto& ch : r.checks) {
    csv << ch.name << ',' << ch.value << ',' << ch.lo << ',' << ch.hi << ',' << (ch.passed() ? 1 : 0) << '\n';
  }
  r.files["invariants.csv"] = csv.str();
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& c) {
  c.validate();
  if (c.preset == "table1") return run_table1(c);
  if (c.preset == "tim") return run_tim(c);
  if (c.preset == "spin1") return run_spin1(c);
  if (c.preset == "xy_protected") return run_xy_protected(c);
  if (c.preset == "hubbard_hop") return run_hubbard_hop(c);
  if (c.preset == "leakage") return run_leakage(c);
  if (c.preset == "calibrate") return run_calibrate(c);
  if (c.preset == "convergence") return run_convergence(c);
  throw ConfigError("unknown preset '" + c.preset + "'");
}

RunRecord write_run(const ExperimentConfig& c, const ExperimentResult& res, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  RunRecord rec;
  rec.preset = res.preset;
  rec.config_hash = hash_hex(config_hash(c));
  rec.version = HYBRIDQS_VERSION;
  rec.config = config_to_json(c);
  rec.summary = res.summary;
  rec.wall_times = res.wall_times;
  rec.checks = json::array();
  for (const auto& ch : res.checks) {
    rec.checks.push_back({{"criterion", ch.criterion},
                          {"name", ch.name},
                          {"value", ch.value},
                          {"lo", std::isfinite(ch.lo) ? json(ch.lo) : json(nullptr)},
                          {"hi", std::isfinite(ch.hi) ? json(ch.hi) : json(nullptr)},
                          {"passed", ch.passed()}});
  }
  for (const auto& [name, text] : res.files) {
    const std::filesystem::path p = dir / name;
    std::ofstream(p, std::ios::binary) << text;
    rec.files.push_back(p.string());
  }
  std::ofstream(dir / "run.json") << rec.to_json().dump(2) << '\n';
  return rec;
}

}  // namespace hybridqs
