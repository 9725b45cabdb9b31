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

#include "hybridqs/benchmark.h"

#include <cmath>
#include <random>

#include "hybridqs/dynamics.h"
#include "hybridqs/model.h"

namespace hybridqs {
namespace {

TargetHamiltonian single(int n, Primitive p) {
  TargetHamiltonian H;
  H.n_qubits = n;
  std::visit([&](const auto& t) { H.terms.emplace_back(t); }, p);
  return H;
}

void mean_std(const std::vector<double>& v, double* mean, double* sd) {
  double s = 0.0, s2 = 0.0;
  for (double x : v) {
    s += x;
    s2 += x * x;
  }
  const double n = static_cast<double>(v.size());
  *mean = s / n;
  *sd = v.size() > 1 ? std::sqrt(std::max(0.0, (s2 - s * s / n) / (n - 1))) : 0.0;
}

}  // namespace

std::vector<ElementaryTerm> elementary_terms() {
  const double tau = kPi / 2;
  return {
      {"H_x^(1)", single(1, OneBody{0, 'x', 1.0}), tau},
      {"H_z^(1)", single(1, OneBody{0, 'z', 1.0}), tau},
      {"H_yy^(2)", single(2, TwoBody{0, 'y', 1, 'y', 1.0}), tau},
      {"H_zz^(2)", single(2, TwoBody{0, 'z', 1, 'z', 1.0}), tau},
      {"H_yz^(2)", single(2, TwoBody{0, 'y', 1, 'z', 1.0}), tau},
  };
}

Vector random_product_state(int n_qubits, unsigned long long seed, int sample) {
  std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<unsigned long long>(sample + 1));
  std::normal_distribution<double> g;
  Vector psi = Vector::Ones(1);
  for (int q = 0; q < n_qubits; ++q) {
    Vector v(2);
    v << cplx(g(rng), g(rng)), cplx(g(rng), g(rng));
    v.normalize();
    Vector next(psi.size() * 2);
    for (Eigen::Index i = 0; i < psi.size(); ++i) next.segment(2 * i, 2) = psi[i] * v;
    psi = next;
  }
  return psi;
}

GateCalibration calibrate_for_terms(const DeviceSpec& device, const std::vector<ElementaryTerm>& terms) {
  DeviceSpec closed = device;
  closed.Q = kInf;
  closed.T2_tr = kInf;
  GateCalibration c = calibrate(closed);
  for (const auto& t : terms) calibrate_program_phases(c, closed, trotterize(t.H, t.tau, 1).layers);
  return c;
}

TermFidelity benchmark_term(const DeviceSpec& device, const GateCalibration& calib, const ElementaryTerm& term,
                            const TermBenchmarkOptions& options) {
  const int n = term.H.n_qubits;
  TrotterPlan plan = trotterize(term.H, term.tau, 1);
  TopologyRequest req{Topology::Kind::kChain, n};
  Cell cell = build_cell(req, options.cell);
  DeviceSpec dev = device;
  if (n > 1 && options.stagger != 0.0) dev = stagger_logical(dev, cell.topology, options.stagger);
  DeviceModel model(dev, cell);

  ProgramScheduler ps(model, calib, options.program);
  ps.append_all(plan.layers);
  const PulseSchedule& sched = ps.schedule();

  TermFidelity out;
  out.name = term.name;
  out.time = ps.t_end();
  out.n_layers = static_cast<int>(ps.layers().size());

  Matrix U = Matrix::Identity(Eigen::Index{1} << n, Eigen::Index{1} << n);
  for (const auto& l : plan.layers) U = layer_unitary(n, l) * U;
  const Matrix W0 = model.computational_isometry();
  const Matrix W1 = model.computational_isometry(ps.stored());
  const Eigen::Index d = W0.cols();
  std::vector<Vector> inputs, targets;
  for (int s = 0; s < options.samples; ++s) {
    inputs.push_back(random_product_state(n, options.seed, s));
    targets.push_back(W1 * (U * inputs.back()));
  }

  if (options.ideal) {
    PiecewisePropagator prop(model);
    Matrix out_states = prop.propagate(W0, sched, 0.0, ps.t_end());
    std::vector<double> f;
    for (int s = 0; s < options.samples; ++s) {
      f.push_back(std::abs(targets[s].dot(out_states * inputs[s])));
    }
    mean_std(f, &out.ideal_mean, &out.ideal_std);
  }

  if (options.lindblad) {
    // The channel is linear: propagate a Hermitian operator basis once and
    // contract each sample against it.
    IntegratorConfig cfg;
    cfg.tomography_input = true;
    cfg.t_end = ps.t_end();
    cfg.step = options.dissipator_step;
    PiecewisePropagator prop(model);
    std::vector<double> f2(static_cast<size_t>(options.samples), 0.0);
    auto run = [&](const Matrix& rho0) {
      Trajectory tr = prop.evolve_mixed(rho0, sched, cfg, {});
      const Matrix& rho = *tr.final_mixed;
      std::vector<double> v;
      for (const auto& t : targets) v.push_back(t.dot(rho * t).real());
      return v;
    };
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i; j < d; ++j) {
        const Vector a = W0.col(i), b = W0.col(j);
        if (i == j) {
          std::vector<double> x = run(a * a.adjoint());
          for (int s = 0; s < options.samples; ++s) f2[s] += std::norm(inputs[s][i]) * x[s];
          continue;
        }
        // |i><j| = (X + iY) / 2 with X = |i><j| + |j><i|, Y = -i|i><j| + i|j><i|.
        Matrix X = a * b.adjoint() + b * a.adjoint();
        Matrix Y = cplx(0, -1) * a * b.adjoint() + cplx(0, 1) * b * a.adjoint();
        std::vector<double> x = run(X), y = run(Y);
        for (int s = 0; s < options.samples; ++s) {
          cplx c = inputs[s][i] * std::conj(inputs[s][j]);
          f2[s] += (c * cplx(x[s], y[s])).real();
        }
      }
    }
    std::vector<double> f;
    for (double v : f2) f.push_back(std::sqrt(std::clamp(v, 0.0, 1.0)));
    mean_std(f, &out.lindblad_mean, &out.lindblad_std);
  }
  return out;
}

}  // namespace hybridqs
