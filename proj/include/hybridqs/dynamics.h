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

#ifndef HYBRIDQS_DYNAMICS_H_
#define HYBRIDQS_DYNAMICS_H_

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hybridqs/device.h"
#include "hybridqs/hilbert.h"
#include "hybridqs/model.h"
#include "hybridqs/schedule.h"

namespace hybridqs {

enum class Method {
  /// Exact exponentials of the piecewise-constant rotating-frame Hamiltonian,
  /// Strang-split with the dissipator. Second order in the dissipator step h;
  /// loss feeds use the midpoint rule, so the trace drifts by O((rate*h)^3)
  /// per step.
  kPiecewiseExact,
  /// Classical RK4 on the idle interaction-picture equations.
  kRk4,
  /// RK4 in the co-moving frame (detunings integrated into phases).
  kRk4CoMoving,
};

struct IntegratorConfig {
  Method method = Method::kPiecewiseExact;
  /// Dissipator substep (piecewise) or fixed RK4 step; 0 selects a default.
  double step = 0.0;
  /// RK4: step is capped so that h * max(||H||, fastest phase) <= phase_bound.
  double phase_bound = 0.05;
  double t_begin = 0.0;
  /// Negative: use the schedule horizon.
  double t_end = -1.0;
  std::vector<double> record_times;
  bool monitor_positivity = true;
  double trace_tolerance = 1e-6;
  double positivity_tolerance = 1e-6;
  /// Input density matrices that are Hermitian but not positive (process
  /// tomography inputs) disable trace and positivity checks.
  bool tomography_input = false;
};

inline constexpr double kDefaultDissipatorStep = 0.5e-9;

struct Observable {
  std::string name;
  std::function<double(const Vector&)> pure;
  std::function<double(const Matrix&)> mixed;
};

Observable operator_observable(std::string name, const SparseOperator& op);
/// Observable defined by a 2^N x 2^N operator on the computational subspace.
Observable qubit_observable(const DeviceModel& model, std::string name, const Matrix& op);

struct Diagnostics {
  double trace_drift = 0.0;
  double hermiticity_drift = 0.0;
  double min_eigenvalue = 0.0;
  double norm_drift = 0.0;
  size_t steps = 0;
  double wall_time_s = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;
  std::vector<double> trace;
  std::vector<double> leakage;
  std::optional<PureState> final_pure;
  std::optional<DensityMatrix> final_mixed;
  Diagnostics diagnostics;

  const std::vector<double>& series(const std::string& name) const;
  void write_csv(std::ostream& out) const;
};

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact propagation of the piecewise-constant Hamiltonian. Caches
/// eigendecompositions per detuning configuration; not thread-safe.
class PiecewisePropagator {
 public:
  explicit PiecewisePropagator(const DeviceModel& model);
  ~PiecewisePropagator();
  PiecewisePropagator(const PiecewisePropagator&) = delete;
  PiecewisePropagator& operator=(const PiecewisePropagator&) = delete;

  /// Propagates the columns of `psi` (idle interaction picture at t0) to t1,
  /// applying frame phases with t0 <= time <= t1 (those at t0 only when
  /// include_start_phases is set).
  Matrix propagate(const Matrix& psi, const PulseSchedule& schedule, double t0, double t1,
                   bool include_start_phases = true);

  Trajectory evolve_pure(const PureState& psi0, const PulseSchedule& schedule, const IntegratorConfig& config,
                         const std::vector<Observable>& observables);
  Trajectory evolve_mixed(const DensityMatrix& rho0, const PulseSchedule& schedule, const IntegratorConfig& config,
                          const std::vector<Observable>& observables);

  const DeviceModel& model() const { return model_; }
  size_t cached_configurations() const;

 private:
  struct Impl;
  const DeviceModel& model_;
  std::unique_ptr<Impl> impl_;
};

Trajectory evolve_unitary(const DeviceModel& model, const PureState& psi0, const PulseSchedule& schedule,
                          const IntegratorConfig& config, const std::vector<Observable>& observables = {});
Trajectory evolve_lindblad(const DeviceModel& model, const DensityMatrix& rho0, const PulseSchedule& schedule,
                           const IntegratorConfig& config, const std::vector<Observable>& observables = {});

/// RK4 reference integrators.
Trajectory rk4_evolve_pure(const DeviceModel& model, const PureState& psi0, const PulseSchedule& schedule,
                           const IntegratorConfig& config, const std::vector<Observable>& observables,
                           bool co_moving);
Trajectory rk4_evolve_mixed(const DeviceModel& model, const DensityMatrix& rho0, const PulseSchedule& schedule,
                            const IntegratorConfig& config, const std::vector<Observable>& observables);
/// Integral of the detuning of r from 0 to t.
double accumulated_phase(const PulseSchedule& schedule, ResonatorId r, double t);

/// sqrt(<psi| rho |psi>), clipped to [0, 1].
double fidelity(const DensityMatrix& rho, const PureState& psi);
/// |<phi|psi>|.
double fidelity(const PureState& phi, const PureState& psi);
double expectation(const DensityMatrix& rho, const Matrix& observable);
double expectation(const DensityMatrix& rho, const SparseOperator& observable);
double expectation(const PureState& psi, const SparseOperator& observable);

struct QubitReduction {
  Matrix rho;
  double leakage = 0.0;
  bool fully_leaked = false;
};
QubitReduction qubit_reduce(const DeviceModel& model, const DensityMatrix& rho);
QubitReduction qubit_reduce(const DeviceModel& model, const PureState& psi);

/// A run that can be rebuilt at a different cutoff margin and step.
struct RunRequest {
  DeviceSpec device;
  TopologyRequest topology;
  CellOptions cell;
  PulseSchedule schedule;
  IntegratorConfig config;
  bool lindblad = true;
  std::function<Vector(const DeviceModel&)> initial_state;
  std::function<std::vector<Observable>(const DeviceModel&)> observables;
};

struct ConvergenceReport {
  double step_deviation = 0.0;
  double cutoff_deviation = 0.0;
  double max_deviation = 0.0;
  double tolerance = 1e-3;
  bool passed = false;
};

Trajectory run_request(const RunRequest& request);
ConvergenceReport check_convergence(const RunRequest& request, double tolerance = 1e-3);

}  // namespace hybridqs

#endif  // HYBRIDQS_DYNAMICS_H_
