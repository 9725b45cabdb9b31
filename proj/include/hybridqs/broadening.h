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

// Inhomogeneously broadened spin ensemble coupled to one cavity: dark-mode
// leakage in the single-excitation sector and cavity-protected gate runs.

#ifndef HYBRIDQS_BROADENING_H_
#define HYBRIDQS_BROADENING_H_

#include <ostream>
#include <vector>

#include "hybridqs/benchmark.h"
#include "hybridqs/device.h"
#include "json.hpp"

namespace hybridqs {

struct SpinBathSpec {
  enum class Sampling { kQuantile, kRandom };
  /// Full width at half maximum of the Gaussian gap distribution (rad/s).
  double fwhm = mhz(1.0);
  int n_modes = 64;
  Sampling sampling = Sampling::kQuantile;
  /// Seed of the random sampling mode.
  unsigned long long seed = 1;
  /// Collective coupling, used as the photon/bright matrix element (rad/s).
  double Gbar = mhz(30.0);
  /// omega_-1 - omega_c(0) (rad/s).
  double Delta = mhz(180.0);

  double sigma() const;
  void set_sigma(double s);
  void validate() const;
};

/// Bath for logical cavity mu of `device` with the given FWHM.
SpinBathSpec bath_for_device(const DeviceSpec& device, double fwhm, int n_modes = 64, int mu = 0);

struct BathMode {
  /// Gap offset from omega_-1 (rad/s).
  double detuning = 0.0;
  double g = 0.0;
};

/// Quantile sampling: detunings at the Gaussian quantiles (k + 1/2) / n and
/// equal weights, so sum_k g_k^2 = Gbar^2. Random sampling draws detunings
/// from the seeded Gaussian with equal weights.
std::vector<BathMode> discretize_bath(const SpinBathSpec& spec);
/// Same modes as device bath components (weights summing to 1).
std::vector<BathComponent> bath_components(const SpinBathSpec& spec);

enum class LeakageInitial { kBright, kPhoton };

struct LeakageCurve {
  std::vector<double> t;
  /// 1 - bright_pop - photon_pop.
  std::vector<double> leakage;
  std::vector<double> bright_pop;
  std::vector<double> photon_pop;
  /// Amplitude of the photon state (complex, rotating frame of the cavity).
  std::vector<cplx> photon_amp;

  double max_leakage() const;
  /// Mean leakage over samples with t in [t0, t1].
  double mean_leakage(double t0, double t1) const;
  void write_csv(std::ostream& out) const;
};

/// Exact single-excitation evolution of photon + bath modes by
/// eigendecomposition; the bright mode is sum_k (g_k / Gbar) b_k.
LeakageCurve leakage_dynamics(const SpinBathSpec& spec, const std::vector<double>& t_grid,
                              LeakageInitial initial = LeakageInitial::kBright);

/// Leakage averaged over the bright and photon starts, i.e. over Haar-random
/// qubit states (leakage is a quadratic form of the initial amplitudes).
LeakageCurve state_averaged_leakage(const SpinBathSpec& spec, const std::vector<double>& t_grid);

/// 4 sigma^2 Delta^2 / Gbar^4.
double leakage_bound(const SpinBathSpec& spec);

/// nu = sqrt(Gbar^2 + Delta^2 / 4), as an angular frequency (rad/s).
double oscillation_frequency(const SpinBathSpec& spec);

struct ProtectedGateOptions {
  TermBenchmarkOptions benchmark;
  /// Bath modes per logical cavity in the gate runs.
  int n_modes = 16;
  double fwhm = mhz(1.0);
  bool attach_bath = true;
};

/// Table-I suite on a protected-timing device with the bath attached to
/// every logical cavity.
std::vector<TermFidelity> protected_gate_fidelities(const DeviceSpec& device, const GateCalibration& calib,
                                                    const ProtectedGateOptions& options = {});

nlohmann::json bath_to_json(const SpinBathSpec& spec);
/// Accepts either "fwhm_MHz" or "sigma_MHz".
SpinBathSpec bath_from_json(const nlohmann::json& j);

}  // namespace hybridqs

#endif  // HYBRIDQS_BROADENING_H_
