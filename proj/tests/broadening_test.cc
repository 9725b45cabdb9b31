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

#include "hybridqs/broadening.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hybridqs/gates.h"

namespace hybridqs {
namespace {

std::vector<double> grid(double t_max_ns, double dt_ns) {
  std::vector<double> t;
  for (double x = 0.0; x <= t_max_ns + 1e-9; x += dt_ns) t.push_back(ns(x));
  return t;
}

TEST(SpinBath, SigmaFromFwhm) {
  SpinBathSpec s;
  EXPECT_NEAR(to_mhz(s.sigma()), 0.42466, 1e-5);
  s.set_sigma(mhz(2.0));
  EXPECT_NEAR(to_mhz(s.fwhm), 2.0 * std::sqrt(8.0 * std::log(2.0)), 1e-12);
}

TEST(SpinBath, DeviceDefaults) {
  SpinBathSpec s = bath_for_device(device_preset("protected"), mhz(1.0));
  EXPECT_NEAR(to_mhz(s.Gbar), 30.0, 1e-9);
  EXPECT_NEAR(to_mhz(s.Delta), 180.0, 1e-6);
}

TEST(SpinBath, RejectsFewModes) {
  SpinBathSpec s;
  s.n_modes = 8;
  EXPECT_THROW(discretize_bath(s), std::invalid_argument);
}

TEST(DiscretizeBath, SumRule) {
  for (auto sampling : {SpinBathSpec::Sampling::kQuantile, SpinBathSpec::Sampling::kRandom}) {
    SpinBathSpec s;
    s.sampling = sampling;
    s.n_modes = 37;
    double sum = 0.0;
    for (const auto& m : discretize_bath(s)) sum += m.g * m.g;
    EXPECT_NEAR(sum / (s.Gbar * s.Gbar), 1.0, 1e-12);
    double w = 0.0;
    for (const auto& c : bath_components(s)) w += c.weight;
    EXPECT_NEAR(w, 1.0, 1e-12);
  }
}

TEST(DiscretizeBath, QuantileMidpointsAreSymmetric) {
  SpinBathSpec s;
  s.n_modes = 20;
  auto m = discretize_bath(s);
  EXPECT_TRUE(std::is_sorted(m.begin(), m.end(), [](const BathMode& a, const BathMode& b) {
    return a.detuning < b.detuning;
  }));
  for (size_t k = 0; k < m.size(); ++k) EXPECT_NEAR(m[k].detuning, -m[m.size() - 1 - k].detuning, 1e-6);
  // Median of the first bin at quantile 1/40.
  EXPECT_NEAR(m[0].detuning / s.sigma(), -1.959964, 1e-5);
}

TEST(DiscretizeBath, RandomSamplingIsSeeded) {
  SpinBathSpec s;
  s.sampling = SpinBathSpec::Sampling::kRandom;
  auto a = discretize_bath(s), b = discretize_bath(s);
  for (size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].detuning, b[k].detuning);
  s.seed = 2;
  EXPECT_NE(discretize_bath(s)[0].detuning, a[0].detuning);
}

TEST(Leakage, ZeroWidthIsDetunedRabi) {
  SpinBathSpec s;
  s.fwhm = 0.0;
  s.n_modes = 16;
  const double nu = oscillation_frequency(s);
  LeakageCurve c = leakage_dynamics(s, grid(200, 1.3));
  for (size_t i = 0; i < c.t.size(); ++i) {
    double rabi = s.Gbar * s.Gbar / (nu * nu) * std::pow(std::sin(nu * c.t[i]), 2);
    EXPECT_NEAR(c.photon_pop[i], rabi, 1e-10);
    EXPECT_NEAR(c.leakage[i], 0.0, 1e-12);
  }
}

TEST(Leakage, ProtectedLongTimeLevel) {
  SpinBathSpec s;
  LeakageCurve b = leakage_dynamics(s, grid(5000, 1.0));
  double late = b.mean_leakage(ns(2000), ns(5000));
  EXPECT_GE(late, 0.005);
  EXPECT_LE(late, 0.015);
  LeakageCurve a = state_averaged_leakage(s, grid(5000, 1.0));
  double late_avg = a.mean_leakage(ns(2000), ns(5000));
  EXPECT_GE(late_avg, 0.005);
  EXPECT_LE(late_avg, 0.015);
  EXPECT_LT(late_avg, late);
}

TEST(Leakage, BelowBoundAcrossParameters) {
  struct P {
    double fwhm, G, D;
  };
  for (P p : {P{1, 30, 180}, P{0.5, 30, 180}, P{1, 40, 200}, P{2, 50, 150}, P{1, 30, 120}, P{1, 20, 60}}) {
    SpinBathSpec s;
    s.fwhm = mhz(p.fwhm);
    s.Gbar = mhz(p.G);
    s.Delta = mhz(p.D);
    LeakageCurve c = leakage_dynamics(s, grid(4000, 0.5));
    for (double x : c.leakage) {
      ASSERT_GE(x, 0.0);
      ASSERT_LE(x, 1.05 * leakage_bound(s)) << p.fwhm << " " << p.G << " " << p.D;
    }
  }
}

TEST(Leakage, SelfConvergenceInModes) {
  SpinBathSpec s;
  s.n_modes = 64;
  double a = leakage_dynamics(s, {ns(100)}).leakage[0];
  s.n_modes = 128;
  double b = leakage_dynamics(s, {ns(100)}).leakage[0];
  EXPECT_LT(std::abs(a - b) / b, 0.05);
}

TEST(Leakage, ZeroWidthNeverLeaks) {
  SpinBathSpec s;
  s.fwhm = 0.0;
  LeakageCurve c = leakage_dynamics(s, grid(1000, 5.0), LeakageInitial::kPhoton);
  EXPECT_LE(c.max_leakage(), 1e-12);
}

TEST(Leakage, WindowAveragesDoNotDecrease) {
  // Dark-mode leakage beats at the protection gap nu - Delta/2 (205 ns here);
  // averages over that window grow up to small discretization noise.
  SpinBathSpec s;
  const double gap = kTwoPi / (oscillation_frequency(s) - 0.5 * s.Delta);
  LeakageCurve c = leakage_dynamics(s, grid(6000, 0.5));
  double prev = -1.0;
  for (double a = 0.0; a + gap <= c.t.back(); a += gap) {
    double m = c.mean_leakage(a, a + gap);
    if (prev >= 0.0) {
      EXPECT_GE(m, prev - 1e-3) << to_ns(a);
    }
    prev = m;
  }
}

TEST(Leakage, SnappedTimesRemoveQubitOscillation) {
  SpinBathSpec s;
  const double P = kTwoPi / oscillation_frequency(s);
  for (int n = 1; n <= 4; ++n) {
    EXPECT_LT(std::abs(leakage_dynamics(s, {n * P}).photon_amp[0]), 1e-3) << n;
  }
  // Mid-period the photon holds (G / nu)^2 of the population.
  LeakageCurve mid = leakage_dynamics(s, {0.25 * P});
  EXPECT_NEAR(mid.photon_pop[0], std::pow(s.Gbar / oscillation_frequency(s), 2), 1e-3);
}

TEST(Leakage, CsvColumns) {
  SpinBathSpec s;
  std::ostringstream os;
  leakage_dynamics(s, {0.0, ns(1)}).write_csv(os);
  std::string first = os.str().substr(0, os.str().find('\n'));
  EXPECT_EQ(first, "t_ns,leakage,bright_pop,photon_pop");
}

TEST(Bound, ProtectedValue) {
  SpinBathSpec s;
  EXPECT_NEAR(leakage_bound(s), 0.0289, 2e-4);
  SpinBathSpec z = s;
  z.fwhm = 0.0;
  EXPECT_EQ(leakage_bound(z), 0.0);
  SpinBathSpec d = s;
  d.set_sigma(2.0 * s.sigma());
  EXPECT_NEAR(leakage_bound(d), 4.0 * leakage_bound(s), 1e-15);
  d.Delta = 0.0;
  EXPECT_THROW(leakage_bound(d), std::invalid_argument);
}

TEST(OscillationFrequency, Limits) {
  SpinBathSpec s;
  EXPECT_NEAR(to_mhz(oscillation_frequency(s)), 94.87, 0.01);
  s.Delta = 0.0;
  EXPECT_NEAR(oscillation_frequency(s), s.Gbar, 1e-6);
  s.Delta = mhz(1e5);
  EXPECT_NEAR(oscillation_frequency(s) / (0.5 * s.Delta), 1.0, 1e-6);
  // Same period the gate layer snaps to.
  DeviceSpec d = device_preset("protected");
  EXPECT_NEAR(protection_period(d), kTwoPi / oscillation_frequency(bath_for_device(d, mhz(1))), 1e-15);
}

TEST(BathJson, RoundTripAndWidthKeys) {
  SpinBathSpec s;
  s.n_modes = 40;
  s.sampling = SpinBathSpec::Sampling::kRandom;
  SpinBathSpec r = bath_from_json(bath_to_json(s));
  EXPECT_NEAR(r.fwhm, s.fwhm, 1e-6);
  EXPECT_EQ(r.n_modes, 40);
  EXPECT_EQ(r.sampling, SpinBathSpec::Sampling::kRandom);
  SpinBathSpec sig = bath_from_json({{"sigma_MHz", 0.5}});
  EXPECT_NEAR(to_mhz(sig.sigma()), 0.5, 1e-12);
  EXPECT_THROW(bath_from_json({{"sigma_MHz", 0.5}, {"fwhm_MHz", 1.0}}), std::invalid_argument);
  EXPECT_THROW(bath_from_json({{"sampling", "sobol"}}), std::invalid_argument);
}

TEST(ProtectedGates, NeedProtectedTiming) {
  DeviceSpec d = device_preset("highband");
  EXPECT_THROW(protected_gate_fidelities(d, seed_calibration(d)), ScheduleError);
}

TEST(ProtectedGates, SingleQubitTermsWithBath) {
  DeviceSpec d = device_preset("protected");
  GateCalibration c = calibrate_for_terms(d, {});
  TermBenchmarkOptions o;
  o.cell.bath = bath_components(bath_for_device(d, mhz(1.0), 16));
  o.dissipator_step = ns(5);
  for (const auto& t : elementary_terms()) {
    if (t.H.n_qubits != 1) continue;
    TermFidelity f = benchmark_term(d, c, t, o);
    EXPECT_NEAR(to_ns(f.time), 10.54, 0.01);
    EXPECT_GE(f.ideal_mean, 0.999);
    EXPECT_GE(f.lindblad_mean, 0.999);
    EXPECT_LE(f.lindblad_mean, f.ideal_mean + 1e-6);
  }
}

}  // namespace
}  // namespace hybridqs
