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

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <random>
#include <stdexcept>

namespace hybridqs {
namespace {

const double kFwhmPerSigma = std::sqrt(8.0 * std::log(2.0));

}  // namespace

double SpinBathSpec::sigma() const { return fwhm / kFwhmPerSigma; }
void SpinBathSpec::set_sigma(double s) { fwhm = s * kFwhmPerSigma; }

void SpinBathSpec::validate() const {
  if (n_modes < 16) throw std::invalid_argument("bath needs at least 16 modes");
  if (!(fwhm >= 0.0)) throw std::invalid_argument("bath fwhm must be >= 0");
  if (!(Gbar > 0.0)) throw std::invalid_argument("bath Gbar must be > 0");
}

SpinBathSpec bath_for_device(const DeviceSpec& device, double fwhm, int n_modes, int mu) {
  SpinBathSpec s;
  s.fwhm = fwhm;
  s.n_modes = n_modes;
  s.Gbar = device.spin_matrix_element(-1);
  s.Delta = device.spin_detuning(mu);
  return s;
}

std::vector<BathMode> discretize_bath(const SpinBathSpec& spec) {
  spec.validate();
  const int n = spec.n_modes;
  const double sigma = spec.sigma();
  const double g = spec.Gbar / std::sqrt(static_cast<double>(n));
  std::vector<BathMode> modes(static_cast<size_t>(n));
  if (spec.sampling == SpinBathSpec::Sampling::kQuantile) {
    boost::math::normal_distribution<double> normal;
    for (int k = 0; k < n; ++k) {
      double z = boost::math::quantile(normal, (k + 0.5) / n);
      modes[static_cast<size_t>(k)] = {sigma * z, g};
    }
  } else {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& m : modes) m = {sigma * normal(rng), g};
  }
  return modes;
}

std::vector<BathComponent> bath_components(const SpinBathSpec& spec) {
  std::vector<BathComponent> out;
  const double G2 = spec.Gbar * spec.Gbar;
  for (const auto& m : discretize_bath(spec)) out.push_back({m.detuning, m.g * m.g / G2});
  return out;
}

double LeakageCurve::max_leakage() const {
  double m = 0.0;
  for (double x : leakage) m = std::max(m, x);
  return m;
}

double LeakageCurve::mean_leakage(double t0, double t1) const {
  double s = 0.0;
  int n = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= t0 && t[i] <= t1) {
      s += leakage[i];
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("no samples in leakage window");
  return s / n;
}

void LeakageCurve::write_csv(std::ostream& out) const {
  out << "t_ns,leakage,bright_pop,photon_pop\n";
  out.precision(10);
  for (size_t i = 0; i < t.size(); ++i) {
    out << to_ns(t[i]) << ',' << leakage[i] << ',' << bright_pop[i] << ',' << photon_pop[i] << '\n';
  }
}

LeakageCurve leakage_dynamics(const SpinBathSpec& spec, const std::vector<double>& t_grid, LeakageInitial initial) {
  std::vector<BathMode> modes = discretize_bath(spec);
  const Eigen::Index d = static_cast<Eigen::Index>(modes.size()) + 1;
  // Index 0: photon at zero energy (cavity frame); k + 1: bath mode k.
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd bright = Eigen::VectorXd::Zero(d);
  for (Eigen::Index k = 1; k < d; ++k) {
    const BathMode& m = modes[static_cast<size_t>(k - 1)];
    H(k, k) = spec.Delta + m.detuning;
    H(0, k) = H(k, 0) = m.g;
    bright[k] = m.g / spec.Gbar;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  const Eigen::MatrixXd& V = es.eigenvectors();
  Eigen::VectorXd psi0 = Eigen::VectorXd::Zero(d);
  if (initial == LeakageInitial::kBright) {
    psi0 = bright;
  } else {
    psi0[0] = 1.0;
  }
  const Eigen::VectorXd c0 = V.transpose() * psi0;
  const Eigen::VectorXd photon_row = V.row(0).transpose();
  const Eigen::VectorXd bright_row = V.transpose() * bright;

  LeakageCurve out;
  for (double t : t_grid) {
    cplx a_ph = 0.0, a_b = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      cplx cj = c0[j] * std::polar(1.0, -es.eigenvalues()[j] * t);
      a_ph += photon_row[j] * cj;
      a_b += bright_row[j] * cj;
    }
    const double pp = std::norm(a_ph), pb = std::norm(a_b);
    out.t.push_back(t);
    out.photon_amp.push_back(a_ph);
    out.photon_pop.push_back(pp);
    out.bright_pop.push_back(pb);
    out.leakage.push_back(std::clamp(1.0 - pp - pb, 0.0, 1.0));
  }
  return out;
}

LeakageCurve state_averaged_leakage(const SpinBathSpec& spec, const std::vector<double>& t_grid) {
  LeakageCurve a = leakage_dynamics(spec, t_grid, LeakageInitial::kBright);
  LeakageCurve b = leakage_dynamics(spec, t_grid, LeakageInitial::kPhoton);
  for (size_t i = 0; i < a.t.size(); ++i) {
    a.leakage[i] = 0.5 * (a.leakage[i] + b.leakage[i]);
    a.bright_pop[i] = 0.5 * (a.bright_pop[i] + b.bright_pop[i]);
    a.photon_pop[i] = 0.5 * (a.photon_pop[i] + b.photon_pop[i]);
    a.photon_amp[i] = 0.0;
  }
  return a;
}

double leakage_bound(const SpinBathSpec& spec) {
  if (!(spec.Gbar > 0.0) || !(spec.Delta > 0.0)) throw std::invalid_argument("leakage bound needs Delta, Gbar > 0");
  const double s = spec.sigma();
  return 4.0 * s * s * spec.Delta * spec.Delta / std::pow(spec.Gbar, 4);
}

double oscillation_frequency(const SpinBathSpec& spec) {
  return std::sqrt(spec.Gbar * spec.Gbar + 0.25 * spec.Delta * spec.Delta);
}

std::vector<TermFidelity> protected_gate_fidelities(const DeviceSpec& device, const GateCalibration& calib,
                                                    const ProtectedGateOptions& options) {
  if (!calib.protected_timing) throw ScheduleError("protected gate runs need protected timing");
  TermBenchmarkOptions bo = options.benchmark;
  if (options.attach_bath) bo.cell.bath = bath_components(bath_for_device(device, options.fwhm, options.n_modes));
  std::vector<TermFidelity> out;
  for (const auto& t : elementary_terms()) out.push_back(benchmark_term(device, calib, t, bo));
  return out;
}

nlohmann::json bath_to_json(const SpinBathSpec& spec) {
  return {{"fwhm_MHz", to_mhz(spec.fwhm)},
          {"n_modes", spec.n_modes},
          {"sampling", spec.sampling == SpinBathSpec::Sampling::kQuantile ? "quantile" : "random"},
          {"seed", spec.seed},
          {"Gbar_MHz", to_mhz(spec.Gbar)},
          {"Delta_MHz", to_mhz(spec.Delta)}};
}

SpinBathSpec bath_from_json(const nlohmann::json& j) {
  SpinBathSpec s;
  if (j.contains("fwhm_MHz") && j.contains("sigma_MHz")) {
    throw std::invalid_argument("give either fwhm_MHz or sigma_MHz, not both");
  }
  if (j.contains("fwhm_MHz")) s.fwhm = mhz(j.at("fwhm_MHz").get<double>());
  if (j.contains("sigma_MHz")) s.set_sigma(mhz(j.at("sigma_MHz").get<double>()));
  s.n_modes = j.value("n_modes", s.n_modes);
  std::string sampling = j.value("sampling", std::string("quantile"));
  if (sampling == "quantile") {
    s.sampling = SpinBathSpec::Sampling::kQuantile;
  } else if (sampling == "random") {
    s.sampling = SpinBathSpec::Sampling::kRandom;
  } else {
    throw std::invalid_argument("unknown bath sampling: " + sampling);
  }
  s.seed = j.value("seed", s.seed);
  if (j.contains("Gbar_MHz")) s.Gbar = mhz(j.at("Gbar_MHz").get<double>());
  if (j.contains("Delta_MHz")) s.Delta = mhz(j.at("Delta_MHz").get<double>());
  s.validate();
  return s;
}

}  // namespace hybridqs
