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

#include "hybridqs/dynamics.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>

namespace hybridqs {

namespace {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Clock = std::chrono::steady_clock;

constexpr size_t kMaxCachedConfigs = 256;
constexpr size_t kMaxCachedUnitaries = 512;
constexpr int kRampPieces = 16;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::vector<double> merged_times(std::vector<double> a, const std::vector<double>& b, double t0, double t1) {
  for (double t : b) {
    if (t > t0 && t < t1) a.push_back(t);
  }
  std::sort(a.begin(), a.end());
  std::vector<double> out;
  for (double t : a) {
    if (out.empty() || t - out.back() > 1e-16) out.push_back(t);
  }
  return out;
}

struct Piece {
  double a;
  double b;
  std::vector<double> deltas;
};

// Splits [a, b] into pieces of constant detuning, subdividing ramp edges.
std::vector<Piece> pieces_of(const DeviceModel& model, const PulseSchedule& schedule, double a, double b) {
  const auto& res = model.resonators();
  auto deltas_at = [&](double t) {
    std::vector<double> d(res.size());
    for (size_t k = 0; k < res.size(); ++k) d[k] = schedule.detuning(res[k], t);
    return d;
  };
  double min_ramp = 0.0;
  for (const auto& s : schedule.segments()) {
    if (s.ramp <= 0.0 || s.t_end() <= a || s.t_start >= b) continue;
    bool in_ramp = (a < s.t_start + s.ramp && b > s.t_start) || (a < s.t_end() && b > s.t_end() - s.ramp);
    if (in_ramp) min_ramp = min_ramp == 0.0 ? s.ramp : std::min(min_ramp, s.ramp);
  }
  int n = 1;
  if (min_ramp > 0.0) n = std::max(1, static_cast<int>(std::ceil((b - a) / (min_ramp / kRampPieces))));
  std::vector<Piece> out;
  for (int i = 0; i < n; ++i) {
    double pa = a + (b - a) * i / n;
    double pb = a + (b - a) * (i + 1) / n;
    out.push_back({pa, pb, deltas_at(0.5 * (pa + pb))});
  }
  return out;
}

}  // namespace

struct PiecewisePropagator::Impl {
  struct SectorEig {
    RealVector w;
    Matrix V;
  };
  struct Config {
    std::vector<SectorEig> sectors;
  };
  struct JumpBlock {
    int shift = 0;
    double rate = 0.0;
    // Per source sector N: sparse block from sector N to N - shift.
    std::vector<Eigen::SparseMatrix<cplx>> blocks;
  };

  const DeviceModel& m;
  double omega_ref = 0.0;
  std::vector<std::vector<size_t>> sec;
  std::vector<int> sec_of;
  std::vector<int> loc_of;
  std::vector<Matrix> vblock;
  std::vector<RealVector> kdiag;
  std::vector<RealVector> sdiag;
  std::vector<std::vector<RealVector>> rnum;
  std::vector<std::vector<RealVector>> qexc;

  std::map<std::vector<double>, std::shared_ptr<Config>> cache;
  std::map<std::pair<std::vector<double>, double>, std::shared_ptr<std::vector<Matrix>>> ucache;

  // Dissipator data.
  bool has_dissipation = false;
  std::vector<RealVector> decay_rate;                  // per sector: sum rate * (L^dag L)_ii
  std::vector<std::pair<double, std::vector<RealVector>>> dephasers;  // (rate, per-sector diagonal)
  std::vector<JumpBlock> feeds;
  std::map<std::tuple<int, int, double>, RealMatrix> decay_cache;

  explicit Impl(const DeviceModel& model) : m(model) {
    omega_ref = model.device().omega_c0;
    sec = model.sectors();
    const size_t d = model.dim();
    sec_of.assign(d, -1);
    loc_of.assign(d, -1);
    for (size_t n = 0; n < sec.size(); ++n) {
      for (size_t k = 0; k < sec[n].size(); ++k) {
        sec_of[sec[n][k]] = static_cast<int>(n);
        loc_of[sec[n][k]] = static_cast<int>(k);
      }
    }
    for (size_t n = 0; n < sec.size(); ++n) {
      const auto dn = static_cast<Eigen::Index>(sec[n].size());
      vblock.push_back(Matrix::Zero(dn, dn));
      RealVector kd(dn), sd(dn);
      for (Eigen::Index k = 0; k < dn; ++k) {
        size_t i = sec[n][static_cast<size_t>(k)];
        kd[k] = model.idle_energy()[i] - omega_ref * static_cast<double>(n);
        sd[k] = model.static_offset()[i];
      }
      kdiag.push_back(kd);
      sdiag.push_back(sd);
      std::vector<RealVector> rn;
      for (const auto& r : model.resonators()) {
        RealVector v(dn);
        const auto& num = model.resonator_number(r);
        for (Eigen::Index k = 0; k < dn; ++k) v[k] = num[sec[n][static_cast<size_t>(k)]];
        rn.push_back(v);
      }
      rnum.push_back(rn);
      std::vector<RealVector> qe;
      for (int q = 0; q < model.n_qubits(); ++q) {
        RealVector v(dn);
        const auto& ex = model.qubit_excitation(q);
        for (Eigen::Index k = 0; k < dn; ++k) v[k] = ex[sec[n][static_cast<size_t>(k)]];
        qe.push_back(v);
      }
      qexc.push_back(qe);
    }
    const SparseMatrix& V = model.coupling().matrix();
    for (int r = 0; r < V.outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(V, r); it; ++it) {
        int sr = sec_of[static_cast<size_t>(it.row())];
        int sc = sec_of[static_cast<size_t>(it.col())];
        if (sr != sc) throw std::logic_error("coupling does not conserve total excitation");
        vblock[static_cast<size_t>(sr)](loc_of[static_cast<size_t>(it.row())], loc_of[static_cast<size_t>(it.col())]) +=
            it.value();
      }
    }
    setup_dissipator();
  }

  void setup_dissipator() {
    decay_rate.clear();
    for (const auto& s : sec) decay_rate.push_back(RealVector::Zero(static_cast<Eigen::Index>(s.size())));
    for (const auto& j : m.jump_operators()) {
      if (j.rate <= 0.0) continue;
      has_dissipation = true;
      const SparseMatrix& L = j.op.matrix();
      bool diagonal = true;
      int shift = 0;
      bool shift_set = false;
      for (int r = 0; r < L.outerSize(); ++r) {
        for (SparseMatrix::InnerIterator it(L, r); it; ++it) {
          if (it.row() != it.col()) diagonal = false;
          int sh = sec_of[static_cast<size_t>(it.col())] - sec_of[static_cast<size_t>(it.row())];
          if (!shift_set) {
            shift = sh;
            shift_set = true;
          } else if (sh != shift) {
            throw std::invalid_argument("jump operator " + j.label + " mixes excitation shifts");
          }
        }
      }
      if (diagonal) {
        std::vector<RealVector> diag;
        for (const auto& s : sec) {
          RealVector v(static_cast<Eigen::Index>(s.size()));
          for (size_t k = 0; k < s.size(); ++k) {
            cplx x = L.coeff(static_cast<Eigen::Index>(s[k]), static_cast<Eigen::Index>(s[k]));
            if (std::abs(x.imag()) > 1e-14) throw std::invalid_argument("complex diagonal jump operator");
            v[static_cast<Eigen::Index>(k)] = x.real();
          }
          diag.push_back(v);
        }
        dephasers.push_back({j.rate, std::move(diag)});
        continue;
      }
      if (shift <= 0) throw std::invalid_argument("jump operator " + j.label + " must lower the excitation number");
      SparseMatrix LdL = L.adjoint() * L;
      for (int r = 0; r < LdL.outerSize(); ++r) {
        for (SparseMatrix::InnerIterator it(LdL, r); it; ++it) {
          if (it.row() != it.col() && std::abs(it.value()) > 1e-14) {
            throw std::invalid_argument("jump operator " + j.label + " has non-diagonal L^dag L");
          }
          if (it.row() == it.col()) {
            size_t i = static_cast<size_t>(it.row());
            decay_rate[static_cast<size_t>(sec_of[i])][loc_of[i]] += j.rate * it.value().real();
          }
        }
      }
      JumpBlock jb;
      jb.shift = shift;
      jb.rate = j.rate;
      for (size_t n = 0; n < sec.size(); ++n) {
        size_t target = n >= static_cast<size_t>(shift) ? n - static_cast<size_t>(shift) : 0;
        Eigen::SparseMatrix<cplx> b(static_cast<Eigen::Index>(sec[target].size()), static_cast<Eigen::Index>(sec[n].size()));
        if (n >= static_cast<size_t>(shift)) {
          std::vector<Eigen::Triplet<cplx>> t;
          for (size_t k = 0; k < sec[n].size(); ++k) {
            size_t col = sec[n][k];
            Eigen::SparseVector<cplx> c = L.col(static_cast<Eigen::Index>(col));
            for (Eigen::SparseVector<cplx>::InnerIterator it(c); it; ++it) {
              t.emplace_back(loc_of[static_cast<size_t>(it.index())], static_cast<int>(k), it.value());
            }
          }
          b.setFromTriplets(t.begin(), t.end());
        }
        jb.blocks.push_back(std::move(b));
      }
      feeds.push_back(std::move(jb));
    }
  }

  std::shared_ptr<Config> config(const std::vector<double>& deltas) {
    auto it = cache.find(deltas);
    if (it != cache.end()) return it->second;
    if (cache.size() >= kMaxCachedConfigs) cache.clear();
    auto c = std::make_shared<Config>();
    for (size_t n = 0; n < sec.size(); ++n) {
      Matrix H = vblock[n];
      RealVector diag = kdiag[n] + sdiag[n];
      for (size_t r = 0; r < deltas.size(); ++r) {
        if (deltas[r] != 0.0) diag += deltas[r] * rnum[n][r];
      }
      H.diagonal() += diag.cast<cplx>();
      Eigen::SelfAdjointEigenSolver<Matrix> es(H);
      c->sectors.push_back({es.eigenvalues(), es.eigenvectors()});
    }
    cache.emplace(deltas, c);
    return c;
  }

  std::shared_ptr<std::vector<Matrix>> unitaries(const std::vector<double>& deltas, double s) {
    auto key = std::make_pair(deltas, s);
    auto it = ucache.find(key);
    if (it != ucache.end()) return it->second;
    if (ucache.size() >= kMaxCachedUnitaries) ucache.clear();
    auto c = config(deltas);
    auto u = std::make_shared<std::vector<Matrix>>();
    for (const auto& se : c->sectors) {
      Vector ph(se.w.size());
      for (Eigen::Index k = 0; k < se.w.size(); ++k) ph[k] = std::polar(1.0, -se.w[k] * s);
      Matrix U;
      U.noalias() = se.V * ph.asDiagonal() * se.V.adjoint();
      u->push_back(std::move(U));
    }
    ucache.emplace(key, u);
    return u;
  }

  // Diagonal phase factors exp(i sign K t) for sector n.
  Vector frame(size_t n, double t, double sign) const {
    Vector f(kdiag[n].size());
    for (Eigen::Index k = 0; k < f.size(); ++k) f[k] = std::polar(1.0, sign * kdiag[n][k] * t);
    return f;
  }

  Vector phase_factors(size_t n, const std::vector<FramePhase>& ph) const {
    Vector f = Vector::Ones(kdiag[n].size());
    for (const auto& p : ph) {
      const RealVector& q = qexc[n][static_cast<size_t>(p.qubit)];
      for (Eigen::Index k = 0; k < f.size(); ++k) {
        if (q[k] != 0.0) f[k] *= std::polar(1.0, -p.phase * q[k]);
      }
    }
    return f;
  }

  std::vector<Matrix> split(const Matrix& psi) const {
    std::vector<Matrix> out;
    for (const auto& s : sec) {
      Matrix b(static_cast<Eigen::Index>(s.size()), psi.cols());
      for (size_t k = 0; k < s.size(); ++k) b.row(static_cast<Eigen::Index>(k)) = psi.row(static_cast<Eigen::Index>(s[k]));
      out.push_back(std::move(b));
    }
    return out;
  }

  Matrix join(const std::vector<Matrix>& blocks, Eigen::Index cols) const {
    Matrix psi(static_cast<Eigen::Index>(m.dim()), cols);
    for (size_t n = 0; n < sec.size(); ++n) {
      for (size_t k = 0; k < sec[n].size(); ++k) psi.row(static_cast<Eigen::Index>(sec[n][k])) = blocks[n].row(static_cast<Eigen::Index>(k));
    }
    return psi;
  }

  const RealMatrix& decay_factors(int n, int mm, double s) {
    auto key = std::make_tuple(n, mm, s);
    auto it = decay_cache.find(key);
    if (it != decay_cache.end()) return it->second;
    if (decay_cache.size() > 4096) decay_cache.clear();
    const auto dn = static_cast<Eigen::Index>(sec[static_cast<size_t>(n)].size());
    const auto dm = static_cast<Eigen::Index>(sec[static_cast<size_t>(mm)].size());
    RealMatrix D(dn, dm);
    const RealVector& an = decay_rate[static_cast<size_t>(n)];
    const RealVector& am = decay_rate[static_cast<size_t>(mm)];
    for (Eigen::Index j = 0; j < dm; ++j) {
      for (Eigen::Index i = 0; i < dn; ++i) {
        double x = 0.5 * (an[i] + am[j]);
        for (const auto& [rate, diag] : dephasers) {
          double dl = diag[static_cast<size_t>(n)][i] - diag[static_cast<size_t>(mm)][j];
          x += 0.5 * rate * dl * dl;
        }
        D(i, j) = std::exp(-s * x);
      }
    }
    return decay_cache.emplace(key, std::move(D)).first->second;
  }
};

PiecewisePropagator::PiecewisePropagator(const DeviceModel& model) : model_(model), impl_(std::make_unique<Impl>(model)) {}
PiecewisePropagator::~PiecewisePropagator() = default;

size_t PiecewisePropagator::cached_configurations() const { return impl_->cache.size(); }

Matrix PiecewisePropagator::propagate(const Matrix& psi, const PulseSchedule& schedule, double t0, double t1,
                                     bool include_start_phases) {
  Impl& I = *impl_;
  if (static_cast<size_t>(psi.rows()) != model_.dim()) throw std::invalid_argument("propagate: dimension mismatch");
  if (t1 < t0) throw std::invalid_argument("propagate: t1 < t0");
  std::vector<Matrix> x = I.split(psi);
  for (size_t n = 0; n < x.size(); ++n) x[n] = I.frame(n, t0, -1.0).asDiagonal() * x[n];
  std::vector<FramePhase> phases = schedule.frame_phases();
  std::stable_sort(phases.begin(), phases.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  size_t next_phase = 0;
  auto apply_phases_until = [&](double t, bool inclusive) {
    std::vector<FramePhase> now;
    while (next_phase < phases.size() &&
           (phases[next_phase].time < t || (inclusive && phases[next_phase].time <= t + 1e-18))) {
      double tp = phases[next_phase].time;
      bool at_start = std::abs(tp - t0) <= 1e-18;
      if (tp >= t0 - 1e-18 && (include_start_phases || !at_start)) now.push_back(phases[next_phase]);
      ++next_phase;
    }
    if (now.empty()) return;
    for (size_t n = 0; n < x.size(); ++n) x[n] = I.phase_factors(n, now).asDiagonal() * x[n];
  };
  std::vector<double> bp = schedule.breakpoints(t0, t1);
  for (size_t k = 0; k + 1 < bp.size(); ++k) {
    apply_phases_until(bp[k], true);
    for (const auto& pc : pieces_of(model_, schedule, bp[k], bp[k + 1])) {
      auto c = I.config(pc.deltas);
      double s = pc.b - pc.a;
      for (size_t n = 0; n < x.size(); ++n) {
        const auto& se = c->sectors[n];
        Matrix y = se.V.adjoint() * x[n];
        for (Eigen::Index i = 0; i < y.rows(); ++i) y.row(i) *= std::polar(1.0, -se.w[i] * s);
        x[n].noalias() = se.V * y;
      }
    }
  }
  apply_phases_until(t1, true);
  for (size_t n = 0; n < x.size(); ++n) x[n] = I.frame(n, t1, +1.0).asDiagonal() * x[n];
  return I.join(x, psi.cols());
}

Trajectory PiecewisePropagator::evolve_pure(const PureState& psi0, const PulseSchedule& schedule,
                                            const IntegratorConfig& config, const std::vector<Observable>& observables) {
  auto start = Clock::now();
  if (static_cast<size_t>(psi0.size()) != model_.dim()) throw std::invalid_argument("evolve: dimension mismatch");
  double t0 = config.t_begin;
  double t1 = config.t_end < 0.0 ? schedule.t_end() : config.t_end;
  if (t1 < t0) throw std::invalid_argument("evolve: t_end < t_begin");
  Trajectory tr;
  for (const auto& o : observables) tr.names.push_back(o.name);
  tr.values.resize(observables.size());
  std::vector<double> rec = config.record_times;
  std::sort(rec.begin(), rec.end());
  for (double t : rec) {
    if (t < t0 - 1e-15 || t > t1 + 1e-15) throw std::invalid_argument("record time outside evolution window");
  }
  Matrix W = model_.computational_isometry();
  auto record = [&](double t, const Vector& psi_i) {
    tr.times.push_back(t);
    for (size_t k = 0; k < observables.size(); ++k) {
      tr.values[k].push_back(observables[k].pure ? observables[k].pure(psi_i) : observables[k].mixed(psi_i * psi_i.adjoint()));
    }
    tr.trace.push_back(psi_i.squaredNorm());
    tr.leakage.push_back(psi_i.squaredNorm() - (W.adjoint() * psi_i).squaredNorm());
  };
  std::vector<double> cuts = merged_times({t0, t1}, rec, t0, t1);
  Vector psi = psi0;
  size_t ri = 0;
  size_t steps = 0;
  for (size_t k = 0; k < cuts.size(); ++k) {
    if (k > 0) {
      // Phases at the left cut were applied by the previous call.
      psi = propagate(psi, schedule, cuts[k - 1], cuts[k], false);
      ++steps;
    } else {
      psi = propagate(psi, schedule, t0, t0);
    }
    while (ri < rec.size() && std::abs(rec[ri] - cuts[k]) <= 1e-15) {
      record(rec[ri], psi);
      ++ri;
    }
  }
  tr.final_pure = psi;
  tr.diagnostics.norm_drift = std::abs(psi.norm() - psi0.norm());
  tr.diagnostics.steps = steps;
  tr.diagnostics.wall_time_s = seconds_since(start);
  if (tr.diagnostics.norm_drift > 1e-9) throw IntegrationError("norm drift exceeds 1e-9");
  return tr;
}

Trajectory PiecewisePropagator::evolve_mixed(const DensityMatrix& rho0, const PulseSchedule& schedule,
                                             const IntegratorConfig& config, const std::vector<Observable>& observables) {
  auto start = Clock::now();
  Impl& I = *impl_;
  const size_t d = model_.dim();
  if (static_cast<size_t>(rho0.rows()) != d || static_cast<size_t>(rho0.cols()) != d) {
    throw std::invalid_argument("evolve: dimension mismatch");
  }
  double t0 = config.t_begin;
  double t1 = config.t_end < 0.0 ? schedule.t_end() : config.t_end;
  if (t1 < t0) throw std::invalid_argument("evolve: t_end < t_begin");
  double h = config.step > 0.0 ? config.step : kDefaultDissipatorStep;

  const size_t ns = I.sec.size();
  using Key = std::pair<int, int>;
  std::map<Key, Matrix> rho;
  std::set<Key> active;
  for (size_t a = 0; a < ns; ++a) {
    for (size_t b = a; b < ns; ++b) {
      double mx = 0.0;
      for (size_t i : I.sec[a]) {
        for (size_t j : I.sec[b]) mx = std::max(mx, std::abs(rho0(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
      }
      if (mx > 0.0) active.insert({static_cast<int>(a), static_cast<int>(b)});
    }
  }
  // Close the active set under the loss feeds.
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& [a, b] : std::vector<Key>(active.begin(), active.end())) {
      for (const auto& f : I.feeds) {
        if (a >= f.shift && b >= f.shift && active.insert({a - f.shift, b - f.shift}).second) grew = true;
      }
    }
  }
  for (const auto& [a, b] : active) {
    Vector fa = I.frame(static_cast<size_t>(a), t0, -1.0);
    Vector fb = I.frame(static_cast<size_t>(b), t0, -1.0);
    Matrix blk(static_cast<Eigen::Index>(I.sec[static_cast<size_t>(a)].size()),
               static_cast<Eigen::Index>(I.sec[static_cast<size_t>(b)].size()));
    for (Eigen::Index i = 0; i < blk.rows(); ++i) {
      for (Eigen::Index j = 0; j < blk.cols(); ++j) {
        blk(i, j) = rho0(static_cast<Eigen::Index>(I.sec[static_cast<size_t>(a)][static_cast<size_t>(i)]),
                         static_cast<Eigen::Index>(I.sec[static_cast<size_t>(b)][static_cast<size_t>(j)])) *
                    fa[i] * std::conj(fb[j]);
      }
    }
    rho[{a, b}] = std::move(blk);
  }

  double herm_drift = 0.0;
  auto symmetrize = [&]() {
    for (auto& [k, blk] : rho) {
      if (k.first != k.second) continue;
      herm_drift = std::max(herm_drift, (blk - blk.adjoint()).cwiseAbs().maxCoeff());
      Matrix s = 0.5 * (blk + blk.adjoint());
      blk = std::move(s);
    }
  };
  auto full_state = [&](double t) {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (const auto& [k, blk] : rho) {
      const auto& sa = I.sec[static_cast<size_t>(k.first)];
      const auto& sb = I.sec[static_cast<size_t>(k.second)];
      Vector fa = I.frame(static_cast<size_t>(k.first), t, +1.0);
      Vector fb = I.frame(static_cast<size_t>(k.second), t, +1.0);
      for (Eigen::Index i = 0; i < blk.rows(); ++i) {
        for (Eigen::Index j = 0; j < blk.cols(); ++j) {
          cplx v = blk(i, j) * fa[i] * std::conj(fb[j]);
          auto gi = static_cast<Eigen::Index>(sa[static_cast<size_t>(i)]);
          auto gj = static_cast<Eigen::Index>(sb[static_cast<size_t>(j)]);
          out(gi, gj) = v;
          if (k.first != k.second) out(gj, gi) = std::conj(v);
        }
      }
    }
    return out;
  };
  // Sources are visited before their targets (feeds lower both sector
  // indices), so a block's midpoint value includes half of what it received
  // during the same substep and cascaded losses stay second order.
  auto dissipate = [&](double s) {
    std::map<Key, Matrix> incoming;
    for (auto rit = rho.rbegin(); rit != rho.rend(); ++rit) {
      const Key& k = rit->first;
      Matrix& blk = rit->second;
      auto in = incoming.find(k);
      if (!I.feeds.empty()) {
        Matrix mid;
        bool have_mid = false;
        for (const auto& f : I.feeds) {
          if (k.first < f.shift || k.second < f.shift) continue;
          if (!have_mid) {
            mid = (blk.array() * I.decay_factors(k.first, k.second, 0.5 * s).array().cast<cplx>()).matrix();
            if (in != incoming.end()) mid += 0.5 * in->second;
            have_mid = true;
          }
          const auto& La = f.blocks[static_cast<size_t>(k.first)];
          const auto& Lb = f.blocks[static_cast<size_t>(k.second)];
          Matrix tmp = La * mid;
          Key target{k.first - f.shift, k.second - f.shift};
          Matrix fed = (s * f.rate) * (tmp * Lb.adjoint());
          fed.array() *= I.decay_factors(target.first, target.second, 0.5 * s).array().cast<cplx>();
          auto it = incoming.find(target);
          if (it == incoming.end()) incoming.emplace(target, std::move(fed));
          else it->second += fed;
        }
      }
      blk.array() *= I.decay_factors(k.first, k.second, s).array().cast<cplx>();
      if (in != incoming.end()) blk += in->second;
    }
  };
  auto unitary = [&](const std::vector<Matrix>& U) {
    for (auto& [k, blk] : rho) {
      Matrix tmp;
      tmp.noalias() = U[static_cast<size_t>(k.first)] * blk;
      blk.noalias() = tmp * U[static_cast<size_t>(k.second)].adjoint();
    }
  };

  std::vector<FramePhase> phases = schedule.frame_phases();
  std::stable_sort(phases.begin(), phases.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  size_t next_phase = 0;
  auto apply_phases_until = [&](double t) {
    std::vector<FramePhase> now;
    while (next_phase < phases.size() && phases[next_phase].time <= t + 1e-18) {
      if (phases[next_phase].time >= t0 - 1e-18) now.push_back(phases[next_phase]);
      ++next_phase;
    }
    if (now.empty()) return;
    std::vector<Vector> f;
    for (size_t n = 0; n < ns; ++n) f.push_back(I.phase_factors(n, now));
    for (auto& [k, blk] : rho) {
      blk = f[static_cast<size_t>(k.first)].asDiagonal() * blk * f[static_cast<size_t>(k.second)].conjugate().asDiagonal();
    }
  };

  Trajectory tr;
  for (const auto& o : observables) tr.names.push_back(o.name);
  tr.values.resize(observables.size());
  std::vector<double> rec = config.record_times;
  std::sort(rec.begin(), rec.end());
  for (double t : rec) {
    if (t < t0 - 1e-15 || t > t1 + 1e-15) throw std::invalid_argument("record time outside evolution window");
  }
  Matrix W = model_.computational_isometry();
  const double tr0 = rho0.trace().real();
  double min_eig = 0.0;
  bool min_eig_set = false;
  auto check_positivity = [&](const Matrix& full) {
    if (!config.monitor_positivity || config.tomography_input) return;
    Eigen::SelfAdjointEigenSolver<Matrix> es(full, Eigen::EigenvaluesOnly);
    double e = es.eigenvalues().minCoeff();
    min_eig = min_eig_set ? std::min(min_eig, e) : e;
    min_eig_set = true;
    if (e < -config.positivity_tolerance) throw IntegrationError("positivity floor below tolerance");
  };
  auto record = [&](double t) {
    Matrix full = full_state(t);
    tr.times.push_back(t);
    for (size_t k = 0; k < observables.size(); ++k) {
      if (!observables[k].mixed) throw std::invalid_argument("observable '" + observables[k].name + "' has no mixed form");
      tr.values[k].push_back(observables[k].mixed(full));
    }
    double trace = full.trace().real();
    tr.trace.push_back(trace);
    tr.leakage.push_back(trace - (W.adjoint() * full * W).trace().real());
    check_positivity(full);
  };

  std::vector<double> cuts = merged_times(schedule.breakpoints(t0, t1), rec, t0, t1);
  size_t ri = 0;
  size_t steps = 0;
  for (size_t k = 0; k < cuts.size(); ++k) {
    apply_phases_until(cuts[k]);
    while (ri < rec.size() && std::abs(rec[ri] - cuts[k]) <= 1e-15) {
      record(rec[ri]);
      ++ri;
    }
    if (k + 1 == cuts.size()) break;
    for (const auto& pc : pieces_of(model_, schedule, cuts[k], cuts[k + 1])) {
      double len = pc.b - pc.a;
      if (!I.has_dissipation) {
        unitary(*I.unitaries(pc.deltas, len));
        ++steps;
        continue;
      }
      int n = std::max(1, static_cast<int>(std::ceil(len / h - 1e-9)));
      double s = len / n;
      auto U = I.unitaries(pc.deltas, s);
      for (int i = 0; i < n; ++i) {
        dissipate(0.5 * s);
        unitary(*U);
        dissipate(0.5 * s);
        symmetrize();
        ++steps;
      }
    }
    if (!I.has_dissipation) symmetrize();
  }
  Matrix final_full = full_state(t1);
  double trf = final_full.trace().real();
  tr.diagnostics.trace_drift = trf - tr0;
  tr.diagnostics.hermiticity_drift = herm_drift;
  if (!config.tomography_input) {
    if (!I.has_dissipation && std::abs(trf - tr0) > config.trace_tolerance) throw IntegrationError("trace drift exceeds tolerance");
    if (I.has_dissipation && trf > tr0 + config.trace_tolerance) throw IntegrationError("trace increased under loss");
    check_positivity(final_full);
  }
  tr.diagnostics.min_eigenvalue = min_eig;
  tr.diagnostics.steps = steps;
  tr.final_mixed = std::move(final_full);
  tr.diagnostics.wall_time_s = seconds_since(start);
  return tr;
}

Trajectory evolve_unitary(const DeviceModel& model, const PureState& psi0, const PulseSchedule& schedule,
                          const IntegratorConfig& config, const std::vector<Observable>& observables) {
  switch (config.method) {
    case Method::kPiecewiseExact: {
      PiecewisePropagator p(model);
      return p.evolve_pure(psi0, schedule, config, observables);
    }
    case Method::kRk4:
      return rk4_evolve_pure(model, psi0, schedule, config, observables, false);
    case Method::kRk4CoMoving:
      return rk4_evolve_pure(model, psi0, schedule, config, observables, true);
  }
  throw std::logic_error("unknown method");
}

Trajectory evolve_lindblad(const DeviceModel& model, const DensityMatrix& rho0, const PulseSchedule& schedule,
                           const IntegratorConfig& config, const std::vector<Observable>& observables) {
  if (config.method == Method::kPiecewiseExact) {
    PiecewisePropagator p(model);
    return p.evolve_mixed(rho0, schedule, config, observables);
  }
  return rk4_evolve_mixed(model, rho0, schedule, config, observables);
}

Observable operator_observable(std::string name, const SparseOperator& op) {
  Observable o;
  o.name = std::move(name);
  SparseMatrix m = op.matrix();
  o.pure = [m](const Vector& psi) { return psi.dot(m * psi).real(); };
  o.mixed = [m](const Matrix& rho) {
    cplx acc = 0.0;
    for (int r = 0; r < m.outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(m, r); it; ++it) acc += it.value() * rho(it.col(), it.row());
    }
    return acc.real();
  };
  return o;
}

Observable qubit_observable(const DeviceModel& model, std::string name, const Matrix& op) {
  const auto n = static_cast<Eigen::Index>(size_t{1} << model.n_qubits());
  if (op.rows() != n || op.cols() != n) throw std::invalid_argument("qubit_observable: wrong dimension");
  if ((op - op.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw std::invalid_argument("qubit_observable: non-Hermitian");
  Matrix W = model.computational_isometry();
  Observable o;
  o.name = std::move(name);
  o.pure = [W, op](const Vector& psi) {
    Vector c = W.adjoint() * psi;
    return c.dot(op * c).real();
  };
  o.mixed = [W, op](const Matrix& rho) {
    Matrix r = W.adjoint() * rho * W;
    return (op * r).trace().real();
  };
  return o;
}

const std::vector<double>& Trajectory::series(const std::string& name) const {
  for (size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return values[k];
  }
  throw std::out_of_range("no observable named '" + name + "'");
}

void Trajectory::write_csv(std::ostream& out) const {
  out << "t_ns";
  for (const auto& n : names) out << "," << n;
  out << ",trace,leakage\n";
  char buf[64];
  for (size_t i = 0; i < times.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6f", to_ns(times[i]));
    out << buf;
    for (const auto& v : values) {
      std::snprintf(buf, sizeof(buf), ",%.10f", v[i]);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.10f,%.10f\n", trace[i], leakage[i]);
    out << buf;
  }
}

double fidelity(const DensityMatrix& rho, const PureState& psi) {
  if (rho.rows() != psi.size() || rho.cols() != psi.size()) throw std::invalid_argument("fidelity: dimension mismatch");
  double v = psi.dot(rho * psi).real();
  return std::sqrt(std::clamp(v, 0.0, 1.0));
}

double fidelity(const PureState& phi, const PureState& psi) {
  if (phi.size() != psi.size()) throw std::invalid_argument("fidelity: dimension mismatch");
  return std::clamp(std::abs(phi.dot(psi)), 0.0, 1.0);
}

double expectation(const DensityMatrix& rho, const Matrix& observable) {
  if ((observable - observable.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("expectation: non-Hermitian observable");
  }
  return (rho * observable).trace().real();
}

double expectation(const DensityMatrix& rho, const SparseOperator& observable) {
  return expectation(rho, observable.dense());
}

double expectation(const PureState& psi, const SparseOperator& observable) {
  if ((observable - observable.adjoint()).nnz() > 0) throw std::invalid_argument("expectation: non-Hermitian observable");
  return psi.dot(observable.apply(psi)).real();
}

QubitReduction qubit_reduce(const DeviceModel& model, const DensityMatrix& rho) {
  Matrix W = model.computational_isometry();
  QubitReduction r;
  Matrix red = W.adjoint() * rho * W;
  double tr_full = rho.trace().real();
  double tr_red = red.trace().real();
  r.leakage = std::clamp(1.0 - tr_red, 0.0, 1.0);
  (void)tr_full;
  if (tr_red < 1e-12) {
    r.fully_leaked = true;
    r.leakage = 1.0;
    r.rho = Matrix::Zero(red.rows(), red.cols());
    return r;
  }
  r.rho = red / tr_red;
  return r;
}

QubitReduction qubit_reduce(const DeviceModel& model, const PureState& psi) {
  return qubit_reduce(model, Matrix(psi * psi.adjoint()));
}

Trajectory run_request(const RunRequest& request) {
  DeviceModel model(request.device, build_cell(request.topology, request.cell));
  Vector psi0 = request.initial_state(model);
  std::vector<Observable> obs = request.observables ? request.observables(model) : std::vector<Observable>{};
  if (request.lindblad) return evolve_lindblad(model, psi0 * psi0.adjoint(), request.schedule, request.config, obs);
  return evolve_unitary(model, psi0, request.schedule, request.config, obs);
}

ConvergenceReport check_convergence(const RunRequest& request, double tolerance) {
  auto deviation = [](const Trajectory& a, const Trajectory& b) {
    if (a.times.size() != b.times.size() || a.values.size() != b.values.size()) {
      throw IntegrationError("refined run has a different record grid");
    }
    double dev = 0.0;
    for (size_t k = 0; k < a.values.size(); ++k) {
      for (size_t i = 0; i < a.times.size(); ++i) dev = std::max(dev, std::abs(a.values[k][i] - b.values[k][i]));
    }
    return dev;
  };
  Trajectory base = run_request(request);
  RunRequest fine = request;
  double h = request.config.step > 0.0 ? request.config.step : kDefaultDissipatorStep;
  fine.config.step = 0.5 * h;
  Trajectory halved = run_request(fine);
  RunRequest wide = request;
  wide.cell.cutoff_margin += 1;
  Trajectory widened = run_request(wide);
  ConvergenceReport r;
  r.tolerance = tolerance;
  r.step_deviation = deviation(base, halved);
  r.cutoff_deviation = deviation(base, widened);
  r.max_deviation = std::max(r.step_deviation, r.cutoff_deviation);
  r.passed = r.max_deviation < tolerance;
  return r;
}

}  // namespace hybridqs
