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

#include "hybridqs/oracle.h"

#include <bit>
#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

namespace hybridqs {

namespace {

const cplx kI(0.0, 1.0);

int bit_of(uint64_t index, int n, int q) { return static_cast<int>((index >> (n - 1 - q)) & 1u); }

uint64_t with_bit(uint64_t index, int n, int q, int v) {
  uint64_t mask = uint64_t{1} << (n - 1 - q);
  return v ? (index | mask) : (index & ~mask);
}

void check_sites(int n, const std::vector<int>& sites, Eigen::Index local_dim) {
  if ((Eigen::Index{1} << sites.size()) != local_dim) throw std::invalid_argument("embed: local operator size mismatch");
  for (size_t a = 0; a < sites.size(); ++a) {
    if (sites[a] < 0 || sites[a] >= n) throw std::invalid_argument("embed: site out of range");
    for (size_t b = a + 1; b < sites.size(); ++b) {
      if (sites[a] == sites[b]) throw std::invalid_argument("embed: repeated site");
    }
  }
}

uint64_t local_index(uint64_t index, int n, const std::vector<int>& sites) {
  uint64_t l = 0;
  for (int s : sites) l = (l << 1) | static_cast<uint64_t>(bit_of(index, n, s));
  return l;
}

uint64_t replace_local(uint64_t index, int n, const std::vector<int>& sites, uint64_t l) {
  int k = static_cast<int>(sites.size());
  for (int a = 0; a < k; ++a) index = with_bit(index, n, sites[static_cast<size_t>(a)], static_cast<int>((l >> (k - 1 - a)) & 1u));
  return index;
}

// psi <- (U on sites) psi.
void apply_local(int n, const std::vector<int>& sites, const Matrix& U, Vector& psi) {
  const uint64_t d = uint64_t{1} << n;
  const uint64_t dl = uint64_t{1} << sites.size();
  uint64_t site_mask = 0;
  for (int s : sites) site_mask |= uint64_t{1} << (n - 1 - s);
  Vector in(static_cast<Eigen::Index>(dl)), out;
  for (uint64_t base = 0; base < d; ++base) {
    if (base & site_mask) continue;
    for (uint64_t l = 0; l < dl; ++l) in[static_cast<Eigen::Index>(l)] = psi[static_cast<Eigen::Index>(replace_local(base, n, sites, l))];
    out = U * in;
    for (uint64_t l = 0; l < dl; ++l) psi[static_cast<Eigen::Index>(replace_local(base, n, sites, l))] = out[static_cast<Eigen::Index>(l)];
  }
}

Matrix expm_hermitian(const Matrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Vector ph = (es.eigenvalues().cast<cplx>() * (-kI * t)).array().exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

void require_hermitian(const Matrix& H) {
  double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw std::invalid_argument("oracle: Hamiltonian is not Hermitian");
}

}  // namespace

Matrix spin_half(char axis) {
  Matrix s = Matrix::Zero(2, 2);
  switch (axis) {
    case 'x': s(0, 1) = s(1, 0) = 0.5; break;
    case 'y': s(0, 1) = 0.5 * kI; s(1, 0) = -0.5 * kI; break;
    case 'z': s(0, 0) = -0.5; s(1, 1) = 0.5; break;
    default: throw std::invalid_argument(std::string("unknown axis '") + axis + "'");
  }
  return s;
}

Matrix spin_one(char axis) {
  Matrix s = Matrix::Zero(3, 3);
  const double r = 1.0 / std::sqrt(2.0);
  switch (axis) {
    case 'x': s(0, 1) = s(1, 0) = s(1, 2) = s(2, 1) = r; break;
    case 'y':
      s(0, 1) = s(1, 2) = -kI * r;
      s(1, 0) = s(2, 1) = kI * r;
      break;
    case 'z': s(0, 0) = 1.0; s(2, 2) = -1.0; break;
    default: throw std::invalid_argument(std::string("unknown axis '") + axis + "'");
  }
  return s;
}

Matrix embed_operator(int n_qubits, const std::vector<int>& sites, const Matrix& local) {
  check_sites(n_qubits, sites, local.rows());
  const uint64_t d = uint64_t{1} << n_qubits;
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (uint64_t c = 0; c < d; ++c) {
    uint64_t lc = local_index(c, n_qubits, sites);
    for (uint64_t lr = 0; lr < static_cast<uint64_t>(local.rows()); ++lr) {
      cplx v = local(static_cast<Eigen::Index>(lr), static_cast<Eigen::Index>(lc));
      if (v == cplx(0.0)) continue;
      out(static_cast<Eigen::Index>(replace_local(c, n_qubits, sites, lr)), static_cast<Eigen::Index>(c)) += v;
    }
  }
  return out;
}

LocalTerm one_body_term(int site, char axis, double b) { return {{site}, b * spin_half(axis)}; }

LocalTerm two_body_term(int site_a, char axis_a, int site_b, char axis_b, double lambda) {
  if (site_a == site_b) throw std::invalid_argument("two_body_term: identical sites");
  Matrix k = Eigen::kroneckerProduct(spin_half(axis_a), spin_half(axis_b));
  return {{site_a, site_b}, lambda * k};
}

Eigen::VectorXd ExactModel::spectrum() const {
  require_hermitian(hamiltonian);
  return Eigen::SelfAdjointEigenSolver<Matrix>(hamiltonian, Eigen::EigenvaluesOnly).eigenvalues();
}

Matrix ExactModel::propagator(double t) const {
  require_hermitian(hamiltonian);
  return expm_hermitian(hamiltonian, t);
}

Matrix sum_terms(int n_qubits, const std::vector<LocalTerm>& terms) {
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  Matrix H = Matrix::Zero(d, d);
  for (const auto& t : terms) H += embed_operator(n_qubits, t.sites, t.h);
  return H;
}

std::vector<Vector> exact_evolution(const Matrix& H, const Vector& psi0, const std::vector<double>& t_grid) {
  if (H.rows() != H.cols() || H.rows() != psi0.size()) throw std::invalid_argument("exact_evolution: dimension mismatch");
  if (H.rows() > 4096) throw std::invalid_argument("exact_evolution: dimension above 2^12");
  require_hermitian(H);
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  Vector c = es.eigenvectors().adjoint() * psi0;
  std::vector<Vector> out;
  for (double t : t_grid) {
    Vector ph = (es.eigenvalues().cast<cplx>() * (-kI * t)).array().exp();
    out.push_back(es.eigenvectors() * (ph.asDiagonal() * c));
  }
  return out;
}

std::vector<Vector> exact_trotter_steps(int n_qubits, const std::vector<LocalTerm>& terms, const Vector& psi0,
                                        double t, int n) {
  if (n < 1) throw std::invalid_argument("exact_trotter: n must be >= 1");
  if (psi0.size() != (Eigen::Index{1} << n_qubits)) throw std::invalid_argument("exact_trotter: dimension mismatch");
  double tau = t / n;
  std::vector<Matrix> U;
  for (const auto& term : terms) {
    check_sites(n_qubits, term.sites, term.h.rows());
    require_hermitian(term.h);
    U.push_back(expm_hermitian(term.h, tau));
  }
  std::vector<Vector> out;
  Vector psi = psi0;
  for (int s = 0; s < n; ++s) {
    for (size_t k = 0; k < terms.size(); ++k) apply_local(n_qubits, terms[k].sites, U[k], psi);
    out.push_back(psi);
  }
  return out;
}

Vector exact_trotter(int n_qubits, const std::vector<LocalTerm>& terms, const Vector& psi0, double t, int n) {
  return exact_trotter_steps(n_qubits, terms, psi0, t, n).back();
}

Matrix trotter_step_unitary(int n_qubits, const std::vector<LocalTerm>& terms, double tau) {
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  Matrix U = Matrix::Identity(d, d);
  for (const auto& term : terms) U = embed_operator(n_qubits, term.sites, expm_hermitian(term.h, tau)) * U;
  return U;
}

Matrix fermion_creation(int modes, int k) {
  if (k < 0 || k >= modes) throw std::invalid_argument("fermion_creation: mode out of range");
  const uint64_t d = uint64_t{1} << modes;
  Matrix c = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (uint64_t s = 0; s < d; ++s) {
    if (bit_of(s, modes, k)) continue;
    int before = 0;
    for (int j = 0; j < k; ++j) before += bit_of(s, modes, j);
    c(static_cast<Eigen::Index>(with_bit(s, modes, k, 1)), static_cast<Eigen::Index>(s)) = (before % 2) ? -1.0 : 1.0;
  }
  return c;
}

ExactModel fermion_brute_force(int N, int M, double lambda, double U, bool spinful) {
  if (N < 1 || M < 1) throw std::invalid_argument("fermion_brute_force: empty lattice");
  const int sites = N * M;
  if ((!spinful && sites > 9) || (spinful && sites > 4)) throw std::invalid_argument("fermion_brute_force: lattice too large");
  const int species = spinful ? 2 : 1;
  const int modes = sites * species;
  std::vector<Matrix> cd;
  for (int k = 0; k < modes; ++k) cd.push_back(fermion_creation(modes, k));
  const Eigen::Index d = Eigen::Index{1} << modes;
  ExactModel m;
  m.hamiltonian = Matrix::Zero(d, d);
  auto mode = [&](int site, int s) { return site * species + s; };
  for (int r = 0; r < N; ++r) {
    for (int c = 0; c < M; ++c) {
      int mu = r * M + c;
      std::vector<int> nbrs;
      if (c + 1 < M) nbrs.push_back(mu + 1);
      if (r + 1 < N) nbrs.push_back(mu + M);
      for (int nu : nbrs) {
        for (int s = 0; s < species; ++s) {
          Matrix hop = cd[static_cast<size_t>(mode(mu, s))] * cd[static_cast<size_t>(mode(nu, s))].adjoint();
          m.hamiltonian -= lambda * (hop + hop.adjoint());
        }
      }
      if (spinful) {
        Matrix nu = cd[static_cast<size_t>(mode(mu, 0))] * cd[static_cast<size_t>(mode(mu, 0))].adjoint();
        Matrix nd = cd[static_cast<size_t>(mode(mu, 1))] * cd[static_cast<size_t>(mode(mu, 1))].adjoint();
        m.hamiltonian += U * nu * nd;
      }
    }
  }
  for (Eigen::Index s = 0; s < d; ++s) {
    std::string label;
    for (int k = 0; k < modes; ++k) label += bit_of(static_cast<uint64_t>(s), modes, k) ? '1' : '0';
    m.labels.push_back(label);
  }
  return m;
}

ExactModel particle_sector(const ExactModel& model, int modes, int particles) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index s = 0; s < model.hamiltonian.rows(); ++s) {
    if (std::popcount(static_cast<uint64_t>(s)) == particles) keep.push_back(s);
  }
  (void)modes;
  ExactModel out;
  out.hamiltonian = Matrix::Zero(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(keep.size()));
  for (size_t a = 0; a < keep.size(); ++a) {
    for (size_t b = 0; b < keep.size(); ++b) {
      out.hamiltonian(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = model.hamiltonian(keep[a], keep[b]);
    }
    if (!model.labels.empty()) out.labels.push_back(model.labels[static_cast<size_t>(keep[a])]);
  }
  return out;
}

Matrix ideal_gate_matrix(const GateOp& op) {
  op.validate();
  switch (op.kind) {
    case GateOp::Kind::kPhase: {
      Matrix m = Matrix::Identity(2, 2);
      m(1, 1) = std::exp(-kI * op.angle);
      return m;
    }
    case GateOp::Kind::kRotX:
    case GateOp::Kind::kRotY:
      return expm_hermitian(spin_half(op.kind == GateOp::Kind::kRotX ? 'x' : 'y'), op.angle);
    case GateOp::Kind::kCPhase:
    case GateOp::Kind::kCZ: {
      Matrix m = Matrix::Identity(4, 4);
      m(3, 3) = op.kind == GateOp::Kind::kCZ ? cplx(-1.0) : std::exp(-kI * op.angle);
      return m;
    }
    case GateOp::Kind::kStore:
    case GateOp::Kind::kRetrieve:
      return Matrix::Identity(2, 2);
  }
  throw std::logic_error("ideal_gate_matrix: unhandled kind");
}

Matrix ideal_circuit_unitary(int n_qubits, const std::vector<GateOp>& ops) {
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  Matrix U = Matrix::Identity(d, d);
  for (const auto& op : ops) {
    op.validate(n_qubits);
    U = embed_operator(n_qubits, op.support(), ideal_gate_matrix(op)) * U;
  }
  return U;
}

double unitary_process_fidelity(const Matrix& a, const Matrix& b) {
  double d = static_cast<double>(a.rows());
  return std::norm((a.adjoint() * b).trace()) / (d * d);
}

double distance_up_to_phase(const Matrix& a, const Matrix& b) {
  cplx ov = (b.adjoint() * a).trace();
  cplx ph = std::abs(ov) > 0.0 ? ov / std::abs(ov) : cplx(1.0);
  return (a - ph * b).cwiseAbs().maxCoeff();
}

}  // namespace hybridqs
