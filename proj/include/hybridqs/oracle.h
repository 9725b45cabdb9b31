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

// Reference engines on the target (qubit or fermion) space. Everything here
// is built from dense matrices and shares no code with the pulse model.

#ifndef HYBRIDQS_ORACLE_H_
#define HYBRIDQS_ORACLE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "hybridqs/gate_op.h"
#include "hybridqs/hilbert.h"

namespace hybridqs {

/// Spin-1/2 operator s_axis = sigma_axis / 2 in the (|0>, |1>) basis, with
/// s_z = diag(-1/2, 1/2). `axis` is one of 'x', 'y', 'z'.
Matrix spin_half(char axis);
/// Spin-1 operators in the (m = +1, 0, -1) basis.
Matrix spin_one(char axis);

/// Operator acting as `local` on `sites` (in that order) of an n-qubit
/// register; qubit 0 is the most significant bit.
Matrix embed_operator(int n_qubits, const std::vector<int>& sites, const Matrix& local);

/// One Hamiltonian term H_k acting on `sites`.
struct LocalTerm {
  std::vector<int> sites;
  Matrix h;
};
LocalTerm one_body_term(int site, char axis, double b);
LocalTerm two_body_term(int site_a, char axis_a, int site_b, char axis_b, double lambda);

struct ExactModel {
  Matrix hamiltonian;
  std::vector<std::string> labels;

  Eigen::VectorXd spectrum() const;
  Matrix propagator(double t) const;
};

/// Dense Hamiltonian sum of the terms on n qubits.
Matrix sum_terms(int n_qubits, const std::vector<LocalTerm>& terms);

/// psi(t) = exp(-iHt) psi0 for each t by eigendecomposition. Throws
/// std::invalid_argument if H is not Hermitian within 1e-12 (relative).
std::vector<Vector> exact_evolution(const Matrix& H, const Vector& psi0, const std::vector<double>& t_grid);

/// (prod_k exp(-i H_k tau))^n psi0 with tau = t / n; terms applied in list
/// order (first term first in time).
Vector exact_trotter(int n_qubits, const std::vector<LocalTerm>& terms, const Vector& psi0, double t, int n);
/// States after each of the n steps.
std::vector<Vector> exact_trotter_steps(int n_qubits, const std::vector<LocalTerm>& terms, const Vector& psi0,
                                        double t, int n);
/// One Trotter step as a dense unitary.
Matrix trotter_step_unitary(int n_qubits, const std::vector<LocalTerm>& terms, double tau);

/// Lattice Hubbard model on row-major sites (N rows, M columns) with
/// H = -lambda sum_<mu nu>,s (c+_mu,s c_nu,s + h.c.) + U sum_mu n_mu,up n_mu,dn.
/// Spinless: fermion mode mu; spinful: mode 2 mu (up), 2 mu + 1 (down).
/// Basis: occupation bitstrings, bit (modes - 1 - k) is mode k so the index
/// matches the qubit register ordering. Sign: c+_k contributes
/// (-1)^{number of occupied modes with index < k}.
ExactModel fermion_brute_force(int N, int M, double lambda, double U, bool spinful);
/// Fermion creation / annihilation operator on `modes` modes in the same basis.
Matrix fermion_creation(int modes, int k);
/// Restriction of `model` to a fixed particle number.
ExactModel particle_sector(const ExactModel& model, int modes, int particles);

/// Ideal logical action of `op` on its support (2x2 or 4x4 with qubit order
/// (qubit, qubit_b)). Store / Retrieve act as identity on the logical qubit.
Matrix ideal_gate_matrix(const GateOp& op);
/// Time-ordered product of ideal gates on an n-qubit register.
Matrix ideal_circuit_unitary(int n_qubits, const std::vector<GateOp>& ops);

/// |<a|U|b>| based process fidelity |Tr(A^dag B)|^2 / d^2 between unitaries.
double unitary_process_fidelity(const Matrix& a, const Matrix& b);
/// min over global phase of ||a - e^{i chi} b||_max.
double distance_up_to_phase(const Matrix& a, const Matrix& b);

}  // namespace hybridqs

#endif  // HYBRIDQS_ORACLE_H_
