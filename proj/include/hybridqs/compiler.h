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

// Target Hamiltonians and their first-order Trotter circuits.

#ifndef HYBRIDQS_COMPILER_H_
#define HYBRIDQS_COMPILER_H_

#include <variant>
#include <vector>

#include "hybridqs/gate_op.h"
#include "hybridqs/hilbert.h"
#include "hybridqs/oracle.h"
#include "json.hpp"

namespace hybridqs {

/// b s_axis on one qubit.
struct OneBody {
  int site = 0;
  char axis = 'z';
  double b = 0.0;
};

/// lambda s_a,axis_a s_b,axis_b.
struct TwoBody {
  int site_a = 0;
  char axis_a = 'z';
  int site_b = 1;
  char axis_b = 'z';
  double lambda = 0.0;
};

/// -lambda (s+_mu s-_nu + h.c.) prod_{g in string} (-1)^{n_g}: one
/// Jordan-Wigner hopping term.
struct ParityHop {
  int mu = 0;
  int nu = 1;
  std::vector<int> string;
  double lambda = 0.0;
};

/// Spinless fermions on an N x M lattice (row-major sites, open boundaries).
struct HubbardSpinless {
  int N = 1;
  int M = 2;
  double lambda = 0.0;
};

/// Spinful Hubbard model; site mu uses qubits 2 mu (up) and 2 mu + 1 (down).
struct HubbardSpinful {
  int N = 1;
  int M = 2;
  double lambda = 0.0;
  double U = 0.0;
};

/// Open chain of L spin-1: lambda S_i.S_{i+1} + D S_z^2 + E (S_x^2 - S_y^2).
struct Spin1Chain {
  int L = 1;
  double lambda = 0.0;
  double D = 0.0;
  double E = 0.0;
};

using Term = std::variant<OneBody, TwoBody, ParityHop, HubbardSpinless, HubbardSpinful, Spin1Chain>;
/// Terms with a direct gate decomposition.
using Primitive = std::variant<OneBody, TwoBody, ParityHop>;

struct TargetHamiltonian {
  int n_qubits = 0;
  std::vector<Term> terms;
  /// Energy offset; enters only as a global phase.
  double constant = 0.0;
  /// Set by map_spin1: every A,B pair must start in the triplet sector.
  bool requires_triplet_init = false;

  void validate() const;
};

/// Lowers composite terms to primitives (lattice models through the
/// Jordan-Wigner maps, spin-1 chains through map_spin1). The register size
/// must already cover the composite terms.
std::vector<Primitive> expand_terms(const TargetHamiltonian& H, double* constant = nullptr);

/// Exponential of one primitive: gates applied in list order, with
/// exp(-i h tau) = exp(i global_phase) * (gate product).
struct TermCircuit {
  std::vector<Layer> layers;
  double global_phase = 0.0;
};

/// Eq-style decomposition: (u_a x u_b) Z(phi) (u_a x u_b)^dag with
/// phi = lambda tau, u_x = R_y(pi/2), u_y = R_x(3 pi/2), u_z = 1, and
/// Z(phi) = Phi_a(-phi/2) Phi_b(-phi/2) C-phi(phi).
TermCircuit decompose_two_body(const TwoBody& term, double tau);
TermCircuit decompose_one_body(const OneBody& term, double tau);
/// CZ(mu, g) for g in the string, the xx and yy blocks, the CZ chain again.
TermCircuit decompose_parity_hop(const ParityHop& term, double tau);
TermCircuit decompose(const Primitive& term, double tau);

/// Dense local Hamiltonian of a primitive, as an oracle term.
LocalTerm local_term(const Primitive& term);
/// Qubits touched by the circuit of a primitive.
std::vector<int> term_sites(const Primitive& term);

struct TrotterOptions {
  /// One-body terms go last within a step (default) or first.
  bool one_body_last = true;
  /// Order two-body terms even bonds first, then odd bonds (bond parity is
  /// the parity of the smaller site).
  bool even_odd = true;
  /// Terms whose qubit ranges [min, max] overlap are never placed in the same
  /// parallel group (a long-range gate occupies the cavities in between on a
  /// linear register).
  bool interval_footprint = true;
};

struct TrotterPlan {
  int n_qubits = 0;
  int n = 1;
  double tau = 0.0;
  /// Primitive terms in execution order within one step.
  std::vector<Primitive> terms;
  /// Layers of one Trotter step.
  std::vector<Layer> layers;
  /// provenance[k]: indices into `layers` holding gates of terms[k].
  std::vector<std::vector<size_t>> provenance;
  /// prod_k exp(-i H_k tau) = exp(i step_phase) * (gates of one step).
  double step_phase = 0.0;
  bool requires_triplet_init = false;

  /// Layers of all n steps.
  std::vector<Layer> all_layers() const;
  /// Terms in the oracle's format, same order.
  std::vector<LocalTerm> local_terms() const;
};

TrotterPlan trotterize(const TargetHamiltonian& H, double t, int n, const TrotterOptions& options = {});

/// Spin-1 chain on 2L qubits; single site gives 2D zz + 2E (xx - yy).
TargetHamiltonian map_spin1(const Spin1Chain& chain);
/// Hopping terms of an N x M spinless lattice; vertical hops carry the
/// interposed sites as parity string.
std::vector<ParityHop> jw_spinless(int N, int M, double lambda);
/// Spinful lattice on 2NM qubits: per-species hops with same-species
/// strings (vertical only) and U n_up n_dn = U zz + U/2 (z_up + z_dn) + U/4.
TargetHamiltonian jw_spinful(int N, int M, double lambda, double U);

/// lambda sum s_z s_z over chain bonds + b sum s_x.
TargetHamiltonian tim_hamiltonian(int n_sites, double lambda, double b);
/// lambda (s_1x s_2x + s_1y s_2y).
TargetHamiltonian xy_hamiltonian(double lambda);

/// Dense Hamiltonian of all terms (including the constant).
Matrix target_matrix(const TargetHamiltonian& H);

nlohmann::json hamiltonian_to_json(const TargetHamiltonian& H);
TargetHamiltonian hamiltonian_from_json(const nlohmann::json& j);
nlohmann::json plan_to_json(const TrotterPlan& plan);

}  // namespace hybridqs

#endif  // HYBRIDQS_COMPILER_H_
