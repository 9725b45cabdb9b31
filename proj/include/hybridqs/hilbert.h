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

#ifndef HYBRIDQS_HILBERT_H_
#define HYBRIDQS_HILBERT_H_

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace hybridqs {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

/// Pure state of the device (unit-norm complex vector).
using PureState = Vector;
/// Density matrix of the device.
using DensityMatrix = Matrix;

enum class ModeKind {
  kPhotonLogical,
  kPhotonAuxiliary,
  kSpinOscMinus,
  kSpinOscPlus,
  kTransmon,
  /// One discretized component of an inhomogeneously broadened m=-1 ensemble.
  kSpinBath,
};

std::string_view mode_kind_name(ModeKind kind);
bool is_bosonic(ModeKind kind);

struct ModeSpec {
  std::string id;
  ModeKind kind = ModeKind::kPhotonLogical;
  int cutoff = 1;
  std::string cavity;
};

/// Joint excitation cap over a subset of modes, e.g. the discretized
/// components of one spin ensemble share the cutoff of the collective mode.
struct ExcitationGroup {
  std::string name;
  std::vector<std::string> mode_ids;
  int cutoff = 1;
};

/// Truncated product Fock basis. Basis states are enumerated in
/// colexicographic order of the occupation tuples (the first mode varies
/// fastest), so for two modes the order is (0,0), (1,0), (0,1), (1,1), ...
class SpaceDescriptor {
 public:
  SpaceDescriptor() = default;

  const std::vector<ModeSpec>& modes() const { return modes_; }
  int global_cutoff() const { return global_cutoff_; }
  const std::vector<ExcitationGroup>& groups() const { return groups_; }
  size_t dim() const { return dim_; }
  size_t num_modes() const { return modes_.size(); }

  std::span<const uint8_t> occupations(size_t index) const {
    return {occ_.data() + index * modes_.size(), modes_.size()};
  }
  int occupation(size_t index, size_t mode) const {
    return occ_[index * modes_.size() + mode];
  }
  int total_excitation(size_t index) const { return nexc_[index]; }

  /// Basis index of an occupation tuple, if admissible.
  std::optional<size_t> find(std::span<const uint8_t> tuple) const;
  std::optional<size_t> find(const std::vector<int>& tuple) const;

  size_t mode_index(std::string_view id) const;
  bool has_mode(std::string_view id) const;
  std::vector<size_t> modes_in_cavity(std::string_view cavity) const;

  /// Index of the basis state reached by adding `delta` quanta to `mode`,
  /// or -1 when it leaves the truncated space.
  int64_t shifted(size_t index, size_t mode, int delta) const;

  void write_csv(std::ostream& out) const;
  std::string serialize() const;

 private:
  friend SpaceDescriptor enumerate_basis(std::vector<ModeSpec> modes,
                                         int global_cutoff,
                                         std::vector<ExcitationGroup> groups);

  std::vector<ModeSpec> modes_;
  std::vector<ExcitationGroup> groups_;
  int global_cutoff_ = 0;
  size_t dim_ = 0;
  std::vector<uint8_t> occ_;
  std::vector<int> nexc_;
  std::unordered_map<std::string, size_t> index_;
  std::unordered_map<std::string, size_t> mode_lookup_;
};

SpaceDescriptor enumerate_basis(std::vector<ModeSpec> modes, int global_cutoff,
                                std::vector<ExcitationGroup> groups = {});

struct SparseEntry {
  size_t row;
  size_t col;
  cplx value;
};

/// Immutable sparse operator on a SpaceDescriptor basis. Duplicate entries
/// are summed and entries with magnitude below 1e-14 are dropped.
class SparseOperator {
 public:
  static constexpr double kDropTolerance = 1e-14;

  SparseOperator() = default;
  explicit SparseOperator(size_t dim);
  SparseOperator(size_t dim, const std::vector<SparseEntry>& entries);
  explicit SparseOperator(SparseMatrix m);

  size_t dim() const { return static_cast<size_t>(m_.rows()); }
  const SparseMatrix& matrix() const { return m_; }
  size_t nnz() const { return static_cast<size_t>(m_.nonZeros()); }
  std::vector<SparseEntry> entries() const;

  SparseOperator adjoint() const;
  Matrix dense() const { return Matrix(m_); }

  Vector apply(const Vector& v) const;
  Matrix apply(const Matrix& m) const;

  friend SparseOperator operator+(const SparseOperator& a,
                                  const SparseOperator& b);
  friend SparseOperator operator-(const SparseOperator& a,
                                  const SparseOperator& b);
  friend SparseOperator operator*(const SparseOperator& a,
                                  const SparseOperator& b);
  friend SparseOperator operator*(cplx s, const SparseOperator& a);

 private:
  SparseMatrix m_;
};

enum class Ladder { kLower, kRaise };

SparseOperator identity_op(const SpaceDescriptor& space);
SparseOperator ladder(const SpaceDescriptor& space, std::string_view mode_id,
                      Ladder direction);
/// |psi_k><psi_{k+1}| of the transmon housed in `cavity`, k in {0, 1}.
SparseOperator transmon_transition(const SpaceDescriptor& space,
                                   std::string_view cavity, int k);
SparseOperator number_op(const SpaceDescriptor& space,
                         std::string_view mode_id);
/// Sum of all occupations with transmon levels counted as excitations.
SparseOperator total_excitation_op(const SpaceDescriptor& space);

Vector apply(const SparseOperator& op, const Vector& state);
Matrix apply(const SparseOperator& op, const Matrix& state);

struct StateCheck {
  double trace = 0.0;
  double hermiticity = 0.0;
  double min_eigenvalue = 0.0;
};

StateCheck check_density_matrix(const DensityMatrix& rho);
double norm_error(const PureState& psi);

}  // namespace hybridqs

#endif  // HYBRIDQS_HILBERT_H_
