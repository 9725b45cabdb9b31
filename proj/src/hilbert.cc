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

#include "hybridqs/hilbert.h"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hybridqs {

namespace {

std::string key_of(std::span<const uint8_t> tuple) {
  return std::string(reinterpret_cast<const char*>(tuple.data()), tuple.size());
}

struct Enumerator {
  const std::vector<ModeSpec>& modes;
  int global_cutoff;
  std::vector<int> group_of;         // per mode, -1 if ungrouped
  std::vector<int> group_cutoff;     // per group
  std::vector<int> group_used;
  std::vector<uint8_t> current;
  std::vector<std::vector<uint8_t>> out;

  // Modes are filled from last to first so that emitted tuples appear in
  // colexicographic order.
  void recurse(int m, int budget) {
    if (m < 0) {
      out.push_back(current);
      return;
    }
    int g = group_of[m];
    int cap = std::min(modes[m].cutoff, budget);
    if (g >= 0) cap = std::min(cap, group_cutoff[g] - group_used[g]);
    for (int n = 0; n <= cap; ++n) {
      current[m] = static_cast<uint8_t>(n);
      if (g >= 0) group_used[g] += n;
      recurse(m - 1, budget - n);
      if (g >= 0) group_used[g] -= n;
    }
    current[m] = 0;
  }
};

}  // namespace

std::string_view mode_kind_name(ModeKind kind) {
  switch (kind) {
    case ModeKind::kPhotonLogical:
      return "photon-logical";
    case ModeKind::kPhotonAuxiliary:
      return "photon-auxiliary";
    case ModeKind::kSpinOscMinus:
      return "spin-osc-minus";
    case ModeKind::kSpinOscPlus:
      return "spin-osc-plus";
    case ModeKind::kTransmon:
      return "transmon";
    case ModeKind::kSpinBath:
      return "spin-bath";
  }
  return "unknown";
}

bool is_bosonic(ModeKind kind) { return kind != ModeKind::kTransmon; }

SpaceDescriptor enumerate_basis(std::vector<ModeSpec> modes, int global_cutoff,
                                std::vector<ExcitationGroup> groups) {
  if (modes.empty()) throw std::invalid_argument("enumerate_basis: empty mode list");
  if (global_cutoff < 0) throw std::invalid_argument("enumerate_basis: global_cutoff < 0");

  SpaceDescriptor s;
  for (size_t i = 0; i < modes.size(); ++i) {
    const ModeSpec& m = modes[i];
    if (m.kind == ModeKind::kTransmon && m.cutoff != 2) {
      throw std::invalid_argument("transmon mode '" + m.id + "' must have cutoff 2");
    }
    if (m.cutoff < 1 || m.cutoff > 255) {
      throw std::invalid_argument("mode '" + m.id + "' has invalid cutoff");
    }
    if (!s.mode_lookup_.emplace(m.id, i).second) {
      throw std::invalid_argument("duplicate mode id '" + m.id + "'");
    }
  }

  Enumerator e{modes, global_cutoff, std::vector<int>(modes.size(), -1), {}, {}, {}, {}};
  for (size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].cutoff < 0) throw std::invalid_argument("group cutoff < 0");
    for (const auto& id : groups[g].mode_ids) {
      auto it = s.mode_lookup_.find(id);
      if (it == s.mode_lookup_.end()) {
        throw std::invalid_argument("group '" + groups[g].name + "' names unknown mode '" + id + "'");
      }
      if (e.group_of[it->second] >= 0) {
        throw std::invalid_argument("mode '" + id + "' belongs to two groups");
      }
      e.group_of[it->second] = static_cast<int>(g);
    }
    e.group_cutoff.push_back(groups[g].cutoff);
    e.group_used.push_back(0);
  }
  e.current.assign(modes.size(), 0);
  e.recurse(static_cast<int>(modes.size()) - 1, global_cutoff);

  s.modes_ = std::move(modes);
  s.groups_ = std::move(groups);
  s.global_cutoff_ = global_cutoff;
  s.dim_ = e.out.size();
  const size_t nm = s.modes_.size();
  s.occ_.reserve(s.dim_ * nm);
  s.nexc_.reserve(s.dim_);
  for (size_t i = 0; i < e.out.size(); ++i) {
    const auto& t = e.out[i];
    s.occ_.insert(s.occ_.end(), t.begin(), t.end());
    int n = 0;
    for (uint8_t x : t) n += x;
    s.nexc_.push_back(n);
    s.index_.emplace(key_of(t), i);
  }
  return s;
}

std::optional<size_t> SpaceDescriptor::find(std::span<const uint8_t> tuple) const {
  if (tuple.size() != modes_.size()) return std::nullopt;
  auto it = index_.find(key_of(tuple));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<size_t> SpaceDescriptor::find(const std::vector<int>& tuple) const {
  std::vector<uint8_t> t(tuple.size());
  for (size_t i = 0; i < tuple.size(); ++i) {
    if (tuple[i] < 0 || tuple[i] > 255) return std::nullopt;
    t[i] = static_cast<uint8_t>(tuple[i]);
  }
  return find(std::span<const uint8_t>(t));
}

size_t SpaceDescriptor::mode_index(std::string_view id) const {
  auto it = mode_lookup_.find(std::string(id));
  if (it == mode_lookup_.end()) {
    throw std::invalid_argument("unknown mode '" + std::string(id) + "'");
  }
  return it->second;
}

bool SpaceDescriptor::has_mode(std::string_view id) const {
  return mode_lookup_.count(std::string(id)) > 0;
}

std::vector<size_t> SpaceDescriptor::modes_in_cavity(std::string_view cavity) const {
  std::vector<size_t> r;
  for (size_t i = 0; i < modes_.size(); ++i) {
    if (modes_[i].cavity == cavity) r.push_back(i);
  }
  return r;
}

int64_t SpaceDescriptor::shifted(size_t index, size_t mode, int delta) const {
  std::vector<uint8_t> t(occupations(index).begin(), occupations(index).end());
  int n = static_cast<int>(t[mode]) + delta;
  if (n < 0 || n > modes_[mode].cutoff) return -1;
  t[mode] = static_cast<uint8_t>(n);
  auto f = find(std::span<const uint8_t>(t));
  return f ? static_cast<int64_t>(*f) : -1;
}

void SpaceDescriptor::write_csv(std::ostream& out) const {
  out << "index";
  for (const auto& m : modes_) out << "," << m.id;
  out << "\n";
  for (size_t i = 0; i < dim_; ++i) {
    out << i;
    for (uint8_t x : occupations(i)) out << "," << static_cast<int>(x);
    out << "\n";
  }
}

std::string SpaceDescriptor::serialize() const {
  std::ostringstream os;
  os << "global_cutoff=" << global_cutoff_ << "\n";
  for (const auto& m : modes_) {
    os << "mode " << m.id << " " << mode_kind_name(m.kind) << " " << m.cutoff << " " << m.cavity << "\n";
  }
  for (const auto& g : groups_) {
    os << "group " << g.name << " " << g.cutoff;
    for (const auto& id : g.mode_ids) os << " " << id;
    os << "\n";
  }
  write_csv(os);
  return os.str();
}

SparseOperator::SparseOperator(size_t dim) : m_(dim, dim) {}

SparseOperator::SparseOperator(size_t dim, const std::vector<SparseEntry>& entries) : m_(dim, dim) {
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.row >= dim || e.col >= dim) throw std::out_of_range("SparseOperator: entry outside dim");
    t.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.value);
  }
  m_.setFromTriplets(t.begin(), t.end());
  m_.prune([](const Eigen::Index&, const Eigen::Index&, const cplx& v) {
    return std::abs(v) >= kDropTolerance;
  });
  m_.makeCompressed();
}

SparseOperator::SparseOperator(SparseMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw std::invalid_argument("SparseOperator must be square");
  m_.prune([](const Eigen::Index&, const Eigen::Index&, const cplx& v) {
    return std::abs(v) >= kDropTolerance;
  });
  m_.makeCompressed();
}

std::vector<SparseEntry> SparseOperator::entries() const {
  std::vector<SparseEntry> r;
  r.reserve(nnz());
  for (int k = 0; k < m_.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m_, k); it; ++it) {
      r.push_back({static_cast<size_t>(it.row()), static_cast<size_t>(it.col()), it.value()});
    }
  }
  return r;
}

SparseOperator SparseOperator::adjoint() const { return SparseOperator(SparseMatrix(m_.adjoint())); }

Vector SparseOperator::apply(const Vector& v) const {
  if (static_cast<size_t>(v.size()) != dim()) throw std::invalid_argument("apply: dimension mismatch");
  return m_ * v;
}

Matrix SparseOperator::apply(const Matrix& m) const {
  if (static_cast<size_t>(m.rows()) != dim()) throw std::invalid_argument("apply: dimension mismatch");
  return m_ * m;
}

static void require_same_dim(const SparseOperator& a, const SparseOperator& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("SparseOperator: dimension mismatch");
}

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
  require_same_dim(a, b);
  return SparseOperator(SparseMatrix(a.m_ + b.m_));
}

SparseOperator operator-(const SparseOperator& a, const SparseOperator& b) {
  require_same_dim(a, b);
  return SparseOperator(SparseMatrix(a.m_ - b.m_));
}

SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
  require_same_dim(a, b);
  return SparseOperator(SparseMatrix(a.m_ * b.m_));
}

SparseOperator operator*(cplx s, const SparseOperator& a) { return SparseOperator(SparseMatrix(s * a.m_)); }

SparseOperator identity_op(const SpaceDescriptor& space) {
  std::vector<SparseEntry> e;
  for (size_t i = 0; i < space.dim(); ++i) e.push_back({i, i, 1.0});
  return SparseOperator(space.dim(), e);
}

SparseOperator ladder(const SpaceDescriptor& space, std::string_view mode_id, Ladder direction) {
  size_t m = space.mode_index(mode_id);
  if (!is_bosonic(space.modes()[m].kind)) {
    throw std::invalid_argument("ladder: mode '" + std::string(mode_id) + "' is a transmon");
  }
  std::vector<SparseEntry> e;
  for (size_t i = 0; i < space.dim(); ++i) {
    int n = space.occupation(i, m);
    if (n == 0) continue;
    int64_t j = space.shifted(i, m, -1);
    if (j < 0) continue;
    // <n-1| b |n> = sqrt(n)
    e.push_back({static_cast<size_t>(j), i, std::sqrt(static_cast<double>(n))});
  }
  SparseOperator lower(space.dim(), e);
  return direction == Ladder::kLower ? lower : lower.adjoint();
}

SparseOperator transmon_transition(const SpaceDescriptor& space, std::string_view cavity, int k) {
  if (k != 0 && k != 1) throw std::invalid_argument("transmon_transition: k must be 0 or 1");
  std::optional<size_t> tm;
  for (size_t m : space.modes_in_cavity(cavity)) {
    if (space.modes()[m].kind == ModeKind::kTransmon) tm = m;
  }
  if (!tm) throw std::invalid_argument("cavity '" + std::string(cavity) + "' hosts no transmon");
  std::vector<SparseEntry> e;
  for (size_t i = 0; i < space.dim(); ++i) {
    if (space.occupation(i, *tm) != k + 1) continue;
    int64_t j = space.shifted(i, *tm, -1);
    if (j >= 0) e.push_back({static_cast<size_t>(j), i, 1.0});
  }
  return SparseOperator(space.dim(), e);
}

SparseOperator number_op(const SpaceDescriptor& space, std::string_view mode_id) {
  size_t m = space.mode_index(mode_id);
  std::vector<SparseEntry> e;
  for (size_t i = 0; i < space.dim(); ++i) {
    int n = space.occupation(i, m);
    if (n) e.push_back({i, i, static_cast<double>(n)});
  }
  return SparseOperator(space.dim(), e);
}

SparseOperator total_excitation_op(const SpaceDescriptor& space) {
  std::vector<SparseEntry> e;
  for (size_t i = 0; i < space.dim(); ++i) {
    int n = space.total_excitation(i);
    if (n) e.push_back({i, i, static_cast<double>(n)});
  }
  return SparseOperator(space.dim(), e);
}

Vector apply(const SparseOperator& op, const Vector& state) { return op.apply(state); }
Matrix apply(const SparseOperator& op, const Matrix& state) { return op.apply(state); }

StateCheck check_density_matrix(const DensityMatrix& rho) {
  StateCheck c;
  c.trace = rho.trace().real();
  c.hermiticity = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
  c.min_eigenvalue = es.eigenvalues().minCoeff();
  return c;
}

double norm_error(const PureState& psi) { return std::abs(psi.norm() - 1.0); }

}  // namespace hybridqs
