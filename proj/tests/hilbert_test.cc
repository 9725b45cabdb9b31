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

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

namespace hybridqs {
namespace {

ModeSpec boson(const std::string& id, int cutoff, const std::string& cav = "c") {
  return {id, ModeKind::kPhotonLogical, cutoff, cav};
}

Matrix random_dense(size_t d, std::mt19937& rng) {
  std::normal_distribution<double> n;
  Matrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = cplx(n(rng), n(rng));
  return m;
}

SparseOperator random_sparse(size_t d, std::mt19937& rng) {
  std::uniform_int_distribution<size_t> idx(0, d - 1);
  std::normal_distribution<double> n;
  std::vector<SparseEntry> e;
  for (size_t k = 0; k < 3 * d; ++k) e.push_back({idx(rng), idx(rng), cplx(n(rng), n(rng))});
  return SparseOperator(d, e);
}

TEST(EnumerateBasis, SingleMode) {
  SpaceDescriptor s = enumerate_basis({boson("a", 2)}, 2);
  ASSERT_EQ(s.dim(), 3u);
  for (size_t i = 0; i < 3; ++i) EXPECT_EQ(s.occupation(i, 0), static_cast<int>(i));
}

TEST(EnumerateBasis, TwoModesGlobalCutoffExcludesDoubleOccupation) {
  SpaceDescriptor s = enumerate_basis({boson("a", 1), boson("b", 1)}, 1);
  ASSERT_EQ(s.dim(), 3u);
  EXPECT_EQ(s.find(std::vector<int>{0, 0}).value(), 0u);
  EXPECT_EQ(s.find(std::vector<int>{1, 0}).value(), 1u);
  EXPECT_EQ(s.find(std::vector<int>{0, 1}).value(), 2u);
  EXPECT_FALSE(s.find(std::vector<int>{1, 1}).has_value());
}

TEST(EnumerateBasis, TwoQubitCellMatchesBruteForce) {
  std::vector<ModeSpec> modes;
  for (int mu = 0; mu < 2; ++mu) {
    std::string c = "L" + std::to_string(mu);
    modes.push_back({"a" + std::to_string(mu), ModeKind::kPhotonLogical, 1, c});
    modes.push_back({"bm" + std::to_string(mu), ModeKind::kSpinOscMinus, 1, c});
    modes.push_back({"bp" + std::to_string(mu), ModeKind::kSpinOscPlus, 1, c});
  }
  modes.push_back({"at0", ModeKind::kPhotonAuxiliary, 2, "A0"});
  modes.push_back({"tr0", ModeKind::kTransmon, 2, "A0"});
  SpaceDescriptor s = enumerate_basis(modes, 2);

  // Independent count: walk the full product space.
  size_t count = 0;
  std::vector<int> cut;
  for (const auto& m : modes) cut.push_back(m.cutoff);
  size_t total = 1;
  for (int c : cut) total *= static_cast<size_t>(c + 1);
  for (size_t code = 0; code < total; ++code) {
    size_t r = code;
    int sum = 0;
    std::vector<int> t;
    for (int c : cut) {
      t.push_back(static_cast<int>(r % static_cast<size_t>(c + 1)));
      r /= static_cast<size_t>(c + 1);
      sum += t.back();
    }
    if (sum <= 2) {
      ++count;
      EXPECT_TRUE(s.find(t).has_value());
    }
  }
  EXPECT_EQ(s.dim(), count);
  // 1 vacuum + 8 singles + C(8,2) pairs + 2 double occupations.
  EXPECT_EQ(count, 39u);
  for (size_t i = 0; i < s.dim(); ++i) {
    std::vector<int> t(s.occupations(i).begin(), s.occupations(i).end());
    EXPECT_EQ(s.find(t).value(), i);
  }
}

TEST(EnumerateBasis, GroupCutoff) {
  std::vector<ModeSpec> modes{boson("x", 1), boson("y", 1), boson("z", 1)};
  SpaceDescriptor s = enumerate_basis(modes, 3, {{"g", {"x", "y"}, 1}});
  EXPECT_EQ(s.dim(), 6u);
  EXPECT_FALSE(s.find(std::vector<int>{1, 1, 0}).has_value());
}

TEST(EnumerateBasis, Errors) {
  EXPECT_THROW(enumerate_basis({}, 1), std::invalid_argument);
  EXPECT_THROW(enumerate_basis({boson("a", 1)}, -1), std::invalid_argument);
  EXPECT_THROW(enumerate_basis({boson("a", 1), boson("a", 1)}, 1), std::invalid_argument);
  EXPECT_THROW(enumerate_basis({{"t", ModeKind::kTransmon, 1, "A0"}}, 1), std::invalid_argument);
}

TEST(EnumerateBasis, StableSerialization) {
  std::vector<ModeSpec> m{boson("a", 2), {"t", ModeKind::kTransmon, 2, "A0"}, boson("b", 1)};
  EXPECT_EQ(enumerate_basis(m, 3).serialize(), enumerate_basis(m, 3).serialize());
  std::ostringstream os;
  enumerate_basis({boson("a", 1)}, 1).write_csv(os);
  EXPECT_EQ(os.str(), "index,a\n0,0\n1,1\n");
}

TEST(Ladder, CutoffOne) {
  SpaceDescriptor s = enumerate_basis({boson("a", 1)}, 1);
  Matrix b = ladder(s, "a", Ladder::kLower).dense();
  Matrix expect(2, 2);
  expect << 0, 1, 0, 0;
  EXPECT_LT((b - expect).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Ladder, SqrtTwoElement) {
  SpaceDescriptor s = enumerate_basis({boson("a", 2)}, 2);
  Matrix b = ladder(s, "a", Ladder::kLower).dense();
  EXPECT_NEAR(std::abs(b(1, 2)), std::sqrt(2.0), 1e-15);
  Matrix bd = ladder(s, "a", Ladder::kRaise).dense();
  EXPECT_LT((bd - b.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Ladder, CommutatorIsIdentityInInterior) {
  SpaceDescriptor s = enumerate_basis({boson("a", 3), boson("b", 2)}, 3);
  Matrix b = ladder(s, "a", Ladder::kLower).dense();
  Matrix bd = ladder(s, "a", Ladder::kRaise).dense();
  Matrix c = b * bd - bd * b;
  for (size_t i = 0; i < s.dim(); ++i) {
    // Interior: one more quantum in mode a stays inside the truncation.
    if (s.shifted(i, 0, +1) < 0) continue;
    for (size_t j = 0; j < s.dim(); ++j) {
      if (s.shifted(j, 0, +1) < 0) continue;
      EXPECT_NEAR(std::abs(c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - (i == j ? 1.0 : 0.0)), 0.0, 1e-14);
    }
  }
}

TEST(Ladder, RejectsTransmonAndUnknown) {
  SpaceDescriptor s = enumerate_basis({boson("a", 1), {"t", ModeKind::kTransmon, 2, "A0"}}, 2);
  EXPECT_THROW(ladder(s, "t", Ladder::kLower), std::invalid_argument);
  EXPECT_THROW(ladder(s, "nope", Ladder::kLower), std::invalid_argument);
}

TEST(Transmon, Transitions) {
  SpaceDescriptor s = enumerate_basis({{"t", ModeKind::kTransmon, 2, "A0"}}, 2);
  Matrix x0 = transmon_transition(s, "A0", 0).dense();
  Matrix e0 = Matrix::Zero(3, 3);
  e0(0, 1) = 1.0;
  EXPECT_LT((x0 - e0).cwiseAbs().maxCoeff(), 1e-15);
  SparseOperator x1 = transmon_transition(s, "A0", 1);
  Matrix p2 = (x1.adjoint() * x1).dense();
  Matrix e2 = Matrix::Zero(3, 3);
  e2(2, 2) = 1.0;
  EXPECT_LT((p2 - e2).cwiseAbs().maxCoeff(), 1e-15);
  Vector ground = Vector::Zero(3);
  ground[0] = 1.0;
  EXPECT_EQ(x0.col(0).norm(), 0.0);
  EXPECT_EQ(transmon_transition(s, "A0", 0).apply(ground).norm(), 0.0);
  EXPECT_THROW(transmon_transition(s, "A0", 2), std::invalid_argument);
  EXPECT_THROW(transmon_transition(s, "L0", 0), std::invalid_argument);
}

TEST(SparseOperator, NumberAndAlgebra) {
  SpaceDescriptor s = enumerate_basis({boson("a", 2), boson("b", 2)}, 3);
  SparseOperator n = number_op(s, "a");
  size_t one = s.find(std::vector<int>{1, 0}).value();
  Vector v = Vector::Zero(static_cast<Eigen::Index>(s.dim()));
  v[static_cast<Eigen::Index>(one)] = 1.0;
  EXPECT_NEAR((n.apply(v) - v).norm(), 0.0, 1e-15);

  std::mt19937 rng(7);
  const size_t d = s.dim();
  for (int trial = 0; trial < 5; ++trial) {
    SparseOperator A = random_sparse(d, rng), B = random_sparse(d, rng);
    Matrix x = random_dense(d, rng);
    Vector y = x.col(0);
    EXPECT_LT(((A + B).apply(y) - (A.apply(y) + B.apply(y))).norm(), 1e-12);
    EXPECT_LT(((A * B).dense() - A.dense() * B.dense()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(((A * B).adjoint().dense() - (B.adjoint() * A.adjoint()).dense()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((A.adjoint().adjoint().dense() - A.dense()).cwiseAbs().maxCoeff(), 0.0 + 1e-300);
    EXPECT_LT((A.apply(x) - A.dense() * x).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_THROW(number_op(s, "a").apply(Vector(Vector::Zero(2))), std::invalid_argument);
  SparseOperator small(2);
  EXPECT_THROW(small + number_op(s, "a"), std::invalid_argument);
}

TEST(SparseOperator, CoalescesAndDrops) {
  SparseOperator a(3, {{0, 1, 1.0}, {0, 1, 2.0}, {2, 2, 1e-16}, {1, 1, 0.5}, {1, 1, -0.5}});
  auto e = a.entries();
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].row, 0u);
  EXPECT_EQ(e[0].col, 1u);
  EXPECT_EQ(e[0].value, cplx(3.0));
  EXPECT_THROW(SparseOperator(2, {{2, 0, 1.0}}), std::out_of_range);
}

TEST(SparseOperator, ExcitationGrading) {
  SpaceDescriptor s = enumerate_basis({boson("a", 2), boson("b", 1), {"t", ModeKind::kTransmon, 2, "A0"}}, 3);
  auto shift_of = [&](const SparseOperator& op) {
    std::set<int> shifts;
    for (const auto& e : op.entries()) shifts.insert(s.total_excitation(e.row) - s.total_excitation(e.col));
    return shifts;
  };
  EXPECT_EQ(shift_of(number_op(s, "a")), std::set<int>{0});
  EXPECT_EQ(shift_of(ladder(s, "a", Ladder::kLower)), std::set<int>{-1});
  EXPECT_EQ(shift_of(ladder(s, "a", Ladder::kRaise) * ladder(s, "b", Ladder::kLower)), std::set<int>{0});
  EXPECT_EQ(shift_of(ladder(s, "a", Ladder::kRaise) * transmon_transition(s, "A0", 0)), std::set<int>{0});
  Matrix N = total_excitation_op(s).dense();
  Matrix X = (ladder(s, "a", Ladder::kRaise) * ladder(s, "b", Ladder::kLower)).dense();
  EXPECT_LT((N * X - X * N).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(StateChecks, DensityDiagnostics) {
  Matrix rho = Matrix::Identity(4, 4) / 4.0;
  StateCheck c = check_density_matrix(rho);
  EXPECT_NEAR(c.trace, 1.0, 1e-15);
  EXPECT_EQ(c.hermiticity, 0.0);
  EXPECT_NEAR(c.min_eigenvalue, 0.25, 1e-15);
  Vector psi = Vector::Ones(4) / 2.0;
  EXPECT_LT(norm_error(psi), 1e-15);
}

}  // namespace
}  // namespace hybridqs
