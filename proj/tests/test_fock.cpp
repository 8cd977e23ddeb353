// Copyright 2026 The heraldsim Authors
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

#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

namespace heraldsim {
namespace {

using testing::phi_plus;
using testing::single;

TEST(ModeLayout, OpticalCountAndOrder) {
  ModeLayout l({2, 1}, 2);
  EXPECT_EQ(l.optical_count(), 2u * 2u * 2u);
  EXPECT_EQ(l.spatial_modes(), (std::vector<int>{1, 2}));
  // spatial, then H before V, then bin
  EXPECT_EQ(l.index({1, Pol::H, 0}), 0u);
  EXPECT_EQ(l.index({1, Pol::H, 1}), 1u);
  EXPECT_EQ(l.index({1, Pol::V, 0}), 2u);
  EXPECT_EQ(l.index({2, Pol::H, 0}), 4u);
  for (std::size_t i = 0; i < l.optical_count(); ++i) EXPECT_EQ(l.index(l.mode_at(i)), i);
}

TEST(ModeLayout, RejectsDuplicateLabels) {
  EXPECT_THROW(ModeLayout({1, 1}), std::invalid_argument);
  EXPECT_THROW(ModeLayout({1}, 3), std::invalid_argument);
}

TEST(Vacuum, SingleZeroTerm) {
  ModeLayout l({1, 2});
  const PureState v = vacuum(l);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v.terms()[0].first.total(), 0);
  EXPECT_EQ(v.terms()[0].first.size(), 4u);
  EXPECT_EQ(v.terms()[0].second, Complex(1.0));
  EXPECT_DOUBLE_EQ(v.norm2(), 1.0);
  EXPECT_EQ(to_debug_string(v), "(0,0,0,0): 1, 0\n");
}

TEST(Vacuum, TensorOfVacuaIsVacuum) {
  const PureState v = tensor(vacuum(ModeLayout({1})), vacuum(ModeLayout({2})));
  const PureState w = vacuum(ModeLayout({1, 2}));
  EXPECT_EQ(v.layout(), w.layout());
  EXPECT_EQ(v.terms(), w.terms());
}

TEST(Tensor, CountsConcatenate) {
  const PureState s = tensor(single(ModeLayout({1}), 1, Pol::H), single(ModeLayout({2}), 2, Pol::V));
  ASSERT_EQ(s.size(), 1u);
  const auto& occ = s.terms()[0].first;
  EXPECT_EQ(occ[s.layout().index({1, Pol::H})], 1);
  EXPECT_EQ(occ[s.layout().index({2, Pol::V})], 1);
  EXPECT_EQ(occ.total(), 2);
}

TEST(Tensor, VacuumPreservesAmplitudes) {
  const PureState a = phi_plus(1, 2);
  const PureState s = tensor(a, vacuum(ModeLayout({3})));
  ASSERT_EQ(s.size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(s.terms()[i].second, a.terms()[i].second);
}

TEST(Tensor, ProductRule) {
  const PureState s = tensor(phi_plus(1, 2), phi_plus(3, 4));
  EXPECT_EQ(s.size(), 4u);
  EXPECT_NEAR(s.norm2(), 1.0, 1e-12);
  const PureState half = phi_plus(1, 2).scaled(std::sqrt(0.5));
  EXPECT_NEAR(tensor(half, phi_plus(3, 4)).norm2(), 0.5, 1e-12);
}

TEST(Tensor, OverlappingLabelsThrow) {
  EXPECT_THROW(tensor(vacuum(ModeLayout({1, 2})), vacuum(ModeLayout({2}))), std::invalid_argument);
}

TEST(PureState, PrunesTinyAmplitudes) {
  ModeLayout l({1});
  OccupationVector a(2), b(2);
  b.set(0, 1);
  const PureState s = PureState::from_terms(l, {{a, Complex{1.0}}, {b, Complex{1e-16}}});
  EXPECT_EQ(s.size(), 1u);
  EXPECT_NEAR(s.pruned_probability(), 1e-32, 1e-40);
}

TEST(PureState, MergesRepeatedOccupations) {
  ModeLayout l({1});
  OccupationVector a(2);
  const PureState s = PureState::from_terms(l, {{a, Complex{0.5}}, {a, Complex{0.5}}});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.terms()[0].second, Complex(1.0));
}

TEST(ReduceToQubits, ProductHH) {
  ModeLayout l({1, 6});
  const PureState s = basis_state(l, {{{1, Pol::H}, 1}, {{6, Pol::H}, 1}});
  const auto r = reduce_to_qubits(StateEnsemble(s), {1, 6});
  EXPECT_NEAR(r.weights.a2, 1.0, 1e-15);
  ASSERT_TRUE(r.rho);
  Eigen::Matrix4cd expect = Eigen::Matrix4cd::Zero();
  expect(0, 0) = 1.0;
  EXPECT_LT((r.rho->matrix() - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ReduceToQubits, VacuumAndSingleMixture) {
  ModeLayout l({1, 6});
  StateEnsemble e(l, {{0.5, vacuum(l), "a"}, {0.5, single(l, 1, Pol::H), "b"}});
  const auto r = reduce_to_qubits(e, {1, 6});
  EXPECT_NEAR(r.weights.a0, 0.5, 1e-15);
  EXPECT_NEAR(r.weights.a1, 0.5, 1e-15);
  EXPECT_EQ(r.weights.a2, 0.0);
  EXPECT_FALSE(r.rho);
}

TEST(ReduceToQubits, PhiPlusHasUnitFidelity) {
  const auto r = reduce_to_qubits(StateEnsemble(phi_plus(1, 6)), {1, 6});
  ASSERT_TRUE(r.rho);
  EXPECT_NEAR(analytic::bell_fidelity(*r.rho), 1.0, 1e-12);
  EXPECT_TRUE(r.rho->is_valid());
}

TEST(ReduceToQubits, OverflowIsSeparate) {
  ModeLayout l({1, 6});
  const PureState two = basis_state(l, {{{1, Pol::H}, 2}, {{6, Pol::V}, 1}});
  StateEnsemble e(l, {{0.25, two, ""}, {0.75, phi_plus(1, 6), ""}});
  const auto r = reduce_to_qubits(e, {1, 6});
  EXPECT_NEAR(r.weights.overflow, 0.25, 1e-15);
  EXPECT_NEAR(r.weights.a2, 0.75, 1e-15);
  EXPECT_NEAR(r.weights.total(), e.total_probability(), 1e-12);
}

TEST(ReduceToQubits, SectorCompletenessRandom) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ModeLayout l({1, 6});
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PureState::Term> terms;
    for (int k = 0; k < 6; ++k) {
      OccupationVector o(l.optical_count());
      for (std::size_t i = 0; i < o.size(); ++i) o.set(i, static_cast<int>(rng() % 2));
      terms.emplace_back(o, Complex(u(rng), u(rng)));
    }
    const auto s = PureState::from_terms(l, terms).normalized();
    const StateEnsemble e(l, {{0.6, s, ""}, {0.4, vacuum(l), ""}});
    const auto r = reduce_to_qubits(e, {1, 6});
    EXPECT_NEAR(r.weights.total(), 1.0, 1e-12);
    if (r.rho) EXPECT_TRUE(r.rho->is_valid());
  }
}

TEST(StateEnsemble, RejectsNegativeWeightAndMixedLayouts) {
  ModeLayout l({1});
  EXPECT_THROW(StateEnsemble(l, {{-0.1, vacuum(l), ""}}), std::invalid_argument);
  EXPECT_THROW(StateEnsemble(l, {{1.0, vacuum(ModeLayout({2})), ""}}), std::invalid_argument);
}

TEST(SpectralCompress, KeepsDensityOperator) {
  ModeLayout l({1, 6});
  const PureState a = phi_plus(1, 6);
  // Three copies of one ray plus an orthogonal state: rank 2.
  StateEnsemble e(l, {{0.2, a, ""}, {0.3, a, ""}, {0.1, a, ""}, {0.4, basis_state(l, {{{1, Pol::H}, 1}}), ""}});
  const StateEnsemble c = spectral_compress(e);
  EXPECT_EQ(c.size(), 2u);
  EXPECT_NEAR(c.total_probability(), 1.0, 1e-12);
  const auto r0 = reduce_to_qubits(e, {1, 6});
  const auto r1 = reduce_to_qubits(c, {1, 6});
  EXPECT_NEAR(r0.weights.a1, r1.weights.a1, 1e-12);
  EXPECT_NEAR(r0.weights.a2, r1.weights.a2, 1e-12);
  EXPECT_LT((r0.rho->matrix() - r1.rho->matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(QubitDensityMatrix, ValidityChecks) {
  Eigen::Vector4cd psi(1, 0, 0, 1);
  const auto rho = QubitDensityMatrix::from_pure(psi);
  EXPECT_TRUE(rho.is_valid());
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
  Eigen::Matrix4cd bad = Eigen::Matrix4cd::Identity();
  bad(0, 0) = -1.0;
  EXPECT_FALSE(QubitDensityMatrix(bad).is_valid());
}

}  // namespace
}  // namespace heraldsim
