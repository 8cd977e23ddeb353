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

#include <numbers>
#include <random>

#include "support.hpp"

namespace heraldsim {
namespace {

using testing::single;

constexpr double kPi = std::numbers::pi;

// |<a|b>| for states on the same layout.
double overlap(const PureState& a, const PureState& b) {
  Complex s{};
  for (const auto& [occ, amp] : a.terms()) s += std::conj(amp) * b.amplitude(occ);
  return std::abs(s);
}

PureState plus_state(const ModeLayout& l, int m, double sign) {
  OccupationVector h(l.optical_count()), v(l.optical_count());
  h.set(l.index({m, Pol::H}), 1);
  v.set(l.index({m, Pol::V}), 1);
  const double r = 1.0 / std::sqrt(2.0);
  return PureState::from_terms(l, {{h, Complex{r}}, {v, Complex{sign * r}}});
}

// Probability of exactly one photon in each of spatial modes a and b.
double coincidence(const PureState& s, int a, int b) {
  const auto& l = s.layout();
  double p = 0.0;
  for (const auto& [occ, amp] : s.terms()) {
    int na = 0, nb = 0;
    for (auto i : l.optical_indices(a)) na += occ[i];
    for (auto i : l.optical_indices(b)) nb += occ[i];
    if (na == 1 && nb == 1) p += std::norm(amp);
  }
  return p;
}

TEST(ModeUnitary, RejectsNonUnitary) {
  Eigen::Matrix2cd m;
  m << 1, 1, 0, 1;
  EXPECT_THROW(ModeUnitary({{1, Pol::H}, {1, Pol::V}}, m), std::invalid_argument);
}

TEST(ApplyUnitary, IdentityLeavesStateUnchanged) {
  const PureState s = testing::phi_plus(1, 2);
  const PureState t = apply_unitary(s, polarization_element(1, Eigen::Matrix2cd::Identity()));
  EXPECT_EQ(s.terms(), t.terms());
}

TEST(ApplyUnitary, HongOuMandel) {
  ModeLayout l({1, 2});
  const PureState in = basis_state(l, {{{1, Pol::H}, 1}, {{2, Pol::H}, 1}});
  const PureState out = apply_unitary(in, beam_splitter(1, 2));
  EXPECT_NEAR(coincidence(out, 1, 2), 0.0, 1e-12);
  ASSERT_EQ(out.size(), 2u);
  const PureState two_a = basis_state(l, {{{1, Pol::H}, 2}});
  const PureState two_b = basis_state(l, {{{2, Pol::H}, 2}});
  EXPECT_NEAR(std::norm(out.amplitude(two_a.terms()[0].first)), 0.5, 1e-12);
  EXPECT_NEAR(std::norm(out.amplitude(two_b.terms()[0].first)), 0.5, 1e-12);
  // opposite signs: (|2,0> - |0,2>) / sqrt(2) up to a global phase
  const Complex ratio = out.amplitude(two_a.terms()[0].first) / out.amplitude(two_b.terms()[0].first);
  EXPECT_NEAR(ratio.real(), -1.0, 1e-12);
}

TEST(ApplyUnitary, DistinguishableBinsGiveHalfCoincidence) {
  ModeLayout l({1, 2}, 2);
  const PureState in = basis_state(l, {{{1, Pol::H, 0}, 1}, {{2, Pol::H, 1}, 1}});
  EXPECT_NEAR(coincidence(apply_unitary(in, beam_splitter(1, 2)), 1, 2), 0.5, 1e-12);
}

TEST(ApplyUnitary, InverseRestoresInput) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  ModeLayout l({1, 2});
  const PureState in = basis_state(l, {{{1, Pol::H}, 2}, {{2, Pol::V}, 1}});
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ModeUnitary> us = {hwp(1, ang(rng)), qwp(2, ang(rng)), pbs(1, 2), beam_splitter(1, 2, 0.3),
                                   phase(1, Pol::V, ang(rng))};
    PureState s = in;
    for (const auto& u : us) s = apply_unitary(s, u);
    EXPECT_NEAR(s.norm2(), 1.0, 1e-12);
    for (auto it = us.rbegin(); it != us.rend(); ++it) s = apply_unitary(s, it->adjoint());
    EXPECT_NEAR(overlap(s, in), 1.0, 1e-12);
  }
}

TEST(ApplyUnitary, RandomSingleInputsKeepProbability) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ModeLayout l({1, 2, 3});
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 3);
    PureState s = single(l, m, u(rng) < 0.5 ? Pol::H : Pol::V);
    s = apply_unitary(s, beam_splitter(1, 2, u(rng)));
    s = apply_unitary(s, hwp(2, u(rng) * kPi));
    s = apply_unitary(s, pbs(2, 3));
    s = apply_unitary(s, qwp(3, u(rng) * kPi));
    EXPECT_NEAR(s.norm2(), 1.0, 1e-12);
  }
}

TEST(Waveplates, HalfWaveExamples) {
  ModeLayout l({1});
  const PureState h = single(l, 1, Pol::H), v = single(l, 1, Pol::V);
  EXPECT_NEAR(overlap(apply_unitary(h, hwp(1, deg_to_rad(22.5))), plus_state(l, 1, 1.0)), 1.0, 1e-12);
  EXPECT_NEAR(overlap(apply_unitary(h, hwp(1, deg_to_rad(45))), v), 1.0, 1e-12);
  const PureState vv = apply_unitary(v, hwp(1, 0.0));
  EXPECT_NEAR(vv.amplitude(v.terms()[0].first).real(), -1.0, 1e-12);
}

TEST(Waveplates, QuarterWaveMakesCircular) {
  ModeLayout l({1});
  const PureState d = plus_state(l, 1, 1.0);
  const PureState out = apply_unitary(d, qwp(1, 0.0));
  // |+> through a QWP at 0 is circular: equal weights, relative phase +-i.
  const Complex ah = out.amplitude(single(l, 1, Pol::H).terms()[0].first);
  const Complex av = out.amplitude(single(l, 1, Pol::V).terms()[0].first);
  EXPECT_NEAR(std::abs(ah), std::abs(av), 1e-12);
  EXPECT_NEAR(std::abs((av / ah).real()), 0.0, 1e-12);
  EXPECT_NEAR(std::abs((av / ah).imag()), 1.0, 1e-12);
}

TEST(Waveplates, PhaseActsOnOnePolarization) {
  ModeLayout l({1});
  const PureState out = apply_unitary(plus_state(l, 1, 1.0), phase(1, Pol::V, kPi));
  EXPECT_NEAR(overlap(out, plus_state(l, 1, -1.0)), 1.0, 1e-12);
}

TEST(Pbs, TransmitsHReflectsV) {
  ModeLayout l({1, 2});
  EXPECT_NEAR(overlap(apply_unitary(single(l, 1, Pol::H), pbs(1, 2)), single(l, 1, Pol::H)), 1.0, 1e-12);
  const PureState vb = apply_unitary(single(l, 1, Pol::V), pbs(1, 2));
  EXPECT_NEAR(vb.amplitude(single(l, 2, Pol::V).terms()[0].first).real(), 1.0, 1e-12);
  const PureState hv = basis_state(l, {{{1, Pol::H}, 1}, {{1, Pol::V}, 1}});
  const PureState split = basis_state(l, {{{1, Pol::H}, 1}, {{2, Pol::V}, 1}});
  EXPECT_NEAR(overlap(apply_unitary(hv, pbs(1, 2)), split), 1.0, 1e-12);
}

TEST(Cpbs, SplitsInDiagonalBasis) {
  ModeLayout l({1, 2});
  auto run = [](PureState s, int a, int b) {
    for (const auto& u : cpbs(a, b)) s = apply_unitary(s, u);
    return s;
  };
  const PureState plus_out = run(plus_state(l, 1, 1.0), 1, 2);
  double in_a = 0.0;
  for (const auto& [occ, amp] : plus_out.terms()) {
    for (auto i : l.optical_indices(1)) in_a += occ[i] * std::norm(amp);
  }
  EXPECT_NEAR(in_a, 1.0, 1e-12);
  const PureState minus_out = run(plus_state(l, 1, -1.0), 1, 2);
  double in_b = 0.0;
  for (const auto& [occ, amp] : minus_out.terms()) {
    for (auto i : l.optical_indices(2)) in_b += occ[i] * std::norm(amp);
  }
  EXPECT_NEAR(in_b, 1.0, 1e-12);
}

TEST(Cpbs, TwiceIsIdentityOnSinglePhotons) {
  ModeLayout l({1, 2});
  for (int m : {1, 2}) {
    for (Pol p : {Pol::H, Pol::V}) {
      PureState s = single(l, m, p);
      for (int k = 0; k < 2; ++k) {
        for (const auto& u : cpbs(1, 2)) s = apply_unitary(s, u);
      }
      EXPECT_NEAR(overlap(s, single(l, m, p)), 1.0, 1e-12);
    }
  }
}

TEST(Loss, SinglePhotonHalf) {
  ModeLayout l({1});
  const StateEnsemble out = apply_loss(StateEnsemble(single(l, 1, Pol::H)), LossChannel(1, 0.5));
  ASSERT_EQ(out.size(), 2u);
  const auto r = reduce_to_qubit(out, 1);
  EXPECT_NEAR(r.single, 0.5, 1e-12);
  EXPECT_NEAR(r.vacuum, 0.5, 1e-12);
}

TEST(Loss, UnitTransmissionIsIdentity) {
  const StateEnsemble in(testing::phi_plus(1, 2));
  const StateEnsemble out = apply_loss(in, LossChannel(1, 1.0));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.branches()[0].state.terms(), in.branches()[0].state.terms());
}

TEST(Loss, TwoPhotonBinomial) {
  ModeLayout l({1});
  const double eta = 0.3;
  const StateEnsemble out = apply_loss(StateEnsemble(basis_state(l, {{{1, Pol::H}, 2}})), LossChannel(1, eta));
  const auto r = reduce_to_qubit(out, 1);
  EXPECT_NEAR(r.overflow, eta * eta, 1e-12);
  EXPECT_NEAR(r.single, 2 * eta * (1 - eta), 1e-12);
  EXPECT_NEAR(r.vacuum, (1 - eta) * (1 - eta), 1e-12);
}

TEST(Loss, RejectsOutOfRange) {
  EXPECT_THROW(LossChannel(1, 1.5), std::invalid_argument);
  EXPECT_THROW(LossChannel(1, -0.1), std::invalid_argument);
}

TEST(Loss, TracePreservingAndComposes) {
  ModeLayout l({1, 2});
  const PureState s = apply_unitary(basis_state(l, {{{1, Pol::H}, 2}, {{2, Pol::V}, 1}}), beam_splitter(1, 2));
  const StateEnsemble in(s);
  for (double e1 : {0.0, 0.2, 0.7, 1.0}) {
    for (double e2 : {0.1, 0.5, 0.9}) {
      const StateEnsemble a = apply_loss(apply_loss(in, LossChannel(1, e1)), LossChannel(1, e2));
      const StateEnsemble b = apply_loss(in, LossChannel(1, e1 * e2));
      EXPECT_NEAR(a.total_probability(), 1.0, 1e-12);
      const auto ra = reduce_to_qubits(a, {1, 2}), rb = reduce_to_qubits(b, {1, 2});
      EXPECT_NEAR(ra.weights.a0, rb.weights.a0, 1e-12);
      EXPECT_NEAR(ra.weights.a1, rb.weights.a1, 1e-12);
      EXPECT_NEAR(ra.weights.a2, rb.weights.a2, 1e-12);
      EXPECT_NEAR(ra.weights.overflow, rb.weights.overflow, 1e-12);
    }
  }
}

TEST(Loss, KeepsCoherenceWithinRecord) {
  // phi+ with loss on mode 2: the surviving two-photon part is still phi+.
  const StateEnsemble out = apply_loss(StateEnsemble(testing::phi_plus(1, 2)), LossChannel(2, 0.4));
  const auto r = reduce_to_qubits(out, {1, 2});
  EXPECT_NEAR(r.weights.a2, 0.4, 1e-12);
  ASSERT_TRUE(r.rho);
  EXPECT_NEAR(analytic::bell_fidelity(*r.rho), 1.0, 1e-12);
}

}  // namespace
}  // namespace heraldsim
