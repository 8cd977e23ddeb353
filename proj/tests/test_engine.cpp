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

#include "support.hpp"

namespace heraldsim {
namespace {

using circuit::CircuitSpec;

double mean_photon_number(const StateEnsemble& e) {
  double n = 0.0;
  for (const auto& b : e.branches()) {
    for (const auto& [occ, amp] : b.state.terms()) n += b.weight * std::norm(amp) * occ.total();
  }
  return n;
}

TEST(Evaluate, SingleSourceMatchesSpdcPair) {
  CircuitSpec spec;
  spec.modes = 2;
  spec.elements.push_back(circuit::Source{1, 2, 0.05, 1.0, 2, BellState::PhiPlus, std::nullopt});
  const StateEnsemble e = evaluate(spec);
  ASSERT_EQ(e.size(), 1u);
  const PureState ref = spdc_pair({0.05, 1, 2, {1, 2}});
  EXPECT_EQ(e.branches()[0].state.terms(), ref.terms());
}

TEST(Evaluate, UnsourcedModesStartInVacuum) {
  CircuitSpec spec;
  spec.modes = 3;
  spec.elements.push_back(circuit::Source{1, 2, 0.02, 1.0, 1, BellState::PhiPlus, std::nullopt});
  const StateEnsemble e = evaluate(spec);
  EXPECT_EQ(e.layout().spatial_modes(), (std::vector<int>{1, 2, 3}));
  EXPECT_NEAR(e.total_probability(), 1.0, 1e-12);
}

TEST(Evaluate, LossKeepsTraceAndLowersPhotonNumber) {
  CircuitSpec spec;
  spec.modes = 2;
  spec.elements.push_back(circuit::Source{1, 2, 0.05, 1.0, 2, BellState::PhiPlus, std::nullopt});
  const double before = mean_photon_number(evaluate(spec));
  spec.elements.push_back(circuit::Loss{1, 0.5});
  const StateEnsemble e = evaluate(spec);
  EXPECT_NEAR(e.total_probability(), 1.0, 1e-12);
  EXPECT_NEAR(mean_photon_number(e), 0.75 * before, 1e-12);
}

TEST(HeraldGroups, MasksFollowFirstUse) {
  const auto spec = protocol::build_swap_circuit(protocol::SwapConfig::ideal());
  const auto groups = herald_groups(spec);
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].name, "swap");
  EXPECT_EQ(groups[0].labels, (std::vector<std::string>{"2H", "3H", "4H", "5H", "4V", "5V", "2V", "3V"}));
  EXPECT_EQ(groups[0].outcomes(), (std::vector<std::string>{"phi+_phi+", "phi+_psi+", "phi-_phi+", "phi-_psi+"}));
  EXPECT_EQ(groups[0].classify(ClickPattern{0b1111}), "phi+_phi+");
  EXPECT_FALSE(groups[0].classify(ClickPattern{0b0111}));
}

// The staged herald measurement must agree with measuring the full output.
void expect_staged_matches_full(const protocol::SwapConfig& cfg) {
  const auto spec = protocol::build_swap_circuit(cfg);
  const auto group = herald_groups(spec).front();
  const auto det = DetectorConfig::select(spec, group.labels);
  const auto full = herald_by(evaluate(spec), det, [&](ClickPattern p) { return group.classify(p); });
  const auto staged = evaluate_heralded(spec);
  ASSERT_EQ(staged.runs.size(), full.size());
  for (const auto& run : staged.runs) {
    const auto& ref = full.at(run.outcomes.at("swap"));
    EXPECT_NEAR(run.probability, ref.probability, 1e-9 * ref.probability);
    const auto a = reduce_to_qubits(run.state, {1, 6}), b = reduce_to_qubits(ref.conditional, {1, 6});
    EXPECT_NEAR(a.weights.a2, b.weights.a2, 1e-9);
    EXPECT_NEAR(a.weights.a1, b.weights.a1, 1e-9);
    ASSERT_EQ(a.rho.has_value(), b.rho.has_value());
    if (a.rho) EXPECT_LT((a.rho->matrix() - b.rho->matrix()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(EvaluateHeralded, MatchesFullMeasurementIdeal) { expect_staged_matches_full(protocol::SwapConfig::ideal()); }

TEST(EvaluateHeralded, MatchesFullMeasurementLossyDistinguishable) {
  auto cfg = protocol::SwapConfig::ideal();
  cfg.eta = 0.5;
  cfg.bsm_efficiency = 0.75;
  cfg.eta1 = 0.6;
  cfg.visibility = 0.9;
  expect_staged_matches_full(cfg);
}

TEST(EvaluateHeralded, FirstOrderRateScalesWithChannel) {
  auto cfg = protocol::SwapConfig::ideal();
  const double p1 = evaluate_heralded(protocol::build_swap_circuit(cfg)).accepted_probability();
  cfg.eta = 0.25;
  const double p025 = evaluate_heralded(protocol::build_swap_circuit(cfg)).accepted_probability();
  EXPECT_NEAR(p025 / p1, 0.25, 1e-9);
}

TEST(EvaluateHeralded, OptionalGroupPoolsRejectedPatterns) {
  CircuitSpec spec;
  spec.modes = 2;
  spec.elements.push_back(circuit::Source{1, 2, 0.02, 1.0, 1, BellState::PhiPlus, std::nullopt});
  spec.detectors.push_back({2, std::nullopt, 0.5, 0.0});
  spec.heralds.push_back({"click", {"2"}});
  const auto strict = evaluate_heralded(spec);
  ASSERT_EQ(strict.runs.size(), 1u);
  const auto loose = evaluate_heralded(spec, {"herald"});
  ASSERT_EQ(loose.runs.size(), 2u);
  EXPECT_NEAR(loose.accepted_probability(), 1.0, 1e-12);
  double rejected = 0.0;
  for (const auto& r : loose.runs) {
    if (r.outcomes.at("herald").empty()) rejected = r.probability;
  }
  EXPECT_NEAR(rejected, 1.0 - strict.accepted_probability(), 1e-12);
}

TEST(TensorEnsembles, WeightsMultiply) {
  ModeLayout a({1}), b({2});
  const StateEnsemble x(a, {{0.25, vacuum(a), ""}, {0.75, testing::single(a, 1, Pol::H), ""}});
  const StateEnsemble y(b, {{0.5, vacuum(b), ""}, {0.5, testing::single(b, 2, Pol::V), ""}});
  const StateEnsemble t = tensor(x, y);
  EXPECT_EQ(t.size(), 4u);
  EXPECT_NEAR(t.total_probability(), 1.0, 1e-15);
  EXPECT_NEAR(t.branches()[3].weight, 0.375, 1e-15);
}

}  // namespace
}  // namespace heraldsim
