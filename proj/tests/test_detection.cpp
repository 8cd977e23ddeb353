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

using circuit::Detector;

Detector det(int mode, std::optional<Pol> pol, double eff, double dark = 0.0) { return Detector{mode, pol, eff, dark}; }

double total(const std::vector<PatternProbability>& d) {
  double p = 0.0;
  for (const auto& x : d) p += x.probability;
  return p;
}

StateEnsemble random_ensemble(std::mt19937_64& rng, const ModeLayout& l, int photons) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Branch> branches;
  for (int b = 0; b < 3; ++b) {
    std::vector<PureState::Term> terms;
    for (int k = 0; k < 5; ++k) {
      OccupationVector o(l.optical_count());
      for (int p = 0; p < photons; ++p) o.add(rng() % l.optical_count(), 1);
      terms.emplace_back(o, Complex(u(rng), u(rng)));
    }
    branches.push_back({0.2 + 0.1 * b, PureState::from_terms(l, terms).normalized(), ""});
  }
  return StateEnsemble(l, branches).normalized();
}

TEST(ClickDistribution, TwoPhotonsOnOneDetector) {
  ModeLayout l({1});
  const StateEnsemble e(basis_state(l, {{{1, Pol::H}, 2}}));
  const auto d = pattern_distribution(e, DetectorConfig({det(1, std::nullopt, 0.75)}));
  ASSERT_EQ(d.size(), 2u);
  EXPECT_NEAR(d[0].probability, 0.0625, 1e-15);
  EXPECT_NEAR(d[1].probability, 0.9375, 1e-15);
}

TEST(ClickDistribution, VacuumOnlyEmptyPattern) {
  ModeLayout l({1, 2});
  const auto d = click_distribution(StateEnsemble(vacuum(l)),
                                    DetectorConfig({det(1, Pol::H, 0.9), det(1, Pol::V, 0.9), det(2, std::nullopt, 0.5)}));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].pattern.mask, 0u);
  EXPECT_DOUBLE_EQ(d[0].probability, 1.0);
}

TEST(ClickDistribution, PhiPlusBornRule) {
  const DetectorConfig cfg({det(1, Pol::H, 1), det(1, Pol::V, 1), det(2, Pol::H, 1), det(2, Pol::V, 1)});
  const auto d = pattern_distribution(StateEnsemble(testing::phi_plus(1, 2)), cfg);
  ASSERT_EQ(d.size(), 2u);
  for (const auto& x : d) EXPECT_NEAR(x.probability, 0.5, 1e-15);
  EXPECT_EQ(d[0].pattern, pattern_from_labels(cfg, {"1H", "2H"}));
  EXPECT_EQ(d[1].pattern, pattern_from_labels(cfg, {"1V", "2V"}));
}

TEST(ClickDistribution, DarkCountsOnVacuum) {
  ModeLayout l({1});
  const auto d = pattern_distribution(StateEnsemble(vacuum(l)), DetectorConfig({det(1, std::nullopt, 0.5, 0.01)}));
  ASSERT_EQ(d.size(), 2u);
  EXPECT_NEAR(d[1].probability, 0.01, 1e-15);
}

TEST(ClickDistribution, DetectorLimit) {
  std::vector<Detector> many;
  for (int m = 1; m <= 11; ++m) {
    many.push_back(det(m, Pol::H, 1));
    many.push_back(det(m, Pol::V, 1));
  }
  EXPECT_THROW(DetectorConfig{many}, std::invalid_argument);
}

TEST(ClickDistribution, PovmCompletenessRandom) {
  std::mt19937_64 rng(5);
  ModeLayout l({1, 2, 3});
  const DetectorConfig cfg({det(1, Pol::H, 0.7), det(1, Pol::V, 0.6, 0.01), det(2, std::nullopt, 0.9)});
  for (int t = 0; t < 30; ++t) {
    const auto e = random_ensemble(rng, l, 1 + t % 3);
    EXPECT_NEAR(total(pattern_distribution(e, cfg)), 1.0, 1e-10);
    for (const auto& h : click_distribution(e, cfg)) {
      EXPECT_NEAR(h.conditional.total_probability(), 1.0, 1e-10);
      EXPECT_EQ(h.conditional.layout().spatial_modes(), (std::vector<int>{3}));
    }
  }
}

TEST(ClickDistribution, EfficiencyEqualsLossBeforePerfectDetector) {
  std::mt19937_64 rng(9);
  ModeLayout l({1, 2});
  for (int t = 0; t < 10; ++t) {
    const auto e = random_ensemble(rng, l, 2);
    const auto a = pattern_distribution(e, DetectorConfig({det(1, std::nullopt, 0.35), det(2, Pol::V, 1)}));
    const auto lossy = apply_loss(e, LossChannel(1, 0.35));
    const auto b = pattern_distribution(lossy, DetectorConfig({det(1, std::nullopt, 1), det(2, Pol::V, 1)}));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].pattern, b[i].pattern);
      EXPECT_NEAR(a[i].probability, b[i].probability, 1e-12);
    }
  }
}

TEST(Herald, MatchesClickDistributionEntry) {
  std::mt19937_64 rng(2);
  ModeLayout l({1, 2, 3});
  const DetectorConfig cfg({det(1, std::nullopt, 0.8), det(2, Pol::H, 0.5)});
  const auto e = random_ensemble(rng, l, 2);
  for (const auto& h : click_distribution(e, cfg)) {
    const auto one = herald(e, cfg, h.pattern);
    EXPECT_DOUBLE_EQ(one.probability, h.probability);
  }
}

TEST(Herald, ImpossiblePatternIsEmpty) {
  const DetectorConfig cfg({det(1, Pol::H, 1), det(1, Pol::V, 1), det(2, Pol::H, 1)});
  ModeLayout l({1, 2, 3});
  const StateEnsemble e(basis_state(l, {{{1, Pol::H}, 1}, {{2, Pol::H}, 1}}));
  const auto h = herald(e, cfg, pattern_from_labels(cfg, {"1H", "1V", "2H"}));
  EXPECT_TRUE(h.empty());
  EXPECT_EQ(h.probability, 0.0);
  EXPECT_EQ(h.conditional.size(), 0u);
}

TEST(Herald, IdealSwapPatternLeavesBellState) {
  const auto spec = protocol::build_swap_circuit(protocol::SwapConfig::ideal());
  const StateEnsemble full = evaluate(spec);
  const auto cfg = DetectorConfig::select(spec, {"2H", "2V", "3H", "3V", "4H", "4V", "5H", "5V"});
  // BSM I: both H after the +/- readout; BSM II: H at both cpbs outputs.
  const auto h = herald(full, cfg, pattern_from_labels(cfg, {"2H", "3H", "4H", "5H"}));
  ASSERT_FALSE(h.empty());
  const auto r = reduce_to_qubits(h.conditional, {1, 6});
  EXPECT_NEAR(r.weights.a2, 1.0, 1e-12);
  EXPECT_NEAR(analytic::bell_fidelity(*r.rho), 1.0, 1e-10);
}

TEST(Herald, FirstOrderProbabilityMatchesP0) {
  for (double eps : {0.005, 0.02}) {
    protocol::SwapConfig cfg;
    cfg.epsilon = eps;
    cfg.bsm_efficiency = cfg.eta1 = cfg.eta6 = 1.0;
    const auto r = protocol::run_swap_exact(cfg);
    const double p0 = analytic::noise_budget(1, eps, 1).p0;
    EXPECT_LT(std::abs(r.herald_probability * r.weights.a2 / p0 - 1.0), 5 * eps) << eps;
  }
}

TEST(SampleCounts, VacuumSingleShot) {
  ModeLayout l({1});
  const auto dist = pattern_distribution(StateEnsemble(vacuum(l)), DetectorConfig({det(1, std::nullopt, 1)}));
  const auto c = sample_counts(dist, [](ClickPattern p) { return p.mask ? 15u : 0u; }, 1, 3);
  EXPECT_EQ(c.c4 + c.c5 + c.c6 + c.c8, 0u);
  EXPECT_EQ(c.shots, 1u);
  EXPECT_THROW(sample_counts(dist, [](ClickPattern) { return 0u; }, 0, 3), std::invalid_argument);
}

TEST(SampleCounts, SeedDeterminism) {
  std::vector<PatternProbability> dist = {{{0}, 0.7}, {{1}, 0.2}, {{3}, 0.1}};
  auto cls = [](ClickPattern p) { return p.mask; };
  EXPECT_EQ(sample_counts(dist, cls, 100000, 42), sample_counts(dist, cls, 100000, 42));
  EXPECT_NE(sample_counts(dist, cls, 100000, 42), sample_counts(dist, cls, 100000, 43));
}

TEST(SampleCounts, FrequenciesWithinFourSigma) {
  std::mt19937_64 rng(1);
  ModeLayout l({1, 2});
  const DetectorConfig cfg({det(1, Pol::H, 0.8), det(1, Pol::V, 0.7), det(2, std::nullopt, 0.6, 0.001)});
  const auto dist = pattern_distribution(random_ensemble(rng, l, 2), cfg);
  const std::uint64_t shots = 1000000;
  const auto counts = sample_pattern_counts(dist, shots, 2024);
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double p = dist[i].probability;
    const double sigma = std::sqrt(shots * p * (1 - p));
    EXPECT_LE(std::abs(static_cast<double>(counts[i]) - shots * p), 4 * sigma + 1e-9);
    sum += counts[i];
  }
  EXPECT_EQ(sum, shots);
}

TEST(SampleCounts, JsonRecords) {
  CoincidenceCounts c{1, 2, 3, 4, 10, 7};
  const auto j = counts_to_json(c);
  ASSERT_EQ(j.size(), 4u);
  EXPECT_EQ(j[2]["class"], "c6");
  EXPECT_EQ(j[2]["count"], 3);
  EXPECT_EQ(j[2]["shots"], 10);
  EXPECT_EQ(j[2]["seed"], 7);
}

}  // namespace
}  // namespace heraldsim
