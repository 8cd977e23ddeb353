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

namespace heraldsim::analytic {
namespace {

QubitDensityMatrix bell_projector(Complex hh, Complex hv, Complex vh, Complex vv) {
  Eigen::Vector4cd psi(hh, hv, vh, vv);
  return QubitDensityMatrix::from_pure(psi / psi.norm());
}

TEST(NoiseBudget, HalfTransmission) {
  const auto b = noise_budget(1, 0.02, 0.5);
  EXPECT_NEAR(b.p0, 1e-6, 1e-18);
  EXPECT_NEAR(b.p1, 1e-8, 1e-20);
  EXPECT_NEAR(b.success_rate, 0.990, 5e-4);
}

TEST(NoiseBudget, UnitTransmissionCollapses) {
  const auto b = noise_budget(1, 0.02, 1);
  EXPECT_NEAR(b.p2, 1e-6, 1e-18);
  EXPECT_NEAR(b.p3, 1.25e-7, 1e-19);
}

TEST(NoiseBudget, SuccessRateOnConstraint) {
  EXPECT_NEAR(noise_budget(1, 0.02, 0.03).success_rate, 0.857, 5e-4);
  EXPECT_NEAR(noise_budget(0.06, 0.02, 0.5).success_rate, 6.0 / 7.0, 1e-12);
}

TEST(NoiseBudget, SuccessRateDependsOnlyOnGammaEta) {
  for (double ge : {0.01, 0.03, 0.2}) {
    const double expect = 1.0 / (1.0 + 0.02 / (4 * ge));
    for (double eta : {ge, 0.3, 0.6, 1.0}) {
      if (ge / eta > 1.0) continue;
      EXPECT_NEAR(noise_budget(ge / eta, 0.02, eta).success_rate, expect, 1e-12);
    }
  }
}

TEST(NoiseBudget, ModelEfficiencyMonotoneAndAboveDirect) {
  double last = 1.0;
  for (int i = 0; i <= 40; ++i) {
    const double eta = 1.0 - i * (1.0 - 0.03) / 40;
    const auto b = noise_budget(sweep_constraint(0.02, eta, 6e-4), 0.02, eta);
    EXPECT_LE(b.heralding_eff_model, last + 1e-15);
    if (eta < 1.0) EXPECT_GT(b.heralding_eff_model, eta);
    last = b.heralding_eff_model;
  }
}

TEST(NoiseBudget, RejectsOutOfRange) {
  EXPECT_THROW(noise_budget(1.1, 0.02, 0.5), std::invalid_argument);
  EXPECT_THROW(noise_budget(1, 0.0, 0.5), std::invalid_argument);
  EXPECT_THROW(noise_budget(1, 0.25, 0.5), std::invalid_argument);
  EXPECT_THROW(noise_budget(1, 0.02, 0.0), std::invalid_argument);
}

TEST(SweepConstraint, Examples) {
  EXPECT_NEAR(sweep_constraint(0.02, 0.5, 6e-4), 0.06, 1e-15);
  EXPECT_DOUBLE_EQ(sweep_constraint(0.02, 0.03, 6e-4), 1.0);
}

TEST(SweepConstraint, InfeasibleNamesMinimumEta) {
  try {
    sweep_constraint(0.02, 0.01, 6e-4);
    FAIL() << "expected domain_error";
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("0.03"), std::string::npos) << e.what();
  }
}

TEST(CloningFidelity, Examples) {
  EXPECT_DOUBLE_EQ(cloning_fidelity(1), 1.0);
  EXPECT_NEAR(cloning_fidelity(2), 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(cloning_fidelity(1e9), 2.0 / 3.0, 1e-9);
  EXPECT_THROW(cloning_fidelity(0.5), std::invalid_argument);
}

TEST(ClassicalRate, Examples) {
  const auto s = classical_rate(0.826, 0.01);
  EXPECT_NEAR(s.n_copies, 2.092, 1e-3);
  EXPECT_NEAR(s.rate, 0.0209, 1e-4);
  EXPECT_DOUBLE_EQ(classical_rate(1, 0.3).rate, 0.3);
  const auto two = classical_rate(5.0 / 6.0, 1);
  EXPECT_NEAR(two.n_copies, 2, 1e-12);
  EXPECT_NEAR(two.rate, 2, 1e-12);
}

TEST(ClassicalRate, InvertsCloningFidelity) {
  for (double f : {0.7, 0.75, 0.9, 0.99}) EXPECT_NEAR(cloning_fidelity(classical_rate(f, 1).n_copies), f, 1e-12);
  EXPECT_THROW(classical_rate(2.0 / 3.0, 0.1), std::invalid_argument);
  EXPECT_THROW(classical_rate(1.01, 0.1), std::invalid_argument);
}

TEST(BellFidelity, Examples) {
  EXPECT_NEAR(bell_fidelity(bell_projector(1, 0, 0, 1)), 1.0, 1e-15);
  EXPECT_NEAR(bell_fidelity(QubitDensityMatrix(Eigen::Matrix4cd::Identity() / 4.0)), 0.25, 1e-15);
  EXPECT_NEAR(bell_fidelity(bell_projector(0, 1, -1, 0)), 0.0, 1e-15);
}

TEST(BellFidelity, EqualsPhiPlusOverlap) {
  const Eigen::Vector4cd phi = Eigen::Vector4cd(1, 0, 0, 1) / std::sqrt(2.0);
  for (int k = 0; k < 20; ++k) {
    Eigen::Matrix4cd a = Eigen::Matrix4cd::Random();
    Eigen::Matrix4cd rho = a * a.adjoint();
    rho /= rho.trace();
    const QubitDensityMatrix r(rho);
    EXPECT_NEAR(bell_fidelity(r), (phi.adjoint() * rho * phi)(0, 0).real(), 1e-12);
  }
}

TEST(Estimators, A2) {
  EXPECT_NEAR(a2_estimator(10, 100, 0.611, 0.628), 0.2606, 1e-4);
  EXPECT_NEAR(a2_estimator(100 * 0.611 * 0.628, 100, 0.611, 0.628), 1.0, 1e-12);
  EXPECT_EQ(a2_estimator(0, 100, 0.611, 0.628), 0.0);
  EXPECT_THROW(a2_estimator(1, 0, 0.5, 0.5), std::invalid_argument);
}

TEST(Estimators, Teleport) {
  EXPECT_NEAR(teleport_rate_estimator(62, 1000), 0.062, 1e-15);
  EXPECT_THROW(teleport_rate_estimator(1, 0), std::invalid_argument);
  EXPECT_DOUBLE_EQ(teleport_rate_model(1, 1, 1), 0.5);
  EXPECT_EQ(teleport_rate_model(0, 0.6, 0.4), 0.0);
}

TEST(AdvantageRatio, Examples) {
  EXPECT_NEAR(advantage_ratio(0.062, 0.021), 2.95, 5e-3);
  EXPECT_DOUBLE_EQ(advantage_ratio(0.3, 0.3), 1.0);
  EXPECT_EQ(advantage_ratio(0.0, 0.3), 0.0);
  EXPECT_THROW(advantage_ratio(0.1, 0.0), std::invalid_argument);
}

}  // namespace
}  // namespace heraldsim::analytic
