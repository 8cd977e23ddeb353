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

#ifndef HERALDSIM_ANALYTIC_HPP_
#define HERALDSIM_ANALYTIC_HPP_

#include <cmath>
#include <stdexcept>
#include <string>

#include "heraldsim/fock.hpp"

namespace heraldsim::analytic {

/// Leading-order herald budget for the three-source swap.
///   p0: one pair from every source, both midpoint photons survive.
///   p1: double pairs from both outer sources.
///   p2: midpoint double pair with one outer single pair.
///   p3: midpoint triple pair.
struct NoiseBudget {
  double p0 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
  double success_rate = 0.0;         // p0 / (p0 + p1)
  double heralding_eff_model = 0.0;  // (p0 + p1) / (p0 + p1 + p2 + p3)

  double total() const { return p0 + p1 + p2 + p3; }
};

inline NoiseBudget noise_budget(double gamma, double eps, double eta) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  if (!(eps > 0.0 && eps < 0.25)) throw std::invalid_argument("epsilon must lie in (0, 0.25)");
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in (0, 1]");
  NoiseBudget b;
  const double e3 = eps * eps * eps;
  const double rt = std::sqrt(eta);
  b.p0 = gamma * e3 * eta / 4.0;
  b.p1 = e3 * eps / 16.0;
  b.p2 = gamma * gamma * e3 * (eta * eta / 8.0 + std::pow(eta, 1.5) * (1.0 - rt) / 2.0);
  b.p3 = gamma * gamma * gamma * e3 * eta * eta * (4.0 - 3.0 * rt) * (4.0 - 3.0 * rt) / 64.0;
  b.success_rate = b.p0 / (b.p0 + b.p1);
  b.heralding_eff_model = (b.p0 + b.p1) / b.total();
  return b;
}

/// Midpoint scaling that holds gamma * eps * eta at `constant`.
inline double sweep_constraint(double eps, double eta, double constant) {
  if (!(eps > 0.0) || !(eta > 0.0) || !(constant > 0.0)) {
    throw std::invalid_argument("sweep_constraint: eps, eta and the constant must be positive");
  }
  const double gamma = constant / (eps * eta);
  if (gamma > 1.0 + 1e-12) {
    throw std::domain_error("sweep_constraint: gamma = " + std::to_string(gamma) +
                            " > 1; minimum feasible eta is " + std::to_string(constant / eps));
  }
  return std::min(gamma, 1.0);
}

/// Optimal 1 -> N cloning fidelity (2N + 1) / (3N); N may be fractional.
inline double cloning_fidelity(double n) {
  if (!(n >= 1.0)) throw std::invalid_argument("cloning_fidelity: n must be at least 1");
  return (2.0 * n + 1.0) / (3.0 * n);
}

/// Classical strategy reaching target fidelity f0 by sending N clones
/// through a channel of efficiency eta.
struct ClassicalStrategy {
  double f0 = 1.0;
  double eta = 0.0;
  double n_copies = 1.0;
  double rate = 0.0;
};

inline ClassicalStrategy classical_rate(double f0, double eta) {
  if (!(f0 > 2.0 / 3.0 && f0 <= 1.0)) {
    throw std::invalid_argument("classical_rate: target fidelity must lie in (2/3, 1]");
  }
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("classical_rate: eta must lie in [0, 1]");
  ClassicalStrategy s;
  s.f0 = f0;
  s.eta = eta;
  s.n_copies = 1.0 / (3.0 * f0 - 2.0);
  s.rate = eta * s.n_copies;
  return s;
}

/// <phi+|rho|phi+> via (1 + <XX> + <ZZ> - <YY>) / 4.
inline double bell_fidelity(const QubitDensityMatrix& rho) {
  Eigen::Matrix2cd x, y, z;
  x << 0, 1, 1, 0;
  y << 0, Complex(0, -1), Complex(0, 1), 0;
  z << 1, 0, 0, -1;
  auto corr = [&](const Eigen::Matrix2cd& a) {
    Eigen::Matrix4cd k;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int m = 0; m < 2; ++m)
          for (int n = 0; n < 2; ++n) k(2 * i + m, 2 * j + n) = a(i, j) * a(m, n);
    return (rho.matrix() * k).trace().real();
  };
  return (1.0 + corr(x) + corr(z) - corr(y)) / 4.0;
}

/// Heralding efficiency estimate c6 / (c4 eta1 eta6).
inline double a2_estimator(double c6, double c4, double eta1, double eta6) {
  if (!(c4 > 0.0)) throw std::invalid_argument("a2_estimator: c4 must be positive");
  if (!(eta1 > 0.0 && eta1 <= 1.0 && eta6 > 0.0 && eta6 <= 1.0)) {
    throw std::invalid_argument("a2_estimator: efficiencies must lie in (0, 1]");
  }
  return c6 / (c4 * eta1 * eta6);
}

/// Teleportation efficiency estimate c8 / c5.
inline double teleport_rate_estimator(double c8, double c5) {
  if (!(c5 > 0.0)) throw std::invalid_argument("teleport_rate_estimator: c5 must be positive");
  return c8 / c5;
}

/// a2 * eta_a^2 * eta_p / 2; the 1/2 is the linear-optics BSM success probability.
inline double teleport_rate_model(double a2, double eta_a, double eta_p) {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(a2) || !unit(eta_a) || !unit(eta_p)) {
    throw std::invalid_argument("teleport_rate_model: arguments must lie in [0, 1]");
  }
  return a2 * eta_a * eta_a * eta_p / 2.0;
}

inline double advantage_ratio(double r_quantum, double r_classical) {
  if (!(r_classical > 0.0)) throw std::invalid_argument("advantage_ratio: classical rate must be positive");
  return r_quantum / r_classical;
}

}  // namespace heraldsim::analytic

#endif  // HERALDSIM_ANALYTIC_HPP_
