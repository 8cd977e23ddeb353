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

#ifndef HERALDSIM_SOURCES_HPP_
#define HERALDSIM_SOURCES_HPP_

#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>

#include "heraldsim/circuit.hpp"
#include "heraldsim/fock.hpp"
#include "heraldsim/optics.hpp"

namespace heraldsim {

/// Type-II SPDC source modelled as two independent two-mode squeezers, one
/// per polarization. `epsilon` is the probability of exactly one pair from
/// the untruncated source; the emitted probability is gamma * epsilon.
struct SpdcParams {
  double epsilon = 0.02;
  double gamma = 1.0;
  int n_max = 2;
  std::pair<int, int> spatial_pair{1, 2};
  double visibility = 1.0;
  BellState state = BellState::PhiPlus;

  double effective_epsilon() const { return gamma * epsilon; }

  void validate() const {
    if (!(epsilon > 0.0 && epsilon < 0.25)) throw std::invalid_argument("epsilon must lie in (0, 0.25)");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
    if (n_max < 1 || n_max > 3) throw std::invalid_argument("n_max must be 1, 2 or 3");
    if (!(visibility >= 0.0 && visibility <= 1.0)) throw std::invalid_argument("visibility must lie in [0, 1]");
    if (spatial_pair.first == spatial_pair.second) throw std::invalid_argument("source modes must differ");
  }
};

/// Probability of exactly n pairs from the double squeezer with amplitude lambda.
inline double pair_probability(double lambda, int n) {
  const double x = lambda * lambda;
  return (1.0 - x) * (1.0 - x) * (n + 1) * std::pow(x, n);
}

/// Smallest positive lambda with 2 lambda^2 (1 - lambda^2)^2 = eps.
inline double lambda_from_epsilon(double eps) {
  constexpr double kMaxEps = 8.0 / 27.0;  // maximum of 2x(1-x)^2, at x = 1/3
  if (!(eps >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
  if (eps >= kMaxEps) throw std::domain_error("epsilon too large: one-pair probability never exceeds 8/27");
  if (eps == 0.0) return 0.0;
  double lo = 0.0, hi = 1.0 / 3.0;
  for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = 2.0 * mid * (1.0 - mid) * (1.0 - mid);
    (f < eps ? lo : hi) = mid;
  }
  return std::sqrt(0.5 * (lo + hi));
}

/// Probability mass beyond n_max pairs for the untruncated source.
inline double truncation_deficit(const SpdcParams& p) {
  const double lambda = lambda_from_epsilon(p.effective_epsilon());
  double kept = 0.0;
  for (int n = 0; n <= p.n_max; ++n) kept += pair_probability(lambda, n);
  return 1.0 - kept;
}

namespace detail {

// Terms with h H-pairs and v V-pairs; amplitude (1 - lambda^2) lambda^(h+v)
// times the Bell-state sign.
inline void append_pair_terms(const SpdcParams& p, const ModeLayout& layout, double lambda, int n,
                              std::vector<PureState::Term>& terms) {
  const auto [a, b] = p.spatial_pair;
  const bool psi = p.state == BellState::PsiPlus || p.state == BellState::PsiMinus;
  const bool minus = p.state == BellState::PhiMinus || p.state == BellState::PsiMinus;
  const double x = lambda * lambda;
  for (int v = 0; v <= n; ++v) {
    const int h = n - v;
    OccupationVector occ(layout.optical_count());
    occ.add(layout.index({a, Pol::H}), h);
    occ.add(layout.index({a, Pol::V}), v);
    occ.add(layout.index({b, psi ? Pol::V : Pol::H}), h);
    occ.add(layout.index({b, psi ? Pol::H : Pol::V}), v);
    double amp = (1.0 - x) * std::pow(lambda, n);
    if (minus && (v % 2 == 1)) amp = -amp;
    terms.emplace_back(occ, Complex{amp});
  }
}

}  // namespace detail

/// Truncated, renormalized pair state on the source's two spatial modes.
inline PureState spdc_pair(const SpdcParams& p) {
  p.validate();
  const double lambda = lambda_from_epsilon(p.effective_epsilon());
  ModeLayout layout({p.spatial_pair.first, p.spatial_pair.second});
  std::vector<PureState::Term> terms;
  for (int n = 0; n <= p.n_max; ++n) detail::append_pair_terms(p, layout, lambda, n, terms);
  return PureState::from_terms(layout, std::move(terms)).normalized();
}

/// Normalized n-pair component and its probability in the untruncated source.
inline std::pair<double, PureState> spdc_pair_component(const SpdcParams& p, int n) {
  p.validate();
  if (n < 0 || n > p.n_max) throw std::invalid_argument("pair number outside [0, n_max]");
  const double lambda = lambda_from_epsilon(p.effective_epsilon());
  ModeLayout layout({p.spatial_pair.first, p.spatial_pair.second});
  std::vector<PureState::Term> terms;
  detail::append_pair_terms(p, layout, lambda, n, terms);
  PureState s = PureState::from_terms(layout, std::move(terms));
  const double weight = pair_probability(lambda, n);
  if (s.norm2() == 0.0) return {weight, vacuum(layout)};
  return {weight, s.normalized()};
}

/// Spectral-bin rotation for one spatial mode: a_bin0 -> sqrt(V) a_bin0 +
/// sqrt(1 - V) a_bin1 on both polarizations. Needs a two-bin layout with
/// bin 1 empty.
inline ModeUnitary spectral_overlap(int spatial, double visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) throw std::invalid_argument("visibility must lie in [0, 1]");
  const double c = std::sqrt(visibility), s = std::sqrt(1.0 - visibility);
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  for (int p = 0; p < 2; ++p) {
    m(2 * p, 2 * p) = c;
    m(2 * p + 1, 2 * p) = s;
    m(2 * p, 2 * p + 1) = -s;
    m(2 * p + 1, 2 * p + 1) = c;
  }
  return ModeUnitary({{spatial, Pol::H, 0}, {spatial, Pol::H, 1}, {spatial, Pol::V, 0}, {spatial, Pol::V, 1}}, m,
                     /*bin_blind=*/false);
}

/// Adds a heralded single-photon source: the pair (signal, herald) plus a
/// polarization-selective threshold detector on the herald's H output, so a
/// herald click projects the signal photon onto |H> at first order.
inline void heralded_single(circuit::CircuitSpec& spec, const SpdcParams& p, int herald_spatial,
                            double herald_efficiency, const std::string& herald_name = "single:herald") {
  p.validate();
  const auto [a, b] = p.spatial_pair;
  if (herald_spatial != a && herald_spatial != b) {
    throw std::invalid_argument("herald mode must belong to the source pair");
  }
  circuit::Source src{a, b, p.epsilon, p.gamma, p.n_max, p.state, std::nullopt};
  // Sources go in front of the first non-source element.
  auto pos = std::find_if(spec.elements.begin(), spec.elements.end(),
                          [](const circuit::Element& e) { return !std::holds_alternative<circuit::Source>(e); });
  spec.elements.insert(pos, src);
  circuit::Detector det{herald_spatial, Pol::H, herald_efficiency, 0.0};
  spec.detectors.push_back(det);
  spec.heralds.push_back({herald_name, {det.label()}});
}

/// Expands a circuit to two spectral bins: at every beam splitter joining
/// photons of two sources, the input fed by the source that has not yet
/// interfered (lower mode label on ties) is given overlap V with the other.
inline circuit::CircuitSpec enable_partial_distinguishability(const circuit::CircuitSpec& spec, double visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) throw std::invalid_argument("visibility must lie in [0, 1]");
  std::map<int, int> source_of;
  std::size_t last_source = 0;
  int id = 0;
  for (std::size_t i = 0; i < spec.elements.size(); ++i) {
    if (const auto* s = std::get_if<circuit::Source>(&spec.elements[i])) {
      source_of[s->a] = id;
      source_of[s->b] = id;
      ++id;
      last_source = i + 1;
    }
  }
  std::set<int> interfered;
  std::vector<int> rotate;
  for (const auto& e : spec.elements) {
    int a = 0, b = 0;
    if (const auto* p = std::get_if<circuit::Pbs>(&e)) {
      a = p->a;
      b = p->b;
    } else if (const auto* c = std::get_if<circuit::Cpbs>(&e)) {
      a = c->a;
      b = c->b;
    } else {
      continue;
    }
    if (!source_of.count(a) || !source_of.count(b) || source_of[a] == source_of[b]) continue;
    const bool fresh_a = !interfered.count(source_of[a]);
    const bool fresh_b = !interfered.count(source_of[b]);
    int pick = 0;
    if (fresh_a && fresh_b) {
      pick = std::min(a, b);
    } else if (fresh_a) {
      pick = a;
    } else if (fresh_b) {
      pick = b;
    }
    if (pick != 0) rotate.push_back(pick);
    interfered.insert(source_of[a]);
    interfered.insert(source_of[b]);
  }
  circuit::CircuitSpec out = spec;
  std::vector<circuit::Element> extra;
  for (int m : rotate) extra.push_back(circuit::Distinguish{m, visibility});
  out.elements.insert(out.elements.begin() + static_cast<std::ptrdiff_t>(last_source), extra.begin(), extra.end());
  return out;
}

}  // namespace heraldsim

#endif  // HERALDSIM_SOURCES_HPP_
