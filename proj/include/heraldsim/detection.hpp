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

#ifndef HERALDSIM_DETECTION_HPP_
#define HERALDSIM_DETECTION_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "heraldsim/circuit.hpp"
#include "heraldsim/fock.hpp"

namespace heraldsim {

inline constexpr std::size_t kMaxDetectors = 20;

/// Threshold detectors, each on one spatial mode (one or both
/// polarizations, all spectral bins). Photon-number blind.
class DetectorConfig {
 public:
  DetectorConfig() = default;
  explicit DetectorConfig(std::vector<circuit::Detector> detectors) : detectors_(std::move(detectors)) {
    if (detectors_.size() > kMaxDetectors) {
      throw std::invalid_argument("more than 20 detectors: pattern enumeration limit exceeded");
    }
    for (const auto& d : detectors_) {
      if (!(d.efficiency >= 0.0 && d.efficiency <= 1.0)) throw std::invalid_argument("efficiency must lie in [0, 1]");
      if (!(d.dark >= 0.0 && d.dark < 1.0)) throw std::invalid_argument("dark probability must lie in [0, 1)");
    }
  }

  /// The subset of `spec`'s detectors with the given labels, in that order.
  static DetectorConfig select(const circuit::CircuitSpec& spec, const std::vector<std::string>& labels) {
    std::vector<circuit::Detector> out;
    for (const auto& l : labels) {
      const auto* d = spec.find_detector(l);
      if (!d) throw std::invalid_argument("unknown detector " + l);
      out.push_back(*d);
    }
    return DetectorConfig(std::move(out));
  }

  const std::vector<circuit::Detector>& detectors() const { return detectors_; }
  std::size_t size() const { return detectors_.size(); }

  int index_of(const std::string& label) const {
    for (std::size_t i = 0; i < detectors_.size(); ++i) {
      if (detectors_[i].label() == label) return static_cast<int>(i);
    }
    return -1;
  }

  bool covers(const OpticalMode& m) const {
    for (const auto& d : detectors_) {
      if (d.mode == m.spatial && (!d.pol || *d.pol == m.pol)) return true;
    }
    return false;
  }

 private:
  std::vector<circuit::Detector> detectors_;
};

/// Set of fired detectors, bit i for detector i of the config.
struct ClickPattern {
  std::uint32_t mask = 0;
  bool fired(std::size_t i) const { return (mask >> i) & 1u; }
  auto operator<=>(const ClickPattern&) const = default;

  std::vector<std::string> labels(const DetectorConfig& det) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < det.size(); ++i) {
      if (fired(i)) out.push_back(det.detectors()[i].label());
    }
    return out;
  }
};

inline ClickPattern pattern_from_labels(const DetectorConfig& det, const std::vector<std::string>& labels) {
  ClickPattern p;
  for (const auto& l : labels) {
    const int i = det.index_of(l);
    if (i < 0) throw std::invalid_argument("detector " + l + " not in config");
    p.mask |= 1u << i;
  }
  return p;
}

/// Outcome of one click pattern: joint probability and the normalized
/// state left on the unmeasured spatial modes.
struct HeraldedState {
  ClickPattern pattern;
  double probability = 0.0;
  StateEnsemble conditional;
  bool empty() const { return probability <= 0.0; }
};

struct PatternProbability {
  ClickPattern pattern;
  double probability = 0.0;
};

namespace detail {

// Branch contribution grouped by the occupation of measured and traced modes.
struct MeasurementRecord {
  double weight = 0.0;               // branch weight * norm^2 of the kept part
  std::vector<int> detector_counts;  // photons seen by each detector
  PureState kept;                    // normalized
};

struct Partition {
  ModeLayout kept_layout;
  std::vector<MeasurementRecord> records;
};

// Spatial modes with no detector stay; other unmeasured optical modes are traced.
inline Partition partition(const StateEnsemble& ens, const DetectorConfig& det) {
  const ModeLayout& layout = ens.layout();
  std::vector<int> kept_spatial;
  for (int s : layout.spatial_modes()) {
    bool measured = false;
    for (const auto& d : det.detectors()) measured = measured || d.mode == s;
    if (!measured) kept_spatial.push_back(s);
  }
  for (const auto& d : det.detectors()) {
    if (!layout.contains(d.mode)) throw std::invalid_argument("detector on mode outside the layout");
  }
  Partition out{ModeLayout(kept_spatial, layout.spectral_bins()), {}};
  const ModeLayout& kl = out.kept_layout;

  std::vector<int> kept_index(layout.optical_count(), -1);
  std::vector<std::vector<int>> det_of(layout.optical_count());
  for (std::size_t i = 0; i < layout.optical_count(); ++i) {
    const OpticalMode m = layout.mode_at(i);
    if (kl.contains(m.spatial)) kept_index[i] = static_cast<int>(kl.index(m));
    for (std::size_t d = 0; d < det.size(); ++d) {
      const auto& dd = det.detectors()[d];
      if (dd.mode == m.spatial && (!dd.pol || *dd.pol == m.pol)) det_of[i].push_back(static_cast<int>(d));
    }
  }

  for (const auto& br : ens.branches()) {
    std::map<OccupationVector, std::vector<PureState::Term>> groups;
    for (const auto& [occ, amp] : br.state.terms()) {
      OccupationVector rec(layout.optical_count());
      OccupationVector kept(kl.optical_count());
      for (std::size_t i = 0; i < occ.size(); ++i) {
        if (kept_index[i] >= 0) {
          kept.set(static_cast<std::size_t>(kept_index[i]), occ[i]);
        } else {
          rec.set(i, occ[i]);
        }
      }
      groups[rec].emplace_back(kept, amp);
    }
    for (auto& [rec, terms] : groups) {
      PureState s = PureState::from_terms(kl, std::move(terms));
      const double n2 = s.norm2();
      if (n2 <= 0.0) continue;
      std::vector<int> counts(det.size(), 0);
      for (std::size_t i = 0; i < rec.size(); ++i) {
        for (int d : det_of[i]) counts[static_cast<std::size_t>(d)] += rec[i];
      }
      out.records.push_back({br.weight * n2, std::move(counts), s.scaled(1.0 / std::sqrt(n2))});
    }
  }
  return out;
}

inline std::vector<double> no_click_probabilities(const DetectorConfig& det, const std::vector<int>& counts) {
  std::vector<double> q(det.size());
  for (std::size_t d = 0; d < det.size(); ++d) {
    const auto& dd = det.detectors()[d];
    q[d] = (1.0 - dd.dark) * std::pow(1.0 - dd.efficiency, counts[d]);
  }
  return q;
}

// Calls fn(mask, probability) for every pattern with nonzero probability.
template <typename Fn>
void for_each_pattern(const std::vector<double>& no_click, Fn&& fn) {
  std::uint32_t forced = 0;
  std::vector<std::size_t> free;
  double base = 1.0;
  for (std::size_t d = 0; d < no_click.size(); ++d) {
    if (no_click[d] >= 1.0) continue;  // never fires
    if (no_click[d] <= 0.0) {
      forced |= 1u << d;  // always fires
      continue;
    }
    free.push_back(d);
  }
  const std::uint32_t n = 1u << free.size();
  for (std::uint32_t sub = 0; sub < n; ++sub) {
    double p = base;
    std::uint32_t mask = forced;
    for (std::size_t k = 0; k < free.size(); ++k) {
      const std::size_t d = free[k];
      if ((sub >> k) & 1u) {
        p *= 1.0 - no_click[d];
        mask |= 1u << d;
      } else {
        p *= no_click[d];
      }
    }
    if (p > 0.0) fn(ClickPattern{mask}, p);
  }
}

}  // namespace detail

/// Exact probability of every click pattern with nonzero probability,
/// sorted by pattern.
inline std::vector<PatternProbability> pattern_distribution(const StateEnsemble& ens, const DetectorConfig& det) {
  const auto part = detail::partition(ens, det);
  std::map<ClickPattern, double> acc;
  for (const auto& r : part.records) {
    detail::for_each_pattern(detail::no_click_probabilities(det, r.detector_counts),
                             [&](ClickPattern p, double pr) { acc[p] += r.weight * pr; });
  }
  std::vector<PatternProbability> out;
  for (const auto& [p, pr] : acc) out.push_back({p, pr});
  return out;
}

/// Every click pattern with nonzero probability, with its normalized
/// conditional state on the unmeasured spatial modes.
inline std::vector<HeraldedState> click_distribution(const StateEnsemble& ens, const DetectorConfig& det) {
  const auto part = detail::partition(ens, det);
  std::map<ClickPattern, std::pair<double, std::vector<Branch>>> acc;
  for (const auto& r : part.records) {
    detail::for_each_pattern(detail::no_click_probabilities(det, r.detector_counts), [&](ClickPattern p, double pr) {
      auto& slot = acc[p];
      slot.first += r.weight * pr;
      slot.second.push_back({r.weight * pr, r.kept, ""});
    });
  }
  std::vector<HeraldedState> out;
  for (auto& [p, slot] : acc) {
    StateEnsemble cond(part.kept_layout, std::move(slot.second));
    out.push_back({p, slot.first, cond.normalized()});
  }
  return out;
}

/// One pattern's entry of click_distribution. A zero-probability pattern
/// gives an empty result (probability 0, no branches).
inline HeraldedState herald(const StateEnsemble& ens, const DetectorConfig& det, ClickPattern pattern) {
  const auto part = detail::partition(ens, det);
  double total = 0.0;
  std::vector<Branch> branches;
  for (const auto& r : part.records) {
    const auto q = detail::no_click_probabilities(det, r.detector_counts);
    double pr = 1.0;
    for (std::size_t d = 0; d < det.size(); ++d) pr *= pattern.fired(d) ? 1.0 - q[d] : q[d];
    if (pr <= 0.0) continue;
    total += r.weight * pr;
    branches.push_back({r.weight * pr, r.kept, ""});
  }
  HeraldedState out{pattern, total, StateEnsemble(part.kept_layout, {})};
  if (total > 0.0) out.conditional = StateEnsemble(part.kept_layout, std::move(branches)).normalized();
  return out;
}

/// Conditional states grouped by `classify(pattern)`; patterns mapped to
/// std::nullopt are dropped. Each entry holds the summed probability and the
/// normalized state on the unmeasured spatial modes.
template <typename Classify>
std::map<std::string, HeraldedState> herald_by(const StateEnsemble& ens, const DetectorConfig& det,
                                               Classify&& classify) {
  const auto part = detail::partition(ens, det);
  std::map<std::string, std::pair<double, std::map<std::size_t, double>>> acc;
  for (std::size_t i = 0; i < part.records.size(); ++i) {
    const auto& r = part.records[i];
    detail::for_each_pattern(detail::no_click_probabilities(det, r.detector_counts), [&](ClickPattern p, double pr) {
      std::optional<std::string> key = classify(p);
      if (!key) return;
      auto& slot = acc[*key];
      slot.first += r.weight * pr;
      slot.second[i] += r.weight * pr;
    });
  }
  std::map<std::string, HeraldedState> out;
  for (auto& [key, slot] : acc) {
    if (!(slot.first > 0.0)) continue;
    std::vector<Branch> branches;
    branches.reserve(slot.second.size());
    for (const auto& [i, w] : slot.second) branches.push_back({w / slot.first, part.records[i].kept, ""});
    out.emplace(key, HeraldedState{ClickPattern{}, slot.first, StateEnsemble(part.kept_layout, std::move(branches))});
  }
  return out;
}

enum CoincidenceClass : std::uint32_t { kC4 = 1u, kC5 = 2u, kC6 = 4u, kC8 = 8u };

/// Event counts per coincidence class over `shots` simulated pulses.
struct CoincidenceCounts {
  std::uint64_t c4 = 0;
  std::uint64_t c5 = 0;
  std::uint64_t c6 = 0;
  std::uint64_t c8 = 0;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  bool operator==(const CoincidenceCounts&) const = default;
};

using PatternClassifier = std::function<std::uint32_t(ClickPattern)>;

/// Per-pattern counts for `shots` i.i.d. pulses, drawn as one multinomial
/// sample (sequential conditional binomials in pattern order). Deterministic
/// for a given seed.
inline std::vector<std::uint64_t> sample_pattern_counts(const std::vector<PatternProbability>& dist,
                                                        std::uint64_t shots, std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("shots must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> counts(dist.size(), 0);
  std::uint64_t remaining = shots;
  double remaining_p = 0.0;
  for (const auto& d : dist) remaining_p += d.probability;
  for (std::size_t i = 0; i < dist.size() && remaining > 0; ++i) {
    if (i + 1 == dist.size()) {
      counts[i] = remaining;
      break;
    }
    double q = remaining_p > 0.0 ? dist[i].probability / remaining_p : 0.0;
    q = std::clamp(q, 0.0, 1.0);
    std::binomial_distribution<std::uint64_t> bin(remaining, q);
    counts[i] = bin(rng);
    remaining -= counts[i];
    remaining_p -= dist[i].probability;
  }
  return counts;
}

inline CoincidenceCounts sample_counts(const std::vector<PatternProbability>& dist, const PatternClassifier& classify,
                                       std::uint64_t shots, std::uint64_t seed) {
  const auto per_pattern = sample_pattern_counts(dist, shots, seed);
  CoincidenceCounts c;
  c.shots = shots;
  c.seed = seed;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const std::uint32_t cls = classify(dist[i].pattern);
    if (cls & kC4) c.c4 += per_pattern[i];
    if (cls & kC5) c.c5 += per_pattern[i];
    if (cls & kC6) c.c6 += per_pattern[i];
    if (cls & kC8) c.c8 += per_pattern[i];
  }
  return c;
}

/// Exact probability of each coincidence class, indexed {c4, c5, c6, c8}.
inline std::array<double, 4> class_probabilities(const std::vector<PatternProbability>& dist,
                                                 const PatternClassifier& classify) {
  std::array<double, 4> p{};
  for (const auto& d : dist) {
    const std::uint32_t cls = classify(d.pattern);
    for (int k = 0; k < 4; ++k) {
      if (cls & (1u << k)) p[static_cast<std::size_t>(k)] += d.probability;
    }
  }
  return p;
}

/// JSON records {class, count, shots, seed}.
inline nlohmann::json counts_to_json(const CoincidenceCounts& c) {
  nlohmann::json out = nlohmann::json::array();
  const std::pair<const char*, std::uint64_t> rows[] = {{"c4", c.c4}, {"c5", c.c5}, {"c6", c.c6}, {"c8", c.c8}};
  for (const auto& [name, n] : rows) {
    out.push_back({{"class", name}, {"count", n}, {"shots", c.shots}, {"seed", c.seed}});
  }
  return out;
}

}  // namespace heraldsim

#endif  // HERALDSIM_DETECTION_HPP_
