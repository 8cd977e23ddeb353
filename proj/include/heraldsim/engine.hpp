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

#ifndef HERALDSIM_ENGINE_HPP_
#define HERALDSIM_ENGINE_HPP_

#include <algorithm>
#include <map>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "heraldsim/circuit.hpp"
#include "heraldsim/detection.hpp"
#include "heraldsim/fock.hpp"
#include "heraldsim/optics.hpp"
#include "heraldsim/sources.hpp"

namespace heraldsim {

/// Product of two ensembles on disjoint spatial modes.
inline StateEnsemble tensor(const StateEnsemble& a, const StateEnsemble& b) {
  std::vector<Branch> out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a.branches()) {
    for (const auto& y : b.branches()) {
      out.push_back({x.weight * y.weight, tensor(x.state, y.state), x.record + y.record});
    }
  }
  ModeLayout layout = tensor(vacuum(a.layout()), vacuum(b.layout())).layout();
  return StateEnsemble(std::move(layout), std::move(out));
}

/// Mode unitaries realizing one optical element (empty for sources and loss).
inline std::vector<ModeUnitary> element_unitaries(const circuit::Element& e) {
  using namespace circuit;
  return std::visit(
      [](const auto& x) -> std::vector<ModeUnitary> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Hwp>) {
          return {hwp(x.mode, deg_to_rad(x.angle_deg))};
        } else if constexpr (std::is_same_v<T, Qwp>) {
          return {qwp(x.mode, deg_to_rad(x.angle_deg))};
        } else if constexpr (std::is_same_v<T, Phase>) {
          return {phase(x.mode, x.pol, x.phi)};
        } else if constexpr (std::is_same_v<T, Pbs>) {
          return {pbs(x.a, x.b)};
        } else if constexpr (std::is_same_v<T, Cpbs>) {
          return cpbs(x.a, x.b);
        } else if constexpr (std::is_same_v<T, Distinguish>) {
          return {spectral_overlap(x.mode, x.visibility)};
        } else {
          return {};
        }
      },
      e);
}

/// The herald lines sharing one group name, as masks over the group's
/// detectors.
struct HeraldGroup {
  std::string name;
  std::vector<std::string> labels;  // detectors used by any line of the group
  std::vector<std::pair<std::uint32_t, std::string>> lines;

  std::optional<std::string> classify(ClickPattern p) const {
    for (const auto& [mask, outcome] : lines) {
      if (mask == p.mask) return outcome;
    }
    return std::nullopt;
  }
  std::vector<std::string> outcomes() const {
    std::vector<std::string> out;
    for (const auto& [m, o] : lines) {
      if (std::find(out.begin(), out.end(), o) == out.end()) out.push_back(o);
    }
    return out;
  }
};

inline std::vector<HeraldGroup> herald_groups(const circuit::CircuitSpec& spec) {
  std::vector<HeraldGroup> groups;
  for (const auto& name : spec.herald_groups()) {
    HeraldGroup g{name, {}, {}};
    for (const auto& h : spec.heralds) {
      if (h.group() != name) continue;
      for (const auto& c : h.clicks) {
        if (std::find(g.labels.begin(), g.labels.end(), c) == g.labels.end()) g.labels.push_back(c);
      }
    }
    for (const auto& h : spec.heralds) {
      if (h.group() != name) continue;
      std::uint32_t mask = 0;
      for (const auto& c : h.clicks) {
        mask |= 1u << (std::find(g.labels.begin(), g.labels.end(), c) - g.labels.begin());
      }
      g.lines.emplace_back(mask, h.outcome());
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

/// One combination of accepted herald outcomes: its joint probability and
/// the normalized state left on the spatial modes no herald detector sees.
struct HeraldedRun {
  std::map<std::string, std::string> outcomes;  // group -> outcome
  double probability = 0.0;
  StateEnsemble state;
};

struct HeraldedEvaluation {
  std::vector<HeraldedRun> runs;

  double accepted_probability() const {
    double p = 0.0;
    for (const auto& r : runs) p += r.probability;
    return p;
  }
};

namespace detail {

struct FactorBranch {
  std::map<std::string, std::string> outcomes;
  double weight = 1.0;
  StateEnsemble state;
};

using Factor = std::vector<FactorBranch>;

inline Factor product(const Factor& a, const Factor& b) {
  Factor out;
  for (const auto& x : a) {
    for (const auto& y : b) {
      auto outcomes = x.outcomes;
      outcomes.insert(y.outcomes.begin(), y.outcomes.end());
      out.push_back({std::move(outcomes), x.weight * y.weight, tensor(x.state, y.state)});
    }
  }
  return out;
}

// Branches with the same outcomes collapse into one probability-weighted mixture.
inline Factor merge_outcomes(Factor f) {
  std::map<std::map<std::string, std::string>, std::vector<std::size_t>> by;
  for (std::size_t i = 0; i < f.size(); ++i) by[f[i].outcomes].push_back(i);
  if (by.size() == f.size()) return f;
  Factor out;
  for (const auto& [outcomes, idx] : by) {
    double w = 0.0;
    for (auto i : idx) w += f[i].weight;
    std::vector<Branch> branches;
    for (auto i : idx) {
      for (const auto& b : f[i].state.branches()) branches.push_back({b.weight * f[i].weight / w, b.state, b.record});
    }
    out.push_back({outcomes, w, spectral_compress(coalesce(StateEnsemble(f[idx.front()].state.layout(), std::move(branches))))});
  }
  return out;
}

class Evaluator {
 public:
  Evaluator(const circuit::CircuitSpec& spec, bool measure_heralds, std::set<std::string> optional = {})
      : spec_(spec), optional_(std::move(optional)) {
    if (auto v = circuit::validate(spec); !v.empty()) throw std::invalid_argument("invalid circuit: " + v.front());
    bins_ = spec.uses_spectral_bins() ? 2 : 1;
    if (measure_heralds) groups_ = herald_groups(spec);
  }

  std::vector<FactorBranch> run() {
    std::map<int, int> last_touch;
    for (std::size_t i = 0; i < spec_.elements.size(); ++i) {
      for (int m : circuit::element_modes(spec_.elements[i])) last_touch[m] = static_cast<int>(i);
    }
    std::vector<int> ready(groups_.size(), -1);
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      for (const auto& l : groups_[g].labels) {
        auto it = last_touch.find(spec_.find_detector(l)->mode);
        if (it != last_touch.end()) ready[g] = std::max(ready[g], it->second);
      }
    }
    auto measure_ready = [&](int index) {
      for (std::size_t g = 0; g < groups_.size(); ++g) {
        if (ready[g] == index) measure(groups_[g]);
      }
    };
    measure_ready(-1);
    for (std::size_t i = 0; i < spec_.elements.size(); ++i) {
      apply(spec_.elements[i]);
      measure_ready(static_cast<int>(i));
    }
    // Untouched, unmeasured modes are vacuum.
    std::vector<int> idle;
    for (int m = 1; m <= spec_.modes; ++m) {
      if (!factor_of_.count(m) && !measured_.count(m)) idle.push_back(m);
    }
    Factor out{{{}, 1.0, StateEnsemble(vacuum(ModeLayout(idle, bins_)))}};
    for (const auto& f : factors_) {
      if (!f.empty()) out = product(out, f);
    }
    return merge_outcomes(std::move(out));
  }

 private:
  std::size_t new_factor(StateEnsemble ens) {
    factors_.push_back(Factor{{{}, 1.0, std::move(ens)}});
    return factors_.size() - 1;
  }

  void merge(std::size_t keep, std::size_t drop) {
    factors_[keep] = product(factors_[keep], factors_[drop]);
    for (auto& [m, f] : factor_of_) {
      if (f == drop) f = keep;
    }
    factors_[drop].clear();
  }

  void for_each_state(std::size_t f, const std::function<StateEnsemble(const StateEnsemble&)>& fn) {
    for (auto& b : factors_[f]) b.state = fn(b.state);
  }

  // Brings all `modes` into one factor, adding vacuum for untouched ones.
  std::size_t gather(const std::vector<int>& modes) {
    std::optional<std::size_t> target;
    for (int m : modes) {
      auto it = factor_of_.find(m);
      if (it == factor_of_.end()) continue;
      if (!target) {
        target = it->second;
      } else if (*target != it->second) {
        merge(*target, it->second);
      }
    }
    std::vector<int> fresh;
    for (int m : modes) {
      if (!factor_of_.count(m)) fresh.push_back(m);
    }
    if (!fresh.empty()) {
      StateEnsemble vac(vacuum(ModeLayout(fresh, bins_)));
      if (!target) {
        target = new_factor(std::move(vac));
      } else {
        for_each_state(*target, [&](const StateEnsemble& s) { return tensor(s, vac); });
      }
      for (int m : fresh) factor_of_[m] = *target;
    }
    return *target;
  }

  void apply(const circuit::Element& e) {
    if (const auto* s = std::get_if<circuit::Source>(&e)) {
      SpdcParams p{s->epsilon, s->gamma, s->n_max, {s->a, s->b}, 1.0, s->state};
      StateEnsemble ens;
      if (s->pairs) {
        auto [w, st] = spdc_pair_component(p, *s->pairs);
        ens = StateEnsemble(ModeLayout({s->a, s->b}, bins_), {{w, with_spectral_bins(st, bins_), ""}});
      } else {
        ens = StateEnsemble(with_spectral_bins(spdc_pair(p), bins_));
      }
      const std::size_t f = new_factor(std::move(ens));
      factor_of_[s->a] = factor_of_[s->b] = f;
      return;
    }
    if (const auto* l = std::get_if<circuit::Loss>(&e)) {
      auto it = factor_of_.find(l->mode);
      if (it == factor_of_.end()) return;
      const LossChannel ch(l->mode, l->eta);
      for_each_state(it->second, [&](const StateEnsemble& s) { return apply_loss(s, ch); });
      return;
    }
    const auto modes = circuit::element_modes(e);
    bool any = false;
    for (int m : modes) any = any || factor_of_.count(m);
    if (!any) return;  // vacuum in, vacuum out
    const std::size_t f = gather(modes);
    const auto us = element_unitaries(e);
    for_each_state(f, [&](const StateEnsemble& s) {
      StateEnsemble out = s;
      for (const auto& u : us) out = apply_unitary(out, u);
      return out;
    });
  }

  void measure(const HeraldGroup& g) {
    std::vector<int> modes;
    for (const auto& l : g.labels) {
      const int m = spec_.find_detector(l)->mode;
      if (std::find(modes.begin(), modes.end(), m) == modes.end()) modes.push_back(m);
    }
    const std::size_t f = gather(modes);
    const DetectorConfig det = DetectorConfig::select(spec_, g.labels);
    Factor out;
    const bool optional = optional_.count(g.name) > 0;
    for (const auto& b : factors_[f]) {
      auto classes = herald_by(b.state, det, [&](ClickPattern p) -> std::optional<std::string> {
        auto outcome = g.classify(p);
        if (!outcome && optional) return std::string();
        return outcome;
      });
      for (auto& [outcome, hs] : classes) {
        auto outcomes = b.outcomes;
        outcomes[g.name] = outcome;
        out.push_back({std::move(outcomes), b.weight * hs.probability, spectral_compress(coalesce(hs.conditional))});
      }
    }
    if (out.empty()) {
      // Nothing accepted: keep a zero-weight placeholder with the right layout.
      std::vector<int> kept;
      for (int s : factors_[f].front().state.layout().spatial_modes()) {
        if (std::find(modes.begin(), modes.end(), s) == modes.end()) kept.push_back(s);
      }
      out.push_back({{}, 0.0, StateEnsemble(vacuum(ModeLayout(kept, bins_)))});
    }
    factors_[f] = merge_outcomes(std::move(out));
    for (int m : modes) {
      factor_of_.erase(m);
      measured_.insert(m);
    }
  }

  const circuit::CircuitSpec& spec_;
  int bins_ = 1;
  std::vector<HeraldGroup> groups_;
  std::set<std::string> optional_;  // rejected patterns kept under outcome ""
  std::vector<Factor> factors_;
  std::map<int, std::size_t> factor_of_;
  std::set<int> measured_;
};

}  // namespace detail

/// Runs every element of a circuit and returns the ensemble on all declared
/// modes before detection. Independent sources stay in separate factors
/// until an element couples them, which keeps loss branching local.
inline StateEnsemble evaluate(const circuit::CircuitSpec& spec) {
  auto branches = detail::Evaluator(spec, false).run();
  return branches.front().state;
}

/// Evaluates a circuit and measures each herald group as soon as no later
/// element touches its modes. Only accepted outcomes are kept, except for
/// `optional` groups whose rejected patterns are pooled under outcome "".
inline HeraldedEvaluation evaluate_heralded(const circuit::CircuitSpec& spec, std::set<std::string> optional = {}) {
  HeraldedEvaluation out;
  for (auto& b : detail::Evaluator(spec, true, std::move(optional)).run()) {
    if (b.weight <= 0.0 || b.outcomes.size() != spec.herald_groups().size()) continue;
    out.runs.push_back({std::move(b.outcomes), b.weight, std::move(b.state)});
  }
  return out;
}

}  // namespace heraldsim

#endif  // HERALDSIM_ENGINE_HPP_
