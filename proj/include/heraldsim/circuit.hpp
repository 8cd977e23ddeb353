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

#ifndef HERALDSIM_CIRCUIT_HPP_
#define HERALDSIM_CIRCUIT_HPP_

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "heraldsim/fock.hpp"

namespace heraldsim {

enum class BellState { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

inline const char* bell_name(BellState b) {
  switch (b) {
    case BellState::PhiPlus: return "phi+";
    case BellState::PhiMinus: return "phi-";
    case BellState::PsiPlus: return "psi+";
    case BellState::PsiMinus: return "psi-";
  }
  return "?";
}

inline std::optional<BellState> parse_bell(std::string_view s) {
  if (s == "phi+") return BellState::PhiPlus;
  if (s == "phi-") return BellState::PhiMinus;
  if (s == "psi+") return BellState::PsiPlus;
  if (s == "psi-") return BellState::PsiMinus;
  return std::nullopt;
}

namespace circuit {

/// SPDC pair source. `gamma` scales the single-pair probability; `pairs`
/// pins the emission to one pair-number component (weighted by its
/// probability) instead of the truncated superposition.
struct Source {
  int a = 0;
  int b = 0;
  double epsilon = 0.0;
  double gamma = 1.0;
  int n_max = 2;
  BellState state = BellState::PhiPlus;
  std::optional<int> pairs;
  bool operator==(const Source&) const = default;
};

struct Hwp {
  int mode = 0;
  double angle_deg = 0.0;
  bool operator==(const Hwp&) const = default;
};

struct Qwp {
  int mode = 0;
  double angle_deg = 0.0;
  bool operator==(const Qwp&) const = default;
};

struct Phase {
  int mode = 0;
  Pol pol = Pol::H;
  double phi = 0.0;
  bool operator==(const Phase&) const = default;
};

struct Pbs {
  int a = 0;
  int b = 0;
  bool operator==(const Pbs&) const = default;
};

struct Cpbs {
  int a = 0;
  int b = 0;
  bool operator==(const Cpbs&) const = default;
};

struct Loss {
  int mode = 0;
  double eta = 1.0;
  bool operator==(const Loss&) const = default;
};

/// Moves the photons of one spatial mode into sqrt(V) (shared bin) +
/// sqrt(1-V) (private bin); HOM visibility against a shared-bin photon is V.
struct Distinguish {
  int mode = 0;
  double visibility = 1.0;
  bool operator==(const Distinguish&) const = default;
};

using Element = std::variant<Source, Hwp, Qwp, Phase, Pbs, Cpbs, Loss, Distinguish>;

/// Threshold detector on one spatial mode; `pol` restricts it to one
/// polarization, otherwise it sees both. Always spectrally blind.
struct Detector {
  int mode = 0;
  std::optional<Pol> pol;
  double efficiency = 1.0;
  double dark = 0.0;

  std::string label() const {
    std::string s = std::to_string(mode);
    if (pol) s += pol_char(*pol);
    return s;
  }
  bool operator==(const Detector&) const = default;
};

/// Herald line `herald group:outcome = clicks(...)`. Lines sharing a name
/// are alternatives of one outcome; within a group, a pattern matches a line
/// when exactly the listed detectors of that group fire.
struct Herald {
  std::string name;
  std::vector<std::string> clicks;

  std::string group() const {
    auto p = name.find(':');
    return p == std::string::npos ? std::string("herald") : name.substr(0, p);
  }
  std::string outcome() const {
    auto p = name.find(':');
    return p == std::string::npos ? name : name.substr(p + 1);
  }
  bool operator==(const Herald&) const = default;
};

struct CircuitSpec {
  int modes = 0;
  std::vector<Element> elements;
  std::vector<Detector> detectors;
  std::vector<Herald> heralds;
  std::map<std::string, double> params;

  bool operator==(const CircuitSpec&) const = default;

  bool uses_spectral_bins() const {
    for (const auto& e : elements) {
      if (std::holds_alternative<Distinguish>(e)) return true;
    }
    return false;
  }

  const Detector* find_detector(const std::string& label) const {
    for (const auto& d : detectors) {
      if (d.label() == label) return &d;
    }
    return nullptr;
  }

  double param(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }

  std::vector<std::string> herald_groups() const {
    std::vector<std::string> out;
    for (const auto& h : heralds) {
      if (std::find(out.begin(), out.end(), h.group()) == out.end()) out.push_back(h.group());
    }
    return out;
  }
};

/// Spatial modes an element touches.
inline std::vector<int> element_modes(const Element& e) {
  return std::visit(
      [](const auto& x) -> std::vector<int> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Source> || std::is_same_v<T, Pbs> || std::is_same_v<T, Cpbs>) {
          return {x.a, x.b};
        } else {
          return {x.mode};
        }
      },
      e);
}

inline bool in_unit_interval(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

/// Structural and range checks. An empty result means the spec is valid.
inline std::vector<std::string> validate(const CircuitSpec& spec) {
  std::vector<std::string> v;
  if (spec.modes < 1) v.push_back("no modes declared");
  auto check_mode = [&](int m, const std::string& what) {
    if (m < 1 || m > spec.modes) v.push_back(what + " references undeclared mode " + std::to_string(m));
  };

  std::set<int> sourced;   // modes fed by a source
  std::set<int> touched;   // modes acted on by any element so far
  std::set<int> mixed;     // modes that went through a two-mode element
  for (const auto& e : spec.elements) {
    const auto modes = element_modes(e);
    for (int m : modes) check_mode(m, "element");
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Source>) {
            if (x.a == x.b) v.push_back("source uses the same mode twice");
            if (!(std::isfinite(x.epsilon) && x.epsilon > 0.0 && x.epsilon < 0.25)) {
              v.push_back("source epsilon must lie in (0, 0.25)");
            }
            if (!in_unit_interval(x.gamma)) v.push_back("source gamma must lie in [0, 1]");
            if (x.n_max < 1 || x.n_max > 3) v.push_back("source nmax must be 1, 2 or 3");
            if (x.pairs && (*x.pairs < 0 || *x.pairs > x.n_max)) v.push_back("source pairs must lie in [0, nmax]");
            for (int m : modes) {
              if (sourced.count(m)) v.push_back("mode " + std::to_string(m) + " is fed by two sources");
              if (touched.count(m)) v.push_back("element on mode " + std::to_string(m) + " precedes its source");
              sourced.insert(m);
            }
          } else if constexpr (std::is_same_v<T, Pbs> || std::is_same_v<T, Cpbs>) {
            if (x.a == x.b) v.push_back("beam splitter joins a mode with itself");
            mixed.insert(x.a);
            mixed.insert(x.b);
          } else if constexpr (std::is_same_v<T, Hwp> || std::is_same_v<T, Qwp>) {
            if (!std::isfinite(x.angle_deg)) v.push_back("waveplate angle must be finite");
          } else if constexpr (std::is_same_v<T, Phase>) {
            if (!std::isfinite(x.phi)) v.push_back("phase must be finite");
          } else if constexpr (std::is_same_v<T, Loss>) {
            if (!in_unit_interval(x.eta)) v.push_back("loss eta must lie in [0, 1]");
          } else if constexpr (std::is_same_v<T, Distinguish>) {
            if (!in_unit_interval(x.visibility)) v.push_back("visibility must lie in [0, 1]");
            if (!sourced.count(x.mode)) v.push_back("distinguish on mode " + std::to_string(x.mode) + " precedes its source");
            if (mixed.count(x.mode)) v.push_back("distinguish on mode " + std::to_string(x.mode) + " follows a beam splitter");
          }
        },
        e);
    for (int m : modes) touched.insert(m);
  }

  std::set<std::pair<int, int>> covered;  // (mode, pol)
  std::set<std::string> labels;
  for (const auto& d : spec.detectors) {
    check_mode(d.mode, "detector");
    if (!in_unit_interval(d.efficiency)) v.push_back("detector " + d.label() + " efficiency must lie in [0, 1]");
    if (!(std::isfinite(d.dark) && d.dark >= 0.0 && d.dark < 1.0)) {
      v.push_back("detector " + d.label() + " dark probability must lie in [0, 1)");
    }
    for (int p = 0; p < 2; ++p) {
      if (d.pol && static_cast<int>(*d.pol) != p) continue;
      if (!covered.insert({d.mode, p}).second) {
        v.push_back("optical mode " + std::to_string(d.mode) + (p ? "V" : "H") + " has two detectors");
      }
    }
    labels.insert(d.label());
  }
  if (spec.detectors.size() > 20) v.push_back("more than 20 detectors");

  for (const auto& h : spec.heralds) {
    if (h.clicks.empty()) v.push_back("herald " + h.name + " lists no detectors");
    std::set<std::string> seen;
    for (const auto& c : h.clicks) {
      if (!labels.count(c)) v.push_back("herald " + h.name + " references unknown detector " + c);
      if (!seen.insert(c).second) v.push_back("herald " + h.name + " lists detector " + c + " twice");
    }
  }
  // A detector may only belong to one herald group.
  std::map<std::string, std::string> owner;
  for (const auto& h : spec.heralds) {
    for (const auto& c : h.clicks) {
      auto [it, fresh] = owner.emplace(c, h.group());
      if (!fresh && it->second != h.group()) {
        v.push_back("detector " + c + " used by herald groups " + it->second + " and " + h.group());
      }
    }
  }
  return v;
}

}  // namespace circuit
}  // namespace heraldsim

#endif  // HERALDSIM_CIRCUIT_HPP_
