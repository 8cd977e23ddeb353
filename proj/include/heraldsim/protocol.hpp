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

#ifndef HERALDSIM_PROTOCOL_HPP_
#define HERALDSIM_PROTOCOL_HPP_

#include <array>
#include <cmath>
#include <cstdlib>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "heraldsim/analytic.hpp"
#include "heraldsim/circuit.hpp"
#include "heraldsim/detection.hpp"
#include "heraldsim/engine.hpp"
#include "heraldsim/fock.hpp"
#include "heraldsim/optics.hpp"
#include "heraldsim/sources.hpp"

namespace heraldsim::protocol {

/// A run whose heralds never fire; distinct from bad parameters.
class DegenerateResult : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kDefaultSweepConstant = 6e-4;  // gamma * eps * eta
inline constexpr double kFiberLossDbPerKm = 0.15;
inline constexpr std::array<double, 5> kChannelPoints = {1.0, 0.5, 0.18, 0.09, 0.03};

/// Number of worker threads from HERALDSIM_THREADS, else the hardware count.
inline unsigned worker_threads() {
  if (const char* env = std::getenv("HERALDSIM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// fn(0..n-1) on up to worker_threads() threads; results in index order.
template <typename Fn>
auto parallel_map(std::size_t n, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<R> out;
  out.reserve(n);
  const std::size_t width = worker_threads();
  for (std::size_t start = 0; start < n; start += width) {
    std::vector<std::future<R>> batch;
    for (std::size_t i = start; i < std::min(n, start + width); ++i) {
      batch.push_back(std::async(width == 1 ? std::launch::deferred : std::launch::async, fn, i));
    }
    for (auto& f : batch) out.push_back(f.get());
  }
  return out;
}

/// Distance of ultralow-loss fiber with the same loss as `eta`, to the nearest 10 km.
inline double equivalent_km(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in (0, 1]");
  const double km = -10.0 * std::log10(eta) / kFiberLossDbPerKm;
  return 10.0 * std::round(km / 10.0) + 0.0;
}

// ---------------------------------------------------------------------------
// Swap

struct SwapConfig {
  double epsilon = 0.02;
  double gamma = 1.0;
  double eta = 1.0;  // channel; photons 3 and 4 each see sqrt(eta)
  int n_max = 2;
  double bsm_efficiency = 0.75;
  double eta1 = 0.611;  // total efficiency of the arm detecting photon 1
  double eta6 = 0.628;
  double visibility = 1.0;
  double dark = 0.0;
  bool same_basis = false;  // BSM II reads out like BSM I instead of via the cpbs

  /// First-order, lossless, perfect detection.
  static SwapConfig ideal() {
    SwapConfig c;
    c.n_max = 1;
    c.bsm_efficiency = 1.0;
    c.eta1 = 1.0;
    c.eta6 = 1.0;
    return c;
  }

  void validate() const {
    SpdcParams{epsilon, gamma, n_max, {1, 2}, visibility, BellState::PhiPlus}.validate();
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in (0, 1]");
    for (double e : {bsm_efficiency, eta1, eta6}) {
      if (!circuit::in_unit_interval(e)) throw std::invalid_argument("detector efficiencies must lie in [0, 1]");
    }
    if (!(dark >= 0.0 && dark < 1.0)) throw std::invalid_argument("dark probability must lie in [0, 1)");
  }
};

/// Bell-state class names of the two swap analyzers, keyed by click pair.
inline std::vector<std::pair<std::string, std::vector<std::array<std::string, 2>>>> bsm_classes(int a, int b,
                                                                                                 bool plus_minus) {
  const auto s = [](int m, char p) { return std::to_string(m) + p; };
  std::vector<std::array<std::string, 2>> same = {{s(a, 'H'), s(b, 'H')}, {s(a, 'V'), s(b, 'V')}};
  std::vector<std::array<std::string, 2>> cross = {{s(a, 'H'), s(b, 'V')}, {s(a, 'V'), s(b, 'H')}};
  if (plus_minus) return {{"phi+", same}, {"phi-", cross}};
  return {{"phi+", same}, {"psi+", cross}};
}

namespace detail {

inline void add_bsm_pair(circuit::CircuitSpec& spec, int a, int b, double eff, double dark) {
  for (int m : {a, b}) {
    for (Pol p : {Pol::H, Pol::V}) spec.detectors.push_back({m, p, eff, dark});
  }
}

// One herald line per combination of the analyzers' classes.
inline void add_swap_heralds(circuit::CircuitSpec& spec, bool same_basis) {
  const auto first = bsm_classes(2, 3, true);
  const auto second = bsm_classes(4, 5, same_basis);
  for (const auto& [n1, pairs1] : first) {
    for (const auto& [n2, pairs2] : second) {
      for (const auto& p1 : pairs1) {
        for (const auto& p2 : pairs2) {
          spec.heralds.push_back({"swap:" + n1 + "_" + n2, {p1[0], p1[1], p2[0], p2[1]}});
        }
      }
    }
  }
}

inline void add_swap_core(circuit::CircuitSpec& spec, const SwapConfig& cfg) {
  using namespace circuit;
  if (cfg.eta < 1.0) {
    spec.elements.push_back(Loss{3, std::sqrt(cfg.eta)});
    spec.elements.push_back(Loss{4, std::sqrt(cfg.eta)});
  }
  spec.elements.push_back(Pbs{2, 3});
  spec.elements.push_back(Hwp{2, 22.5});
  spec.elements.push_back(Hwp{3, 22.5});
  if (cfg.same_basis) {
    spec.elements.push_back(Pbs{4, 5});
    spec.elements.push_back(Hwp{4, 22.5});
    spec.elements.push_back(Hwp{5, 22.5});
  } else {
    spec.elements.push_back(Cpbs{4, 5});
  }
}

}  // namespace detail

/// Three-source swap: pairs (1,2), (3,4) and (5,6); BSM I on (2,3), BSM II
/// on (4,5); photons 1 and 6 are the heralded pair.
inline circuit::CircuitSpec build_swap_circuit(const SwapConfig& cfg) {
  cfg.validate();
  using namespace circuit;
  CircuitSpec spec;
  spec.modes = 6;
  spec.elements.push_back(Source{1, 2, cfg.epsilon, 1.0, cfg.n_max, BellState::PhiPlus, std::nullopt});
  spec.elements.push_back(Source{3, 4, cfg.epsilon, cfg.gamma, cfg.n_max, BellState::PhiPlus, std::nullopt});
  spec.elements.push_back(Source{5, 6, cfg.epsilon, 1.0, cfg.n_max, BellState::PhiPlus, std::nullopt});
  detail::add_swap_core(spec, cfg);
  if (cfg.visibility < 1.0) spec = enable_partial_distinguishability(spec, cfg.visibility);

  spec.detectors.push_back({1, std::nullopt, cfg.eta1, cfg.dark});
  detail::add_bsm_pair(spec, 2, 3, cfg.bsm_efficiency, cfg.dark);
  detail::add_bsm_pair(spec, 4, 5, cfg.bsm_efficiency, cfg.dark);
  spec.detectors.push_back({6, std::nullopt, cfg.eta6, cfg.dark});
  detail::add_swap_heralds(spec, cfg.same_basis);
  spec.params = {{"signal_a", 1}, {"signal_b", 6}, {"epsilon", cfg.epsilon}, {"gamma", cfg.gamma}, {"eta", cfg.eta}};
  return spec;
}

// ---------------------------------------------------------------------------
// Corrections

/// Pauli correction per herald outcome key.
struct CorrectionTable {
  std::map<std::string, Pauli> entries;

  Pauli at(const std::string& key) const {
    auto it = entries.find(key);
    if (it == entries.end()) throw std::out_of_range("no correction for outcome " + key);
    return it->second;
  }
  bool operator==(const CorrectionTable&) const = default;
};

inline constexpr std::array<Pauli, 4> kPaulis = {Pauli::I, Pauli::X, Pauli::Z, Pauli::XZ};

/// Outcome key: group outcomes joined with ',' in the given group order.
inline std::string outcome_key(const std::map<std::string, std::string>& outcomes,
                               const std::vector<std::string>& groups) {
  std::string key;
  for (const auto& g : groups) {
    if (!key.empty()) key += ',';
    auto it = outcomes.find(g);
    key += it == outcomes.end() ? std::string() : it->second;
  }
  return key;
}

namespace detail {

inline Pauli pick_best(const std::array<double, 4>& score, const std::string& key) {
  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return score[a] > score[b]; });
  if (score[order[0]] - score[order[1]] < 1e-9) {
    throw std::logic_error("ambiguous correction for outcome " + key);
  }
  return kPaulis[order[0]];
}

inline int param_mode(const circuit::CircuitSpec& spec, const std::string& key, int fallback) {
  return static_cast<int>(std::lround(spec.param(key, fallback)));
}

inline std::string single_group(const circuit::CircuitSpec& spec) {
  const auto groups = spec.herald_groups();
  if (groups.size() != 1) throw std::invalid_argument("swap circuit needs exactly one herald group");
  return groups.front();
}

}  // namespace detail

/// Derives the swap table from a circuit: for each heralded outcome, the
/// Pauli on the second signal photon that maximizes overlap with phi+.
inline CorrectionTable derive_swap_corrections(const circuit::CircuitSpec& spec) {
  const int a = detail::param_mode(spec, "signal_a", 1), b = detail::param_mode(spec, "signal_b", 6);
  const std::string group = detail::single_group(spec);
  CorrectionTable table;
  for (const auto& run : evaluate_heralded(spec).runs) {
    const std::string key = outcome_key(run.outcomes, {group});
    std::array<double, 4> score{};
    for (std::size_t k = 0; k < 4; ++k) {
      const auto red = reduce_to_qubits(apply_unitary(run.state, pauli(b, kPaulis[k])), {a, b});
      if (!red.rho) throw std::logic_error("outcome " + key + " leaves no photon pair");
      score[k] = analytic::bell_fidelity(*red.rho);
    }
    table.entries[key] = detail::pick_best(score, key);
  }
  return table;
}

/// Frozen swap corrections, reproduced by derive_swap_corrections on the
/// ideal circuit.
inline CorrectionTable swap_corrections(bool same_basis = false) {
  if (same_basis) {
    return {{{"phi+_phi+", Pauli::I}, {"phi+_phi-", Pauli::Z}, {"phi-_phi+", Pauli::Z}, {"phi-_phi-", Pauli::I}}};
  }
  return {{{"phi+_phi+", Pauli::I}, {"phi+_psi+", Pauli::X}, {"phi-_phi+", Pauli::Z}, {"phi-_psi+", Pauli::XZ}}};
}

// ---------------------------------------------------------------------------
// Exact swap evaluation

struct OutcomeResult {
  std::string outcome;
  double probability = 0.0;  // joint with the herald
  Pauli correction = Pauli::I;
  FockSectorWeights weights;
  double fidelity = std::numeric_limits<double>::quiet_NaN();
};

struct SwapResult {
  FockSectorWeights weights;  // conditional on an accepted herald
  std::optional<QubitDensityMatrix> rho;
  double fidelity = std::numeric_limits<double>::quiet_NaN();
  double herald_probability = 0.0;
  // Probability that both signal modes hold at least one photon.
  double heralding_efficiency = 0.0;
  // Expected value of c6 / (c4 eta1 eta6); absent without signal detectors.
  std::optional<double> estimator_expectation;
  double signal_efficiency_a = 1.0;
  double signal_efficiency_b = 1.0;
  std::vector<OutcomeResult> outcomes;
  std::optional<analytic::NoiseBudget> budget;
  // Exact probability of each coincidence class {c4, c5, c6, c8} per pulse,
  // as (class bits, probability) entries; the remainder has no class.
  std::vector<PatternProbability> class_distribution;
};

namespace detail {

// Detectors on one spatial mode, in spec order.
inline std::vector<std::string> detectors_on(const circuit::CircuitSpec& spec, int mode) {
  std::vector<std::string> out;
  for (const auto& d : spec.detectors) {
    if (d.mode == mode) out.push_back(d.label());
  }
  return out;
}

// Probability that modes a and b both hold photons.
inline double joint_presence(const StateEnsemble& ens, int a, int b) {
  const auto ia = ens.layout().optical_indices(a), ib = ens.layout().optical_indices(b);
  double p = 0.0;
  for (const auto& br : ens.branches()) {
    for (const auto& [occ, amp] : br.state.terms()) {
      int na = 0, nb = 0;
      for (auto i : ia) na += occ[i];
      for (auto i : ib) nb += occ[i];
      if (na > 0 && nb > 0) p += br.weight * std::norm(amp);
    }
  }
  return p;
}

// Appends `probability` split over class bits, merging equal classes.
inline void add_class(std::vector<PatternProbability>& dist, std::uint32_t cls, double probability) {
  if (probability <= 0.0) return;
  for (auto& d : dist) {
    if (d.pattern.mask == cls) {
      d.probability += probability;
      return;
    }
  }
  dist.push_back({ClickPattern{cls}, probability});
}

inline void close_distribution(std::vector<PatternProbability>& dist) {
  double total = 0.0;
  for (const auto& d : dist) total += d.probability;
  add_class(dist, 0u, std::max(0.0, 1.0 - total));
  std::sort(dist.begin(), dist.end(), [](const auto& x, const auto& y) { return x.pattern < y.pattern; });
}

}  // namespace detail

/// Evaluates every accepted herald outcome of a swap circuit, applies its
/// correction on the second signal photon and pools the results.
inline SwapResult run_swap(const circuit::CircuitSpec& spec, const CorrectionTable& table) {
  const int a = detail::param_mode(spec, "signal_a", 1), b = detail::param_mode(spec, "signal_b", 6);
  const std::string group = detail::single_group(spec);
  const auto ev = evaluate_heralded(spec);

  SwapResult res;
  res.herald_probability = ev.accepted_probability();
  if (!(res.herald_probability > 0.0)) throw DegenerateResult("herald probability is zero");

  std::vector<std::string> sig_a = detail::detectors_on(spec, a), sig_b = detail::detectors_on(spec, b);
  const bool has_signal = !sig_a.empty() && !sig_b.empty();
  std::vector<std::string> sig = sig_a;
  sig.insert(sig.end(), sig_b.begin(), sig_b.end());
  DetectorConfig det;
  if (has_signal) {
    det = DetectorConfig::select(spec, sig);
    res.signal_efficiency_a = spec.find_detector(sig_a.front())->efficiency;
    res.signal_efficiency_b = spec.find_detector(sig_b.front())->efficiency;
  }
  std::uint32_t mask_a = 0, mask_b = 0;
  for (std::size_t i = 0; i < sig.size(); ++i) (i < sig_a.size() ? mask_a : mask_b) |= 1u << i;

  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  double both_clicks = 0.0;
  for (const auto& run : ev.runs) {
    OutcomeResult o;
    o.outcome = outcome_key(run.outcomes, {group});
    o.probability = run.probability;
    o.correction = table.at(o.outcome);
    const StateEnsemble corrected = apply_unitary(run.state, pauli(b, o.correction));
    const auto red = reduce_to_qubits(corrected, {a, b});
    o.weights = red.weights;
    if (red.rho) {
      o.fidelity = analytic::bell_fidelity(*red.rho);
      rho += run.probability * red.weights.a2 * red.rho->matrix();
    }
    res.weights.a0 += run.probability * red.weights.a0;
    res.weights.a1 += run.probability * red.weights.a1;
    res.weights.a2 += run.probability * red.weights.a2;
    res.weights.overflow += run.probability * red.weights.overflow;
    res.heralding_efficiency += run.probability * detail::joint_presence(corrected, a, b);
    double p_both = 0.0;
    if (has_signal) {
      for (const auto& pp : pattern_distribution(corrected, det)) {
        const bool ca = pp.pattern.mask & mask_a, cb = pp.pattern.mask & mask_b;
        if (ca && cb) p_both += pp.probability;
      }
      both_clicks += run.probability * p_both;
    }
    detail::add_class(res.class_distribution, kC4 | kC6, run.probability * p_both);
    detail::add_class(res.class_distribution, kC4, run.probability * (1.0 - p_both));
    res.outcomes.push_back(std::move(o));
  }
  detail::close_distribution(res.class_distribution);

  const double p = res.herald_probability;
  res.weights.a0 /= p;
  res.weights.a1 /= p;
  res.weights.a2 /= p;
  res.weights.overflow /= p;
  res.heralding_efficiency /= p;
  if (res.weights.a2 > 0.0) {
    res.rho = QubitDensityMatrix(rho / (res.weights.a2 * p));
    res.fidelity = analytic::bell_fidelity(*res.rho);
  }
  if (has_signal) {
    res.estimator_expectation = both_clicks / p / (res.signal_efficiency_a * res.signal_efficiency_b);
  }
  if (spec.params.count("epsilon") && spec.params.count("gamma") && spec.params.count("eta")) {
    res.budget = analytic::noise_budget(spec.param("gamma", 1), spec.param("epsilon", 0), spec.param("eta", 1));
  }
  return res;
}

inline SwapResult run_swap_exact(const SwapConfig& cfg) {
  if (cfg.n_max > 3) throw std::invalid_argument("n_max must not exceed 3");
  return run_swap(build_swap_circuit(cfg), swap_corrections(cfg.same_basis));
}

struct SwapMonteCarlo {
  SwapResult exact;
  CoincidenceCounts counts;
  double a2_estimate = std::numeric_limits<double>::quiet_NaN();  // c6 / (c4 eta1 eta6)
  double a2_sigma = std::numeric_limits<double>::quiet_NaN();     // binomial, from the exact c6/c4 ratio
};

/// Draws `shots` pulses from the exact class distribution of `exact`.
inline SwapMonteCarlo sample_swap(SwapResult exact, std::uint64_t shots, std::uint64_t seed) {
  SwapMonteCarlo mc;
  mc.counts = sample_counts(exact.class_distribution, [](ClickPattern p) { return p.mask; }, shots, seed);
  const double ea = exact.signal_efficiency_a, eb = exact.signal_efficiency_b;
  if (mc.counts.c4 > 0 && exact.estimator_expectation) {
    mc.a2_estimate = analytic::a2_estimator(static_cast<double>(mc.counts.c6), static_cast<double>(mc.counts.c4), ea, eb);
    const double q = *exact.estimator_expectation * ea * eb;
    mc.a2_sigma = std::sqrt(q * (1.0 - q) / static_cast<double>(mc.counts.c4)) / (ea * eb);
  }
  mc.exact = std::move(exact);
  return mc;
}

inline SwapMonteCarlo run_swap_montecarlo(const SwapConfig& cfg, std::uint64_t shots, std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("shots must be at least 1");
  return sample_swap(run_swap_exact(cfg), shots, seed);
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRow {
  double eta = 1.0;
  double equiv_km = 0.0;
  double gamma = 1.0;
  double heralding_eff_exact = 0.0;
  double heralding_eff_model = 0.0;
  double success_rate = 0.0;
  double direct_transmission = 1.0;
  double estimator_expectation = 0.0;
  double a2 = 0.0;
  double fidelity = 0.0;
  SwapResult result;
};

/// One exact swap per channel point, gamma held by the sweep constraint.
inline std::vector<SweepRow> sweep_heralding(const SwapConfig& base, const std::vector<double>& etas,
                                             double constant = kDefaultSweepConstant) {
  std::vector<SwapConfig> cfgs;
  for (double eta : etas) {
    SwapConfig c = base;
    c.eta = eta;
    c.gamma = analytic::sweep_constraint(base.epsilon, eta, constant);
    c.validate();
    cfgs.push_back(c);
  }
  return parallel_map(cfgs.size(), [&](std::size_t i) {
    const SwapConfig& c = cfgs[i];
    const SwapResult r = run_swap_exact(c);
    const auto budget = analytic::noise_budget(c.gamma, c.epsilon, c.eta);
    SweepRow row;
    row.eta = c.eta;
    row.equiv_km = equivalent_km(c.eta);
    row.gamma = c.gamma;
    row.heralding_eff_exact = r.heralding_efficiency;
    row.estimator_expectation = r.estimator_expectation.value_or(std::numeric_limits<double>::quiet_NaN());
    row.heralding_eff_model = budget.heralding_eff_model;
    row.success_rate = budget.success_rate;
    row.direct_transmission = c.eta;
    row.a2 = r.weights.a2;
    row.fidelity = r.fidelity;
    row.result = r;
    return row;
  });
}

// ---------------------------------------------------------------------------
// Teleportation

enum class InputState { H, V, Plus, Minus, R, L };

inline constexpr std::array<InputState, 6> kAllInputs = {InputState::H,    InputState::V, InputState::Plus,
                                                          InputState::Minus, InputState::R, InputState::L};

inline const char* input_name(InputState s) {
  switch (s) {
    case InputState::H: return "H";
    case InputState::V: return "V";
    case InputState::Plus: return "+";
    case InputState::Minus: return "-";
    case InputState::R: return "R";
    case InputState::L: return "L";
  }
  return "?";
}

inline std::optional<InputState> parse_input(std::string_view s) {
  for (auto in : kAllInputs) {
    if (s == input_name(in)) return in;
  }
  return std::nullopt;
}

/// Waveplates taking |H> to the input state.
inline std::vector<circuit::Element> preparation(int mode, InputState s) {
  using namespace circuit;
  switch (s) {
    case InputState::H: return {};
    case InputState::V: return {Hwp{mode, 45.0}};
    case InputState::Plus: return {Hwp{mode, 22.5}};
    case InputState::Minus: return {Hwp{mode, -22.5}};
    case InputState::R: return {Qwp{mode, -45.0}};
    case InputState::L: return {Qwp{mode, 45.0}};
  }
  return {};
}

/// Waveplates taking the input state back to |H>, up to phase.
inline std::vector<ModeUnitary> analysis(int mode, InputState s) {
  switch (s) {
    case InputState::H: return {};
    case InputState::V: return {hwp(mode, deg_to_rad(45.0))};
    case InputState::Plus: return {hwp(mode, deg_to_rad(22.5))};
    case InputState::Minus: return {hwp(mode, deg_to_rad(-22.5))};
    case InputState::R: return {qwp(mode, deg_to_rad(45.0))};
    case InputState::L: return {qwp(mode, deg_to_rad(-45.0))};
  }
  return {};
}

/// Jones vector of the input state.
inline Eigen::Vector2cd input_vector(InputState s) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (s) {
    case InputState::H: return {1, 0};
    case InputState::V: return {0, 1};
    case InputState::Plus: return {r, r};
    case InputState::Minus: return {r, -r};
    case InputState::R: return {r, Complex(0, r)};
    case InputState::L: return {r, Complex(0, -r)};
  }
  return {1, 0};
}

struct TeleportConfig {
  SwapConfig swap;
  InputState input = InputState::H;
  double eta_a = 0.62;  // detection efficiency of photons 1 and 6
  // Preparation and detection efficiency of photon 7; chosen so that the
  // model rate a2 eta_a^2 eta_p / 2 gives about 6.2% at a2 = 0.83.
  double eta_p = 0.39;
  double herald_efficiency = 0.75;  // detector on the heralding photon 8
  double channel_baseline = 0.01;   // direct-transmission efficiency to beat

  static TeleportConfig ideal() {
    TeleportConfig c;
    c.swap = SwapConfig::ideal();
    c.eta_a = 1.0;
    c.eta_p = 1.0;
    c.herald_efficiency = 1.0;
    return c;
  }

  void validate() const {
    swap.validate();
    for (double e : {eta_a, eta_p, herald_efficiency, channel_baseline}) {
      if (!(e > 0.0 && e <= 1.0)) throw std::invalid_argument("teleport efficiencies must lie in (0, 1]");
    }
    if (eta_p > eta_a) throw std::invalid_argument("eta_p must not exceed eta_a");
  }
};

/// Bell outcomes of the type-I analyzer on (6, 7).
inline const std::vector<std::string>& teleport_groups() {
  static const std::vector<std::string> g = {"swap", "bsm"};
  return g;
}

/// Swap circuit extended by the heralded single photon (7, 8), a type-I BSM
/// on (6, 7) and Bob's detectors on photon 1. The input is |H>; run_teleport
/// inserts the preparation waveplates.
inline circuit::CircuitSpec build_teleport_circuit(const TeleportConfig& cfg) {
  cfg.validate();
  using namespace circuit;
  const SwapConfig& sw = cfg.swap;
  CircuitSpec spec;
  spec.modes = 8;
  spec.elements.push_back(Source{1, 2, sw.epsilon, 1.0, sw.n_max, BellState::PhiPlus, std::nullopt});
  spec.elements.push_back(Source{3, 4, sw.epsilon, sw.gamma, sw.n_max, BellState::PhiPlus, std::nullopt});
  spec.elements.push_back(Source{5, 6, sw.epsilon, 1.0, sw.n_max, BellState::PhiPlus, std::nullopt});
  spec.elements.push_back(Source{7, 8, sw.epsilon, 1.0, sw.n_max, BellState::PhiPlus, std::nullopt});
  detail::add_swap_core(spec, sw);
  if (cfg.eta_p < cfg.eta_a) spec.elements.push_back(Loss{7, cfg.eta_p / cfg.eta_a});
  spec.elements.push_back(Pbs{6, 7});
  spec.elements.push_back(Hwp{6, 22.5});
  spec.elements.push_back(Hwp{7, 22.5});
  if (sw.visibility < 1.0) spec = enable_partial_distinguishability(spec, sw.visibility);

  spec.detectors.push_back({1, Pol::H, cfg.eta_a, sw.dark});
  spec.detectors.push_back({1, Pol::V, cfg.eta_a, sw.dark});
  detail::add_bsm_pair(spec, 2, 3, sw.bsm_efficiency, sw.dark);
  detail::add_bsm_pair(spec, 4, 5, sw.bsm_efficiency, sw.dark);
  detail::add_bsm_pair(spec, 6, 7, cfg.eta_a, sw.dark);
  spec.detectors.push_back({8, Pol::H, cfg.herald_efficiency, sw.dark});

  detail::add_swap_heralds(spec, sw.same_basis);
  spec.heralds.push_back({"single:herald", {"8H"}});
  for (const auto& [name, pairs] : bsm_classes(6, 7, true)) {
    for (const auto& p : pairs) spec.heralds.push_back({"bsm:" + name, {p[0], p[1]}});
  }
  spec.params = {{"bob", 1},          {"input", 7},          {"epsilon", sw.epsilon},
                 {"gamma", sw.gamma}, {"eta", sw.eta},       {"eta_a", cfg.eta_a},
                 {"eta_p", cfg.eta_p}, {"baseline", cfg.channel_baseline}};
  return spec;
}

/// Places the preparation for `input` on `mode` right after the sources and
/// spectral-overlap elements.
inline circuit::CircuitSpec with_input(circuit::CircuitSpec spec, int mode, InputState input) {
  auto pos = std::find_if(spec.elements.begin(), spec.elements.end(), [](const circuit::Element& e) {
    return !std::holds_alternative<circuit::Source>(e) && !std::holds_alternative<circuit::Distinguish>(e);
  });
  const auto prep = preparation(mode, input);
  spec.elements.insert(pos, prep.begin(), prep.end());
  return spec;
}

struct TeleportOutcome {
  std::string outcome;  // "<swap>,<bsm>"
  double probability = 0.0;
  Pauli correction = Pauli::I;
  double fidelity = std::numeric_limits<double>::quiet_NaN();
};

struct TeleportResult {
  InputState input = InputState::H;
  double fidelity = std::numeric_limits<double>::quiet_NaN();
  double efficiency = 0.0;   // P(c8) / P(c5)
  double c5_probability = 0.0;
  double c8_probability = 0.0;
  std::vector<TeleportOutcome> outcomes;
  std::vector<PatternProbability> class_distribution;
};

namespace detail {

// Bob's click probabilities (H only, V only, any) after correction and analysis.
struct BobClicks {
  double h_only = 0.0;
  double v_only = 0.0;
  double any = 0.0;
};

inline BobClicks bob_clicks(const circuit::CircuitSpec& spec, const StateEnsemble& state, int bob, Pauli correction,
                            InputState input) {
  StateEnsemble s = apply_unitary(state, pauli(bob, correction));
  for (const auto& u : analysis(bob, input)) s = apply_unitary(s, u);
  const auto labels = detectors_on(spec, bob);
  const DetectorConfig det = DetectorConfig::select(spec, labels);
  const int ih = det.index_of(std::to_string(bob) + "H"), iv = det.index_of(std::to_string(bob) + "V");
  if (ih < 0 || iv < 0) throw std::invalid_argument("Bob needs H and V detectors");
  BobClicks c;
  for (const auto& pp : pattern_distribution(s, det)) {
    const bool h = pp.pattern.fired(static_cast<std::size_t>(ih)), v = pp.pattern.fired(static_cast<std::size_t>(iv));
    if (h && !v) c.h_only += pp.probability;
    if (v && !h) c.v_only += pp.probability;
    if (pp.pattern.mask) c.any += pp.probability;
  }
  return c;
}

inline const std::string& teleport_group_named(const circuit::CircuitSpec& spec, const std::string& name) {
  for (const auto& g : spec.herald_groups()) {
    if (g == name) return name;
  }
  throw std::invalid_argument("teleport circuit lacks herald group " + name);
}

}  // namespace detail

/// Exact teleportation of one input through a circuit with herald groups
/// "swap", "single" and "bsm". Fidelity compares Bob's analyzed photon with
/// the input; efficiency is P(all heralds and a Bob click) / P(swap and single).
inline TeleportResult run_teleport(const circuit::CircuitSpec& base, InputState input, const CorrectionTable& table) {
  for (const char* g : {"swap", "single", "bsm"}) detail::teleport_group_named(base, g);
  const int bob = detail::param_mode(base, "bob", 1), in_mode = detail::param_mode(base, "input", 7);
  const circuit::CircuitSpec spec = with_input(base, in_mode, input);
  const auto ev = evaluate_heralded(spec, {"single", "bsm"});
  if (!(ev.accepted_probability() > 0.0)) throw DegenerateResult("herald probability is zero");

  TeleportResult res;
  res.input = input;
  double good = 0.0, decided = 0.0;
  for (const auto& run : ev.runs) {
    const bool single = !run.outcomes.at("single").empty();
    const bool bsm = !run.outcomes.at("bsm").empty();
    std::uint32_t cls = kC4 | (single ? kC5 : 0u);
    if (!(single && bsm)) {
      detail::add_class(res.class_distribution, cls, run.probability);
      if (single) res.c5_probability += run.probability;
      continue;
    }
    TeleportOutcome o;
    o.outcome = outcome_key(run.outcomes, teleport_groups());
    o.probability = run.probability;
    o.correction = table.at(o.outcome);
    const auto clicks = detail::bob_clicks(spec, run.state, bob, o.correction, input);
    if (clicks.h_only + clicks.v_only > 0.0) o.fidelity = clicks.h_only / (clicks.h_only + clicks.v_only);
    good += run.probability * clicks.h_only;
    decided += run.probability * (clicks.h_only + clicks.v_only);
    res.c5_probability += run.probability;
    res.c8_probability += run.probability * clicks.any;
    detail::add_class(res.class_distribution, cls | kC8, run.probability * clicks.any);
    detail::add_class(res.class_distribution, cls, run.probability * (1.0 - clicks.any));
    res.outcomes.push_back(std::move(o));
  }
  detail::close_distribution(res.class_distribution);
  if (!(res.c5_probability > 0.0)) throw DegenerateResult("five-fold herald probability is zero");
  if (decided > 0.0) res.fidelity = good / decided;
  res.efficiency = res.c8_probability / res.c5_probability;
  return res;
}

/// For each (swap, bsm) outcome, the Pauli on Bob's photon that maximizes
/// the fidelity averaged over the six inputs.
inline CorrectionTable derive_teleport_corrections(const circuit::CircuitSpec& base) {
  const int bob = detail::param_mode(base, "bob", 1), in_mode = detail::param_mode(base, "input", 7);
  std::map<std::string, std::array<double, 4>> score;
  for (auto input : kAllInputs) {
    const circuit::CircuitSpec spec = with_input(base, in_mode, input);
    for (const auto& run : evaluate_heralded(spec).runs) {
      auto& s = score[outcome_key(run.outcomes, teleport_groups())];
      for (std::size_t k = 0; k < 4; ++k) {
        const auto c = detail::bob_clicks(spec, run.state, bob, kPaulis[k], input);
        if (c.h_only + c.v_only > 0.0) s[k] += c.h_only / (c.h_only + c.v_only) / kAllInputs.size();
      }
    }
  }
  CorrectionTable table;
  for (const auto& [key, s] : score) table.entries[key] = detail::pick_best(s, key);
  return table;
}

/// Frozen teleport corrections, reproduced by derive_teleport_corrections
/// on the ideal circuit.
inline CorrectionTable teleport_corrections() {
  return {{{"phi+_phi+,phi+", Pauli::I},
           {"phi+_phi+,phi-", Pauli::Z},
           {"phi+_psi+,phi+", Pauli::X},
           {"phi+_psi+,phi-", Pauli::XZ},
           {"phi-_phi+,phi+", Pauli::Z},
           {"phi-_phi+,phi-", Pauli::I},
           {"phi-_psi+,phi+", Pauli::XZ},
           {"phi-_psi+,phi-", Pauli::X}}};
}

struct TeleportSummary {
  std::vector<TeleportResult> rows;
  double average_fidelity = std::numeric_limits<double>::quiet_NaN();
  double average_efficiency = 0.0;
  std::optional<double> model_efficiency;  // a2 eta_a^2 eta_p / 2
  double baseline = 0.01;
  std::optional<analytic::ClassicalStrategy> classical;  // cloning-boosted at the average fidelity
  double advantage_ratio = std::numeric_limits<double>::quiet_NaN();

  bool beats_classical_fidelity() const { return average_fidelity > 2.0 / 3.0; }
  bool beats_direct() const { return average_efficiency > baseline; }
  bool beats_cloning() const { return classical && average_efficiency > classical->rate; }
};

/// Runs each input (in parallel) and compares the mean efficiency with the
/// direct and cloning-boosted classical rates. `swap_a2` feeds the model
/// efficiency when given.
inline TeleportSummary run_teleport_inputs(const circuit::CircuitSpec& spec, const std::vector<InputState>& inputs,
                                           const CorrectionTable& table, std::optional<double> swap_a2 = std::nullopt) {
  TeleportSummary s;
  s.rows = parallel_map(inputs.size(), [&](std::size_t i) { return run_teleport(spec, inputs[i], table); });
  double f = 0.0, e = 0.0;
  for (const auto& r : s.rows) {
    f += r.fidelity;
    e += r.efficiency;
  }
  s.average_fidelity = f / static_cast<double>(s.rows.size());
  s.average_efficiency = e / static_cast<double>(s.rows.size());
  s.baseline = spec.param("baseline", 0.01);
  if (swap_a2 && spec.params.count("eta_a") && spec.params.count("eta_p")) {
    s.model_efficiency = analytic::teleport_rate_model(std::min(1.0, *swap_a2), spec.param("eta_a", 1), spec.param("eta_p", 1));
  }
  if (s.average_fidelity > 2.0 / 3.0 && s.average_fidelity <= 1.0) {
    s.classical = analytic::classical_rate(s.average_fidelity, s.baseline);
    s.advantage_ratio = analytic::advantage_ratio(s.average_efficiency, s.classical->rate);
  }
  return s;
}

/// The swap stage of a teleport configuration, with photons 1 and 6
/// detected at eta_a.
inline SwapConfig swap_stage(const TeleportConfig& cfg) {
  SwapConfig s = cfg.swap;
  s.eta1 = cfg.eta_a;
  s.eta6 = cfg.eta_a;
  return s;
}

inline TeleportSummary run_teleport_all(const TeleportConfig& cfg, const std::vector<InputState>& inputs) {
  const auto spec = build_teleport_circuit(cfg);
  const double a2 = run_swap_exact(swap_stage(cfg)).weights.a2;
  return run_teleport_inputs(spec, inputs, teleport_corrections(), a2);
}

struct TeleportMonteCarlo {
  CoincidenceCounts counts;
  double efficiency_estimate = std::numeric_limits<double>::quiet_NaN();  // c8 / c5
  double efficiency_sigma = std::numeric_limits<double>::quiet_NaN();
};

inline TeleportMonteCarlo sample_teleport(const TeleportResult& exact, std::uint64_t shots, std::uint64_t seed) {
  TeleportMonteCarlo mc;
  mc.counts = sample_counts(exact.class_distribution, [](ClickPattern p) { return p.mask; }, shots, seed);
  if (mc.counts.c5 > 0) {
    mc.efficiency_estimate =
        analytic::teleport_rate_estimator(static_cast<double>(mc.counts.c8), static_cast<double>(mc.counts.c5));
    const double q = exact.efficiency;
    mc.efficiency_sigma = std::sqrt(q * (1.0 - q) / static_cast<double>(mc.counts.c5));
  }
  return mc;
}

// ---------------------------------------------------------------------------
// Presets

/// Frozen correction table covering every herald outcome of `spec`.
inline CorrectionTable corrections_for(const circuit::CircuitSpec& spec) {
  const bool teleport = spec.herald_groups().size() > 1;
  std::vector<CorrectionTable> candidates;
  if (teleport) {
    candidates = {teleport_corrections()};
  } else {
    candidates = {swap_corrections(false), swap_corrections(true)};
  }
  for (const auto& table : candidates) {
    bool covers = true;
    for (const auto& h : spec.heralds) {
      if (teleport && h.group() != "swap") continue;
      bool found = false;
      for (const auto& [key, p] : table.entries) {
        if (key.rfind(h.outcome(), 0) == 0) found = true;
      }
      covers = covers && found;
    }
    if (covers) return table;
  }
  throw std::invalid_argument("no correction table covers the herald outcomes of this circuit");
}

namespace presets {

// Measured single-photon indistinguishability between independent sources.
inline constexpr double kLabVisibility = 0.96;
// Channel point used for the teleportation run (about 100 km of fiber).
inline constexpr double kTeleportChannel = 0.03;

/// Reference arm efficiencies (defaults of SwapConfig) with lab visibility,
/// midpoint scaled by the sweep constraint.
inline SwapConfig lab_swap(double eta, double constant = kDefaultSweepConstant) {
  SwapConfig c;
  c.visibility = kLabVisibility;
  c.eta = eta;
  c.gamma = analytic::sweep_constraint(c.epsilon, eta, constant);
  return c;
}

inline TeleportConfig lab_teleport() {
  TeleportConfig c;
  c.swap = lab_swap(kTeleportChannel);
  return c;
}

}  // namespace presets

}  // namespace heraldsim::protocol

#endif  // HERALDSIM_PROTOCOL_HPP_
