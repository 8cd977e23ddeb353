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

#ifndef HERALDSIM_OPTICS_HPP_
#define HERALDSIM_OPTICS_HPP_

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "heraldsim/fock.hpp"

namespace heraldsim {

/// A passive linear-optical transformation on a few modes. Creation operators
/// transform as a_i^dag -> sum_j U(j, i) a_j^dag, so column i is the image of
/// input mode i. When bin_blind is set, the bins of `modes` are ignored and
/// the same matrix acts on every spectral bin.
class ModeUnitary {
 public:
  ModeUnitary(std::vector<OpticalMode> modes, Eigen::MatrixXcd matrix, bool bin_blind = true)
      : modes_(std::move(modes)), matrix_(std::move(matrix)), bin_blind_(bin_blind) {
    const auto k = static_cast<Eigen::Index>(modes_.size());
    if (modes_.empty() || modes_.size() > 16) throw std::invalid_argument("ModeUnitary: 1..16 modes");
    if (matrix_.rows() != k || matrix_.cols() != k) {
      throw std::invalid_argument("ModeUnitary: matrix size does not match mode count");
    }
    const Eigen::MatrixXcd err = matrix_.adjoint() * matrix_ - Eigen::MatrixXcd::Identity(k, k);
    if (err.cwiseAbs().maxCoeff() > 1e-10) throw std::invalid_argument("ModeUnitary: matrix is not unitary");
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      for (std::size_t j = i + 1; j < modes_.size(); ++j) {
        if (modes_[i] == modes_[j]) throw std::invalid_argument("ModeUnitary: repeated mode");
      }
    }
  }

  const std::vector<OpticalMode>& modes() const { return modes_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  bool bin_blind() const { return bin_blind_; }

  ModeUnitary adjoint() const { return ModeUnitary(modes_, matrix_.adjoint(), bin_blind_); }

 private:
  std::vector<OpticalMode> modes_;
  Eigen::MatrixXcd matrix_;
  bool bin_blind_;
};

namespace detail {

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

using LocalOcc = std::array<std::uint8_t, 16>;

// Output Fock amplitudes of prod_i (sum_j U(j,i) a_j^dag)^{n_i} / sqrt(n_i!) |0>.
inline std::vector<std::pair<LocalOcc, Complex>> expand_creation(const Eigen::MatrixXcd& u,
                                                                 const LocalOcc& in, int k) {
  std::vector<std::pair<LocalOcc, Complex>> poly{{LocalOcc{}, Complex{1.0}}};
  double in_norm = 1.0;
  for (int i = 0; i < k; ++i) {
    in_norm *= factorial(in[static_cast<std::size_t>(i)]);
    for (int rep = 0; rep < in[static_cast<std::size_t>(i)]; ++rep) {
      std::map<LocalOcc, Complex> next;
      for (const auto& [mono, c] : poly) {
        for (int j = 0; j < k; ++j) {
          const Complex uji = u(j, i);
          if (uji == Complex{}) continue;
          LocalOcc m = mono;
          ++m[static_cast<std::size_t>(j)];
          next[m] += c * uji;
        }
      }
      poly.assign(next.begin(), next.end());
    }
  }
  for (auto& [mono, c] : poly) {
    double out_norm = 1.0;
    for (int j = 0; j < k; ++j) out_norm *= factorial(mono[static_cast<std::size_t>(j)]);
    c *= std::sqrt(out_norm / in_norm);
  }
  return poly;
}

}  // namespace detail

/// Applies a mode unitary by creation-operator substitution.
inline PureState apply_unitary(const PureState& state, const ModeUnitary& u) {
  const ModeLayout& layout = state.layout();
  const int k = static_cast<int>(u.modes().size());
  std::vector<int> bins;
  if (u.bin_blind()) {
    for (int b = 0; b < layout.spectral_bins(); ++b) bins.push_back(b);
  } else {
    bins.push_back(-1);
  }

  PureState current = state;
  double pruned = 0.0;
  for (int bin : bins) {
    std::vector<std::size_t> idx;
    for (const auto& m : u.modes()) {
      idx.push_back(layout.index(bin < 0 ? m : OpticalMode{m.spatial, m.pol, bin}));
    }
    std::map<detail::LocalOcc, std::vector<std::pair<detail::LocalOcc, Complex>>> cache;
    std::vector<PureState::Term> terms;
    terms.reserve(current.size() * 2);
    for (const auto& [occ, amp] : current.terms()) {
      detail::LocalOcc local{};
      bool any = false;
      for (int i = 0; i < k; ++i) {
        local[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(occ[idx[static_cast<std::size_t>(i)]]);
        any = any || local[static_cast<std::size_t>(i)] != 0;
      }
      if (!any) {
        terms.emplace_back(occ, amp);
        continue;
      }
      auto it = cache.find(local);
      if (it == cache.end()) it = cache.emplace(local, detail::expand_creation(u.matrix(), local, k)).first;
      for (const auto& [out, c] : it->second) {
        OccupationVector o = occ;
        for (int j = 0; j < k; ++j) o.set(idx[static_cast<std::size_t>(j)], out[static_cast<std::size_t>(j)]);
        terms.emplace_back(o, amp * c);
      }
    }
    current = PureState::from_terms(layout, std::move(terms));
    pruned += current.pruned_probability();
  }
  if (pruned > kMaxPrunedPerOp) throw std::logic_error("apply_unitary: pruning budget exceeded");
  return current;
}

inline StateEnsemble apply_unitary(const StateEnsemble& ens, const ModeUnitary& u) {
  std::vector<Branch> out;
  out.reserve(ens.size());
  for (const auto& b : ens.branches()) out.push_back({b.weight, apply_unitary(b.state, u), b.record});
  return StateEnsemble(ens.layout(), std::move(out));
}

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Jones matrix acting on (H, V) of one spatial mode.
inline ModeUnitary polarization_element(int spatial, const Eigen::Matrix2cd& jones) {
  return ModeUnitary({{spatial, Pol::H}, {spatial, Pol::V}}, jones);
}

/// Half-wave plate, fast axis at theta: [[cos 2t, sin 2t], [sin 2t, -cos 2t]].
inline ModeUnitary hwp(int spatial, double theta) {
  Eigen::Matrix2cd j;
  j << std::cos(2 * theta), std::sin(2 * theta), std::sin(2 * theta), -std::cos(2 * theta);
  return polarization_element(spatial, j);
}

/// Quarter-wave plate, fast axis at theta.
inline ModeUnitary qwp(int spatial, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const Complex i{0.0, 1.0};
  Eigen::Matrix2cd j;
  j << c * c + i * s * s, (1.0 - i) * s * c, (1.0 - i) * s * c, s * s + i * c * c;
  return polarization_element(spatial, std::exp(i * std::numbers::pi / 4.0) * j);
}

inline ModeUnitary phase(int spatial, Pol pol, double phi) {
  Eigen::Matrix2cd j = Eigen::Matrix2cd::Identity();
  const int k = static_cast<int>(pol);
  j(k, k) = std::exp(Complex{0.0, phi});
  return polarization_element(spatial, j);
}

/// Polarizing beam splitter: H transmits, V swaps spatial modes with no
/// extra phase.
inline ModeUnitary pbs(int a, int b) {
  if (a == b) throw std::invalid_argument("pbs: modes must differ");
  // modes: aH, aV, bH, bV
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = 1.0;
  m(2, 2) = 1.0;
  m(3, 1) = 1.0;
  m(1, 3) = 1.0;
  return ModeUnitary({{a, Pol::H}, {a, Pol::V}, {b, Pol::H}, {b, Pol::V}}, m);
}

/// PBS in the +/- basis: HWP(22.5 deg) on both inputs, PBS, HWP(22.5 deg) on
/// both outputs.
inline std::vector<ModeUnitary> cpbs(int a, int b) {
  if (a == b) throw std::invalid_argument("cpbs: modes must differ");
  const double t = deg_to_rad(22.5);
  return {hwp(a, t), hwp(b, t), pbs(a, b), hwp(a, t), hwp(b, t)};
}

/// Polarization-independent beam splitter with power transmissivity t:
/// a^dag -> sqrt(t) a^dag + sqrt(1-t) b^dag, b^dag -> sqrt(1-t) a^dag - sqrt(t) b^dag.
inline ModeUnitary beam_splitter(int a, int b, double transmissivity = 0.5) {
  if (a == b) throw std::invalid_argument("beam_splitter: modes must differ");
  const double t = std::sqrt(transmissivity), r = std::sqrt(1.0 - transmissivity);
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  for (int p = 0; p < 2; ++p) {
    m(p, p) = t;
    m(2 + p, p) = r;
    m(p, 2 + p) = r;
    m(2 + p, 2 + p) = -t;
  }
  return ModeUnitary({{a, Pol::H}, {a, Pol::V}, {b, Pol::H}, {b, Pol::V}}, m);
}

enum class Pauli { I, X, Z, XZ };

inline const char* pauli_name(Pauli p) {
  switch (p) {
    case Pauli::I: return "I";
    case Pauli::X: return "X";
    case Pauli::Z: return "Z";
    case Pauli::XZ: return "XZ";
  }
  return "?";
}

inline Eigen::Matrix2cd pauli_matrix(Pauli p) {
  Eigen::Matrix2cd x, z;
  x << 0, 1, 1, 0;
  z << 1, 0, 0, -1;
  switch (p) {
    case Pauli::I: return Eigen::Matrix2cd::Identity();
    case Pauli::X: return x;
    case Pauli::Z: return z;
    case Pauli::XZ: return x * z;
  }
  return Eigen::Matrix2cd::Identity();
}

inline ModeUnitary pauli(int spatial, Pauli p) { return polarization_element(spatial, pauli_matrix(p)); }

/// Polarization-independent transmission eta on every optical mode of one
/// spatial mode.
struct LossChannel {
  int spatial = 0;
  double eta = 1.0;

  LossChannel(int spatial_mode, double transmissivity) : spatial(spatial_mode), eta(transmissivity) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("loss eta must lie in [0, 1]");
  }
};

namespace detail {

inline double binomial(int n, int k) {
  return factorial(n) / (factorial(k) * factorial(n - k));
}

inline bool same_ray(const PureState& a, const PureState& b) {
  if (a.size() != b.size()) return false;
  Complex overlap{};
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a.terms()[i].first == b.terms()[i].first)) return false;
    overlap += std::conj(a.terms()[i].second) * b.terms()[i].second;
  }
  return std::abs(std::abs(overlap) - 1.0) < 1e-12;
}

}  // namespace detail

/// Merges branches whose normalized states coincide up to global phase.
inline StateEnsemble coalesce(const StateEnsemble& ens) {
  std::vector<Branch> out;
  std::unordered_map<std::size_t, std::vector<std::size_t>> buckets;  // support hash -> indices into out
  for (const auto& b : ens.branches()) {
    if (b.weight <= 0.0 || b.state.empty()) continue;
    std::size_t h = b.state.size();
    for (const auto& [occ, amp] : b.state.terms()) {
      for (std::size_t i = 0; i < occ.size(); ++i) h = h * 1000003u + occ[i];
    }
    auto& bucket = buckets[h];
    bool merged = false;
    for (std::size_t k : bucket) {
      if (detail::same_ray(out[k].state, b.state)) {
        out[k].weight += b.weight;
        merged = true;
        break;
      }
    }
    if (!merged) {
      bucket.push_back(out.size());
      out.push_back(b);
    }
  }
  return StateEnsemble(ens.layout(), std::move(out));
}

/// Binomial photon loss. Each branch splits by the number of photons lost from
/// every optical mode of the channel's spatial mode; coherence is kept inside
/// each loss record. Output branch states are normalized.
inline StateEnsemble apply_loss(const StateEnsemble& ens, const LossChannel& ch) {
  if (ch.eta == 1.0) return ens;
  const ModeLayout& layout = ens.layout();
  const std::vector<std::size_t> idx = layout.optical_indices(ch.spatial);
  const double keep = ch.eta, lose = 1.0 - ch.eta;

  std::vector<Branch> out;
  for (const auto& br : ens.branches()) {
    std::map<std::vector<int>, std::vector<PureState::Term>> by_record;
    for (const auto& [occ, amp] : br.state.terms()) {
      std::vector<int> n(idx.size()), k(idx.size(), 0);
      for (std::size_t i = 0; i < idx.size(); ++i) n[i] = occ[idx[i]];
      // odometer over k_i in [0, n_i]
      while (true) {
        double f = 1.0;
        OccupationVector o = occ;
        for (std::size_t i = 0; i < idx.size(); ++i) {
          f *= detail::binomial(n[i], k[i]) * std::pow(keep, n[i] - k[i]) * std::pow(lose, k[i]);
          o.set(idx[i], n[i] - k[i]);
        }
        if (f > 0.0) by_record[k].emplace_back(o, amp * std::sqrt(f));
        std::size_t pos = 0;
        while (pos < idx.size() && k[pos] == n[pos]) k[pos++] = 0;
        if (pos == idx.size()) break;
        ++k[pos];
      }
    }
    for (auto& [k, terms] : by_record) {
      PureState s = PureState::from_terms(layout, std::move(terms));
      const double n2 = s.norm2();
      if (n2 <= 0.0) continue;
      std::string rec = br.record + "L" + std::to_string(ch.spatial) + "[";
      for (std::size_t i = 0; i < k.size(); ++i) rec += (i ? "," : "") + std::to_string(k[i]);
      rec += "]";
      out.push_back({br.weight * n2, s.scaled(1.0 / std::sqrt(n2)), std::move(rec)});
    }
  }
  return coalesce(StateEnsemble(layout, std::move(out)));
}

}  // namespace heraldsim

#endif  // HERALDSIM_OPTICS_HPP_
