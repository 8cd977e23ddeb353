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

#ifndef HERALDSIM_FOCK_HPP_
#define HERALDSIM_FOCK_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <charconv>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace heraldsim {

using Complex = std::complex<double>;

enum class Pol : std::uint8_t { H = 0, V = 1 };

inline char pol_char(Pol p) { return p == Pol::H ? 'H' : 'V'; }

/// One bosonic mode: spatial label, polarization and spectral bin.
struct OpticalMode {
  int spatial = 0;
  Pol pol = Pol::H;
  int bin = 0;
  auto operator<=>(const OpticalMode&) const = default;
};

inline constexpr std::size_t kMaxOpticalModes = 64;

// Amplitudes below this magnitude are dropped; their probability is tracked.
inline constexpr double kPruneThreshold = 1e-14;
inline constexpr double kMaxPrunedPerOp = 1e-10;

/// Spatial modes x {H, V} x spectral bins, in canonical order: spatial
/// ascending, then H before V, then bin 0 before bin 1.
class ModeLayout {
 public:
  ModeLayout() = default;

  explicit ModeLayout(std::vector<int> spatial, int spectral_bins = 1)
      : spatial_(std::move(spatial)), bins_(spectral_bins) {
    if (bins_ != 1 && bins_ != 2) {
      throw std::invalid_argument("spectral_bins must be 1 or 2");
    }
    std::sort(spatial_.begin(), spatial_.end());
    if (std::adjacent_find(spatial_.begin(), spatial_.end()) != spatial_.end()) {
      throw std::invalid_argument("spatial mode labels must be unique");
    }
    if (!spatial_.empty() && spatial_.front() < 1) {
      throw std::invalid_argument("spatial mode labels must be positive");
    }
    if (optical_count() > kMaxOpticalModes) {
      throw std::invalid_argument("layout exceeds " + std::to_string(kMaxOpticalModes) +
                                  " optical modes");
    }
  }

  const std::vector<int>& spatial_modes() const { return spatial_; }
  int spectral_bins() const { return bins_; }
  std::size_t optical_count() const { return spatial_.size() * 2 * static_cast<std::size_t>(bins_); }

  bool contains(int spatial) const {
    return std::binary_search(spatial_.begin(), spatial_.end(), spatial);
  }

  std::size_t spatial_index(int spatial) const {
    auto it = std::lower_bound(spatial_.begin(), spatial_.end(), spatial);
    if (it == spatial_.end() || *it != spatial) {
      throw std::out_of_range("spatial mode " + std::to_string(spatial) + " not in layout");
    }
    return static_cast<std::size_t>(it - spatial_.begin());
  }

  std::size_t index(OpticalMode m) const {
    if (m.bin < 0 || m.bin >= bins_) throw std::out_of_range("spectral bin out of range");
    return (spatial_index(m.spatial) * 2 + static_cast<std::size_t>(m.pol)) *
               static_cast<std::size_t>(bins_) +
           static_cast<std::size_t>(m.bin);
  }

  OpticalMode mode_at(std::size_t i) const {
    const auto b = static_cast<std::size_t>(bins_);
    return {spatial_[i / (2 * b)], static_cast<Pol>((i / b) % 2), static_cast<int>(i % b)};
  }

  /// All optical indices (both polarizations, every bin) of one spatial mode.
  std::vector<std::size_t> optical_indices(int spatial) const {
    std::vector<std::size_t> out;
    const std::size_t base = spatial_index(spatial) * 2 * static_cast<std::size_t>(bins_);
    for (std::size_t k = 0; k < 2 * static_cast<std::size_t>(bins_); ++k) out.push_back(base + k);
    return out;
  }

  bool operator==(const ModeLayout&) const = default;

 private:
  std::vector<int> spatial_;
  int bins_ = 1;
};

/// Photon count per optical mode; the Fock basis label.
class OccupationVector {
 public:
  OccupationVector() = default;
  explicit OccupationVector(std::size_t n) : size_(static_cast<std::uint8_t>(n)) {
    if (n > kMaxOpticalModes) throw std::invalid_argument("too many optical modes");
  }
  OccupationVector(std::initializer_list<int> counts) : OccupationVector(counts.size()) {
    std::size_t i = 0;
    for (int c : counts) set(i++, c);
  }

  std::size_t size() const { return size_; }
  int operator[](std::size_t i) const { return counts_[i]; }
  void set(std::size_t i, int n) {
    if (n < 0 || n > 255) throw std::out_of_range("occupation out of range");
    counts_[i] = static_cast<std::uint8_t>(n);
  }
  void add(std::size_t i, int delta) { set(i, counts_[i] + delta); }

  int total() const {
    int t = 0;
    for (std::size_t i = 0; i < size_; ++i) t += counts_[i];
    return t;
  }

  auto operator<=>(const OccupationVector&) const = default;
  bool operator==(const OccupationVector&) const = default;

 private:
  std::array<std::uint8_t, kMaxOpticalModes> counts_{};
  std::uint8_t size_ = 0;
};

namespace detail {

// Sorts terms by occupation, sums duplicates, prunes tiny amplitudes.
// Returns the discarded probability.
inline double canonicalize(std::vector<std::pair<OccupationVector, Complex>>& terms) {
  std::sort(terms.begin(), terms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t out = 0;
  double pruned = 0.0;
  for (std::size_t i = 0; i < terms.size();) {
    Complex sum = terms[i].second;
    std::size_t j = i + 1;
    while (j < terms.size() && terms[j].first == terms[i].first) sum += terms[j++].second;
    if (std::abs(sum) >= kPruneThreshold) {
      terms[out++] = {terms[i].first, sum};
    } else {
      pruned += std::norm(sum);
    }
    i = j;
  }
  terms.resize(out);
  if (pruned > kMaxPrunedPerOp) {
    throw std::logic_error("amplitude pruning discarded " + std::to_string(pruned) +
                           " probability in one operation");
  }
  return pruned;
}

inline std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// Sparse superposition of occupation vectors over a fixed layout.
/// Sub-normalized states are allowed (conditional branches).
class PureState {
 public:
  using Term = std::pair<OccupationVector, Complex>;

  PureState() = default;
  explicit PureState(ModeLayout layout) : layout_(std::move(layout)) {}

  static PureState from_terms(ModeLayout layout, std::vector<Term> terms) {
    PureState s(std::move(layout));
    for (const auto& [occ, amp] : terms) {
      if (occ.size() != s.layout_.optical_count()) {
        throw std::invalid_argument("occupation length does not match layout");
      }
    }
    s.pruned_ = detail::canonicalize(terms);
    s.terms_ = std::move(terms);
    return s;
  }

  const ModeLayout& layout() const { return layout_; }
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  // Probability dropped by pruning during the operation that produced this state.
  double pruned_probability() const { return pruned_; }

  double norm2() const {
    double n = 0.0;
    for (const auto& t : terms_) n += std::norm(t.second);
    return n;
  }

  Complex amplitude(const OccupationVector& occ) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), occ,
                               [](const Term& t, const OccupationVector& o) { return t.first < o; });
    return (it != terms_.end() && it->first == occ) ? it->second : Complex{};
  }

  PureState scaled(Complex factor) const {
    PureState s = *this;
    for (auto& t : s.terms_) t.second *= factor;
    return s;
  }

  PureState normalized() const {
    const double n = norm2();
    if (n <= 0.0) throw std::domain_error("cannot normalize a zero state");
    return scaled(1.0 / std::sqrt(n));
  }

  int max_photons() const {
    int m = 0;
    for (const auto& t : terms_) m = std::max(m, t.first.total());
    return m;
  }

 private:
  ModeLayout layout_;
  std::vector<Term> terms_;
  double pruned_ = 0.0;
};

/// Vacuum over a layout.
inline PureState vacuum(const ModeLayout& layout) {
  return PureState::from_terms(layout, {{OccupationVector(layout.optical_count()), Complex{1.0}}});
}

/// Single-photon-per-listed-mode product state, amplitude 1.
inline PureState basis_state(const ModeLayout& layout,
                             const std::vector<std::pair<OpticalMode, int>>& photons) {
  OccupationVector occ(layout.optical_count());
  for (const auto& [m, n] : photons) occ.add(layout.index(m), n);
  return PureState::from_terms(layout, {{occ, Complex{1.0}}});
}

/// Product state on the merged layout. Spatial labels must be disjoint.
inline PureState tensor(const PureState& a, const PureState& b) {
  const ModeLayout& la = a.layout();
  const ModeLayout& lb = b.layout();
  if (la.spectral_bins() != lb.spectral_bins()) {
    throw std::invalid_argument("tensor: spectral bin counts differ");
  }
  std::vector<int> labels = la.spatial_modes();
  for (int s : lb.spatial_modes()) {
    if (la.contains(s)) {
      throw std::invalid_argument("tensor: spatial mode " + std::to_string(s) +
                                  " appears in both factors");
    }
    labels.push_back(s);
  }
  ModeLayout joint(labels, la.spectral_bins());
  std::vector<std::size_t> map_a(la.optical_count()), map_b(lb.optical_count());
  for (std::size_t i = 0; i < map_a.size(); ++i) map_a[i] = joint.index(la.mode_at(i));
  for (std::size_t i = 0; i < map_b.size(); ++i) map_b[i] = joint.index(lb.mode_at(i));

  std::vector<PureState::Term> terms;
  terms.reserve(a.size() * b.size());
  for (const auto& [oa, ca] : a.terms()) {
    OccupationVector base(joint.optical_count());
    for (std::size_t i = 0; i < map_a.size(); ++i) base.set(map_a[i], oa[i]);
    for (const auto& [ob, cb] : b.terms()) {
      OccupationVector occ = base;
      for (std::size_t i = 0; i < map_b.size(); ++i) occ.set(map_b[i], ob[i]);
      terms.emplace_back(occ, ca * cb);
    }
  }
  return PureState::from_terms(std::move(joint), std::move(terms));
}

/// Re-expresses a state on a layout with more spectral bins; photons stay in bin 0.
inline PureState with_spectral_bins(const PureState& s, int bins) {
  const ModeLayout& from = s.layout();
  if (bins == from.spectral_bins()) return s;
  if (bins < from.spectral_bins()) throw std::invalid_argument("cannot drop spectral bins");
  ModeLayout to(from.spatial_modes(), bins);
  std::vector<PureState::Term> terms;
  for (const auto& [occ, amp] : s.terms()) {
    OccupationVector o(to.optical_count());
    for (std::size_t i = 0; i < occ.size(); ++i) o.set(to.index(from.mode_at(i)), occ[i]);
    terms.emplace_back(o, amp);
  }
  return PureState::from_terms(std::move(to), std::move(terms));
}

/// One component of a classical mixture. The record tags the loss or
/// measurement history that produced the branch.
struct Branch {
  double weight = 1.0;
  PureState state;
  std::string record;
};

/// Weighted ensemble of pure states sharing one layout. The represented
/// density operator is sum_k weight_k |psi_k><psi_k|.
class StateEnsemble {
 public:
  StateEnsemble() = default;

  explicit StateEnsemble(PureState s) : layout_(s.layout()) {
    branches_.push_back({1.0, std::move(s), ""});
  }

  StateEnsemble(ModeLayout layout, std::vector<Branch> branches)
      : layout_(std::move(layout)), branches_(std::move(branches)) {
    for (const auto& b : branches_) {
      if (!(b.weight >= 0.0)) throw std::invalid_argument("branch weight must be non-negative");
      if (!(b.state.layout() == layout_)) {
        throw std::invalid_argument("all branches must share one layout");
      }
    }
  }

  const ModeLayout& layout() const { return layout_; }
  const std::vector<Branch>& branches() const { return branches_; }
  std::size_t size() const { return branches_.size(); }

  double total_probability() const {
    double p = 0.0;
    for (const auto& b : branches_) p += b.weight * b.state.norm2();
    return p;
  }

  StateEnsemble normalized() const {
    const double p = total_probability();
    if (p <= 0.0) throw std::domain_error("cannot normalize an empty ensemble");
    StateEnsemble e = *this;
    for (auto& b : e.branches_) b.weight /= p;
    return e;
  }

 private:
  ModeLayout layout_;
  std::vector<Branch> branches_;
};

/// Rewrites a mixture as the eigen-decomposition of its density operator,
/// which has the fewest branches of any pure-state decomposition. Left
/// unchanged when the support exceeds `max_support` basis states or the
/// rank does not shrink the branch count. Records are dropped.
inline StateEnsemble spectral_compress(const StateEnsemble& ens, std::size_t max_support = 2048) {
  if (ens.size() < 2) return ens;
  std::map<OccupationVector, Eigen::Index> index;
  for (const auto& b : ens.branches()) {
    for (const auto& [occ, amp] : b.state.terms()) index.emplace(occ, 0);
  }
  if (index.size() > max_support) return ens;
  std::vector<OccupationVector> basis;
  basis.reserve(index.size());
  for (auto& [occ, i] : index) {
    i = static_cast<Eigen::Index>(basis.size());
    basis.push_back(occ);
  }
  const auto dim = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& b : ens.branches()) {
    const auto& t = b.state.terms();
    for (const auto& [oi, ai] : t) {
      const Eigen::Index i = index.at(oi);
      for (const auto& [oj, aj] : t) rho(i, index.at(oj)) += b.weight * ai * std::conj(aj);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  const auto& values = es.eigenvalues();
  std::vector<Eigen::Index> keep;
  double dropped = 0.0;
  for (Eigen::Index k = 0; k < dim; ++k) {
    if (values(k) > kPruneThreshold) {
      keep.push_back(k);
    } else {
      dropped += std::max(0.0, values(k));
    }
  }
  if (keep.size() >= ens.size()) return ens;
  if (dropped > kMaxPrunedPerOp) throw std::runtime_error("spectral compression dropped too much probability");
  std::vector<Branch> out;
  for (Eigen::Index k : keep) {
    std::vector<PureState::Term> terms;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const Complex c = es.eigenvectors()(i, k);
      if (c != Complex{}) terms.emplace_back(basis[static_cast<std::size_t>(i)], c);
    }
    PureState st = PureState::from_terms(ens.layout(), std::move(terms));
    const double n2 = st.norm2();
    out.push_back({values(k) * n2, st.scaled(1.0 / std::sqrt(n2)), ""});
  }
  return StateEnsemble(ens.layout(), std::move(out));
}

/// Two-qubit polarization state in the basis {HH, HV, VH, VV}.
class QubitDensityMatrix {
 public:
  QubitDensityMatrix() : m_(Eigen::Matrix4cd::Zero()) {}
  explicit QubitDensityMatrix(const Eigen::Matrix4cd& m) : m_(m) {}

  static QubitDensityMatrix from_pure(const Eigen::Vector4cd& psi) {
    const Eigen::Vector4cd v = psi / psi.norm();
    return QubitDensityMatrix(v * v.adjoint());
  }

  const Eigen::Matrix4cd& matrix() const { return m_; }
  Complex operator()(int r, int c) const { return m_(r, c); }
  Complex trace() const { return m_.trace(); }

  bool is_hermitian(double tol = 1e-10) const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol; }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(0.5 * (m_ + m_.adjoint()));
    return es.eigenvalues().minCoeff();
  }

  bool is_valid(double tol = 1e-9) const {
    return is_hermitian(1e-10) && std::abs(trace() - Complex{1.0}) <= tol && min_eigenvalue() >= -tol;
  }

 private:
  Eigen::Matrix4cd m_;
};

/// Heralded probability mass by photon presence in the two signal modes.
/// Overflow holds events with two or more photons in one spatial mode.
struct FockSectorWeights {
  double a0 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double overflow = 0.0;
  double total() const { return a0 + a1 + a2 + overflow; }
};

struct QubitReduction {
  FockSectorWeights weights;
  // Normalized a2-sector state; empty when a2 == 0.
  std::optional<QubitDensityMatrix> rho;
};

/// Classifies an ensemble on exactly two spatial modes into photon-number
/// sectors and returns the polarization state of the one-photon-each sector.
/// Spectral bins are traced out.
inline QubitReduction reduce_to_qubits(const StateEnsemble& ens, std::pair<int, int> spatial_pair) {
  const ModeLayout& layout = ens.layout();
  const auto [first, second] = spatial_pair;
  if (first == second || layout.spatial_modes().size() != 2 || !layout.contains(first) ||
      !layout.contains(second)) {
    throw std::invalid_argument("reduce_to_qubits: ensemble must live on exactly the two listed modes");
  }
  const int bins = layout.spectral_bins();
  QubitReduction out;
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();

  for (const auto& br : ens.branches()) {
    // a2-sector amplitudes grouped by (bin_first, bin_second).
    std::vector<Eigen::Vector4cd> by_bins(static_cast<std::size_t>(bins * bins), Eigen::Vector4cd::Zero());
    for (const auto& [occ, amp] : br.state.terms()) {
      const double p = br.weight * std::norm(amp);
      int n1 = 0, n2 = 0;
      OpticalMode m1{}, m2{};
      for (std::size_t i = 0; i < occ.size(); ++i) {
        if (occ[i] == 0) continue;
        const OpticalMode m = layout.mode_at(i);
        if (m.spatial == first) {
          n1 += occ[i];
          m1 = m;
        } else {
          n2 += occ[i];
          m2 = m;
        }
      }
      if (n1 == 0 && n2 == 0) {
        out.weights.a0 += p;
      } else if (n1 + n2 == 1) {
        out.weights.a1 += p;
      } else if (n1 == 1 && n2 == 1) {
        out.weights.a2 += p;
        const int q = static_cast<int>(m1.pol) * 2 + static_cast<int>(m2.pol);
        by_bins[static_cast<std::size_t>(m1.bin * bins + m2.bin)](q) += amp;
      } else {
        out.weights.overflow += p;
      }
    }
    for (const auto& v : by_bins) rho += br.weight * (v * v.adjoint());
  }
  if (out.weights.a2 > 0.0) out.rho = QubitDensityMatrix(rho / rho.trace().real());
  return out;
}

/// Polarization state of a single spatial mode's one-photon sector, plus
/// the probability of that sector. Spectral bins are traced out.
struct SingleQubitReduction {
  double vacuum = 0.0;
  double single = 0.0;
  double overflow = 0.0;
  std::optional<Eigen::Matrix2cd> rho;
};

inline SingleQubitReduction reduce_to_qubit(const StateEnsemble& ens, int spatial) {
  const ModeLayout& layout = ens.layout();
  if (layout.spatial_modes().size() != 1 || !layout.contains(spatial)) {
    throw std::invalid_argument("reduce_to_qubit: ensemble must live on exactly the listed mode");
  }
  SingleQubitReduction out;
  Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
  for (const auto& br : ens.branches()) {
    std::vector<Eigen::Vector2cd> by_bin(static_cast<std::size_t>(layout.spectral_bins()),
                                         Eigen::Vector2cd::Zero());
    for (const auto& [occ, amp] : br.state.terms()) {
      const double p = br.weight * std::norm(amp);
      const int n = occ.total();
      if (n == 0) {
        out.vacuum += p;
      } else if (n == 1) {
        out.single += p;
        for (std::size_t i = 0; i < occ.size(); ++i) {
          if (occ[i] == 1) {
            const OpticalMode m = layout.mode_at(i);
            by_bin[static_cast<std::size_t>(m.bin)](static_cast<int>(m.pol)) += amp;
          }
        }
      } else {
        out.overflow += p;
      }
    }
    for (const auto& v : by_bin) rho += br.weight * (v * v.adjoint());
  }
  if (out.single > 0.0) out.rho = rho / rho.trace().real();
  return out;
}

/// Debug text form: one line "(n0,n1,...): re, im" per term, canonical order.
inline std::string to_debug_string(const PureState& s) {
  std::string out;
  for (const auto& [occ, amp] : s.terms()) {
    out += '(';
    for (std::size_t i = 0; i < occ.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(occ[i]);
    }
    out += "): " + detail::format_double(amp.real()) + ", " + detail::format_double(amp.imag()) + "\n";
  }
  return out;
}

}  // namespace heraldsim

#endif  // HERALDSIM_FOCK_HPP_
