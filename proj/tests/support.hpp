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

#ifndef HERALDSIM_TESTS_SUPPORT_HPP_
#define HERALDSIM_TESTS_SUPPORT_HPP_

#include <string>
#include <utility>
#include <vector>

#include "heraldsim/heraldsim.hpp"

namespace heraldsim::testing {

inline PureState photons(const ModeLayout& layout, const std::vector<std::pair<OpticalMode, int>>& occ) {
  return basis_state(layout, occ);
}

inline PureState single(const ModeLayout& layout, int spatial, Pol pol) { return basis_state(layout, {{{spatial, pol}, 1}}); }

// (|HH> + |VV>) / sqrt(2) on spatial modes a < b.
inline PureState phi_plus(int a, int b) {
  ModeLayout l({a, b});
  OccupationVector hh(l.optical_count()), vv(l.optical_count());
  hh.set(l.index({a, Pol::H}), 1);
  hh.set(l.index({b, Pol::H}), 1);
  vv.set(l.index({a, Pol::V}), 1);
  vv.set(l.index({b, Pol::V}), 1);
  const double r = 1.0 / std::sqrt(2.0);
  return PureState::from_terms(l, {{hh, Complex{r}}, {vv, Complex{r}}});
}

inline double total_norm(const StateEnsemble& e) { return e.total_probability(); }

}  // namespace heraldsim::testing

#endif  // HERALDSIM_TESTS_SUPPORT_HPP_
