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

#ifndef HERALDSIM_HERALDSIM_HPP_
#define HERALDSIM_HERALDSIM_HPP_

#include "heraldsim/analytic.hpp"
#include "heraldsim/circuit.hpp"
#include "heraldsim/circuitdsl.hpp"
#include "heraldsim/detection.hpp"
#include "heraldsim/engine.hpp"
#include "heraldsim/fock.hpp"
#include "heraldsim/optics.hpp"
#include "heraldsim/protocol.hpp"
#include "heraldsim/sources.hpp"

namespace heraldsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace heraldsim

#endif  // HERALDSIM_HERALDSIM_HPP_
