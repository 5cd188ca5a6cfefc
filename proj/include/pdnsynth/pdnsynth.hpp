/*
 * Copyright (c) 2026 The pdnsynth Authors.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

// Umbrella header.
#include "pdnsynth/candidates.hpp"
#include "pdnsynth/congestion/map.hpp"
#include "pdnsynth/congestion/steiner.hpp"
#include "pdnsynth/design.hpp"
#include "pdnsynth/error.hpp"
#include "pdnsynth/flow.hpp"
#include "pdnsynth/geometry.hpp"
#include "pdnsynth/io_json.hpp"
#include "pdnsynth/ir/analysis.hpp"
#include "pdnsynth/ir/solver.hpp"
#include "pdnsynth/ir/system.hpp"
#include "pdnsynth/numeric.hpp"
#include "pdnsynth/pdn_geometry.hpp"
#include "pdnsynth/pdn_graph.hpp"
#include "pdnsynth/report.hpp"
#include "pdnsynth/svg.hpp"
#include "pdnsynth/synthesis.hpp"
#include "pdnsynth/synthetic.hpp"
#include "pdnsynth/windows.hpp"

namespace pdnsynth {
inline constexpr const char* kVersion = "0.1.0";
}  // namespace pdnsynth
