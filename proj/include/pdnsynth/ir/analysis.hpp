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

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "pdnsynth/design.hpp"
#include "pdnsynth/ir/solver.hpp"
#include "pdnsynth/numeric.hpp"
#include "pdnsynth/windows.hpp"

namespace pdnsynth {

struct WindowIrStats {
  double max_drop = 0.0;   // mV
  double mean_drop = 0.0;  // mV
  std::size_t count = 0;
  bool empty = true;
};

/// Per-window drop statistics; every node lands in exactly one window.
inline std::vector<WindowIrStats> window_ir_stats(const IrSolution& sol, const WindowGrid& grid) {
  const auto& sys = *sol.system;
  if (!grid.die.contains(sys.die)) throw Error(ErrorKind::Coverage, "window grid does not cover the die");
  std::vector<WindowIrStats> out(static_cast<std::size_t>(grid.size()));
  std::vector<double> sum(out.size(), 0.0);
  for (std::size_t n = 0; n < sys.nodes.size(); ++n) {
    const int w = grid.locate({sys.nodes[n].x, sys.nodes[n].y});
    if (w < 0) throw Error(ErrorKind::Coverage, "node outside the window grid");
    auto& s = out[static_cast<std::size_t>(w)];
    const double d = sol.drop[n];
    s.max_drop = s.count == 0 ? d : std::max(s.max_drop, d);
    sum[static_cast<std::size_t>(w)] += d;
    ++s.count;
    s.empty = false;
  }
  for (std::size_t w = 0; w < out.size(); ++w)
    if (out[w].count > 0) out[w].mean_drop = sum[w] / static_cast<double>(out[w].count);
  return out;
}

struct EmEntry {
  std::size_t branch = 0;
  BranchKind kind = BranchKind::Segment;
  int layer = 0;
  int element = 0;
  double current = 0.0;  // |I|, mA
  double width = 0.0;    // um
  double density = 0.0;  // mA/um
  double limit = 0.0;    // mA/um
  double utilization = 0.0;
  Point at;  // branch midpoint
};

struct EmReport {
  std::vector<EmEntry> entries;  // utilization descending
  std::vector<EmEntry> violations;
  double max_utilization = 0.0;

  bool pass() const { return violations.empty(); }
};

/// Current density |I| / width on every stripe segment and via. Vias use the
/// technology's effective via width and the limit of their lower layer.
inline EmReport em_check(const IrSolution& sol, const Technology& tech) {
  const auto& sys = *sol.system;
  EmReport rep;
  for (std::size_t b = 0; b < sys.branches.size(); ++b) {
    const auto& br = sys.branches[b];
    if (br.kind == BranchKind::Attach) continue;
    EmEntry e;
    e.branch = b;
    e.kind = br.kind;
    e.layer = br.layer;
    e.element = br.element;
    e.current = std::abs(sol.branch_current[b]);
    e.width = br.width;
    e.density = e.current / br.width;
    e.limit = tech.layer(br.layer).em_limit;
    e.utilization = e.density / e.limit;
    const auto& na = sys.nodes[static_cast<std::size_t>(br.a)];
    const auto& nb = sys.nodes[static_cast<std::size_t>(br.b)];
    e.at = {0.5 * (na.x + nb.x), 0.5 * (na.y + nb.y)};
    rep.entries.push_back(e);
  }
  std::stable_sort(rep.entries.begin(), rep.entries.end(),
                   [](const EmEntry& l, const EmEntry& r) { return l.utilization > r.utilization; });
  for (const auto& e : rep.entries)
    if (e.density > e.limit) rep.violations.push_back(e);
  if (!rep.entries.empty()) rep.max_utilization = rep.entries.front().utilization;
  return rep;
}

inline std::string node_layer_name(const SystemNode& n, const Technology& tech) {
  return n.layer < 0 ? std::string("source") : tech.layer(n.layer).name;
}

/// Node drops as CSV: x,y,layer,drop_mV. Source nodes carry layer "source".
inline void write_ir_csv(std::ostream& os, const IrSolution& sol, const Technology& tech) {
  os << "x,y,layer,drop_mV\n";
  const auto& sys = *sol.system;
  for (std::size_t n = 0; n < sys.nodes.size(); ++n) {
    const auto& nd = sys.nodes[n];
    os << fixed(nd.x, 4) << ',' << fixed(nd.y, 4) << ',' << node_layer_name(nd, tech) << ',' << fixed(sol.drop[n], 6)
       << '\n';
  }
}

inline void write_em_csv(std::ostream& os, const EmReport& rep, const Technology& tech) {
  os << "kind,layer,x,y,current_mA,width_um,density_mA_per_um,limit_mA_per_um,utilization\n";
  for (const auto& e : rep.entries) {
    os << (e.kind == BranchKind::Via ? "via" : "segment") << ',' << tech.layer(e.layer).name << ','
       << fixed(e.at.x, 4) << ',' << fixed(e.at.y, 4) << ',' << fixed(e.current, 6) << ',' << fixed(e.width, 4) << ','
       << fixed(e.density, 6) << ',' << fixed(e.limit, 4) << ',' << fixed(e.utilization, 6) << '\n';
  }
}

}  // namespace pdnsynth
