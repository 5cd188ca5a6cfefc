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
#include <span>
#include <vector>

#include "pdnsynth/congestion/map.hpp"
#include "pdnsynth/ir/solver.hpp"
#include "pdnsynth/numeric.hpp"
#include "pdnsynth/windows.hpp"

namespace pdnsynth {

struct IrSafetyConfig {
  double ir_limit = 0.0;           // mV
  double hotspot_threshold = 0.0;  // mV; a guard-band node above this is a hotspot
  double margin_threshold = 0.0;   // mV; minimum mean margin over the guard band
  double guard_step = 20.0;        // um
  bool tolerate_single_hotspot = false;

  // Defaults: hotspot at 85% of the limit, margin at 25% of it, guard band
  // one unit step wide.
  static IrSafetyConfig defaults(double ir_limit, double unit) {
    return {ir_limit, 0.85 * ir_limit, 0.25 * ir_limit, unit, false};
  }

  void validate() const {
    if (!(ir_limit > 0.0)) throw Error(ErrorKind::Configuration, "ir_limit must be > 0");
    if (!(hotspot_threshold > 0.0 && hotspot_threshold <= ir_limit))
      throw Error(ErrorKind::Configuration, "hotspot threshold must lie in (0, ir_limit]");
    if (!(margin_threshold > 0.0 && margin_threshold <= ir_limit))
      throw Error(ErrorKind::Configuration, "margin threshold must lie in (0, ir_limit]");
    if (guard_step < 0.0) throw Error(ErrorKind::Configuration, "guard step must be >= 0");
  }
};

struct WindowMetrics {
  double window_max = 0.0;         // mV
  double window_mean = 0.0;        // mV
  double guard_max = 0.0;          // mV
  double guard_mean_drop = 0.0;    // mV
  double guard_mean_margin = 0.0;  // ir_limit - guard_mean_drop
  double congestion = 0.0;
  std::size_t hotspots = 0;
  std::size_t window_nodes = 0;
  std::size_t guard_nodes = 0;
  bool guard_empty = true;
};

inline std::vector<WindowMetrics> window_metrics(const IrSolution& sol, const WindowGrid& grid,
                                                 const CongestionMap* cmap, const IrSafetyConfig& cfg) {
  const auto& sys = *sol.system;
  std::vector<std::vector<int>> bucket(static_cast<std::size_t>(grid.size()));
  for (std::size_t n = 0; n < sys.nodes.size(); ++n) {
    const int w = grid.locate({sys.nodes[n].x, sys.nodes[n].y});
    if (w < 0) throw Error(ErrorKind::Coverage, "node outside the window grid");
    bucket[static_cast<std::size_t>(w)].push_back(static_cast<int>(n));
  }
  std::vector<WindowMetrics> out(static_cast<std::size_t>(grid.size()));
  for (int w = 0; w < grid.size(); ++w) {
    auto& m = out[static_cast<std::size_t>(w)];
    double wsum = 0.0;
    for (int n : bucket[static_cast<std::size_t>(w)]) {
      const double d = sol.drop[static_cast<std::size_t>(n)];
      m.window_max = m.window_nodes == 0 ? d : std::max(m.window_max, d);
      wsum += d;
      ++m.window_nodes;
    }
    if (m.window_nodes > 0) m.window_mean = wsum / static_cast<double>(m.window_nodes);

    const Rect gb = guard_band(grid, w, cfg.guard_step);
    const int c0 = std::max(0, static_cast<int>(std::floor((gb.x0 - grid.die.x0) / grid.unit)));
    const int c1 = std::min(grid.cols - 1, static_cast<int>(std::floor((gb.x1 - grid.die.x0) / grid.unit)));
    const int r0 = std::max(0, static_cast<int>(std::floor((gb.y0 - grid.die.y0) / grid.unit)));
    const int r1 = std::min(grid.rows - 1, static_cast<int>(std::floor((gb.y1 - grid.die.y0) / grid.unit)));
    double gsum = 0.0;
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c)
        for (int n : bucket[static_cast<std::size_t>(grid.index(r, c))]) {
          const auto& nd = sys.nodes[static_cast<std::size_t>(n)];
          if (!gb.contains(Point{nd.x, nd.y}, grid.die)) continue;
          const double d = sol.drop[static_cast<std::size_t>(n)];
          m.guard_max = m.guard_nodes == 0 ? d : std::max(m.guard_max, d);
          gsum += d;
          ++m.guard_nodes;
          if (d > cfg.hotspot_threshold) ++m.hotspots;
        }
    m.guard_empty = m.guard_nodes == 0;
    if (!m.guard_empty) {
      m.guard_mean_drop = gsum / static_cast<double>(m.guard_nodes);
      m.guard_mean_margin = cfg.ir_limit - m.guard_mean_drop;
    }
    if (cmap) m.congestion = cmap->window_score[static_cast<std::size_t>(w)];
  }
  return out;
}

/// Guard-band test: no hotspot node anywhere in the guard band (one is
/// enough to disqualify, unless tolerate_single_hotspot) and a mean margin
/// of at least margin_threshold. Empty guard bands are unsafe.
inline bool classify_ir_safe(const WindowMetrics& m, const IrSafetyConfig& cfg) {
  cfg.validate();
  if (m.guard_empty) return false;
  const std::size_t allowed = cfg.tolerate_single_hotspot ? 1 : 0;
  return m.hotspots <= allowed && m.guard_mean_margin >= cfg.margin_threshold;
}

struct Candidate {
  int window = 0;
  WindowMetrics metrics;
};

struct CandidateSet {
  std::vector<Candidate> members;  // congestion descending, then window index
  bool empty() const { return members.empty(); }
  std::size_t size() const { return members.size(); }
  bool contains(int w) const {
    return std::any_of(members.begin(), members.end(), [w](const Candidate& c) { return c.window == w; });
  }
};

inline CandidateSet select_candidates(const WindowGrid& grid, std::span<const WindowMetrics> metrics,
                                      const IrSafetyConfig& cfg, double congestion_floor) {
  if (metrics.size() != static_cast<std::size_t>(grid.size()))
    throw Error(ErrorKind::Coverage, "window metrics do not cover the grid");
  CandidateSet set;
  for (int w = 0; w < grid.size(); ++w) {
    const auto& m = metrics[static_cast<std::size_t>(w)];
    if (classify_ir_safe(m, cfg) && m.congestion >= congestion_floor) set.members.push_back({w, m});
  }
  std::stable_sort(set.members.begin(), set.members.end(), [](const Candidate& a, const Candidate& b) {
    return a.metrics.congestion > b.metrics.congestion;
  });
  return set;
}

inline void write_windows_csv(std::ostream& os, const WindowGrid& grid, std::span<const WindowMetrics> metrics,
                              const IrSafetyConfig& cfg, const CandidateSet& selected) {
  os << "row,col,safe,hotspots,mean_margin_mV,congestion,selected\n";
  std::vector<char> sel(static_cast<std::size_t>(grid.size()), 0);
  for (const auto& c : selected.members) sel[static_cast<std::size_t>(c.window)] = 1;
  for (int w = 0; w < grid.size(); ++w) {
    const auto& m = metrics[static_cast<std::size_t>(w)];
    os << grid.row_of(w) << ',' << grid.col_of(w) << ',' << (classify_ir_safe(m, cfg) ? 1 : 0) << ',' << m.hotspots
       << ',' << fixed(m.guard_mean_margin, 6) << ',' << fixed(m.congestion, 6) << ','
       << static_cast<int>(sel[static_cast<std::size_t>(w)]) << '\n';
  }
}

}  // namespace pdnsynth
