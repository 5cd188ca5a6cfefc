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
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <tuple>
#include <vector>

#include "pdnsynth/congestion/steiner.hpp"
#include "pdnsynth/design.hpp"
#include "pdnsynth/numeric.hpp"
#include "pdnsynth/windows.hpp"

namespace pdnsynth {

/// Global-routing tiles. Capacity is pooled over all layers of a direction:
/// horizontal resources count tracks of horizontal layers across the tile
/// height, vertical resources tracks of vertical layers across its width.
struct GcellGrid {
  Rect die;
  double size = 5.0;
  int nx = 0, ny = 0;
  std::vector<double> cap_h, cap_v;  // tracks per gcell

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
  }
  std::size_t count() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  int col_of(double x) const { return std::clamp(static_cast<int>(std::floor((x - die.x0) / size)), 0, nx - 1); }
  int row_of(double y) const { return std::clamp(static_cast<int>(std::floor((y - die.y0) / size)), 0, ny - 1); }
  Rect cell(int i, int j) const {
    return {die.x0 + i * size, die.y0 + j * size, std::min(die.x1, die.x0 + (i + 1) * size),
            std::min(die.y1, die.y0 + (j + 1) * size)};
  }
};

inline GcellGrid make_gcell_grid(const Rect& die, const Technology& tech, double size) {
  if (!(size > 0.0)) throw Error(ErrorKind::Configuration, "gcell size must be > 0");
  const WindowGrid tiles = partition(die, size);
  GcellGrid g;
  g.die = die;
  g.size = size;
  g.nx = tiles.cols;
  g.ny = tiles.rows;
  g.cap_h.assign(g.count(), 0.0);
  g.cap_v.assign(g.count(), 0.0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Rect c = g.cell(i, j);
      double h = 0.0, v = 0.0;
      for (const auto& l : tech.layers) {
        if (l.direction == Direction::Horizontal)
          h += std::floor(c.height() / l.track_pitch + 1e-9);
        else
          v += std::floor(c.width() / l.track_pitch + 1e-9);
      }
      g.cap_h[g.index(i, j)] = h;
      g.cap_v[g.index(i, j)] = v;
    }
  return g;
}

struct RouteDemand {
  std::vector<double> h, v;  // fractional tracks per gcell

  double total() const {
    ExactSum s;
    for (double x : h) s.add(x);
    for (double x : v) s.add(x);
    return s.value();
  }
};

namespace detail {

// Calls fn(cell_index_along, overlap_length) for every tile crossed by [a, b]
// where tiles along the axis start at origin with pitch size and count n.
template <typename Fn>
void for_each_overlap(double origin, double size, int n, double a, double b, Fn&& fn) {
  if (!(b > a)) return;
  int i0 = std::clamp(static_cast<int>(std::floor((a - origin) / size)), 0, n - 1);
  for (int i = i0; i < n; ++i) {
    const double lo = origin + i * size;
    const double hi = i == n - 1 ? std::max(b, lo + size) : lo + size;
    const double ov = std::min(b, hi) - std::max(a, lo);
    if (lo >= b) break;
    if (ov > 0.0) fn(i, ov);
  }
}

inline void add_segment(RouteDemand& d, const GcellGrid& g, Direction dir, double line, double a, double b,
                        double weight) {
  if (dir == Direction::Horizontal) {
    const int j = g.row_of(line);
    for_each_overlap(g.die.x0, g.size, g.nx, a, b,
                     [&](int i, double ov) { d.h[g.index(i, j)] += weight * ov / g.size; });
  } else {
    const int i = g.col_of(line);
    for_each_overlap(g.die.y0, g.size, g.ny, a, b,
                     [&](int j, double ov) { d.v[g.index(i, j)] += weight * ov / g.size; });
  }
}

}  // namespace detail

/// Each segment adds length / gcell_size tracks of demand in its direction,
/// split over the tiles it crosses. Flexible L connections contribute half
/// of their demand along each of the two bends.
inline RouteDemand accumulate_demand(std::span<const SteinerTree> trees, const GcellGrid& grid) {
  RouteDemand d;
  d.h.assign(grid.count(), 0.0);
  d.v.assign(grid.count(), 0.0);
  for (const auto& t : trees) {
    for (const auto& s : t.segments) {
      if (s.direction() == Direction::Horizontal)
        detail::add_segment(d, grid, Direction::Horizontal, s.a.y, s.a.x, s.b.x, 1.0);
      else
        detail::add_segment(d, grid, Direction::Vertical, s.a.x, s.a.y, s.b.y, 1.0);
    }
    for (const auto& f : t.flexible)
      for (int o = 0; o < 2; ++o)
        for (const auto& pc : detail::l_pieces(f.p, f.q, o)) detail::add_segment(d, grid, pc.d, pc.line, pc.a, pc.b, 0.5);
  }
  return d;
}

struct Blockage {
  std::vector<double> h, v;           // raw track units consumed by PDN
  std::vector<char> clamped_h, clamped_v;  // consumption exceeds capacity

  std::size_t clamped_count() const {
    return static_cast<std::size_t>(std::count(clamped_h.begin(), clamped_h.end(), 1) +
                                    std::count(clamped_v.begin(), clamped_v.end(), 1));
  }
};

/// Track usage of PDN stripes: every line of metal consumes ceil(width /
/// pitch) tracks in each gcell its spans cross, on the capacity of its
/// direction. Pieces of one line sharing a gcell count once.
inline Blockage pdn_blockage(const PdnGeometry& pdn, const GcellGrid& grid, const Technology& tech) {
  Blockage b;
  b.h.assign(grid.count(), 0.0);
  b.v.assign(grid.count(), 0.0);
  std::map<std::tuple<int, double, double>, std::set<std::size_t>> crossed;  // (layer, coord, width)
  for (const auto& s : pdn.stripes) {
    auto& cells = crossed[{s.layer, s.coord, s.width}];
    if (s.direction == Direction::Horizontal) {
      const int j = grid.row_of(s.coord);
      detail::for_each_overlap(grid.die.x0, grid.size, grid.nx, s.start, s.end,
                               [&](int i, double) { cells.insert(grid.index(i, j)); });
    } else {
      const int i = grid.col_of(s.coord);
      detail::for_each_overlap(grid.die.y0, grid.size, grid.ny, s.start, s.end,
                               [&](int j, double) { cells.insert(grid.index(i, j)); });
    }
  }
  for (const auto& [key, cells] : crossed) {
    const auto& [layer, coord, width] = key;
    const auto& l = tech.layer(layer);
    const double t = std::ceil(width / l.track_pitch - 1e-9);
    auto& dst = l.direction == Direction::Horizontal ? b.h : b.v;
    for (auto k : cells) dst[k] += t;
  }
  b.clamped_h.assign(grid.count(), 0);
  b.clamped_v.assign(grid.count(), 0);
  for (std::size_t k = 0; k < grid.count(); ++k) {
    b.clamped_h[k] = b.h[k] > grid.cap_h[k];
    b.clamped_v[k] = b.v[k] > grid.cap_v[k];
  }
  return b;
}

struct CongestionConfig {
  double epsilon = 0.01;       // tracks; floor on remaining capacity
  double top_fraction = 0.25;  // window score = mean of this top share of gcells
  double pin_weight = 0.0;     // optional pin-density term per pin in a gcell
};

struct CongestionMap {
  int nx = 0, ny = 0;
  std::vector<double> score_h, score_v;
  std::vector<double> overflow;  // summed over both directions
  std::vector<double> window_score, window_score_h, window_score_v;

  double gcell_score(std::size_t k) const { return std::max(score_h[k], score_v[k]); }
  /// Direction with the higher aggregated score in window \p w.
  Direction dominant(int w) const {
    return window_score_v[static_cast<std::size_t>(w)] > window_score_h[static_cast<std::size_t>(w)]
               ? Direction::Vertical
               : Direction::Horizontal;
  }
};

namespace detail {

inline double top_mean(std::vector<double> xs, double fraction) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end(), std::greater<>());
  const auto k = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(xs.size()) - 1e-12)), 1, xs.size());
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += xs[i];
  return s / static_cast<double>(k);
}

}  // namespace detail

inline std::vector<double> pin_counts(std::span<const Net> nets, const GcellGrid& grid) {
  std::vector<double> c(grid.count(), 0.0);
  for (const auto& n : nets)
    for (const auto& p : n.pins) c[grid.index(grid.col_of(p.x), grid.row_of(p.y))] += 1.0;
  return c;
}

/// Per-gcell score demand / max(capacity - blockage, epsilon) in each
/// direction, and per-window scores aggregated as the mean of the top
/// quartile of gcells whose centre lies in the window.
inline CongestionMap congestion_map(const RouteDemand& demand, const GcellGrid& grid, const Blockage& blockage,
                                    const WindowGrid& windows, const CongestionConfig& cfg = {},
                                    std::span<const double> pins = {}) {
  CongestionMap m;
  m.nx = grid.nx;
  m.ny = grid.ny;
  const std::size_t n = grid.count();
  m.score_h.resize(n);
  m.score_v.resize(n);
  m.overflow.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double eh = grid.cap_h[k] - blockage.h[k];
    const double ev = grid.cap_v[k] - blockage.v[k];
    const double pin_term = pins.empty() ? 0.0 : cfg.pin_weight * pins[k];
    m.score_h[k] = demand.h[k] / std::max(eh, cfg.epsilon) + pin_term;
    m.score_v[k] = demand.v[k] / std::max(ev, cfg.epsilon) + pin_term;
    m.overflow[k] = std::max(0.0, demand.h[k] - std::max(eh, 0.0)) + std::max(0.0, demand.v[k] - std::max(ev, 0.0));
  }

  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(windows.size()));
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const Rect c = grid.cell(i, j);
      const int w = windows.locate({0.5 * (c.x0 + c.x1), 0.5 * (c.y0 + c.y1)});
      if (w >= 0) members[static_cast<std::size_t>(w)].push_back(grid.index(i, j));
    }
  m.window_score.resize(members.size());
  m.window_score_h.resize(members.size());
  m.window_score_v.resize(members.size());
  for (std::size_t w = 0; w < members.size(); ++w) {
    std::vector<double> h, v, c;
    for (auto k : members[w]) {
      h.push_back(m.score_h[k]);
      v.push_back(m.score_v[k]);
      c.push_back(m.gcell_score(k));
    }
    m.window_score_h[w] = detail::top_mean(h, cfg.top_fraction);
    m.window_score_v[w] = detail::top_mean(v, cfg.top_fraction);
    m.window_score[w] = detail::top_mean(c, cfg.top_fraction);
  }
  return m;
}

inline void write_congestion_csv(std::ostream& os, const CongestionMap& m) {
  os << "i,j,score_h,score_v,overflow\n";
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * static_cast<std::size_t>(m.nx) + static_cast<std::size_t>(i);
      os << i << ',' << j << ',' << fixed(m.score_h[k], 6) << ',' << fixed(m.score_v[k], 6) << ','
         << fixed(m.overflow[k], 6) << '\n';
    }
}

}  // namespace pdnsynth
