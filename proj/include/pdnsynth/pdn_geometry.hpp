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
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pdnsynth/design.hpp"
#include "pdnsynth/numeric.hpp"

namespace pdnsynth {

/// Resistance of a stacked via running from \p lower up to \p upper.
inline double stacked_via_resistance(const Technology& tech, int lower, int upper) {
  double r = 0.0;
  for (int l = lower; l < upper; ++l) r += tech.layer(l).via_resistance_to_next;
  return r;
}

inline std::pair<double, double> along_extent(const Rect& die, Direction d) {
  return d == Direction::Horizontal ? std::pair{die.x0, die.x1} : std::pair{die.y0, die.y1};
}

inline std::pair<double, double> across_extent(const Rect& die, Direction d) {
  return d == Direction::Horizontal ? std::pair{die.y0, die.y1} : std::pair{die.x0, die.x1};
}

// Per-(layer, centerline) sorted list of covered closed intervals.
class CoverageIndex {
 public:
  using Key = std::pair<int, double>;

  explicit CoverageIndex(const PdnGeometry& g) {
    for (const auto& s : g.stripes) lines_[{s.layer, s.coord}].push_back({s.start, s.end});
    for (auto& [k, v] : lines_) std::sort(v.begin(), v.end());
  }

  bool covers(int layer, double coord, double along) const {
    auto it = lines_.find({layer, coord});
    if (it == lines_.end()) return false;
    for (const auto& [a, b] : it->second)
      if (along >= a && along <= b) return true;
    return false;
  }

  // True when [a, b] lies inside a single covered interval.
  bool covers_span(int layer, double coord, double a, double b) const {
    auto it = lines_.find({layer, coord});
    if (it == lines_.end()) return false;
    for (const auto& [s, e] : it->second)
      if (a >= s && b <= e) return true;
    return false;
  }

  const std::map<Key, std::vector<std::pair<double, double>>>& lines() const { return lines_; }

 private:
  std::map<Key, std::vector<std::pair<double, double>>> lines_;
};

inline bool via_supported(const CoverageIndex& cov, const Via& v, const std::vector<Direction>& dir_of_layer) {
  auto on = [&](int layer) {
    const double coord = dir_of_layer.at(static_cast<std::size_t>(layer)) == Direction::Horizontal ? v.y : v.x;
    const double along = dir_of_layer.at(static_cast<std::size_t>(layer)) == Direction::Horizontal ? v.x : v.y;
    return cov.covers(layer, coord, along);
  };
  return on(v.lower) && on(v.upper);
}

inline std::vector<Direction> layer_directions(const Technology& tech) {
  std::vector<Direction> d;
  d.reserve(tech.layers.size());
  for (const auto& l : tech.layers) d.push_back(l.direction);
  return d;
}

/// Vias at every crossing of stripes on consecutive entries of \p layers.
inline std::vector<Via> crossing_vias(const std::vector<Stripe>& stripes, const std::vector<int>& layers,
                                      const Technology& tech) {
  std::vector<Via> vias;
  for (std::size_t k = 0; k + 1 < layers.size(); ++k) {
    const int lo = layers[k], hi = layers[k + 1];
    const double r = stacked_via_resistance(tech, lo, hi);
    for (const auto& a : stripes) {
      if (a.layer != lo) continue;
      for (const auto& b : stripes) {
        if (b.layer != hi || b.direction == a.direction) continue;
        const Stripe& h = a.direction == Direction::Horizontal ? a : b;
        const Stripe& v = a.direction == Direction::Horizontal ? b : a;
        if (v.coord < h.start || v.coord > h.end || h.coord < v.start || h.coord > v.end) continue;
        vias.push_back({v.coord, h.coord, lo, hi, r});
      }
    }
  }
  return vias;
}

/// Builds the baseline grid: stripes at offset + k*pitch (fully inside the
/// die, full span) on each listed layer and vias at every crossing of
/// adjacent PDN layers.
inline PdnGeometry generate_uniform_pdn(const Design& design, const Technology& tech, const PdnSpec& spec) {
  if (design.die.degenerate()) throw Error(ErrorKind::Configuration, "die is degenerate");
  spec.validate(tech);
  PdnGeometry g;
  std::vector<int> layers;
  for (const auto& p : spec.layers) {
    const int li = tech.layer_index(p.layer);
    layers.push_back(li);
    const Direction dir = tech.layer(li).direction;
    const auto [lo, hi] = across_extent(design.die, dir);
    const auto [a0, a1] = along_extent(design.die, dir);
    if (p.pitch >= hi - lo)
      throw Error(ErrorKind::DegenerateSpec, "layer " + p.layer + ": pitch not smaller than die extent");
    std::size_t placed = 0;
    for (long k = 0;; ++k) {
      const double c = lo + p.offset + static_cast<double>(k) * p.pitch;
      if (c + 0.5 * p.width > hi) break;
      if (c - 0.5 * p.width < lo) continue;
      g.stripes.push_back({li, dir, c, a0, a1, p.width});
      ++placed;
    }
    if (placed == 0) throw Error(ErrorKind::DegenerateSpec, "layer " + p.layer + ": pattern places no stripes");
  }
  g.vias = crossing_vias(g.stripes, layers, tech);
  return g;
}

inline PdnGeometry generate_uniform_pdn(const DesignBundle& b) {
  return generate_uniform_pdn(b.design, b.technology, b.pdn_spec);
}

/// Total stripe length per layer index. Sums are correctly rounded, so the
/// result is independent of stripe order.
inline std::map<int, double> pdn_length_by_layer(const PdnGeometry& pdn) {
  std::map<int, ExactSum> acc;
  for (const auto& s : pdn.stripes) acc[s.layer].add(s.length());
  std::map<int, double> out;
  for (const auto& [l, s] : acc) out[l] = s.value();
  return out;
}

/// Geometric invariants of a PDN: positive widths, spans inside the die,
/// every via sitting on a crossing of its two layers. Returns a list of
/// problems, empty when the geometry is valid.
inline std::vector<std::string> check_geometry(const PdnGeometry& g, const Rect& die, const Technology& tech) {
  std::vector<std::string> problems;
  const double eps = 1e-9 * std::max(1.0, std::max(die.width(), die.height()));
  for (std::size_t i = 0; i < g.stripes.size(); ++i) {
    const auto& s = g.stripes[i];
    const std::string tag = "stripe " + std::to_string(i);
    if (s.layer < 0 || s.layer >= static_cast<int>(tech.layers.size())) {
      problems.push_back(tag + ": unknown layer");
      continue;
    }
    if (tech.layer(s.layer).direction != s.direction) problems.push_back(tag + ": direction differs from layer");
    if (!(s.width > 0.0)) problems.push_back(tag + ": non-positive width");
    if (s.end < s.start) problems.push_back(tag + ": reversed span");
    const auto [a0, a1] = along_extent(die, s.direction);
    const auto [c0, c1] = across_extent(die, s.direction);
    if (s.start < a0 - eps || s.end > a1 + eps) problems.push_back(tag + ": span leaves the die");
    if (s.coord < c0 - eps || s.coord > c1 + eps) problems.push_back(tag + ": centerline outside the die");
  }
  const CoverageIndex cov(g);
  const auto dirs = layer_directions(tech);
  for (std::size_t i = 0; i < g.vias.size(); ++i) {
    const auto& v = g.vias[i];
    if (v.lower < 0 || v.upper <= v.lower || v.upper >= static_cast<int>(tech.layers.size())) {
      problems.push_back("via " + std::to_string(i) + ": bad layer pair");
      continue;
    }
    if (!via_supported(cov, v, dirs)) problems.push_back("via " + std::to_string(i) + ": not on a crossing");
  }
  return problems;
}

}  // namespace pdnsynth
