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
#include <array>
#include <map>
#include <numeric>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "pdnsynth/design.hpp"
#include "pdnsynth/geometry.hpp"

namespace pdnsynth {

struct MstEdge {
  int u = 0, v = 0;  // pin indices, pins[u] <= pins[v]
  bool operator==(const MstEdge&) const = default;
};

/// Rectilinear minimum spanning tree (Kruskal). Among equal-length trees the
/// one with the lexicographically least sorted edge list wins, edges being
/// compared by their (lesser, greater) endpoint coordinates.
inline std::vector<MstEdge> build_mst(std::span<const Point> pins) {
  if (pins.size() < 2) throw Error(ErrorKind::DegenerateNet, "net needs at least 2 pins");
  struct Cand {
    double w;
    Point a, b;
    int u, v;
  };
  std::vector<Cand> cands;
  cands.reserve(pins.size() * (pins.size() - 1) / 2);
  for (int i = 0; i < static_cast<int>(pins.size()); ++i)
    for (int j = i + 1; j < static_cast<int>(pins.size()); ++j) {
      int u = i, v = j;
      if (pins[static_cast<std::size_t>(v)] < pins[static_cast<std::size_t>(u)]) std::swap(u, v);
      cands.push_back({manhattan(pins[static_cast<std::size_t>(i)], pins[static_cast<std::size_t>(j)]),
                       pins[static_cast<std::size_t>(u)], pins[static_cast<std::size_t>(v)], u, v});
    }
  std::sort(cands.begin(), cands.end(), [](const Cand& l, const Cand& r) {
    return std::tie(l.w, l.a, l.b, l.u, l.v) < std::tie(r.w, r.a, r.b, r.u, r.v);
  });
  std::vector<int> parent(pins.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  std::vector<MstEdge> out;
  for (const auto& c : cands) {
    const int ru = find(c.u), rv = find(c.v);
    if (ru == rv) continue;
    parent[static_cast<std::size_t>(ru)] = rv;
    out.push_back({c.u, c.v});
    if (out.size() + 1 == pins.size()) break;
  }
  return out;
}

inline double mst_length(std::span<const MstEdge> edges, std::span<const Point> pins) {
  double s = 0.0;
  for (const auto& e : edges) s += manhattan(pins[static_cast<std::size_t>(e.u)], pins[static_cast<std::size_t>(e.v)]);
  return s;
}

struct TreeSegment {
  Point a, b;  // axis-aligned, a <= b
  Direction direction() const { return a.y == b.y ? Direction::Horizontal : Direction::Vertical; }
  double length() const { return manhattan(a, b); }
};

// A two-pin connection whose L orientation is left open; demand is split
// evenly over the two bends.
struct FlexibleL {
  Point p, q;
  double length() const { return manhattan(p, q); }
};

struct SteinerTree {
  std::vector<TreeSegment> segments;
  std::vector<FlexibleL> flexible;
  std::vector<Point> steiner_points;

  double length() const {
    double s = 0.0;
    for (const auto& seg : segments) s += seg.length();
    for (const auto& f : flexible) s += f.length();
    return s;
  }
};

namespace detail {

// Union of closed intervals on horizontal (keyed by y) and vertical (keyed
// by x) lines.
class LineUnion {
 public:
  using Intervals = std::vector<std::pair<double, double>>;

  double overlap(Direction d, double line, double a, double b) const {
    const auto& m = d == Direction::Horizontal ? h_ : v_;
    auto it = m.find(line);
    if (it == m.end()) return 0.0;
    double s = 0.0;
    for (const auto& [lo, hi] : it->second) s += std::max(0.0, std::min(hi, b) - std::max(lo, a));
    return s;
  }

  void add(Direction d, double line, double a, double b) {
    auto& iv = (d == Direction::Horizontal ? h_ : v_)[line];
    iv.push_back({a, b});
    std::sort(iv.begin(), iv.end());
    Intervals merged;
    for (const auto& x : iv) {
      if (!merged.empty() && x.first <= merged.back().second)
        merged.back().second = std::max(merged.back().second, x.second);
      else
        merged.push_back(x);
    }
    iv = std::move(merged);
  }

  const std::map<double, Intervals>& horizontal() const { return h_; }
  const std::map<double, Intervals>& vertical() const { return v_; }

 private:
  std::map<double, Intervals> h_, v_;
};

struct LPiece {
  Direction d;
  double line, a, b;
};

// Orientation 0 runs horizontally first (bend at (q.x, p.y)); 1 vertically
// first (bend at (p.x, q.y)).
inline std::array<LPiece, 2> l_pieces(const Point& p, const Point& q, int orientation) {
  const double xl = std::min(p.x, q.x), xh = std::max(p.x, q.x);
  const double yl = std::min(p.y, q.y), yh = std::max(p.y, q.y);
  if (orientation == 0) return {LPiece{Direction::Horizontal, p.y, xl, xh}, LPiece{Direction::Vertical, q.x, yl, yh}};
  return {LPiece{Direction::Vertical, p.x, yl, yh}, LPiece{Direction::Horizontal, q.y, xl, xh}};
}

}  // namespace detail

/// Embeds every MST edge rectilinearly. Straight edges go in first; then the
/// L edge whose better bend overlaps the existing wiring most is fixed, one
/// at a time, so shared runs merge into Steiner junctions. L edges that
/// overlap nothing either way stay flexible.
inline SteinerTree steinerize(std::span<const MstEdge> mst, std::span<const Point> pins) {
  detail::LineUnion wires;
  std::vector<std::pair<Point, Point>> pending;
  for (const auto& e : mst) {
    const Point p = pins[static_cast<std::size_t>(e.u)], q = pins[static_cast<std::size_t>(e.v)];
    if (p == q) continue;
    if (p.y == q.y)
      wires.add(Direction::Horizontal, p.y, std::min(p.x, q.x), std::max(p.x, q.x));
    else if (p.x == q.x)
      wires.add(Direction::Vertical, p.x, std::min(p.y, q.y), std::max(p.y, q.y));
    else
      pending.push_back({p, q});
  }

  while (!pending.empty()) {
    double best_gain = 0.0;
    std::size_t best = pending.size();
    int best_orient = 0;
    for (std::size_t k = 0; k < pending.size(); ++k) {
      for (int o = 0; o < 2; ++o) {
        double g = 0.0;
        for (const auto& pc : detail::l_pieces(pending[k].first, pending[k].second, o))
          g += wires.overlap(pc.d, pc.line, pc.a, pc.b);
        if (g > best_gain) {
          best_gain = g;
          best = k;
          best_orient = o;
        }
      }
    }
    if (best == pending.size()) break;
    for (const auto& pc : detail::l_pieces(pending[best].first, pending[best].second, best_orient))
      wires.add(pc.d, pc.line, pc.a, pc.b);
    pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(best));
  }

  SteinerTree tree;
  for (const auto& [y, iv] : wires.horizontal())
    for (const auto& [a, b] : iv)
      if (b > a) tree.segments.push_back({{a, y}, {b, y}});
  for (const auto& [x, iv] : wires.vertical())
    for (const auto& [a, b] : iv)
      if (b > a) tree.segments.push_back({{x, a}, {x, b}});
  for (const auto& [p, q] : pending) tree.flexible.push_back({p, q});

  // junctions of degree >= 3 that are not pins
  std::vector<Point> cands;
  for (const auto& s : tree.segments) {
    cands.push_back(s.a);
    cands.push_back(s.b);
  }
  for (const auto& h : tree.segments) {
    if (h.direction() != Direction::Horizontal) continue;
    for (const auto& v : tree.segments)
      if (v.direction() == Direction::Vertical && v.a.x > h.a.x && v.a.x < h.b.x && h.a.y > v.a.y && h.a.y < v.b.y)
        cands.push_back({v.a.x, h.a.y});
  }
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
  auto arms = [](const std::map<double, detail::LineUnion::Intervals>& m, double line, double pos) {
    auto it = m.find(line);
    if (it == m.end()) return 0;
    int n = 0;
    for (const auto& [a, b] : it->second)
      if (pos >= a && pos <= b) n += (a < pos) + (b > pos);
    return n;
  };
  for (const auto& c : cands) {
    if (std::find(pins.begin(), pins.end(), c) != pins.end()) continue;
    const int deg = arms(wires.horizontal(), c.y, c.x) + arms(wires.vertical(), c.x, c.y);
    if (deg >= 3) tree.steiner_points.push_back(c);
  }
  return tree;
}

inline SteinerTree route_net(const Net& net) {
  const auto mst = build_mst(net.pins);
  return steinerize(mst, net.pins);
}

}  // namespace pdnsynth
