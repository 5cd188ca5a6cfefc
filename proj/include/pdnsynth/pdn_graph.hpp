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
#include <deque>
#include <limits>
#include <map>
#include <tuple>
#include <vector>

#include "pdnsynth/design.hpp"
#include "pdnsynth/pdn_geometry.hpp"

namespace pdnsynth {

struct GraphNode {
  int layer = 0;
  double x = 0.0, y = 0.0;
  bool pad = false;
};

enum class EdgeKind { Segment, Via };

struct GraphEdge {
  int a = 0, b = 0;
  EdgeKind kind = EdgeKind::Segment;
  int element = 0;  // stripe index for segments, via index for vias
  double length = 0.0;
};

/// Electrical skeleton of a PDN: one node per via landing and pad, edges for
/// stripe pieces between consecutive nodes and for vias. Nodes and edges can
/// be switched off to probe the effect of a removal without rebuilding.
class PdnGraph {
 public:
  struct Slot {
    double along;
    int node;
  };

  PdnGraph(const PdnGeometry& g, const Design& design, const Technology& tech) {
    std::map<std::tuple<int, double, double>, int> key;
    auto node_at = [&](int layer, double x, double y) {
      auto [it, fresh] = key.try_emplace({layer, x, y}, static_cast<int>(nodes_.size()));
      if (fresh) nodes_.push_back({layer, x, y, false});
      return it->second;
    };

    std::map<std::pair<int, double>, std::vector<int>> by_line;
    for (std::size_t i = 0; i < g.stripes.size(); ++i)
      by_line[{g.stripes[i].layer, g.stripes[i].coord}].push_back(static_cast<int>(i));
    stripe_slots_.resize(g.stripes.size());

    auto land = [&](int node) {
      const auto& n = nodes_[static_cast<std::size_t>(node)];
      const Direction d = tech.layer(n.layer).direction;
      const double coord = d == Direction::Horizontal ? n.y : n.x;
      const double along = d == Direction::Horizontal ? n.x : n.y;
      auto it = by_line.find({n.layer, coord});
      if (it == by_line.end()) return;
      for (int s : it->second) {
        const auto& st = g.stripes[static_cast<std::size_t>(s)];
        if (along >= st.start && along <= st.end) stripe_slots_[static_cast<std::size_t>(s)].push_back({along, node});
      }
    };

    via_nodes_.reserve(g.vias.size());
    for (const auto& v : g.vias) {
      const int a = node_at(v.lower, v.x, v.y);
      const int b = node_at(v.upper, v.x, v.y);
      via_nodes_.push_back({a, b});
    }

    for (const auto& pad : design.pads) {
      const int layer = tech.layer_index(pad.layer);
      const Direction d = tech.layer(layer).direction;
      const double perp = d == Direction::Horizontal ? pad.y : pad.x;
      const double para = d == Direction::Horizontal ? pad.x : pad.y;
      double best = std::numeric_limits<double>::infinity();
      Point at{};
      for (const auto& s : g.stripes) {
        if (s.layer != layer) continue;
        const double along = std::clamp(para, s.start, s.end);
        const double dist = std::abs(s.coord - perp) + std::abs(along - para);
        if (dist < best) {
          best = dist;
          at = s.at(along);
        }
      }
      if (!std::isfinite(best))
        throw Error(ErrorKind::Configuration, "pad on layer " + pad.layer + " has no PDN stripe to land on");
      const int n = node_at(layer, at.x, at.y);
      nodes_[static_cast<std::size_t>(n)].pad = true;
    }

    // Ids follow insertion order; land every node on the stripes under it.
    for (std::size_t n = 0; n < nodes_.size(); ++n) land(static_cast<int>(n));

    for (std::size_t s = 0; s < stripe_slots_.size(); ++s) {
      auto& slots = stripe_slots_[s];
      std::sort(slots.begin(), slots.end(), [](const Slot& l, const Slot& r) {
        return l.along < r.along || (l.along == r.along && l.node < r.node);
      });
      slots.erase(std::unique(slots.begin(), slots.end(),
                              [](const Slot& l, const Slot& r) { return l.node == r.node; }),
                  slots.end());
      for (std::size_t k = 0; k + 1 < slots.size(); ++k)
        edges_.push_back({slots[k].node, slots[k + 1].node, EdgeKind::Segment, static_cast<int>(s),
                          slots[k + 1].along - slots[k].along});
    }
    for (std::size_t v = 0; v < via_nodes_.size(); ++v)
      edges_.push_back({via_nodes_[v].first, via_nodes_[v].second, EdgeKind::Via, static_cast<int>(v), 0.0});

    lowest_layer_ = std::numeric_limits<int>::max();
    for (const auto& s : g.stripes) lowest_layer_ = std::min(lowest_layer_, s.layer);

    adjacency_.resize(nodes_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      adjacency_[static_cast<std::size_t>(edges_[e].a)].push_back(static_cast<int>(e));
      adjacency_[static_cast<std::size_t>(edges_[e].b)].push_back(static_cast<int>(e));
    }
    node_alive_.assign(nodes_.size(), 1);
    edge_alive_.assign(edges_.size(), 1);
  }

  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  const std::vector<Slot>& stripe_slots(std::size_t stripe) const { return stripe_slots_[stripe]; }
  const std::vector<int>& incident(int node) const { return adjacency_[static_cast<std::size_t>(node)]; }
  int lowest_layer() const { return lowest_layer_; }

  bool node_alive(int n) const { return node_alive_[static_cast<std::size_t>(n)] != 0; }
  bool edge_alive(int e) const { return edge_alive_[static_cast<std::size_t>(e)] != 0; }
  void set_node_alive(int n, bool on) { node_alive_[static_cast<std::size_t>(n)] = on ? 1 : 0; }
  void set_edge_alive(int e, bool on) { edge_alive_[static_cast<std::size_t>(e)] = on ? 1 : 0; }

  /// Alive nodes reachable from an alive pad over alive edges.
  std::vector<char> reachable() const {
    std::vector<char> seen(nodes_.size(), 0);
    std::deque<int> q;
    for (std::size_t n = 0; n < nodes_.size(); ++n)
      if (nodes_[n].pad && node_alive_[n]) {
        seen[n] = 1;
        q.push_back(static_cast<int>(n));
      }
    while (!q.empty()) {
      const int n = q.front();
      q.pop_front();
      for (int e : adjacency_[static_cast<std::size_t>(n)]) {
        if (!edge_alive_[static_cast<std::size_t>(e)]) continue;
        const auto& ed = edges_[static_cast<std::size_t>(e)];
        const int m = ed.a == n ? ed.b : ed.a;
        if (!node_alive_[static_cast<std::size_t>(m)] || seen[static_cast<std::size_t>(m)]) continue;
        seen[static_cast<std::size_t>(m)] = 1;
        q.push_back(m);
      }
    }
    return seen;
  }

  /// A node is anchored when it is a pad or still lands an alive via.
  bool anchored(int n) const {
    if (!node_alive(n)) return false;
    if (nodes_[static_cast<std::size_t>(n)].pad) return true;
    for (int e : adjacency_[static_cast<std::size_t>(n)]) {
      const auto& ed = edges_[static_cast<std::size_t>(e)];
      if (ed.kind == EdgeKind::Via && edge_alive(e) && node_alive(ed.a) && node_alive(ed.b)) return true;
    }
    return false;
  }

  /// True when every alive node reaches a pad and the lowest layer keeps at
  /// least one anchored node for sources to attach to.
  bool fully_connected() const {
    const auto seen = reachable();
    bool lowest_ok = false;
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
      if (!node_alive_[n]) continue;
      if (!seen[n]) return false;
      if (!lowest_ok && nodes_[n].layer == lowest_layer_ && anchored(static_cast<int>(n))) lowest_ok = true;
    }
    return lowest_ok;
  }

 private:
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<Slot>> stripe_slots_;
  std::vector<std::pair<int, int>> via_nodes_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<char> node_alive_;
  std::vector<char> edge_alive_;
  int lowest_layer_ = 0;
};

}  // namespace pdnsynth
