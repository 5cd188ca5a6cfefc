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
#include <limits>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "pdnsynth/design.hpp"
#include "pdnsynth/pdn_graph.hpp"

namespace pdnsynth {

/// Compressed sparse row matrix.
struct CsrMatrix {
  int n = 0;
  std::vector<int> row_ptr{0};
  std::vector<int> col;
  std::vector<double> val;

  struct Triplet {
    int r, c;
    double v;
  };

  static CsrMatrix from_triplets(int n, std::vector<Triplet> t) {
    std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
      return a.r < b.r || (a.r == b.r && a.c < b.c);
    });
    CsrMatrix m;
    m.n = n;
    m.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    for (std::size_t k = 0; k < t.size();) {
      std::size_t j = k;
      double sum = 0.0;
      while (j < t.size() && t[j].r == t[k].r && t[j].c == t[k].c) sum += t[j++].v;
      m.col.push_back(t[k].c);
      m.val.push_back(sum);
      ++m.row_ptr[static_cast<std::size_t>(t[k].r) + 1];
      k = j;
    }
    for (int i = 0; i < n; ++i) m.row_ptr[static_cast<std::size_t>(i) + 1] += m.row_ptr[static_cast<std::size_t>(i)];
    return m;
  }

  void multiply(std::span<const double> x, std::span<double> y) const {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k)
        s += val[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(col[static_cast<std::size_t>(k)])];
      y[static_cast<std::size_t>(i)] = s;
    }
  }

  double at(int r, int c) const {
    for (int k = row_ptr[static_cast<std::size_t>(r)]; k < row_ptr[static_cast<std::size_t>(r) + 1]; ++k)
      if (col[static_cast<std::size_t>(k)] == c) return val[static_cast<std::size_t>(k)];
    return 0.0;
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = at(i, i);
    return d;
  }
};

enum class BranchKind { Segment, Via, Attach };

struct Branch {
  int a = 0, b = 0;  // node ids; positive current flows a -> b
  double conductance = 0.0;
  BranchKind kind = BranchKind::Segment;
  int element = -1;  // stripe index, via index, or source index
  int layer = -1;    // stripe layer, lower layer of a via
  double width = 0.0;
  double length = 0.0;
};

struct SystemNode {
  double x = 0.0, y = 0.0;
  int layer = -1;   // -1 marks a source node
  int source = -1;  // design source index for source nodes
  bool pad = false;
};

/// Grounded nodal formulation G * drop = sink. Pads sit at zero drop and are
/// folded out of the unknowns; every unknown belongs to a pad-connected
/// component, so G is a symmetric positive definite M-matrix.
struct ConductanceSystem {
  Rect die;
  double vdd = 0.0;
  std::vector<SystemNode> nodes;
  std::vector<int> unknown_of_node;  // -1 for pads
  std::vector<int> node_of_unknown;
  std::map<std::tuple<int, double, double>, int> index;  // (layer, x, y) -> grid node
  std::vector<int> source_node;                          // per design source
  std::vector<int> pad_nodes;
  std::vector<Branch> branches;
  CsrMatrix matrix;
  std::vector<double> current;  // mA sunk at each unknown
  std::size_t floating_nodes = 0;

  std::size_t unknowns() const { return node_of_unknown.size(); }
};

namespace detail {

// Uniform bucket grid for nearest-node queries under the Manhattan metric;
// ties resolve toward the lexicographically smaller (x, y).
class NearestNode {
 public:
  NearestNode(std::vector<std::pair<Point, int>> pts, const Rect& die) : pts_(std::move(pts)), die_(die) {
    const double area = std::max(die.area(), 1e-12);
    cell_ = std::max(std::sqrt(area / std::max<std::size_t>(pts_.size(), 1)), 1e-6);
    nx_ = std::max(1, static_cast<int>(std::ceil(die.width() / cell_)));
    ny_ = std::max(1, static_cast<int>(std::ceil(die.height() / cell_)));
    buckets_.resize(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_));
    for (std::size_t i = 0; i < pts_.size(); ++i) buckets_[bucket(pts_[i].first)].push_back(static_cast<int>(i));
  }

  int query(const Point& p) const {
    if (pts_.empty()) return -1;
    const int cx = cx_of(p.x), cy = cy_of(p.y);
    double best = std::numeric_limits<double>::infinity();
    int best_i = -1;
    for (int ring = 0; ring <= std::max(nx_, ny_); ++ring) {
      for (int j = cy - ring; j <= cy + ring; ++j) {
        if (j < 0 || j >= ny_) continue;
        for (int i = cx - ring; i <= cx + ring; ++i) {
          if (i < 0 || i >= nx_) continue;
          if (std::max(std::abs(i - cx), std::abs(j - cy)) != ring) continue;
          for (int k : buckets_[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i)]) {
            const auto& q = pts_[static_cast<std::size_t>(k)].first;
            const double d = manhattan(p, q);
            if (d < best || (d == best && best_i >= 0 && q < pts_[static_cast<std::size_t>(best_i)].first)) {
              best = d;
              best_i = k;
            }
          }
        }
      }
      // anything beyond this ring is at least ring * cell away
      if (best_i >= 0 && best < static_cast<double>(ring) * cell_) break;
    }
    return pts_[static_cast<std::size_t>(best_i)].second;
  }

 private:
  int cx_of(double x) const { return std::clamp(static_cast<int>(std::floor((x - die_.x0) / cell_)), 0, nx_ - 1); }
  int cy_of(double y) const { return std::clamp(static_cast<int>(std::floor((y - die_.y0) / cell_)), 0, ny_ - 1); }
  std::size_t bucket(const Point& p) const {
    return static_cast<std::size_t>(cy_of(p.y)) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(cx_of(p.x));
  }

  std::vector<std::pair<Point, int>> pts_;
  Rect die_;
  double cell_ = 1.0;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

}  // namespace detail

/// Assembles the resistive network of \p pdn loaded by the design's sources.
/// Segment resistance is sheet_resistance * length / width; vias are lumped;
/// each source hangs off its nearest pad-connected node of the lowest PDN
/// layer through the technology's attach resistance.
inline ConductanceSystem build_system(const PdnGeometry& pdn, const Design& design, const Technology& tech) {
  const PdnGraph graph(pdn, design, tech);
  const auto seen = graph.reachable();

  ConductanceSystem sys;
  sys.die = design.die;
  sys.vdd = tech.vdd_nominal;

  std::vector<int> remap(graph.nodes().size(), -1);
  for (std::size_t n = 0; n < graph.nodes().size(); ++n) {
    if (!seen[n]) {
      ++sys.floating_nodes;
      continue;
    }
    const auto& g = graph.nodes()[n];
    remap[n] = static_cast<int>(sys.nodes.size());
    sys.index[{g.layer, g.x, g.y}] = remap[n];
    sys.nodes.push_back({g.x, g.y, g.layer, -1, g.pad});
  }

  for (const auto& e : graph.edges()) {
    const int a = remap[static_cast<std::size_t>(e.a)], b = remap[static_cast<std::size_t>(e.b)];
    if (a < 0 || b < 0) continue;
    Branch br;
    br.a = a;
    br.b = b;
    br.element = e.element;
    if (e.kind == EdgeKind::Segment) {
      const auto& s = pdn.stripes[static_cast<std::size_t>(e.element)];
      br.kind = BranchKind::Segment;
      br.layer = s.layer;
      br.width = s.width;
      br.length = e.length;
      br.conductance = s.width / (tech.layer(s.layer).sheet_resistance * e.length);
    } else {
      const auto& v = pdn.vias[static_cast<std::size_t>(e.element)];
      br.kind = BranchKind::Via;
      br.layer = v.lower;
      br.width = tech.via_effective_width;
      br.conductance = 1.0 / v.resistance;
    }
    sys.branches.push_back(br);
  }

  // source attachment
  std::vector<std::pair<Point, int>> targets;
  for (std::size_t n = 0; n < sys.nodes.size(); ++n)
    if (sys.nodes[n].layer == graph.lowest_layer()) targets.push_back({{sys.nodes[n].x, sys.nodes[n].y}, static_cast<int>(n)});
  const detail::NearestNode nearest(std::move(targets), design.die);
  const double g_attach = 1.0 / tech.source_attach_resistance;
  for (std::size_t s = 0; s < design.sources.size(); ++s) {
    const auto& src = design.sources[s];
    const int at = nearest.query({src.x, src.y});
    if (at < 0)
      throw Error(ErrorKind::Connectivity, "source " + std::to_string(s) + " at (" + std::to_string(src.x) + ", " +
                                               std::to_string(src.y) + ") cannot reach any pad");
    const int id = static_cast<int>(sys.nodes.size());
    sys.nodes.push_back({src.x, src.y, -1, static_cast<int>(s), false});
    sys.source_node.push_back(id);
    Branch br;
    br.a = at;
    br.b = id;
    br.conductance = g_attach;
    br.kind = BranchKind::Attach;
    br.element = static_cast<int>(s);
    sys.branches.push_back(br);
  }

  sys.unknown_of_node.assign(sys.nodes.size(), -1);
  for (std::size_t n = 0; n < sys.nodes.size(); ++n) {
    if (sys.nodes[n].pad) {
      sys.pad_nodes.push_back(static_cast<int>(n));
      continue;
    }
    sys.unknown_of_node[n] = static_cast<int>(sys.node_of_unknown.size());
    sys.node_of_unknown.push_back(static_cast<int>(n));
  }

  std::vector<CsrMatrix::Triplet> trip;
  trip.reserve(sys.branches.size() * 4);
  for (const auto& br : sys.branches) {
    const int ua = sys.unknown_of_node[static_cast<std::size_t>(br.a)];
    const int ub = sys.unknown_of_node[static_cast<std::size_t>(br.b)];
    if (ua >= 0) trip.push_back({ua, ua, br.conductance});
    if (ub >= 0) trip.push_back({ub, ub, br.conductance});
    if (ua >= 0 && ub >= 0) {
      trip.push_back({ua, ub, -br.conductance});
      trip.push_back({ub, ua, -br.conductance});
    }
  }
  sys.matrix = CsrMatrix::from_triplets(static_cast<int>(sys.unknowns()), std::move(trip));

  sys.current.assign(sys.unknowns(), 0.0);
  for (std::size_t s = 0; s < design.sources.size(); ++s) {
    const int u = sys.unknown_of_node[static_cast<std::size_t>(sys.source_node[s])];
    sys.current[static_cast<std::size_t>(u)] += design.sources[s].current;
  }
  return sys;
}

/// Checks the grounded M-matrix form: symmetric, non-positive off-diagonals,
/// weak diagonal dominance that is strict on rows touching a pad, and
/// non-negative sinks. Returns problems found, empty when the form holds.
inline std::vector<std::string> check_system(const ConductanceSystem& sys) {
  std::vector<std::string> problems;
  const auto& m = sys.matrix;
  std::vector<char> touches_pad(sys.unknowns(), 0);
  for (const auto& br : sys.branches) {
    const int ua = sys.unknown_of_node[static_cast<std::size_t>(br.a)];
    const int ub = sys.unknown_of_node[static_cast<std::size_t>(br.b)];
    if (ua >= 0 && ub < 0) touches_pad[static_cast<std::size_t>(ua)] = 1;
    if (ub >= 0 && ua < 0) touches_pad[static_cast<std::size_t>(ub)] = 1;
  }
  for (int i = 0; i < m.n; ++i) {
    double diag = 0.0, off = 0.0;
    for (int k = m.row_ptr[static_cast<std::size_t>(i)]; k < m.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
      const int j = m.col[static_cast<std::size_t>(k)];
      const double v = m.val[static_cast<std::size_t>(k)];
      if (j == i) {
        diag = v;
        continue;
      }
      if (v > 0.0) problems.push_back("positive off-diagonal at row " + std::to_string(i));
      if (m.at(j, i) != v) problems.push_back("asymmetric entry at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      off += v;
    }
    const double slack = 1e-12 * std::max(1.0, diag);
    if (diag < -off - slack) problems.push_back("row " + std::to_string(i) + " not diagonally dominant");
    if (touches_pad[static_cast<std::size_t>(i)] && !(diag > -off))
      problems.push_back("pad row " + std::to_string(i) + " not strictly dominant");
  }
  for (double c : sys.current)
    if (c < 0.0) problems.push_back("negative sink current");
  return problems;
}

}  // namespace pdnsynth
