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
#include <map>
#include <optional>
#include <set>
#include <span>
#include <tuple>
#include <vector>

#include "pdnsynth/congestion/map.hpp"
#include "pdnsynth/design.hpp"
#include "pdnsynth/numeric.hpp"
#include "pdnsynth/pdn_geometry.hpp"
#include "pdnsynth/pdn_graph.hpp"
#include "pdnsynth/windows.hpp"

namespace pdnsynth {

enum class DropMetric { GuardMax, WindowMax, WindowMean };

struct SynthesisConfig {
  double alpha = 0.8;  // weight of normalized congestion
  double beta = 2.0;   // mV; weight of the inverse-drop term
  double f_max = 0.5;  // hard cap on the per-window reduction ratio
  double damping = 0.5;
  int max_iterations = 5;
  std::optional<double> congestion_cap;  // default: 95th percentile of window scores
  double beta_term_cap = 0.5;            // value of beta / drop at zero drop
  DropMetric drop_metric = DropMetric::GuardMax;
  double congestion_floor = 0.8;
  bool brute_force = false;

  void validate() const {
    if (alpha < 0.0 || beta < 0.0 || !(alpha + beta > 0.0))
      throw Error(ErrorKind::Configuration, "alpha and beta must be >= 0 with a positive sum");
    if (!(f_max > 0.0 && f_max <= 0.5)) throw Error(ErrorKind::Configuration, "f_max must lie in (0, 0.5]");
    if (!(damping > 0.0 && damping < 1.0)) throw Error(ErrorKind::Configuration, "damping must lie in (0, 1)");
    if (max_iterations < 1) throw Error(ErrorKind::Configuration, "max_iterations must be >= 1");
    if (congestion_cap && !(*congestion_cap > 0.0))
      throw Error(ErrorKind::Configuration, "congestion cap must be > 0");
    if (beta_term_cap < 0.0) throw Error(ErrorKind::Configuration, "beta term cap must be >= 0");
  }
};

/// beta / drop, saturating to beta_term_cap as the drop goes to zero.
inline double beta_term(double ir_drop, const SynthesisConfig& cfg) {
  if (std::isnan(ir_drop)) throw Error(ErrorKind::Configuration, "IR drop is NaN");
  if (!(cfg.beta > 0.0)) return 0.0;
  return ir_drop > 0.0 ? std::min(cfg.beta / ir_drop, cfg.beta_term_cap) : cfg.beta_term_cap;
}

/// Reduction ratio for a window:
///   F = clamp(alpha * congestion + beta / drop, 0, f_max).
inline double target_f(double congestion_norm, double ir_drop, const SynthesisConfig& cfg) {
  if (!(congestion_norm >= 0.0 && congestion_norm <= 1.0))
    throw Error(ErrorKind::Configuration, "normalized congestion must lie in [0, 1]");
  return std::clamp(cfg.alpha * congestion_norm + beta_term(ir_drop, cfg), 0.0, cfg.f_max);
}

inline double normalize_congestion(double score, double cap) {
  if (!(cap > 0.0)) return 0.0;
  return std::clamp(score / cap, 0.0, 1.0);
}

// Identifies the stretch [start, end] of the stripe on (layer, coord).
struct SegmentRef {
  int layer = 0;
  double coord = 0.0;
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
  bool operator==(const SegmentRef&) const = default;
};

struct WindowPlan {
  int window = 0;
  double f = 0.0;
  double window_length = 0.0;  // reference PDN length inside the window
  double budget = 0.0;         // um still removable under f
  std::vector<SegmentRef> segments;

  double removed() const {
    ExactSum s;
    for (const auto& r : segments) s.add(r.length());
    return s.value();
  }
  std::map<int, double> removed_by_layer() const {
    std::map<int, ExactSum> acc;
    for (const auto& r : segments) acc[r.layer].add(r.length());
    std::map<int, double> out;
    for (const auto& [l, s] : acc) out[l] = s.value();
    return out;
  }
};

struct ReductionPlan {
  std::vector<WindowPlan> windows;

  std::map<int, double> removed_by_layer() const {
    std::map<int, ExactSum> acc;
    for (const auto& w : windows)
      for (const auto& r : w.segments) acc[r.layer].add(r.length());
    std::map<int, double> out;
    for (const auto& [l, s] : acc) out[l] = s.value();
    return out;
  }
  std::size_t segment_count() const {
    std::size_t n = 0;
    for (const auto& w : windows) n += w.segments.size();
    return n;
  }
};

namespace detail {

struct Piece {
  SegmentRef ref;
  Direction direction;
  int line_rank;  // position of the centerline among its layer's lines
};

inline bool coord_in(double c, double lo, double hi, double die_hi) {
  return c >= lo && (c < hi || (hi >= die_hi && c <= hi));
}

// Stripe stretches inside window rect w, clipped to it along the stripe.
inline std::vector<SegmentRef> clip_to_window(const PdnGeometry& g, const Rect& w, const Rect& die) {
  std::vector<SegmentRef> out;
  for (const auto& s : g.stripes) {
    const bool h = s.direction == Direction::Horizontal;
    const double lo = h ? w.y0 : w.x0, hi = h ? w.y1 : w.x1, die_hi = h ? die.y1 : die.x1;
    if (!coord_in(s.coord, lo, hi, die_hi)) continue;
    const double a = std::max(s.start, h ? w.x0 : w.y0);
    const double b = std::min(s.end, h ? w.x1 : w.y1);
    if (b > a) out.push_back({s.layer, s.coord, a, b});
  }
  return out;
}

inline double total_length(std::span<const SegmentRef> refs) {
  ExactSum s;
  for (const auto& r : refs) s.add(r.length());
  return s.value();
}

// Spread ordering of 0..n-1 following the base-2 van der Corput sequence,
// so early picks land far apart.
inline std::vector<int> spread_order(int n) {
  std::vector<int> order;
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (unsigned k = 0; static_cast<int>(order.size()) < n; ++k) {
    double v = 0.0, base = 0.5;
    for (unsigned x = k; x; x >>= 1, base *= 0.5)
      if (x & 1u) v += base;
    const int i = std::min(n - 1, static_cast<int>(v * n));
    if (!used[static_cast<std::size_t>(i)]) {
      used[static_cast<std::size_t>(i)] = 1;
      order.push_back(i);
    }
    if (k > 64u * static_cast<unsigned>(n) + 64u) {
      for (int j = 0; j < n; ++j)
        if (!used[static_cast<std::size_t>(j)]) order.push_back(j);
      break;
    }
  }
  return order;
}

}  // namespace detail

/// Chooses the stripe stretches to remove from one window: the largest total
/// length not above f * (reference length in the window) minus what is
/// already gone. Stretches on the \p preferred direction come first, and two
/// neighbouring lines of one layer are never both cut over the same stretch.
inline WindowPlan plan_reduction(const WindowGrid& grid, int window, const PdnGeometry& pdn, const Technology& tech,
                                 double f, Direction preferred, const PdnGeometry* reference = nullptr) {
  if (!(f >= 0.0 && f <= 0.5)) throw Error(ErrorKind::Configuration, "reduction ratio must lie in [0, 0.5]");
  const Rect w = grid.window(window);
  const PdnGeometry& ref = reference ? *reference : pdn;
  const auto current = detail::clip_to_window(pdn, w, grid.die);
  const double ref_len = detail::total_length(detail::clip_to_window(ref, w, grid.die));
  const double cur_len = detail::total_length(current);

  WindowPlan plan;
  plan.window = window;
  plan.f = f;
  plan.window_length = ref_len;
  plan.budget = std::max(0.0, f * ref_len - std::max(0.0, ref_len - cur_len));
  if (plan.budget <= 0.0 || current.empty()) return plan;

  // distinct centerlines per layer, over reference and current geometry
  std::map<int, std::vector<double>> lines;
  for (const auto* g : {&pdn, &ref})
    for (const auto& s : g->stripes) lines[s.layer].push_back(s.coord);
  for (auto& [l, v] : lines) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  auto rank_of = [&](int layer, double c) {
    const auto& v = lines[layer];
    return static_cast<int>(std::lower_bound(v.begin(), v.end(), c) - v.begin());
  };

  const CoverageIndex cov(pdn);
  std::vector<detail::Piece> pieces;
  for (const auto& r : current) {
    const int rank = rank_of(r.layer, r.coord);
    const auto& v = lines[r.layer];
    bool blocked = false;
    for (int nb : {rank - 1, rank + 1}) {
      if (nb < 0 || nb >= static_cast<int>(v.size())) continue;
      if (!cov.covers_span(r.layer, v[static_cast<std::size_t>(nb)], r.start, r.end)) blocked = true;
    }
    if (!blocked) pieces.push_back({r, tech.layer(r.layer).direction, rank});
  }

  // preference: preferred direction, then layer bottom-up, then spread order
  std::map<std::pair<int, int>, std::vector<std::size_t>> by_layer;  // (dir rank, layer)
  for (std::size_t i = 0; i < pieces.size(); ++i)
    by_layer[{pieces[i].direction == preferred ? 0 : 1, pieces[i].ref.layer}].push_back(i);
  std::vector<detail::Piece> ordered;
  for (auto& [key, idx] : by_layer) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(pieces[a].ref.coord, pieces[a].ref.start) < std::tie(pieces[b].ref.coord, pieces[b].ref.start);
    });
    for (int k : detail::spread_order(static_cast<int>(idx.size()))) ordered.push_back(pieces[idx[static_cast<std::size_t>(k)]]);
  }

  const std::size_t n = ordered.size();
  std::vector<std::vector<std::size_t>> conflict(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = ordered[i];
      const auto& b = ordered[j];
      if (a.ref.layer != b.ref.layer || std::abs(a.line_rank - b.line_rank) != 1) continue;
      if (std::min(a.ref.end, b.ref.end) > std::max(a.ref.start, b.ref.start)) {
        conflict[i].push_back(j);
        conflict[j].push_back(i);
      }
    }

  const double slack = 1e-9 * std::max(1.0, ref_len);
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + ordered[i].ref.length();

  std::vector<char> chosen(n, 0), best_set(n, 0);
  double best = 0.0;
  long visits = 0;
  constexpr long kMaxVisits = 2'000'000;
  auto dfs = [&](auto&& self, std::size_t k, double total) -> void {
    if (++visits > kMaxVisits) return;
    if (total > best + slack) {
      best = total;
      best_set = chosen;
    }
    if (best >= plan.budget - slack || k == n) return;
    if (total + suffix[k] <= best + slack) return;
    const double len = ordered[k].ref.length();
    bool ok = total + len <= plan.budget + slack;
    for (std::size_t j : conflict[k]) ok = ok && !chosen[j];
    if (ok) {
      chosen[k] = 1;
      self(self, k + 1, total + len);
      chosen[k] = 0;
    }
    self(self, k + 1, total);
  };
  dfs(dfs, 0, 0.0);

  for (std::size_t i = 0; i < n; ++i)
    if (best_set[i]) plan.segments.push_back(ordered[i].ref);
  return plan;
}

inline WindowPlan plan_reduction(const WindowGrid& grid, int window, const PdnGeometry& pdn, const Technology& tech,
                                 double f, const CongestionMap& cmap, const PdnGeometry* reference = nullptr) {
  return plan_reduction(grid, window, pdn, tech, f, cmap.dominant(window), reference);
}

struct ApplyResult {
  PdnGeometry geometry;
  std::vector<SegmentRef> applied;
  std::vector<SegmentRef> skipped;  // would strand part of the grid, or not found
};

/// Removes the planned stretches from a copy of \p pdn, one at a time. A
/// stretch is skipped when its removal would cut any remaining metal off
/// from the pads, drop a pad landing, or leave the lowest layer without an
/// anchored node. Vias left without metal on both sides go with it.
inline ApplyResult apply_plan(const PdnGeometry& pdn, std::span<const WindowPlan> plans, const Design& design,
                              const Technology& tech) {
  ApplyResult res;
  PdnGraph graph(pdn, design, tech);

  std::map<std::pair<int, double>, std::vector<std::size_t>> by_line;
  for (std::size_t i = 0; i < pdn.stripes.size(); ++i) by_line[{pdn.stripes[i].layer, pdn.stripes[i].coord}].push_back(i);
  std::vector<std::vector<int>> seg_edges(pdn.stripes.size());
  for (std::size_t e = 0; e < graph.edges().size(); ++e)
    if (graph.edges()[e].kind == EdgeKind::Segment)
      seg_edges[static_cast<std::size_t>(graph.edges()[e].element)].push_back(static_cast<int>(e));
  std::vector<std::vector<std::pair<double, double>>> cut(pdn.stripes.size());

  auto pieces_after = [&](std::size_t s, const std::vector<std::pair<double, double>>& cuts) {
    std::vector<std::pair<double, double>> sorted = cuts;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, double>> out;
    double at = pdn.stripes[s].start;
    for (const auto& [a, b] : sorted) {
      if (a > at) out.push_back({at, a});
      at = std::max(at, b);
    }
    if (pdn.stripes[s].end > at) out.push_back({at, pdn.stripes[s].end});
    return out;
  };

  for (const auto& plan : plans) {
    for (const auto& ref : plan.segments) {
      std::optional<std::size_t> hit;
      if (auto it = by_line.find({ref.layer, ref.coord}); it != by_line.end())
        for (std::size_t s : it->second) {
          const auto& st = pdn.stripes[s];
          if (ref.start < st.start || ref.end > st.end || !(ref.end > ref.start)) continue;
          bool overlaps = false;
          for (const auto& [a, b] : cut[s]) overlaps = overlaps || (std::min(b, ref.end) > std::max(a, ref.start));
          if (!overlaps) hit = s;
          break;
        }
      if (!hit) {
        res.skipped.push_back(ref);
        continue;
      }
      const std::size_t s = *hit;
      std::vector<int> killed_nodes, killed_edges;
      bool pad_hit = false;
      for (const auto& slot : graph.stripe_slots(s))
        if (slot.along > ref.start && slot.along < ref.end && graph.node_alive(slot.node)) {
          pad_hit = pad_hit || graph.nodes()[static_cast<std::size_t>(slot.node)].pad;
          killed_nodes.push_back(slot.node);
        }
      for (int e : seg_edges[s]) {
        const auto& ed = graph.edges()[static_cast<std::size_t>(e)];
        const auto& na = graph.nodes()[static_cast<std::size_t>(ed.a)];
        const auto& nb = graph.nodes()[static_cast<std::size_t>(ed.b)];
        const bool h = pdn.stripes[s].direction == Direction::Horizontal;
        const double pa = h ? na.x : na.y, pb = h ? nb.x : nb.y;
        if (std::min(pa, pb) < ref.end && std::max(pa, pb) > ref.start && graph.edge_alive(e)) killed_edges.push_back(e);
      }
      for (int v : killed_nodes) graph.set_node_alive(v, false);
      for (int e : killed_edges) graph.set_edge_alive(e, false);

      auto cuts = cut[s];
      cuts.push_back({ref.start, ref.end});
      bool ok = !pad_hit;
      for (const auto& [a, b] : pieces_after(s, cuts)) {
        bool has_node = false;
        for (const auto& slot : graph.stripe_slots(s))
          has_node = has_node || (slot.along >= a && slot.along <= b && graph.node_alive(slot.node));
        ok = ok && has_node;
      }
      ok = ok && graph.fully_connected();

      if (ok) {
        cut[s] = std::move(cuts);
        res.applied.push_back(ref);
      } else {
        for (int v : killed_nodes) graph.set_node_alive(v, true);
        for (int e : killed_edges) graph.set_edge_alive(e, true);
        res.skipped.push_back(ref);
      }
    }
  }

  for (std::size_t s = 0; s < pdn.stripes.size(); ++s) {
    if (cut[s].empty()) {
      res.geometry.stripes.push_back(pdn.stripes[s]);
      continue;
    }
    for (const auto& [a, b] : pieces_after(s, cut[s])) {
      Stripe piece = pdn.stripes[s];
      piece.start = a;
      piece.end = b;
      res.geometry.stripes.push_back(piece);
    }
  }
  const CoverageIndex cov(res.geometry);
  const auto dirs = layer_directions(tech);
  for (const auto& v : pdn.vias)
    if (via_supported(cov, v, dirs)) res.geometry.vias.push_back(v);
  return res;
}

inline ApplyResult apply_plan(const PdnGeometry& pdn, const ReductionPlan& plan, const Design& design,
                              const Technology& tech) {
  return apply_plan(pdn, std::span<const WindowPlan>(plan.windows), design, tech);
}

}  // namespace pdnsynth
