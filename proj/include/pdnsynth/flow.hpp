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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pdnsynth/candidates.hpp"
#include "pdnsynth/congestion/map.hpp"
#include "pdnsynth/congestion/steiner.hpp"
#include "pdnsynth/design.hpp"
#include "pdnsynth/ir/analysis.hpp"
#include "pdnsynth/ir/solver.hpp"
#include "pdnsynth/ir/system.hpp"
#include "pdnsynth/pdn_geometry.hpp"
#include "pdnsynth/synthesis.hpp"
#include "pdnsynth/windows.hpp"

namespace pdnsynth {

/// Every knob of an analysis or synthesis run.
struct FlowConfig {
  double unit_window = 20.0;  // um
  double gcell_size = 5.0;    // um
  std::optional<double> guard_band;         // um; defaults to unit_window
  std::optional<double> hotspot_threshold;  // mV; defaults to 85% of ir_limit
  std::optional<double> margin_threshold;   // mV; defaults to 25% of ir_limit
  bool tolerate_single_hotspot = false;
  CongestionConfig congestion;
  SynthesisConfig synthesis;
  SolverOptions solver;

  IrSafetyConfig safety(double ir_limit) const {
    IrSafetyConfig s = IrSafetyConfig::defaults(ir_limit, unit_window);
    if (guard_band) s.guard_step = *guard_band;
    if (hotspot_threshold) s.hotspot_threshold = *hotspot_threshold;
    if (margin_threshold) s.margin_threshold = *margin_threshold;
    s.tolerate_single_hotspot = tolerate_single_hotspot;
    return s;
  }
};

struct Verification {
  double ir_limit = 0.0;
  double max_drop = 0.0;
  std::vector<Point> ir_violations;  // nodes above the limit
  EmReport em;

  bool ir_pass() const { return ir_violations.empty(); }
  bool em_pass() const { return em.pass(); }
  bool pass() const { return ir_pass() && em_pass(); }
  std::string summary() const {
    return "max drop " + fixed(max_drop, 3) + " mV (limit " + fixed(ir_limit, 3) + "), " +
           std::to_string(ir_violations.size()) + " IR violations, " + std::to_string(em.violations.size()) +
           " EM violations";
  }
};

inline Verification verify_solution(const IrSolution& sol, const Technology& tech) {
  Verification v;
  v.ir_limit = tech.ir_limit;
  v.max_drop = sol.max_drop();
  const auto& sys = *sol.system;
  for (std::size_t n = 0; n < sys.nodes.size(); ++n)
    if (sol.drop[n] > tech.ir_limit) v.ir_violations.push_back({sys.nodes[n].x, sys.nodes[n].y});
  v.em = em_check(sol, tech);
  return v;
}

/// Route-demand estimate for the design's nets.
inline RouteDemand route_demand(const Design& design, const GcellGrid& grid) {
  std::vector<SteinerTree> trees;
  trees.reserve(design.nets.size());
  for (const auto& n : design.nets) trees.push_back(route_net(n));
  return accumulate_demand(trees, grid);
}

struct Analysis {
  IrSolution ir;
  Verification verification;
  WindowGrid windows;
  GcellGrid gcells;
  RouteDemand demand;
  Blockage blockage;
  CongestionMap congestion;
  IrSafetyConfig safety;
  std::vector<WindowMetrics> metrics;
  CandidateSet candidates;
};

/// Full-chip IR + EM + congestion analysis of one geometry, with per-window
/// classification. \p demand may be passed in to skip re-routing the nets.
inline Analysis analyze(const DesignBundle& bundle, const PdnGeometry& pdn, const FlowConfig& cfg,
                        const RouteDemand* demand = nullptr) {
  const auto& tech = bundle.technology;
  const auto& design = bundle.design;
  Analysis a;
  a.ir = solve(build_system(pdn, design, tech), cfg.solver);
  a.verification = verify_solution(a.ir, tech);
  a.windows = partition(design.die, cfg.unit_window);
  a.gcells = make_gcell_grid(design.die, tech, cfg.gcell_size);
  a.demand = demand ? *demand : route_demand(design, a.gcells);
  a.blockage = pdn_blockage(pdn, a.gcells, tech);
  std::vector<double> pins;
  if (cfg.congestion.pin_weight != 0.0) pins = pin_counts(design.nets, a.gcells);
  a.congestion = congestion_map(a.demand, a.gcells, a.blockage, a.windows, cfg.congestion, pins);
  a.safety = cfg.safety(tech.ir_limit);
  a.safety.validate();
  a.metrics = window_metrics(a.ir, a.windows, &a.congestion, a.safety);
  const double floor = cfg.synthesis.brute_force ? -1.0 : cfg.synthesis.congestion_floor;
  a.candidates = select_candidates(a.windows, a.metrics, a.safety, floor);
  return a;
}

inline Verification verify(const DesignBundle& bundle, const PdnGeometry& pdn, const SolverOptions& opt = {}) {
  return verify_solution(solve(build_system(pdn, bundle.design, bundle.technology), opt), bundle.technology);
}

struct IterationRecord {
  int iteration = 0;
  int window = 0;
  int row = 0, col = 0;
  double f = 0.0;
  double removed_um = 0.0;
  bool verify_pass = false;
};

struct SynthesisResult {
  PdnGeometry geometry;
  ReductionPlan plan;  // the removals present in geometry, per window
  std::vector<IterationRecord> log;
  std::vector<SegmentRef> skipped;
  Verification verification;
  int iterations = 0;
  bool rolled_back = false;  // the damping loop ran out and windows were restored
};

inline double drop_for(const WindowMetrics& m, DropMetric d) {
  switch (d) {
    case DropMetric::GuardMax: return m.guard_max;
    case DropMetric::WindowMax: return m.window_max;
    case DropMetric::WindowMean: return m.window_mean;
  }
  return m.guard_max;
}

/// Congestion-driven, IR-guarded PDN reduction over the candidate windows
/// of \p base_analysis. Each round plans and applies the pending windows,
/// then re-verifies the whole chip; windows near a violation have their
/// ratio damped and are re-planned from their prior geometry. The returned
/// geometry always passes IR and EM verification.
inline SynthesisResult synthesize(const DesignBundle& bundle, const PdnGeometry& pdn, const FlowConfig& cfg,
                                  const Analysis& base, const PdnGeometry* reference = nullptr) {
  const auto& tech = bundle.technology;
  const auto& design = bundle.design;
  const auto& sc = cfg.synthesis;
  sc.validate();
  if (!base.verification.pass())
    throw Error(ErrorKind::Precondition, "baseline PDN fails sign-off: " + base.verification.summary());

  SynthesisResult out;
  out.geometry = pdn;
  out.verification = base.verification;
  if (base.candidates.empty()) return out;

  std::optional<PdnGeometry> uniform;
  if (!reference) {
    uniform = generate_uniform_pdn(bundle);
    reference = &*uniform;
  }

  const double cap = sc.congestion_cap ? *sc.congestion_cap : nearest_rank(base.congestion.window_score, 0.95);
  std::map<int, double> f;
  std::vector<int> order;
  for (const auto& c : base.candidates.members) {
    order.push_back(c.window);
    f[c.window] = sc.brute_force ? sc.f_max
                                 : target_f(normalize_congestion(c.metrics.congestion, cap),
                                            drop_for(c.metrics, sc.drop_metric), sc);
  }

  std::map<int, WindowPlan> kept;  // windows whose removals are in place
  std::vector<int> pending = order;
  PdnGeometry current = pdn;
  const double step = base.safety.guard_step;

  auto rebuild = [&](const std::map<int, WindowPlan>& plans) {
    std::vector<WindowPlan> seq;
    for (int w : order)
      if (auto it = plans.find(w); it != plans.end()) seq.push_back(it->second);
    return apply_plan(pdn, seq, design, tech).geometry;
  };

  bool clean = false;
  std::vector<int> offending;
  for (int iter = 1; iter <= sc.max_iterations && !pending.empty(); ++iter) {
    out.iterations = iter;
    PdnGeometry working = current;
    std::vector<int> touched;
    for (int w : pending) {
      WindowPlan plan = plan_reduction(base.windows, w, working, tech, f[w], base.congestion.dominant(w), reference);
      if (plan.segments.empty()) continue;
      auto res = apply_plan(working, std::span<const WindowPlan>(&plan, 1), design, tech);
      out.skipped.insert(out.skipped.end(), res.skipped.begin(), res.skipped.end());
      plan.segments = res.applied;
      if (plan.segments.empty()) continue;
      working = std::move(res.geometry);
      kept[w] = plan;
      touched.push_back(w);
    }

    const Verification v = verify(bundle, working, cfg.solver);
    offending.clear();
    if (!v.pass()) {
      std::vector<Point> spots = v.ir_violations;
      for (const auto& e : v.em.violations) spots.push_back(e.at);
      for (const auto& [w, plan] : kept) {
        const Rect gb = guard_band(base.windows, w, step);
        if (std::any_of(spots.begin(), spots.end(), [&](const Point& p) { return gb.contains_closed(p); }))
          offending.push_back(w);
      }
      if (offending.empty())
        for (const auto& [w, plan] : kept) offending.push_back(w);
    }
    for (int w : pending) {
      const bool bad = std::find(offending.begin(), offending.end(), w) != offending.end();
      const auto it = kept.find(w);
      out.log.push_back({iter, w, base.windows.row_of(w), base.windows.col_of(w), f[w],
                         it == kept.end() ? 0.0 : it->second.removed(), !bad});
    }
    if (v.pass()) {
      current = std::move(working);
      out.verification = v;
      clean = true;
      break;
    }
    for (int w : offending) {
      f[w] *= sc.damping;
      kept.erase(w);
    }
    current = rebuild(kept);
    pending.clear();
    for (int w : order)
      if (std::find(offending.begin(), offending.end(), w) != offending.end()) pending.push_back(w);
  }

  if (!clean) {
    // damping budget spent: keep only windows that verified
    out.rolled_back = true;
    current = rebuild(kept);
    out.verification = verify(bundle, current, cfg.solver);
    if (!out.verification.pass()) {
      kept.clear();
      current = pdn;
      out.verification = base.verification;
    }
  }

  out.geometry = std::move(current);
  for (int w : order)
    if (auto it = kept.find(w); it != kept.end()) out.plan.windows.push_back(it->second);
  return out;
}

inline SynthesisResult synthesize(const DesignBundle& bundle, const PdnGeometry& pdn, const FlowConfig& cfg) {
  const Analysis base = analyze(bundle, pdn, cfg);
  return synthesize(bundle, pdn, cfg, base);
}

}  // namespace pdnsynth
