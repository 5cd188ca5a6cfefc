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
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pdnsynth/design.hpp"
#include "pdnsynth/error.hpp"

namespace pdnsynth {

/// Knobs of the synthetic design generator. Defaults describe the shipped
/// 1 mm x 1 mm example.
struct SyntheticParams {
  double die_width = 1000.0;   // um
  double die_height = 1000.0;  // um
  int source_count = 10000;
  double source_current = 0.2;  // mA, mean per source
  double current_spread = 0.5;   // per-source current uniform in mean*(1 +- spread)
  std::vector<Rect> hotspots{{300, 620, 400, 720}, {700, 140, 780, 220}};
  double hotspot_density_ratio = 8.0;  // source density inside hotspots vs outside
  int net_count = 3000;
  int max_pins = 5;
  double local_net_span = 60.0;  // um, bounding box edge of nets outside congested regions
  std::vector<Rect> congested{{100, 200, 180, 520}, {560, 420, 640, 760}, {820, 520, 900, 900}};
  double congested_fraction = 0.5;  // share of nets placed inside congested regions
  std::string pad_layer = "M7";
  int pad_every = 2;  // a pad on every n-th top-layer crossing

  void validate() const {
    if (!(die_width > 0.0) || !(die_height > 0.0)) throw Error(ErrorKind::Configuration, "die must be non-degenerate");
    if (source_count < 0 || net_count < 0) throw Error(ErrorKind::Configuration, "counts must be >= 0");
    if (!(source_current >= 0.0) || current_spread < 0.0 || current_spread > 1.0)
      throw Error(ErrorKind::Configuration, "source current must be >= 0 and spread in [0, 1]");
    if (!(hotspot_density_ratio > 0.0)) throw Error(ErrorKind::Configuration, "density ratio must be > 0");
    if (max_pins < 2) throw Error(ErrorKind::Configuration, "max_pins must be >= 2");
    if (!(congested_fraction >= 0.0 && congested_fraction <= 1.0))
      throw Error(ErrorKind::Configuration, "congested fraction must lie in [0, 1]");
    if (pad_every < 1) throw Error(ErrorKind::Configuration, "pad_every must be >= 1");
    const Rect die{0, 0, die_width, die_height};
    auto check = [&](const std::vector<Rect>& rs, const char* what) {
      for (std::size_t i = 0; i < rs.size(); ++i) {
        if (rs[i].degenerate() || !die.contains(rs[i]))
          throw Error(ErrorKind::Configuration, std::string(what) + " region outside die or degenerate");
        for (std::size_t j = 0; j < i; ++j) {
          const Rect o = rs[i].clipped(rs[j]);
          if (!o.degenerate()) throw Error(ErrorKind::Configuration, std::string(what) + " regions overlap");
        }
      }
    };
    check(hotspots, "hotspot");
    check(congested, "congested");
  }

  double hotspot_area() const {
    double a = 0.0;
    for (const auto& r : hotspots) a += r.area();
    return a;
  }

  /// Probability that one source lands in a hotspot region.
  double hotspot_probability() const {
    const double a = hotspot_area() / (die_width * die_height);
    const double r = hotspot_density_ratio;
    return r * a / (r * a + 1.0 - a);
  }
};

// The defaults below are invented for the example M2..M7 stack.
inline Technology default_technology() {
  Technology t;
  t.vdd_nominal = 800.0;
  t.ir_limit = 62.0;
  t.via_effective_width = 2.0;
  t.source_attach_resistance = 0.1;
  const double rs[] = {0.08, 0.08, 0.04, 0.04, 0.02, 0.02};
  const double tp[] = {0.5, 0.5, 1.0, 1.0, 2.0, 2.0};
  const double em[] = {8.0, 8.0, 8.0, 8.0, 14.0, 14.0};
  for (int i = 0; i < 6; ++i)
    t.layers.push_back({"M" + std::to_string(i + 2), i % 2 == 0 ? Direction::Horizontal : Direction::Vertical, rs[i],
                        tp[i], 1.0, em[i]});
  return t;
}

inline PdnSpec default_pdn_spec() {
  // offsets keep every centerline off the 20 um window boundaries
  return PdnSpec{{{"M2", 1.0, 20.0, 5.0},
                  {"M3", 1.0, 20.0, 10.0},
                  {"M4", 2.0, 40.0, 15.0},
                  {"M5", 2.0, 40.0, 25.0},
                  {"M6", 4.0, 80.0, 30.0},
                  {"M7", 4.0, 80.0, 50.0}}};
}

namespace detail {

inline double round_um(double v) { return std::round(v * 1000.0) / 1000.0; }

}  // namespace detail

/// Random design: sources clustered in the hotspot regions at the given
/// density ratio, nets partly confined to the congested regions, pads on
/// crossings of the top two layers of \p spec. Pure in (params, seed).
inline Design generate_synthetic_design(const SyntheticParams& p, std::uint64_t seed,
                                        const Technology& tech = default_technology(),
                                        const PdnSpec& spec = default_pdn_spec()) {
  p.validate();
  std::mt19937_64 rng(seed);
  // explicit transforms keep output identical across standard libraries
  auto uniform = [&rng](double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  };
  auto pick = [&rng](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  auto pick_weighted = [&](const std::vector<Rect>& rs) {
    double total = 0.0;
    for (const auto& r : rs) total += r.area();
    double u = uniform(0.0, total);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      if (u < rs[i].area()) return i;
      u -= rs[i].area();
    }
    return rs.size() - 1;
  };
  auto point_in = [&](const Rect& r) { return Point{detail::round_um(uniform(r.x0, r.x1)), detail::round_um(uniform(r.y0, r.y1))}; };

  Design d;
  d.die = {0.0, 0.0, p.die_width, p.die_height};

  // pads on crossings of the two topmost PDN layers
  if (spec.layers.size() >= 2) {
    const auto& top = spec.layers.back();
    const auto& below = spec.layers[spec.layers.size() - 2];
    const bool top_vertical = tech.layer(tech.layer_index(top.layer)).direction == Direction::Vertical;
    const auto& xs_pat = top_vertical ? top : below;
    const auto& ys_pat = top_vertical ? below : top;
    auto lines = [](const StripePattern& s, double extent) {
      std::vector<double> v;
      for (int k = 0;; ++k) {
        const double c = s.offset + k * s.pitch;
        if (c + 0.5 * s.width > extent) break;
        if (c - 0.5 * s.width >= 0.0) v.push_back(c);
      }
      return v;
    };
    const auto xs = lines(xs_pat, p.die_width);
    const auto ys = lines(ys_pat, p.die_height);
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t j = 0; j < ys.size(); ++j)
        if ((i + j) % static_cast<std::size_t>(p.pad_every) == 0) d.pads.push_back({xs[i], ys[j], p.pad_layer});
  }

  const double ph = p.hotspots.empty() ? 0.0 : p.hotspot_probability();
  auto in_hotspot = [&](const Point& q) {
    return std::any_of(p.hotspots.begin(), p.hotspots.end(), [&](const Rect& r) { return r.contains(q, d.die); });
  };
  d.sources.reserve(static_cast<std::size_t>(p.source_count));
  for (int i = 0; i < p.source_count; ++i) {
    Point q;
    if (uniform(0.0, 1.0) < ph) {
      q = point_in(p.hotspots[pick_weighted(p.hotspots)]);
    } else {
      do q = point_in(d.die);
      while (in_hotspot(q));
    }
    const double cur = p.source_current * (1.0 + p.current_spread * uniform(-1.0, 1.0));
    d.sources.push_back({q.x, q.y, std::round(cur * 1e6) / 1e6});
  }

  d.nets.reserve(static_cast<std::size_t>(p.net_count));
  for (int i = 0; i < p.net_count; ++i) {
    Net n;
    n.id = "n" + std::to_string(i);
    const int pins = 2 + static_cast<int>(pick(static_cast<std::size_t>(p.max_pins - 1)));
    Rect box;
    if (!p.congested.empty() && uniform(0.0, 1.0) < p.congested_fraction) {
      box = p.congested[pick_weighted(p.congested)];
    } else {
      const Point c = point_in(d.die);
      const double h = 0.5 * p.local_net_span;
      box = Rect{c.x - h, c.y - h, c.x + h, c.y + h}.clipped(d.die);
    }
    for (int k = 0; k < pins; ++k) n.pins.push_back(point_in(box));
    d.nets.push_back(std::move(n));
  }
  return d;
}

inline DesignBundle default_bundle(const SyntheticParams& p = {}, std::uint64_t seed = 7) {
  DesignBundle b;
  b.technology = default_technology();
  b.pdn_spec = default_pdn_spec();
  b.design = generate_synthetic_design(p, seed, b.technology, b.pdn_spec);
  return b;
}

}  // namespace pdnsynth
