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
#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "pdnsynth/congestion/map.hpp"
#include "pdnsynth/pdn_geometry.hpp"

using namespace pdnsynth;
using Catch::Approx;

namespace {

// one horizontal and one vertical layer at pitch 0.5: 10 tracks per 5 um gcell
Technology routing_tech() {
  Technology t;
  t.vdd_nominal = 800.0;
  t.ir_limit = 50.0;
  t.layers = {{"M2", Direction::Horizontal, 0.05, 0.5, 1.0, 2.0}, {"M3", Direction::Vertical, 0.05, 0.5, 1.0, 2.0}};
  return t;
}

std::vector<oracle::EdgeKey> key_of(const std::vector<MstEdge>& es, const std::vector<Point>& pins) {
  std::vector<oracle::Edge> t;
  for (const auto& e : es) t.push_back({e.u, e.v});
  return oracle::tree_key(t, pins);
}

std::vector<Point> random_pins(std::mt19937_64& rng, int n, int span) {
  std::uniform_int_distribution<int> c(0, span);
  std::vector<Point> p;
  for (int i = 0; i < n; ++i) p.push_back({static_cast<double>(c(rng)), static_cast<double>(c(rng))});
  return p;
}

double demand_sum(const RouteDemand& d) { return d.total(); }

}  // namespace

TEST_CASE("mst on a collinear chain", "[congestion]") {
  const std::vector<Point> pins{{0, 0}, {10, 0}, {20, 0}};
  const auto es = build_mst(pins);
  REQUIRE(es.size() == 2);
  REQUIRE(mst_length(es, pins) == 20.0);
  REQUIRE(es[0] == MstEdge{0, 1});
  REQUIRE(es[1] == MstEdge{1, 2});
}

TEST_CASE("mst of a square matches brute force and tie-break", "[congestion]") {
  const std::vector<Point> pins{{0, 0}, {0, 10}, {10, 0}, {10, 10}};
  const auto best = oracle::brute_force_mst(pins);
  REQUIRE(best.count == 16);
  REQUIRE(best.length == 30.0);
  const auto es = build_mst(pins);
  REQUIRE(es.size() == 3);
  REQUIRE(mst_length(es, pins) == 30.0);
  REQUIRE(key_of(es, pins) == best.key);
}

TEST_CASE("mst of two pins and degenerate nets", "[congestion]") {
  const std::vector<Point> two{{3, 4}, {1, 1}};
  const auto es = build_mst(two);
  REQUIRE(es.size() == 1);
  REQUIRE(mst_length(es, two) == 5.0);
  const std::vector<Point> one{{1, 1}};
  try {
    (void)build_mst(one);
    FAIL("expected an error");
  } catch (const Error& e) {
    REQUIRE(e.kind() == ErrorKind::DegenerateNet);
  }
}

TEST_CASE("mst optimal on random nets up to seven pins", "[congestion][property]") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 6;
    // small coordinate range forces many equal-length ties
    const auto pins = random_pins(rng, n, trial % 2 ? 4 : 100);
    const auto best = oracle::brute_force_mst(pins);
    const auto es = build_mst(pins);
    REQUIRE(es.size() == pins.size() - 1);
    REQUIRE(mst_length(es, pins) == Approx(best.length).margin(1e-9));
    REQUIRE(key_of(es, pins) == best.key);
  }
}

TEST_CASE("steinerize single L edge", "[congestion]") {
  const std::vector<Point> pins{{0, 0}, {10, 10}};
  const auto t = steinerize(build_mst(pins), pins);
  REQUIRE(t.length() == 20.0);
  REQUIRE(t.steiner_points.empty());
  REQUIRE(t.flexible.size() == 1);
}

TEST_CASE("steinerize merges into a Steiner point", "[congestion]") {
  const std::vector<Point> pins{{0, 0}, {10, 0}, {5, 5}};
  const auto mst = build_mst(pins);
  REQUIRE(mst_length(mst, pins) == 20.0);
  const auto t = steinerize(mst, pins);
  REQUIRE(t.length() == 15.0);
  REQUIRE(t.length() == oracle::hanan_rsmt3(pins));
  REQUIRE(t.steiner_points == std::vector<Point>{{5, 0}});
  REQUIRE(t.flexible.empty());
}

TEST_CASE("steinerize keeps collinear pins unchanged", "[congestion]") {
  const std::vector<Point> pins{{0, 3}, {7, 3}, {20, 3}, {12, 3}};
  const auto mst = build_mst(pins);
  const auto t = steinerize(mst, pins);
  REQUIRE(t.steiner_points.empty());
  REQUIRE(t.length() == mst_length(mst, pins));
  REQUIRE(t.segments.size() == 1);
}

TEST_CASE("steinerize never lengthens the tree", "[congestion][property]") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + trial % 8;
    const auto pins = random_pins(rng, n, trial % 3 ? 20 : 200);
    const auto mst = build_mst(pins);
    const auto t = steinerize(mst, pins);
    REQUIRE(t.length() <= mst_length(mst, pins) + 1e-9);
    if (n == 3) REQUIRE(t.length() >= oracle::hanan_rsmt3(pins) - 1e-9);
    for (const auto& s : t.segments) REQUIRE((s.a.x == s.b.x || s.a.y == s.b.y));
  }
}

TEST_CASE("gcell capacity and partial tiles", "[congestion]") {
  const auto g = make_gcell_grid({0, 0, 12, 10}, routing_tech(), 5.0);
  REQUIRE(g.nx == 3);
  REQUIRE(g.ny == 2);
  REQUIRE(g.cap_h[g.index(0, 0)] == 10.0);
  REQUIRE(g.cap_v[g.index(0, 0)] == 10.0);
  REQUIRE(g.cap_v[g.index(2, 0)] == 4.0);  // 2 um wide
  REQUIRE(g.cap_h[g.index(2, 0)] == 10.0);
  REQUIRE_THROWS_AS(make_gcell_grid({0, 0, 12, 10}, routing_tech(), 0.0), Error);
}

TEST_CASE("demand of a straight segment", "[congestion]") {
  const auto g = make_gcell_grid({0, 0, 20, 20}, routing_tech(), 5.0);
  SteinerTree t;
  t.segments.push_back({{0, 2}, {15, 2}});
  const auto d = accumulate_demand(std::vector<SteinerTree>{t}, g);
  for (int i = 0; i < 3; ++i) REQUIRE(d.h[g.index(i, 0)] == Approx(1.0));
  REQUIRE(d.h[g.index(3, 0)] == 0.0);
  REQUIRE(demand_sum(d) == Approx(3.0));
  for (double v : d.v) REQUIRE(v == 0.0);
}

TEST_CASE("flexible L splits half on each bend", "[congestion]") {
  const auto g = make_gcell_grid({0, 0, 10, 10}, routing_tech(), 5.0);
  // gcell centres (2.5,2.5) -> (7.5,7.5): two gcells apart diagonally
  SteinerTree t;
  t.flexible.push_back({{2.5, 2.5}, {7.5, 7.5}});
  const auto d = accumulate_demand(std::vector<SteinerTree>{t}, g);
  // lower bend: horizontal along row 0, vertical along column 1
  REQUIRE(d.h[g.index(0, 0)] == Approx(0.25));
  REQUIRE(d.h[g.index(1, 0)] == Approx(0.25));
  REQUIRE(d.v[g.index(1, 0)] == Approx(0.25));
  REQUIRE(d.v[g.index(1, 1)] == Approx(0.25));
  // upper bend mirrors it
  REQUIRE(d.v[g.index(0, 0)] == Approx(0.25));
  REQUIRE(d.h[g.index(0, 1)] == Approx(0.25));
  REQUIRE(demand_sum(d) * g.size == Approx(t.length()));
}

TEST_CASE("demand is conserved", "[congestion][property]") {
  std::mt19937_64 rng(5);
  const Rect die{0, 0, 97, 83};
  const auto g = make_gcell_grid(die, routing_tech(), 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SteinerTree> trees;
    ExactSum len;
    std::uniform_real_distribution<double> ux(0.0, die.x1), uy(0.0, die.y1);
    for (int k = 0; k < 30; ++k) {
      std::vector<Point> pins;
      const int n = 2 + k % 5;
      for (int i = 0; i < n; ++i) pins.push_back({ux(rng), uy(rng)});
      trees.push_back(route_net({std::to_string(k), pins}));
      len.add(trees.back().length());
    }
    const auto d = accumulate_demand(trees, g);
    for (double x : d.h) REQUIRE(x >= 0.0);
    for (double x : d.v) REQUIRE(x >= 0.0);
    REQUIRE(std::abs(d.total() * g.size - len.value()) <= 1e-9 * std::max(1.0, len.value()));
  }
}

TEST_CASE("blockage ceiling rule", "[congestion]") {
  const Technology tech = routing_tech();
  const auto g = make_gcell_grid({0, 0, 20, 20}, tech, 5.0);
  PdnGeometry pdn;
  pdn.stripes.push_back({0, Direction::Horizontal, 7.0, 0.0, 20.0, 1.0});
  auto b = pdn_blockage(pdn, g, tech);
  for (int i = 0; i < 4; ++i) REQUIRE(b.h[g.index(i, 1)] == 2.0);
  REQUIRE(b.h[g.index(0, 0)] == 0.0);
  for (double x : b.v) REQUIRE(x == 0.0);  // nothing on the vertical layer
  REQUIRE(b.clamped_count() == 0);

  pdn.stripes[0].width = 1.2;  // ceil(2.4) = 3
  b = pdn_blockage(pdn, g, tech);
  REQUIRE(b.h[g.index(2, 1)] == 3.0);

  PdnGeometry none;
  b = pdn_blockage(none, g, tech);
  for (std::size_t k = 0; k < g.count(); ++k) REQUIRE(b.h[k] + b.v[k] == 0.0);
}

TEST_CASE("pieces of one line in a gcell block it once", "[congestion]") {
  const Technology tech = routing_tech();
  const auto g = make_gcell_grid({0, 0, 20, 20}, tech, 5.0);
  PdnGeometry pdn;
  pdn.stripes.push_back({0, Direction::Horizontal, 7.0, 0.0, 6.0, 1.0});
  pdn.stripes.push_back({0, Direction::Horizontal, 7.0, 9.0, 20.0, 1.0});  // hole inside gcell 1
  const auto b = pdn_blockage(pdn, g, tech);
  for (int i = 0; i < 4; ++i) REQUIRE(b.h[g.index(i, 1)] == 2.0);
}

TEST_CASE("blockage clamps beyond capacity", "[congestion]") {
  const Technology tech = routing_tech();
  const auto g = make_gcell_grid({0, 0, 10, 10}, tech, 5.0);
  PdnGeometry pdn;
  pdn.stripes.push_back({1, Direction::Vertical, 2.5, 0.0, 5.0, 6.0});  // 12 tracks over 10
  const auto b = pdn_blockage(pdn, g, tech);
  REQUIRE(b.clamped_v[g.index(0, 0)] == 1);
  REQUIRE(b.clamped_count() == 1);
}

TEST_CASE("removing a segment restores k times ceil(w/pitch)", "[congestion][property]") {
  DesignBundle b;
  b.technology = routing_tech();
  b.design.die = {0, 0, 100, 100};
  b.design.pads.push_back({50, 50, "M3"});
  b.pdn_spec.layers = {{"M2", 1.2, 10.0, 5.0}, {"M3", 0.8, 10.0, 5.0}};
  const auto pdn = generate_uniform_pdn(b);
  const auto g = make_gcell_grid(b.design.die, b.technology, 5.0);
  const auto base = pdn_blockage(pdn, g, b.technology);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    auto cut = pdn;
    const std::size_t s = rng() % cut.stripes.size();
    const auto st = cut.stripes[s];
    const double a = std::floor(static_cast<double>(rng() % 90));
    const double len = 1.0 + static_cast<double>(rng() % 10);
    const double lo = std::max(st.start, a), hi = std::min(st.end, a + len);
    // split the stripe leaving a hole over [lo, hi]
    cut.stripes[s].end = lo;
    auto tail = st;
    tail.start = hi;
    cut.stripes.push_back(tail);
    const auto after = pdn_blockage(cut, g, b.technology);
    const double t = std::ceil(st.width / b.technology.layers[static_cast<std::size_t>(st.layer)].track_pitch);
    // gcells left with no metal of this line
    int k = 0;
    for (int i = 0; i < 20; ++i) {
      const double c0 = i * 5.0, c1 = c0 + 5.0;
      const bool before_cov = std::min(st.end, c1) - std::max(st.start, c0) > 0;
      const bool left_cov = std::min(lo, c1) - std::max(st.start, c0) > 0;
      const bool right_cov = std::min(st.end, c1) - std::max(hi, c0) > 0;
      if (before_cov && !left_cov && !right_cov) ++k;
    }
    double diff = 0.0;
    for (std::size_t q = 0; q < g.count(); ++q) diff += (base.h[q] - after.h[q]) + (base.v[q] - after.v[q]);
    REQUIRE(diff == Approx(k * t));
  }
}

TEST_CASE("congestion score at capacity", "[congestion]") {
  const auto g = make_gcell_grid({0, 0, 5, 5}, routing_tech(), 5.0);
  const auto w = partition({0, 0, 5, 5}, 5.0);
  RouteDemand d{{8.0}, {0.0}};
  Blockage b{{2.0}, {0.0}, {0}, {0}};
  const auto m = congestion_map(d, g, b, w);
  REQUIRE(m.score_h[0] == Approx(1.0));
  REQUIRE(m.score_v[0] == 0.0);
  REQUIRE(m.overflow[0] == 0.0);
  REQUIRE(m.window_score[0] == Approx(1.0));
  REQUIRE(m.dominant(0) == Direction::Horizontal);
}

TEST_CASE("zero demand scores zero", "[congestion]") {
  const Technology tech = routing_tech();
  const auto g = make_gcell_grid({0, 0, 40, 40}, tech, 5.0);
  const auto w = partition({0, 0, 40, 40}, 20.0);
  RouteDemand d;
  d.h.assign(g.count(), 0.0);
  d.v.assign(g.count(), 0.0);
  PdnGeometry pdn;
  pdn.stripes.push_back({0, Direction::Horizontal, 7.0, 0.0, 40.0, 2.0});
  const auto m = congestion_map(d, g, pdn_blockage(pdn, g, tech), w);
  for (std::size_t k = 0; k < g.count(); ++k) REQUIRE(m.gcell_score(k) == 0.0);
  for (double s : m.window_score) REQUIRE(s == 0.0);
}

TEST_CASE("full blockage gives demand over epsilon and overflow", "[congestion]") {
  const auto g = make_gcell_grid({0, 0, 5, 5}, routing_tech(), 5.0);
  const auto w = partition({0, 0, 5, 5}, 5.0);
  RouteDemand d{{0.0}, {3.0}};
  Blockage b{{0.0}, {12.0}, {0}, {1}};
  const auto m = congestion_map(d, g, b, w);
  REQUIRE(m.score_v[0] == Approx(300.0));
  REQUIRE(m.overflow[0] == Approx(3.0));
  REQUIRE(m.dominant(0) == Direction::Vertical);
}

TEST_CASE("overflow exactly when demand exceeds capacity", "[congestion][property]") {
  const auto g = make_gcell_grid({0, 0, 5, 5}, routing_tech(), 5.0);
  const auto w = partition({0, 0, 5, 5}, 5.0);
  for (double dem : {0.0, 5.0, 7.9, 8.0, 8.1, 20.0}) {
    RouteDemand d{{dem}, {0.0}};
    Blockage b{{2.0}, {0.0}, {0}, {0}};
    const auto m = congestion_map(d, g, b, w);
    REQUIRE((m.overflow[0] > 0.0) == (dem > 8.0));
    REQUIRE(m.score_h[0] >= 0.0);
  }
}

TEST_CASE("window score is the top quartile mean", "[congestion]") {
  const auto g = make_gcell_grid({0, 0, 20, 20}, routing_tech(), 5.0);
  const auto w = partition({0, 0, 20, 20}, 20.0);
  RouteDemand d;
  d.h.assign(g.count(), 0.0);
  d.v.assign(g.count(), 0.0);
  for (std::size_t k = 0; k < 16; ++k) d.h[k] = static_cast<double>(k + 1);  // scores (k+1)/10
  Blockage b;
  b.h.assign(g.count(), 0.0);
  b.v.assign(g.count(), 0.0);
  const auto m = congestion_map(d, g, b, w);
  // top 4 of 16: 1.6, 1.5, 1.4, 1.3
  REQUIRE(m.window_score[0] == Approx(1.45));
  REQUIRE(m.window_score_h[0] == Approx(1.45));
  REQUIRE(m.window_score_v[0] == 0.0);

  CongestionConfig all;
  all.top_fraction = 1.0;
  REQUIRE(congestion_map(d, g, b, w, all).window_score[0] == Approx(0.85));
}

TEST_CASE("pin weight adds a density term", "[congestion]") {
  const auto g = make_gcell_grid({0, 0, 10, 5}, routing_tech(), 5.0);
  const auto w = partition({0, 0, 10, 5}, 5.0);
  std::vector<Net> nets{{"n0", {{1, 1}, {2, 2}, {7, 1}}}};
  const auto pins = pin_counts(nets, g);
  REQUIRE(pins == std::vector<double>{2.0, 1.0});
  RouteDemand d{{0.0, 0.0}, {0.0, 0.0}};
  Blockage b{{0.0, 0.0}, {0.0, 0.0}, {0, 0}, {0, 0}};
  REQUIRE(congestion_map(d, g, b, w, {}, pins).score_h[0] == 0.0);  // default weight 0
  CongestionConfig c;
  c.pin_weight = 0.1;
  const auto m = congestion_map(d, g, b, w, c, pins);
  REQUIRE(m.score_h[0] == Approx(0.2));
  REQUIRE(m.score_v[1] == Approx(0.1));
}

TEST_CASE("removing blockage never raises a score", "[congestion][property]") {
  DesignBundle b;
  b.technology = routing_tech();
  b.design.die = {0, 0, 100, 100};
  b.design.pads.push_back({50, 50, "M3"});
  b.pdn_spec.layers = {{"M2", 2.0, 10.0, 5.0}, {"M3", 2.0, 10.0, 5.0}};
  const auto pdn = generate_uniform_pdn(b);
  const auto g = make_gcell_grid(b.design.die, b.technology, 5.0);
  const auto w = partition(b.design.die, 20.0);
  std::mt19937_64 rng(9);
  std::vector<SteinerTree> trees;
  for (int k = 0; k < 200; ++k) trees.push_back(route_net({std::to_string(k), random_pins(rng, 2 + k % 4, 100)}));
  const auto d = accumulate_demand(trees, g);
  auto cur = pdn;
  auto prev = congestion_map(d, g, pdn_blockage(cur, g, b.technology), w);
  while (!cur.stripes.empty()) {
    cur.stripes.erase(cur.stripes.begin() + static_cast<std::ptrdiff_t>(rng() % cur.stripes.size()));
    const auto next = congestion_map(d, g, pdn_blockage(cur, g, b.technology), w);
    for (std::size_t k = 0; k < g.count(); ++k) {
      REQUIRE(next.score_h[k] <= prev.score_h[k]);
      REQUIRE(next.score_v[k] <= prev.score_v[k]);
    }
    for (std::size_t q = 0; q < next.window_score.size(); ++q) REQUIRE(next.window_score[q] <= prev.window_score[q] + 1e-12);
    prev = next;
  }
}

TEST_CASE("congestion csv layout", "[congestion]") {
  const auto g = make_gcell_grid({0, 0, 10, 5}, routing_tech(), 5.0);
  const auto w = partition({0, 0, 10, 5}, 5.0);
  RouteDemand d{{5.0, 0.0}, {0.0, 0.0}};
  Blockage b{{0.0, 0.0}, {0.0, 0.0}, {0, 0}, {0, 0}};
  std::ostringstream os;
  write_congestion_csv(os, congestion_map(d, g, b, w));
  REQUIRE(os.str() == "i,j,score_h,score_v,overflow\n0,0,0.500000,0.000000,0.000000\n1,0,0.000000,0.000000,0.000000\n");
}
