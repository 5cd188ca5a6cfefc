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

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pdnsynth/design.hpp"
#include "pdnsynth/error.hpp"
#include "pdnsynth/flow.hpp"
#include "pdnsynth/synthesis.hpp"
#include "pdnsynth/synthetic.hpp"

// JSON documents exchanged by the command-line pipeline. Units follow the
// library: um, ohm, mA, mV.
namespace pdnsynth::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

template <typename T>
T get(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::Input, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Input, std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
void get_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = get<T>(j, key);
}

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::Input, where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw Error(ErrorKind::Input, where + ": unknown field '" + k + "'");
  }
}

inline Direction direction_from(const std::string& s) {
  if (s == "horizontal") return Direction::Horizontal;
  if (s == "vertical") return Direction::Vertical;
  throw Error(ErrorKind::Input, "direction must be 'horizontal' or 'vertical', got '" + s + "'");
}

inline void check_schema(const json& j) {
  const int v = get<int>(j, "schema_version");
  if (v != kSchemaVersion)
    throw Error(ErrorKind::Input, "unsupported schema_version " + std::to_string(v));
}

}  // namespace detail

// ---- design bundle ----

inline json to_json(const DesignBundle& b) {
  json layers = json::array();
  for (const auto& l : b.technology.layers)
    layers.push_back({{"name", l.name},
                      {"direction", std::string(to_string(l.direction))},
                      {"sheet_resistance", l.sheet_resistance},
                      {"track_pitch", l.track_pitch},
                      {"via_resistance_to_next", l.via_resistance_to_next},
                      {"em_limit", l.em_limit}});
  json spec = json::array();
  for (const auto& p : b.pdn_spec.layers)
    spec.push_back({{"layer", p.layer}, {"width", p.width}, {"pitch", p.pitch}, {"offset", p.offset}});
  json pads = json::array();
  for (const auto& p : b.design.pads) pads.push_back({{"x", p.x}, {"y", p.y}, {"layer", p.layer}});
  json sources = json::array();
  for (const auto& s : b.design.sources) sources.push_back({s.x, s.y, s.current});
  json nets = json::array();
  for (const auto& n : b.design.nets) {
    json pins = json::array();
    for (const auto& p : n.pins) pins.push_back({p.x, p.y});
    nets.push_back({{"id", n.id}, {"pins", pins}});
  }
  const auto& d = b.design.die;
  return {{"schema_version", kSchemaVersion},
          {"technology",
           {{"vdd_nominal", b.technology.vdd_nominal},
            {"ir_limit", b.technology.ir_limit},
            {"via_effective_width", b.technology.via_effective_width},
            {"source_attach_resistance", b.technology.source_attach_resistance},
            {"layers", layers}}},
          {"pdn_spec", {{"layers", spec}}},
          {"design", {{"die", {d.x0, d.y0, d.x1, d.y1}}, {"pads", pads}, {"sources", sources}, {"nets", nets}}}};
}

inline DesignBundle bundle_from_json(const json& j) {
  using detail::get;
  detail::check_schema(j);
  detail::check_keys(j, {"schema_version", "technology", "pdn_spec", "design", "comment"}, "bundle");
  DesignBundle b;
  const json& t = get<json>(j, "technology");
  detail::check_keys(t, {"vdd_nominal", "ir_limit", "via_effective_width", "source_attach_resistance", "layers"},
                     "technology");
  b.technology.vdd_nominal = get<double>(t, "vdd_nominal");
  b.technology.ir_limit = get<double>(t, "ir_limit");
  detail::get_opt(t, "via_effective_width", b.technology.via_effective_width);
  detail::get_opt(t, "source_attach_resistance", b.technology.source_attach_resistance);
  for (const auto& l : get<json>(t, "layers")) {
    detail::check_keys(l, {"name", "direction", "sheet_resistance", "track_pitch", "via_resistance_to_next", "em_limit"},
                       "layer");
    b.technology.layers.push_back({get<std::string>(l, "name"), detail::direction_from(get<std::string>(l, "direction")),
                                   get<double>(l, "sheet_resistance"), get<double>(l, "track_pitch"),
                                   get<double>(l, "via_resistance_to_next"), get<double>(l, "em_limit")});
  }
  const json& s = get<json>(j, "pdn_spec");
  detail::check_keys(s, {"layers"}, "pdn_spec");
  for (const auto& p : get<json>(s, "layers")) {
    detail::check_keys(p, {"layer", "width", "pitch", "offset"}, "pdn_spec layer");
    b.pdn_spec.layers.push_back(
        {get<std::string>(p, "layer"), get<double>(p, "width"), get<double>(p, "pitch"), get<double>(p, "offset")});
  }
  const json& d = get<json>(j, "design");
  detail::check_keys(d, {"die", "pads", "sources", "nets"}, "design");
  const auto die = get<std::vector<double>>(d, "die");
  if (die.size() != 4) throw Error(ErrorKind::Input, "die must be [x0, y0, x1, y1]");
  b.design.die = {die[0], die[1], die[2], die[3]};
  for (const auto& p : get<json>(d, "pads")) {
    detail::check_keys(p, {"x", "y", "layer"}, "pad");
    b.design.pads.push_back({get<double>(p, "x"), get<double>(p, "y"), get<std::string>(p, "layer")});
  }
  if (d.contains("sources"))
    for (const auto& s3 : d.at("sources")) {
      if (!s3.is_array() || s3.size() != 3) throw Error(ErrorKind::Input, "source must be [x, y, current_mA]");
      b.design.sources.push_back({s3[0].get<double>(), s3[1].get<double>(), s3[2].get<double>()});
    }
  if (d.contains("nets"))
    for (const auto& n : d.at("nets")) {
      detail::check_keys(n, {"id", "pins"}, "net");
      Net net{get<std::string>(n, "id"), {}};
      for (const auto& p : get<json>(n, "pins")) {
        if (!p.is_array() || p.size() != 2) throw Error(ErrorKind::Input, "pin must be [x, y]");
        net.pins.push_back({p[0].get<double>(), p[1].get<double>()});
      }
      b.design.nets.push_back(std::move(net));
    }
  b.validate();
  return b;
}

// ---- PDN geometry ----

inline json to_json(const PdnGeometry& g, const Technology& tech) {
  json stripes = json::array();
  for (const auto& s : g.stripes)
    stripes.push_back({{"layer", tech.layer(s.layer).name},
                       {"direction", std::string(to_string(s.direction))},
                       {"coord", s.coord},
                       {"start", s.start},
                       {"end", s.end},
                       {"width", s.width}});
  json vias = json::array();
  for (const auto& v : g.vias)
    vias.push_back({{"x", v.x},
                    {"y", v.y},
                    {"lower", tech.layer(v.lower).name},
                    {"upper", tech.layer(v.upper).name},
                    {"resistance", v.resistance}});
  return {{"schema_version", kSchemaVersion}, {"stripes", stripes}, {"vias", vias}};
}

inline PdnGeometry geometry_from_json(const json& j, const Technology& tech) {
  using detail::get;
  detail::check_schema(j);
  PdnGeometry g;
  for (const auto& s : get<json>(j, "stripes")) {
    detail::check_keys(s, {"layer", "direction", "coord", "start", "end", "width"}, "stripe");
    Stripe st;
    try {
      st.layer = tech.layer_index(get<std::string>(s, "layer"));
    } catch (const Error& e) {
      throw Error(ErrorKind::Input, e.what());
    }
    st.direction = detail::direction_from(get<std::string>(s, "direction"));
    st.coord = get<double>(s, "coord");
    st.start = get<double>(s, "start");
    st.end = get<double>(s, "end");
    st.width = get<double>(s, "width");
    if (st.direction != tech.layer(st.layer).direction)
      throw Error(ErrorKind::Input, "stripe direction disagrees with layer " + tech.layer(st.layer).name);
    g.stripes.push_back(st);
  }
  for (const auto& v : get<json>(j, "vias")) {
    detail::check_keys(v, {"x", "y", "lower", "upper", "resistance"}, "via");
    Via via;
    via.x = get<double>(v, "x");
    via.y = get<double>(v, "y");
    via.lower = tech.layer_index(get<std::string>(v, "lower"));
    via.upper = tech.layer_index(get<std::string>(v, "upper"));
    via.resistance = get<double>(v, "resistance");
    g.vias.push_back(via);
  }
  return g;
}

// ---- flow configuration ----

inline const char* to_string(DropMetric m) {
  switch (m) {
    case DropMetric::GuardMax: return "guard_max";
    case DropMetric::WindowMax: return "window_max";
    case DropMetric::WindowMean: return "window_mean";
  }
  return "guard_max";
}

inline DropMetric drop_metric_from(const std::string& s) {
  if (s == "guard_max") return DropMetric::GuardMax;
  if (s == "window_max") return DropMetric::WindowMax;
  if (s == "window_mean") return DropMetric::WindowMean;
  throw Error(ErrorKind::Input, "drop_metric must be guard_max, window_max or window_mean");
}

inline json to_json(const FlowConfig& c) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  const auto& s = c.synthesis;
  return {{"unit_window", c.unit_window},
          {"gcell_size", c.gcell_size},
          {"guard_band", opt(c.guard_band)},
          {"hotspot_threshold", opt(c.hotspot_threshold)},
          {"margin_threshold", opt(c.margin_threshold)},
          {"tolerate_single_hotspot", c.tolerate_single_hotspot},
          {"congestion",
           {{"epsilon", c.congestion.epsilon},
            {"top_fraction", c.congestion.top_fraction},
            {"pin_weight", c.congestion.pin_weight}}},
          {"synthesis",
           {{"alpha", s.alpha},
            {"beta", s.beta},
            {"f_max", s.f_max},
            {"damping", s.damping},
            {"max_iterations", s.max_iterations},
            {"congestion_cap", opt(s.congestion_cap)},
            {"beta_term_cap", s.beta_term_cap},
            {"drop_metric", to_string(s.drop_metric)},
            {"congestion_floor", s.congestion_floor},
            {"brute_force", s.brute_force}}},
          {"solver",
           {{"tol", c.solver.tol},
            {"max_iterations", c.solver.max_iterations},
            {"direct_fallback_below", c.solver.direct_fallback_below}}}};
}

/// Overlays the fields present in \p j onto \p c.
inline void merge_config(FlowConfig& c, const json& j) {
  using detail::get_opt;
  detail::check_keys(j,
                     {"unit_window", "gcell_size", "guard_band", "hotspot_threshold", "margin_threshold",
                      "tolerate_single_hotspot", "congestion", "synthesis", "solver", "seed", "synthetic"},
                     "config");
  auto opt = [&](const char* key, std::optional<double>& out) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null()) out.reset();
    else out = detail::get<double>(j, key);
  };
  get_opt(j, "unit_window", c.unit_window);
  get_opt(j, "gcell_size", c.gcell_size);
  opt("guard_band", c.guard_band);
  opt("hotspot_threshold", c.hotspot_threshold);
  opt("margin_threshold", c.margin_threshold);
  get_opt(j, "tolerate_single_hotspot", c.tolerate_single_hotspot);
  if (j.contains("congestion")) {
    const json& k = j.at("congestion");
    detail::check_keys(k, {"epsilon", "top_fraction", "pin_weight"}, "config.congestion");
    get_opt(k, "epsilon", c.congestion.epsilon);
    get_opt(k, "top_fraction", c.congestion.top_fraction);
    get_opt(k, "pin_weight", c.congestion.pin_weight);
  }
  if (j.contains("synthesis")) {
    const json& k = j.at("synthesis");
    detail::check_keys(k,
                       {"alpha", "beta", "f_max", "damping", "max_iterations", "congestion_cap", "beta_term_cap",
                        "drop_metric", "congestion_floor", "brute_force"},
                       "config.synthesis");
    auto& s = c.synthesis;
    get_opt(k, "alpha", s.alpha);
    get_opt(k, "beta", s.beta);
    get_opt(k, "f_max", s.f_max);
    get_opt(k, "damping", s.damping);
    get_opt(k, "max_iterations", s.max_iterations);
    if (k.contains("congestion_cap")) {
      if (k.at("congestion_cap").is_null()) s.congestion_cap.reset();
      else s.congestion_cap = detail::get<double>(k, "congestion_cap");
    }
    get_opt(k, "beta_term_cap", s.beta_term_cap);
    if (k.contains("drop_metric")) s.drop_metric = drop_metric_from(detail::get<std::string>(k, "drop_metric"));
    get_opt(k, "congestion_floor", s.congestion_floor);
    get_opt(k, "brute_force", s.brute_force);
  }
  if (j.contains("solver")) {
    const json& k = j.at("solver");
    detail::check_keys(k, {"tol", "max_iterations", "direct_fallback_below"}, "config.solver");
    get_opt(k, "tol", c.solver.tol);
    get_opt(k, "max_iterations", c.solver.max_iterations);
    get_opt(k, "direct_fallback_below", c.solver.direct_fallback_below);
  }
}

inline FlowConfig config_from_json(const json& j) {
  FlowConfig c;
  merge_config(c, j);
  return c;
}

// ---- synthetic generator parameters ----

inline json to_json(const SyntheticParams& p) {
  auto rects = [](const std::vector<Rect>& rs) {
    json a = json::array();
    for (const auto& r : rs) a.push_back({r.x0, r.y0, r.x1, r.y1});
    return a;
  };
  return {{"die_width", p.die_width},
          {"die_height", p.die_height},
          {"source_count", p.source_count},
          {"source_current", p.source_current},
          {"current_spread", p.current_spread},
          {"hotspots", rects(p.hotspots)},
          {"hotspot_density_ratio", p.hotspot_density_ratio},
          {"net_count", p.net_count},
          {"max_pins", p.max_pins},
          {"local_net_span", p.local_net_span},
          {"congested", rects(p.congested)},
          {"congested_fraction", p.congested_fraction},
          {"pad_layer", p.pad_layer},
          {"pad_every", p.pad_every}};
}

inline void merge_synthetic(SyntheticParams& p, const json& j) {
  using detail::get_opt;
  detail::check_keys(j,
                     {"die_width", "die_height", "source_count", "source_current", "current_spread", "hotspots",
                      "hotspot_density_ratio", "net_count", "max_pins", "local_net_span", "congested",
                      "congested_fraction", "pad_layer", "pad_every"},
                     "config.synthetic");
  auto rects = [&](const char* key, std::vector<Rect>& out) {
    if (!j.contains(key)) return;
    out.clear();
    for (const auto& r : j.at(key)) {
      const auto v = r.get<std::vector<double>>();
      if (v.size() != 4) throw Error(ErrorKind::Input, std::string(key) + ": rectangles are [x0, y0, x1, y1]");
      out.push_back({v[0], v[1], v[2], v[3]});
    }
  };
  get_opt(j, "die_width", p.die_width);
  get_opt(j, "die_height", p.die_height);
  get_opt(j, "source_count", p.source_count);
  get_opt(j, "source_current", p.source_current);
  get_opt(j, "current_spread", p.current_spread);
  rects("hotspots", p.hotspots);
  get_opt(j, "hotspot_density_ratio", p.hotspot_density_ratio);
  get_opt(j, "net_count", p.net_count);
  get_opt(j, "max_pins", p.max_pins);
  get_opt(j, "local_net_span", p.local_net_span);
  rects("congested", p.congested);
  get_opt(j, "congested_fraction", p.congested_fraction);
  get_opt(j, "pad_layer", p.pad_layer);
  get_opt(j, "pad_every", p.pad_every);
}

// ---- reduction plan ----

inline json to_json(const ReductionPlan& plan, const WindowGrid& grid, const Technology& tech) {
  json windows = json::array();
  for (const auto& w : plan.windows) {
    json segs = json::array();
    for (const auto& s : w.segments)
      segs.push_back({{"layer", tech.layer(s.layer).name}, {"coord", s.coord}, {"start", s.start}, {"end", s.end}});
    windows.push_back({{"window", w.window},
                       {"row", grid.row_of(w.window)},
                       {"col", grid.col_of(w.window)},
                       {"f", w.f},
                       {"window_length", w.window_length},
                       {"budget", w.budget},
                       {"removed", w.removed()},
                       {"segments", segs}});
  }
  json by_layer = json::object();
  for (const auto& [l, v] : plan.removed_by_layer()) by_layer[tech.layer(l).name] = v;
  return {{"schema_version", kSchemaVersion}, {"windows", windows}, {"removed_by_layer", by_layer}};
}

inline ReductionPlan plan_from_json(const json& j, const Technology& tech) {
  using detail::get;
  detail::check_schema(j);
  ReductionPlan plan;
  for (const auto& w : get<json>(j, "windows")) {
    WindowPlan wp;
    wp.window = get<int>(w, "window");
    wp.f = get<double>(w, "f");
    wp.window_length = get<double>(w, "window_length");
    wp.budget = get<double>(w, "budget");
    for (const auto& s : get<json>(w, "segments"))
      wp.segments.push_back({tech.layer_index(get<std::string>(s, "layer")), get<double>(s, "coord"),
                             get<double>(s, "start"), get<double>(s, "end")});
    plan.windows.push_back(std::move(wp));
  }
  return plan;
}

inline json to_json(const IterationRecord& r) {
  return {{"iteration", r.iteration}, {"window", r.window}, {"row", r.row},           {"col", r.col},
          {"F", r.f},                 {"removed_um", r.removed_um}, {"verify_pass", r.verify_pass}};
}

// ---- files ----

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Input, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Input, "'" + path + "': " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Input, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::Input, "write failed for '" + path + "'");
}

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace pdnsynth::io
