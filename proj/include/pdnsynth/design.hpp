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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pdnsynth/error.hpp"
#include "pdnsynth/geometry.hpp"

// Units throughout: um for lengths, ohms, mA for currents, mV for voltages.
namespace pdnsynth {

struct LayerSpec {
  std::string name;
  Direction direction = Direction::Horizontal;
  double sheet_resistance = 0.0;        // ohm / square
  double track_pitch = 0.0;             // um
  double via_resistance_to_next = 0.0;  // ohm, via to the layer above
  double em_limit = 0.0;                // mA per um of width
};

struct Technology {
  std::vector<LayerSpec> layers;  // bottom to top
  double vdd_nominal = 0.0;       // mV
  double ir_limit = 0.0;          // mV
  double via_effective_width = 1.0;       // um, used for via EM density
  double source_attach_resistance = 0.1;  // ohm, cell-to-rail hookup

  std::optional<int> find_layer(std::string_view name) const {
    for (std::size_t i = 0; i < layers.size(); ++i)
      if (layers[i].name == name) return static_cast<int>(i);
    return std::nullopt;
  }

  int layer_index(std::string_view name) const {
    if (auto i = find_layer(name)) return *i;
    throw Error(ErrorKind::Configuration, "unknown layer '" + std::string(name) + "'");
  }

  const LayerSpec& layer(int i) const { return layers.at(static_cast<std::size_t>(i)); }

  void validate() const {
    if (layers.empty()) throw Error(ErrorKind::Configuration, "technology has no layers");
    if (!(vdd_nominal > 0.0)) throw Error(ErrorKind::Configuration, "vdd_nominal must be > 0");
    if (!(ir_limit > 0.0 && ir_limit < vdd_nominal))
      throw Error(ErrorKind::Configuration, "ir_limit must lie in (0, vdd_nominal)");
    if (!(via_effective_width > 0.0) || !(source_attach_resistance > 0.0))
      throw Error(ErrorKind::Configuration, "via width and attach resistance must be > 0");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      if (!(l.sheet_resistance > 0.0) || !(l.track_pitch > 0.0) || !(l.via_resistance_to_next > 0.0))
        throw Error(ErrorKind::Configuration, "layer " + l.name + ": resistances and pitch must be > 0");
      if (!(l.em_limit > 0.0)) throw Error(ErrorKind::Configuration, "layer " + l.name + ": em limit must be > 0");
      if (i > 0 && layers[i - 1].direction == l.direction)
        throw Error(ErrorKind::Configuration, "layers " + layers[i - 1].name + " and " + l.name +
                                                  " share a routing direction");
    }
  }
};

struct StripePattern {
  std::string layer;
  double width = 0.0;
  double pitch = 0.0;
  double offset = 0.0;  // first centerline, measured from the die origin
};

struct PdnSpec {
  std::vector<StripePattern> layers;  // bottom to top

  void validate(const Technology& tech) const {
    if (layers.empty()) throw Error(ErrorKind::Configuration, "PDN spec lists no layers");
    int prev = -1;
    for (const auto& p : layers) {
      const int idx = tech.layer_index(p.layer);
      if (idx <= prev) throw Error(ErrorKind::Configuration, "PDN layers must be listed bottom to top");
      if (prev >= 0 && tech.layer(prev).direction == tech.layer(idx).direction)
        throw Error(ErrorKind::Configuration, "adjacent PDN layers must be orthogonal: " + p.layer);
      prev = idx;
      if (!(p.width > 0.0) || !(p.pitch > 0.0))
        throw Error(ErrorKind::Configuration, "layer " + p.layer + ": width and pitch must be > 0");
      if (!(p.width < p.pitch))
        throw Error(ErrorKind::Configuration, "layer " + p.layer + ": stripes overlap (width >= pitch)");
    }
  }
};

struct Pad {
  double x = 0.0, y = 0.0;
  std::string layer;
};

struct CurrentSource {
  double x = 0.0, y = 0.0;
  double current = 0.0;  // mA drawn from the lowest PDN layer
};

struct Net {
  std::string id;
  std::vector<Point> pins;
};

struct Design {
  Rect die;
  std::vector<Pad> pads;
  std::vector<CurrentSource> sources;
  std::vector<Net> nets;

  double total_current() const {
    double s = 0.0;
    for (const auto& src : sources) s += src.current;
    return s;
  }

  void validate(const Technology& tech) const {
    if (die.degenerate()) throw Error(ErrorKind::Configuration, "die is degenerate");
    if (pads.empty()) throw Error(ErrorKind::Configuration, "design has no pads");
    for (const auto& p : pads) {
      tech.layer_index(p.layer);
      if (!die.contains_closed({p.x, p.y})) throw Error(ErrorKind::Configuration, "pad outside die");
    }
    for (std::size_t i = 0; i < sources.size(); ++i) {
      const auto& s = sources[i];
      if (!die.contains_closed({s.x, s.y}))
        throw Error(ErrorKind::Configuration, "source " + std::to_string(i) + " outside die");
      if (!(s.current >= 0.0))
        throw Error(ErrorKind::Configuration, "source " + std::to_string(i) + " has negative current");
    }
    for (const auto& n : nets) {
      if (n.pins.size() < 2) throw Error(ErrorKind::Configuration, "net " + n.id + " has fewer than 2 pins");
      for (const auto& p : n.pins)
        if (!die.contains_closed(p)) throw Error(ErrorKind::Configuration, "net " + n.id + " pin outside die");
    }
  }
};

/// Everything a run needs from the design side, as carried by one input file.
struct DesignBundle {
  Technology technology;
  PdnSpec pdn_spec;
  Design design;

  void validate() const {
    technology.validate();
    pdn_spec.validate(technology);
    design.validate(technology);
  }
};

struct Stripe {
  int layer = 0;
  Direction direction = Direction::Horizontal;
  double coord = 0.0;  // centerline: y for horizontal, x for vertical
  double start = 0.0;  // span along the stripe
  double end = 0.0;
  double width = 0.0;

  double length() const { return end - start; }
  Point at(double along) const {
    return direction == Direction::Horizontal ? Point{along, coord} : Point{coord, along};
  }
  bool operator==(const Stripe&) const = default;
};

struct Via {
  double x = 0.0, y = 0.0;
  int lower = 0, upper = 0;
  double resistance = 0.0;
  bool operator==(const Via&) const = default;
};

struct PdnGeometry {
  std::vector<Stripe> stripes;
  std::vector<Via> vias;
  bool operator==(const PdnGeometry&) const = default;
};

}  // namespace pdnsynth
