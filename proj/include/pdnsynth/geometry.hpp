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
#include <compare>
#include <string_view>

namespace pdnsynth {

enum class Direction { Horizontal, Vertical };

inline std::string_view to_string(Direction d) {
  return d == Direction::Horizontal ? "horizontal" : "vertical";
}

inline Direction orthogonal(Direction d) {
  return d == Direction::Horizontal ? Direction::Vertical : Direction::Horizontal;
}

struct Point {
  double x = 0.0;
  double y = 0.0;
  auto operator<=>(const Point&) const = default;
};

inline double manhattan(const Point& a, const Point& b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

// Axis-aligned rectangle, um. Containment is half-open on the high side
// except along an edge that coincides with the enclosing die boundary.
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool degenerate() const { return !(x1 > x0) || !(y1 > y0); }

  bool contains_closed(const Point& p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }

  bool contains(const Point& p, const Rect& die) const {
    const bool in_x = p.x >= x0 && (p.x < x1 || (x1 >= die.x1 && p.x <= x1));
    const bool in_y = p.y >= y0 && (p.y < y1 || (y1 >= die.y1 && p.y <= y1));
    return in_x && in_y;
  }

  bool contains(const Rect& r) const {
    return r.x0 >= x0 && r.x1 <= x1 && r.y0 >= y0 && r.y1 <= y1;
  }

  Rect expanded(double d) const { return {x0 - d, y0 - d, x1 + d, y1 + d}; }

  Rect clipped(const Rect& c) const {
    return {std::max(x0, c.x0), std::max(y0, c.y0), std::min(x1, c.x1), std::min(y1, c.y1)};
  }

  bool operator==(const Rect&) const = default;
};

}  // namespace pdnsynth
