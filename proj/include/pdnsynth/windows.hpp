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

#include <cmath>
#include <vector>

#include "pdnsynth/error.hpp"
#include "pdnsynth/geometry.hpp"

namespace pdnsynth {

/// Unit-size windows tiling the die from its origin, row-major (row = y).
/// The last row and column may be partial.
struct WindowGrid {
  Rect die;
  double unit = 20.0;
  int rows = 0;
  int cols = 0;
  bool degenerate = false;  // unit larger than a die extent

  int size() const { return rows * cols; }
  int index(int row, int col) const { return row * cols + col; }
  int row_of(int index) const { return index / cols; }
  int col_of(int index) const { return index % cols; }

  Rect window(int row, int col) const {
    return Rect{die.x0 + col * unit, die.y0 + row * unit, std::min(die.x1, die.x0 + (col + 1) * unit),
                std::min(die.y1, die.y0 + (row + 1) * unit)};
  }
  Rect window(int index) const { return window(row_of(index), col_of(index)); }

  /// Window holding \p p, or -1 when the point lies off the grid.
  int locate(const Point& p) const {
    if (!die.contains_closed(p)) return -1;
    const int c = std::min(cols - 1, static_cast<int>(std::floor((p.x - die.x0) / unit)));
    const int r = std::min(rows - 1, static_cast<int>(std::floor((p.y - die.y0) / unit)));
    return index(r, c);
  }
};

inline WindowGrid partition(const Rect& die, double unit) {
  if (!(unit > 0.0)) throw Error(ErrorKind::Configuration, "window unit must be > 0");
  if (die.degenerate()) throw Error(ErrorKind::Configuration, "die is degenerate");
  WindowGrid g;
  g.die = die;
  g.unit = unit;
  auto count = [unit](double extent) {
    const double q = extent / unit;
    const double r = std::round(q);
    // guard exact multiples against representation error
    return std::max(1, static_cast<int>(std::abs(q - r) < 1e-9 ? r : std::ceil(q)));
  };
  g.cols = count(die.width());
  g.rows = count(die.height());
  g.degenerate = unit > die.width() || unit > die.height();
  return g;
}

/// \p window grown by \p step on all four sides, clipped to \p die.
inline Rect guard_band(const Rect& window, const Rect& die, double step) {
  if (step < 0.0) throw Error(ErrorKind::Configuration, "guard-band step must be >= 0");
  return window.expanded(step).clipped(die);
}

inline Rect guard_band(const WindowGrid& grid, int index, double step) {
  return guard_band(grid.window(index), grid.die, step);
}

}  // namespace pdnsynth
