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
#include <array>
#include <cmath>
#include <ostream>
#include <span>
#include <string>

#include "pdnsynth/candidates.hpp"
#include "pdnsynth/congestion/map.hpp"
#include "pdnsynth/numeric.hpp"
#include "pdnsynth/windows.hpp"

namespace pdnsynth {

// Ten fixed colors, cool to hot.
inline constexpr std::array<const char*, 10> kHeatPalette{"#313695", "#4575b4", "#74add1", "#abd9e9", "#e0f3f8",
                                                          "#fee090", "#fdae61", "#f46d43", "#d73027", "#a50026"};

/// Step of \p value on a ten-step scale whose top step starts at
/// 0.9 * anchor. Values at or above the anchor land in the top step.
inline int heat_step(double value, double anchor) {
  if (!(anchor > 0.0) || !(value > 0.0)) return 0;
  return std::clamp(static_cast<int>(std::floor(value / anchor * 10.0)), 0, 9);
}

namespace detail {

inline void svg_begin(std::ostream& os, double w, double h, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(w + 140, 0) << "\" height=\"" << fixed(h + 40, 0)
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<title>" << title << "</title>\n";
  os << "<text x=\"4\" y=\"14\">" << title << "</text>\n";
}

inline void svg_legend(std::ostream& os, double x, double anchor, const char* unit) {
  for (int k = 0; k < 10; ++k) {
    const double y = 30 + (9 - k) * 18;
    os << "<rect x=\"" << fixed(x, 1) << "\" y=\"" << fixed(y, 1) << "\" width=\"14\" height=\"18\" fill=\""
       << kHeatPalette[static_cast<std::size_t>(k)] << "\"/>\n";
    os << "<text x=\"" << fixed(x + 18, 1) << "\" y=\"" << fixed(y + 13, 1) << "\">"
       << (k == 9 ? "&gt;= " : "") << fixed(anchor * k / 10.0, 2) << ' ' << unit << "</text>\n";
  }
}

}  // namespace detail

/// Per-window maximum drop, one cell per window, scale anchored at ir_limit.
inline void write_ir_heatmap_svg(std::ostream& os, const WindowGrid& grid, std::span<const WindowMetrics> metrics,
                                 double ir_limit, double cell_px = 10.0) {
  const double w = grid.cols * cell_px, h = grid.rows * cell_px;
  detail::svg_begin(os, w, h, "IR drop, window max (mV)");
  for (int r = 0; r < grid.rows; ++r)
    for (int c = 0; c < grid.cols; ++c) {
      const auto& m = metrics[static_cast<std::size_t>(grid.index(r, c))];
      // y grows downward in SVG, so row 0 is drawn at the bottom
      os << "<rect x=\"" << fixed(c * cell_px, 1) << "\" y=\"" << fixed(20 + (grid.rows - 1 - r) * cell_px, 1)
         << "\" width=\"" << fixed(cell_px, 1) << "\" height=\"" << fixed(cell_px, 1) << "\" fill=\""
         << kHeatPalette[static_cast<std::size_t>(heat_step(m.window_max, ir_limit))] << "\"/>\n";
    }
  detail::svg_legend(os, w + 10, ir_limit, "mV");
  os << "</svg>\n";
}

/// Per-gcell congestion (larger of the two directions), anchored at 1.0.
inline void write_congestion_heatmap_svg(std::ostream& os, const CongestionMap& m, double cell_px = 2.0) {
  const double w = m.nx * cell_px, h = m.ny * cell_px;
  detail::svg_begin(os, w, h, "Routing congestion, demand / capacity");
  os << "<rect x=\"0\" y=\"20\" width=\"" << fixed(w, 1) << "\" height=\"" << fixed(h, 1) << "\" fill=\""
     << kHeatPalette[0] << "\"/>\n";
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * static_cast<std::size_t>(m.nx) + static_cast<std::size_t>(i);
      const int step = heat_step(m.gcell_score(k), 1.0);
      if (step == 0) continue;  // background carries step 0
      os << "<rect x=\"" << fixed(i * cell_px, 1) << "\" y=\"" << fixed(20 + (m.ny - 1 - j) * cell_px, 1)
         << "\" width=\"" << fixed(cell_px, 1) << "\" height=\"" << fixed(cell_px, 1) << "\" fill=\""
         << kHeatPalette[static_cast<std::size_t>(step)] << "\"/>\n";
    }
  detail::svg_legend(os, w + 10, 1.0, "");
  os << "</svg>\n";
}

}  // namespace pdnsynth
