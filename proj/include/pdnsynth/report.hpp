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
#include <ostream>
#include <string>
#include <vector>

#include "pdnsynth/design.hpp"
#include "pdnsynth/error.hpp"
#include "pdnsynth/ir/solver.hpp"
#include "pdnsynth/numeric.hpp"
#include "pdnsynth/pdn_geometry.hpp"

namespace pdnsynth {

/// (base - modified) / base * 100, unrounded. Undefined for a zero base.
inline std::optional<double> percent_delta(double base, double modified) {
  if (base == 0.0 || std::isnan(base) || std::isnan(modified)) return std::nullopt;
  return (base - modified) / base * 100.0;
}

/// Two-decimal display of a delta, e.g. "6.33%"; "n/a" when undefined.
inline std::string format_percent(const std::optional<double>& pct) {
  if (!pct) return "n/a";
  return fixed(round_half_up(*pct, 2), 2) + "%";
}

struct IrDistribution {
  double max = 0.0;     // mV
  double median = 0.0;  // nearest rank
  double p90 = 0.0;     // nearest rank
  std::size_t count = 0;
};

inline IrDistribution ir_distribution(const std::vector<double>& drops) {
  IrDistribution d;
  d.count = drops.size();
  if (drops.empty()) return d;
  d.max = *std::max_element(drops.begin(), drops.end());
  d.median = nearest_rank(drops, 0.5);
  d.p90 = nearest_rank(drops, 0.9);
  return d;
}

struct IrDistributionReport {
  IrDistribution before, after;
  std::vector<double> before_drops, after_drops;  // per source, mV
};

/// MAX / MEDIAN / PTILE90 over per-source drops of two solutions of one design.
inline IrDistributionReport ir_distribution_report(const IrSolution& before, const IrSolution& after) {
  IrDistributionReport r;
  r.before_drops = before.source_drops();
  r.after_drops = after.source_drops();
  if (r.before_drops.size() != r.after_drops.size())
    throw Error(ErrorKind::Structural, "IR solutions cover different source sets");
  r.before = ir_distribution(r.before_drops);
  r.after = ir_distribution(r.after_drops);
  return r;
}

/// Histogram of per-source drops, shared bins for both solutions.
inline void write_ir_histogram_csv(std::ostream& os, const IrDistributionReport& r, double bin_mV = 1.0) {
  if (!(bin_mV > 0.0)) throw Error(ErrorKind::Configuration, "histogram bin must be > 0");
  double hi = 0.0;
  for (double d : r.before_drops) hi = std::max(hi, d);
  for (double d : r.after_drops) hi = std::max(hi, d);
  const auto bins = static_cast<std::size_t>(std::floor(hi / bin_mV)) + 1;
  std::vector<std::size_t> b(bins, 0), a(bins, 0);
  auto bin_of = [&](double d) { return std::min(bins - 1, static_cast<std::size_t>(std::max(0.0, std::floor(d / bin_mV)))); };
  for (double d : r.before_drops) ++b[bin_of(d)];
  for (double d : r.after_drops) ++a[bin_of(d)];
  os << "bin_lo_mV,bin_hi_mV,before,after\n";
  for (std::size_t i = 0; i < bins; ++i)
    os << fixed(static_cast<double>(i) * bin_mV, 3) << ',' << fixed(static_cast<double>(i + 1) * bin_mV, 3) << ','
       << b[i] << ',' << a[i] << '\n';
}

struct LengthRow {
  std::string layer;
  double base = 0.0;
  double modified = 0.0;
  std::optional<double> delta;  // percent, unrounded
};

struct PdnLengthReport {
  std::vector<LengthRow> rows;  // bottom to top
  LengthRow total;
};

/// Per-layer PDN length before and after, with a totals row.
inline PdnLengthReport pdn_length_report(const PdnGeometry& before, const PdnGeometry& after, const Technology& tech) {
  const auto b = pdn_length_by_layer(before);
  const auto a = pdn_length_by_layer(after);
  std::vector<int> lb, la;
  for (const auto& [l, v] : b) lb.push_back(l);
  for (const auto& [l, v] : a) la.push_back(l);
  if (lb != la) throw Error(ErrorKind::Structural, "geometries use different layer stacks");
  PdnLengthReport r;
  ExactSum tb, ta;
  for (int l : lb) {
    const double x = b.at(l), y = a.at(l);
    r.rows.push_back({tech.layer(l).name, x, y, percent_delta(x, y)});
    tb.add(x);
    ta.add(y);
  }
  r.total = {"total", tb.value(), ta.value(), percent_delta(tb.value(), ta.value())};
  return r;
}

namespace detail {

inline std::string pad_left(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}
inline std::string pad_right(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

inline std::string raw(const std::optional<double>& v) { return v ? fixed(*v, 6) : "n/a"; }

}  // namespace detail

/// Length table in text form: layer, base, modified, delta.
inline void write_length_table(std::ostream& os, const PdnLengthReport& r) {
  using detail::pad_left;
  using detail::pad_right;
  os << pad_right("Layer", 8) << pad_left("Base (um)", 16) << pad_left("Modified (um)", 16) << pad_left("Delta", 10)
     << '\n';
  auto row = [&](const LengthRow& x) {
    os << pad_right(x.layer, 8) << pad_left(fixed(round_half_up(x.base, 3), 3), 16)
       << pad_left(fixed(round_half_up(x.modified, 3), 3), 16) << pad_left(format_percent(x.delta), 10) << '\n';
  };
  for (const auto& x : r.rows) row(x);
  row(r.total);
}

/// IR rows in text form: metric, before, after, delta.
inline void write_ir_table(std::ostream& os, const IrDistributionReport& r) {
  using detail::pad_left;
  using detail::pad_right;
  os << pad_right("IR (mV)", 10) << pad_left("Base", 10) << pad_left("Modified", 10) << pad_left("Delta", 10) << '\n';
  auto row = [&](const char* name, double b, double a) {
    os << pad_right(name, 10) << pad_left(fixed(round_half_up(b, 1), 1), 10)
       << pad_left(fixed(round_half_up(a, 1), 1), 10) << pad_left(format_percent(percent_delta(b, a)), 10) << '\n';
  };
  row("MAX", r.before.max, r.after.max);
  row("MEDIAN", r.before.median, r.after.median);
  row("PTILE90", r.before.p90, r.after.p90);
}

/// Both tables as CSV with unrounded values.
inline void write_report_csv(std::ostream& os, const PdnLengthReport& len, const IrDistributionReport& ir) {
  os << "section,item,base,modified,delta_pct\n";
  for (const auto& x : len.rows)
    os << "length," << x.layer << ',' << fixed(x.base, 6) << ',' << fixed(x.modified, 6) << ',' << detail::raw(x.delta)
       << '\n';
  os << "length,total," << fixed(len.total.base, 6) << ',' << fixed(len.total.modified, 6) << ','
     << detail::raw(len.total.delta) << '\n';
  auto row = [&](const char* name, double b, double a) {
    os << "ir," << name << ',' << fixed(b, 6) << ',' << fixed(a, 6) << ',' << detail::raw(percent_delta(b, a)) << '\n';
  };
  row("MAX", ir.before.max, ir.after.max);
  row("MEDIAN", ir.before.median, ir.after.median);
  row("PTILE90", ir.before.p90, ir.after.p90);
}

inline void write_report_text(std::ostream& os, const PdnLengthReport& len, const IrDistributionReport& ir) {
  os << "PDN length by layer\n";
  write_length_table(os, len);
  os << "\nIR drop over current sources\n";
  write_ir_table(os, ir);
}

}  // namespace pdnsynth
