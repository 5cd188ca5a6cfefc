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

#include "cli_harness.hpp"
#include "pdnsynth/flow.hpp"
#include "pdnsynth/report.hpp"
#include "pdnsynth/svg.hpp"
#include "pdnsynth/synthetic.hpp"

using namespace pdnsynth;
using namespace harness;
using Catch::Approx;
using nlohmann::json;

namespace {

std::string display(double base, double modified) { return format_percent(percent_delta(base, modified)); }

}  // namespace

TEST_CASE("percent delta on reference length rows", "[report]") {
  REQUIRE(display(336815.783, 315505.463) == "6.33%");
  REQUIRE(display(264770.718, 238230.718) == "10.02%");
  REQUIRE(display(114523.972, 105023.972) == "8.30%");
  REQUIRE(display(649286.5775, 597906.5775) == "7.91%");
  REQUIRE(display(159921.1195, 157821.1195) == "1.31%");
  REQUIRE(display(160059.527, 157959.527) == "1.31%");
  REQUIRE(display(117514.9265, 107894.9265) == "8.19%");
  REQUIRE(display(93.147, 78.916) == "15.28%");
  REQUIRE(display(37.675, 26.202) == "30.45%");
  REQUIRE(display(423.535, 384.095) == "9.31%");
  REQUIRE(display(274.671, 247.898) == "9.75%");
}

TEST_CASE("percent delta on rows that do not add up", "[report]") {
  // the lengths give 6.68%, not 5.99%
  REQUIRE(display(139799.8615, 130459.8615) == "6.68%");
  // a 40 um removal must not round to 0.00%
  REQUIRE(*percent_delta(7357.763, 7317.763) == Approx(0.54365).margin(1e-5));
  REQUIRE(display(7357.763, 7317.763) == "0.54%");
}

TEST_CASE("percent delta edge cases", "[report]") {
  for (double b : {1e-9, 0.5, 7.0, 123456.789, -4.0}) REQUIRE(*percent_delta(b, b) == 0.0);
  REQUIRE(display(5.0, 5.0) == "0.00%");
  REQUIRE_FALSE(percent_delta(0.0, 3.0));
  REQUIRE(display(0.0, 3.0) == "n/a");
  REQUIRE(display(100.0, 112.5) == "-12.50%");
  REQUIRE(display(1.0, 0.99995) == "0.01%");  // half rounds up
  const auto a = *percent_delta(80.0, 60.0);
  const auto b = *percent_delta(60.0, 80.0);
  REQUIRE(a > 0.0);
  REQUIRE(b < 0.0);
}

TEST_CASE("nearest-rank distribution", "[report]") {
  const auto d = ir_distribution({30, 10, 50, 20, 40});
  REQUIRE(d.max == 50.0);
  REQUIRE(d.median == 30.0);
  REQUIRE(d.p90 == 50.0);
  REQUIRE(d.count == 5);
  const auto e = ir_distribution({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  REQUIRE(e.median == 5.0);
  REQUIRE(e.p90 == 9.0);
  REQUIRE(ir_distribution({}).count == 0);
}

TEST_CASE("ir table layout", "[report]") {
  IrDistributionReport r;
  r.before = {64.4, 24.1, 35.0, 10};
  r.after = {64.3, 24.8, 35.5, 10};
  std::ostringstream os;
  write_ir_table(os, r);
  REQUIRE(os.str() ==
          "IR (mV)         Base  Modified     Delta\n"
          "MAX             64.4      64.3     0.16%\n"
          "MEDIAN          24.1      24.8    -2.90%\n"
          "PTILE90         35.0      35.5    -1.43%\n");
}

TEST_CASE("length report and table", "[report]") {
  DesignBundle b = default_bundle({}, 7);
  b.design.sources.clear();
  b.design.nets.clear();
  const auto pdn = generate_uniform_pdn(b);
  const auto same = pdn_length_report(pdn, pdn, b.technology);
  REQUIRE(same.rows.size() == 6);
  for (const auto& row : same.rows) REQUIRE(format_percent(row.delta) == "0.00%");
  REQUIRE(same.total.base == Approx(175000.0));

  auto cut = pdn;
  cut.stripes.erase(cut.stripes.begin());  // one full M2 stripe
  const auto r = pdn_length_report(pdn, cut, b.technology);
  REQUIRE(r.rows[0].layer == "M2");
  REQUIRE(r.rows[0].base - r.rows[0].modified == 1000.0);
  std::ostringstream os;
  write_length_table(os, r);
  const std::string txt = os.str();
  REQUIRE(txt.rfind("Layer          Base (um)   Modified (um)     Delta\n", 0) == 0);
  REQUIRE(txt.find("M2             50000.000       49000.000     2.00%\n") != std::string::npos);
  REQUIRE(txt.find("total         175000.000      174000.000     0.57%\n") != std::string::npos);

  std::ostringstream csv;
  IrDistributionReport ir;
  write_report_csv(csv, r, ir);
  REQUIRE(csv.str().find("length,M2,50000.000000,49000.000000,2.000000\n") != std::string::npos);
  REQUIRE(csv.str().find("ir,MAX,0.000000,0.000000,n/a\n") != std::string::npos);
}

TEST_CASE("length report rejects different stacks", "[report]") {
  DesignBundle b = default_bundle({}, 7);
  const auto pdn = generate_uniform_pdn(b);
  PdnGeometry other = pdn;
  std::erase_if(other.stripes, [](const Stripe& s) { return s.layer == 5; });
  try {
    (void)pdn_length_report(pdn, other, b.technology);
    FAIL("expected an error");
  } catch (const Error& e) {
    REQUIRE(e.kind() == ErrorKind::Structural);
  }
}

TEST_CASE("report deltas equal the plan's removals", "[report]") {
  const auto cfg = io::config_from_json(json::object());
  SyntheticParams p;
  io::merge_synthetic(p, json::parse(kSmallGenConfig).at("synthetic"));
  const auto b = default_bundle(p, 3);
  const auto pdn = generate_uniform_pdn(b);
  const auto r = synthesize(b, pdn, cfg);
  REQUIRE(r.plan.segment_count() > 0);
  const auto rep = pdn_length_report(pdn, r.geometry, b.technology);
  const auto removed = r.plan.removed_by_layer();
  for (std::size_t l = 0; l < rep.rows.size(); ++l) {
    const auto it = removed.find(static_cast<int>(l));
    const double want = it == removed.end() ? 0.0 : it->second;
    REQUIRE(rep.rows[l].base - rep.rows[l].modified == Approx(want).margin(1e-9));
    REQUIRE(*rep.rows[l].delta == Approx(want / rep.rows[l].base * 100.0).margin(1e-12));
  }
}

TEST_CASE("identical solutions give identical rows", "[report]") {
  const auto b = default_bundle({}, 7);
  const auto sol = solve(build_system(generate_uniform_pdn(b), b.design, b.technology));
  const auto r = ir_distribution_report(sol, sol);
  REQUIRE(r.before.max == r.after.max);
  REQUIRE(r.before.median == r.after.median);
  REQUIRE(r.before.p90 == r.after.p90);
  REQUIRE(r.before.count == b.design.sources.size());
  std::ostringstream os;
  write_ir_histogram_csv(os, r);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "bin_lo_mV,bin_hi_mV,before,after");
  std::size_t total = 0;
  while (std::getline(in, line)) {
    const auto c2 = line.rfind(',');
    const auto c1 = line.rfind(',', c2 - 1);
    REQUIRE(line.substr(c1 + 1, c2 - c1 - 1) == line.substr(c2 + 1));
    total += std::stoul(line.substr(c2 + 1));
  }
  REQUIRE(total == b.design.sources.size());
}

TEST_CASE("heat scale steps", "[report]") {
  REQUIRE(heat_step(0.0, 62.0) == 0);
  REQUIRE(heat_step(6.19, 62.0) == 0);
  REQUIRE(heat_step(6.2, 62.0) == 1);
  REQUIRE(heat_step(61.9, 62.0) == 9);
  REQUIRE(heat_step(200.0, 62.0) == 9);
  REQUIRE(heat_step(-1.0, 62.0) == 0);
  const auto g = partition({0, 0, 40, 20}, 20.0);
  std::vector<WindowMetrics> m(2);
  m[0].window_max = 10.0;
  m[1].window_max = 70.0;
  std::ostringstream os;
  write_ir_heatmap_svg(os, g, m, 62.0);
  const std::string s = os.str();
  REQUIRE(s.rfind("<svg", 0) == 0);
  REQUIRE(s.find(kHeatPalette[1]) != std::string::npos);
  REQUIRE(s.find(kHeatPalette[9]) != std::string::npos);
  REQUIRE(s.find("</svg>") != std::string::npos);
}

TEST_CASE("cli gen is deterministic", "[cli]") {
  TempDir d("gen");
  REQUIRE(run_cli({"gen", "--seed", "7", "--out", d / "a"}).code == 0);
  REQUIRE(run_cli({"gen", "--seed", "7", "--out", d / "b"}).code == 0);
  REQUIRE(run_cli({"gen", "--seed", "8", "--out", d / "c"}).code == 0);
  const auto a = slurp(d / "a/design.json");
  REQUIRE_FALSE(a.empty());
  REQUIRE(a == slurp(d / "b/design.json"));
  REQUIRE(a != slurp(d / "c/design.json"));
  const auto m = json::parse(slurp(d / "a/manifest.json"));
  REQUIRE(m["seed"] == 7);
  REQUIRE(m["outputs"]["design"] == "design.json");
}

TEST_CASE("cli synthesize then verify", "[cli]") {
  TempDir d("synth");
  spit(d / "gen.json", kSmallGenConfig);
  REQUIRE(run_cli({"gen", "--config", d / "gen.json", "--out", d / "g"}).code == 0);
  const auto s = run_cli({"synthesize", "--design", d / "g/design.json", "--out", d / "s"});
  REQUIRE(s.code == 0);
  REQUIRE(s.out.find("segments removed") != std::string::npos);
  for (const char* f : {"design.json", "pdn_base.json", "pdn_final.json", "ir_base.csv", "ir_final.csv", "em_base.csv",
                        "em_final.csv", "congestion.csv", "windows.csv", "plan.json", "iterations.jsonl",
                        "manifest.json", "report.csv", "report.txt", "ir_histogram.csv", "heatmap_ir.svg",
                        "heatmap_congestion.svg"})
    REQUIRE(fs::exists(d / (std::string("s/") + f)));
  const auto m = json::parse(slurp(d / "s/manifest.json"));
  for (const auto& [key, name] : m["outputs"].items())
    REQUIRE(fs::exists(d.path() / "s" / name.get<std::string>()));
  REQUIRE(m["stages"].size() == 3);

  const auto v = run_cli({"verify", "--design", d / "g/design.json", "--pdn", d / "s/pdn_final.json"});
  REQUIRE(v.code == 0);
  REQUIRE(v.out.rfind("PASS", 0) == 0);

  // the same geometry against a limit it cannot meet
  auto design = json::parse(slurp(d / "g/design.json"));
  design["technology"]["ir_limit"] = 10.0;
  spit(d / "tight.json", design.dump());
  const auto f = run_cli({"verify", "--design", d / "tight.json", "--pdn", d / "s/pdn_final.json"});
  REQUIRE(f.code == 1);
  REQUIRE(f.out.rfind("FAIL", 0) == 0);
}

TEST_CASE("cli report base against base", "[cli]") {
  TempDir d("report");
  spit(d / "gen.json", kSmallGenConfig);
  REQUIRE(run_cli({"gen", "--config", d / "gen.json", "--out", d / "g"}).code == 0);
  REQUIRE(run_cli({"analyze", "--design", d / "g/design.json", "--out", d / "a"}).code == 0);
  const auto r = run_cli({"report", "--base", d / "a/manifest.json", "--final", d / "a/manifest.json", "--out", d / "r"});
  REQUIRE(r.code == 0);
  const auto csv = slurp(d / "r/report.csv");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    REQUIRE(line.substr(line.rfind(',') + 1) == "0.000000");
    ++rows;
  }
  REQUIRE(rows == 10);  // six layers, total, three IR rows
  REQUIRE(slurp(d / "r/report.txt").find("%") != std::string::npos);
}

TEST_CASE("cli flags override the config file", "[cli]") {
  TempDir d("flags");
  spit(d / "gen.json", kSmallGenConfig);
  REQUIRE(run_cli({"gen", "--config", d / "gen.json", "--out", d / "g"}).code == 0);
  spit(d / "flow.json", R"({"synthesis": {"alpha": 0.3, "beta": 1.0}, "unit_window": 40})");
  REQUIRE(run_cli({"analyze", "--design", d / "g/design.json", "--config", d / "flow.json", "--alpha", "0.6", "--seed",
               "99", "--out", d / "a"})
              .code == 0);
  const auto m = json::parse(slurp(d / "a/manifest.json"));
  REQUIRE(m["config"]["synthesis"]["alpha"] == 0.6);
  REQUIRE(m["config"]["synthesis"]["beta"] == 1.0);
  REQUIRE(m["config"]["unit_window"] == 40.0);
  REQUIRE(m["seed"] == 99);
}

TEST_CASE("cli input errors exit 2 with a prefix", "[cli]") {
  TempDir d("errors");
  auto missing = run_cli({"analyze", "--design", d / "nope.json", "--out", d / "a"});
  REQUIRE(missing.code == 2);
  REQUIRE(missing.err.rfind("error[input]:", 0) == 0);

  spit(d / "bad.json", R"({"seed": 1, "synthetic": {"die_widht": 10}})");
  auto typo = run_cli({"gen", "--config", d / "bad.json", "--out", d / "g"});
  REQUIRE(typo.code == 2);
  REQUIRE(typo.err.find("die_widht") != std::string::npos);

  auto usage = run_cli({"analyze", "--bogus"});
  REQUIRE(usage.code == 2);
  REQUIRE(usage.err.rfind("error[usage]:", 0) == 0);

  spit(d / "gen.json", kSmallGenConfig);
  REQUIRE(run_cli({"gen", "--config", d / "gen.json", "--out", d / "g"}).code == 0);
  auto alpha = run_cli({"analyze", "--design", d / "g/design.json", "--alpha", "-1", "--out", d / "a"});
  REQUIRE(alpha.code == 2);
  REQUIRE(alpha.err.rfind("error[config]:", 0) == 0);

  auto nopdn = run_cli({"verify", "--design", d / "g/design.json"});
  REQUIRE(nopdn.code == 2);

  auto design = json::parse(slurp(d / "g/design.json"));
  design["technology"]["ir_limit"] = 10.0;
  spit(d / "tight.json", design.dump());
  auto pre = run_cli({"synthesize", "--design", d / "tight.json", "--out", d / "s"});
  REQUIRE(pre.code == 2);
  REQUIRE(pre.err.rfind("error[precondition]:", 0) == 0);
}

TEST_CASE("cli replay reproduces artifacts", "[cli]") {
  TempDir d("replay");
  spit(d / "gen.json", kSmallGenConfig);
  REQUIRE(run_cli({"gen", "--config", d / "gen.json", "--out", d / "g"}).code == 0);
  REQUIRE(run_cli({"replay", "--manifest", d / "g/manifest.json", "--out", d / "g2"}).code == 0);
  REQUIRE(slurp(d / "g/design.json") == slurp(d / "g2/design.json"));

  REQUIRE(run_cli({"synthesize", "--design", d / "g/design.json", "--beta", "3", "--out", d / "s"}).code == 0);
  REQUIRE(run_cli({"replay", "--manifest", d / "s/manifest.json", "--out", d / "s2"}).code == 0);
  int compared = 0;
  for (const auto& e : fs::directory_iterator(d.path() / "s")) {
    const auto name = e.path().filename().string();
    if (name == "manifest.json") continue;
    REQUIRE(slurp(e.path().string()) == slurp((d.path() / "s2" / name).string()));
    ++compared;
  }
  REQUIRE(compared >= 16);
  REQUIRE(run_cli({"replay", "--manifest", d / "s/manifest.json", "--out", d / "s"}).code == 2);
}
