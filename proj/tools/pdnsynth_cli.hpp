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

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pdnsynth/pdnsynth.hpp"

namespace pdnsynth::cli {

namespace fs = std::filesystem;
using io::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolations = 1;
inline constexpr int kExitInput = 2;

struct Options {
  std::string design, config, out, pdn, manifest, base, final_manifest;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha, beta, unit_window, guard_band, tol;
  bool brute_force = false;
};

class Stages {
 public:
  template <typename Fn>
  auto run(const std::string& name, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    struct Record {
      Stages* self;
      std::string name;
      std::chrono::steady_clock::time_point t0;
      ~Record() {
        self->log_.push_back(
            {{"name", name}, {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}});
      }
    } rec{this, name, t0};
    return fn();
  }
  json to_json() const { return log_; }

 private:
  json log_ = json::array();
};

class Run {
 public:
  Run(std::string command, const std::string& out) : command_(std::move(command)), out_(out) {
    if (out.empty()) throw Error(ErrorKind::Input, "--out is required");
    std::error_code ec;
    fs::create_directories(out_, ec);
    if (ec) throw Error(ErrorKind::Input, "cannot create '" + out + "': " + ec.message());
  }

  std::string path(const std::string& name) const { return (out_ / name).string(); }

  void text(const std::string& key, const std::string& name, const std::string& body) {
    io::write_text_file(path(name), body);
    outputs_[key] = name;
  }
  void json_file(const std::string& key, const std::string& name, const json& j) {
    io::write_json_file(path(name), j);
    outputs_[key] = name;
  }
  template <typename Fn>
  void stream(const std::string& key, const std::string& name, Fn&& fn) {
    std::ostringstream os;
    fn(os);
    text(key, name, os.str());
  }

  Stages stages;
  json inputs = json::object();
  json config = json::object();
  json seed = nullptr;

  void finish() {
    json m = {{"tool", "pdnsynth"},      {"version", kVersion},     {"command", command_},
              {"inputs", inputs},        {"seed", seed},            {"config", config},
              {"outputs", outputs_},     {"stages", stages.to_json()}};
    io::write_json_file(path("manifest.json"), m);
  }

 private:
  std::string command_;
  fs::path out_;
  json outputs_ = json::object();
};

inline FlowConfig load_config(const Options& o) {
  FlowConfig c;
  if (!o.config.empty()) io::merge_config(c, io::read_json_file(o.config));
  if (o.alpha) c.synthesis.alpha = *o.alpha;
  if (o.beta) c.synthesis.beta = *o.beta;
  if (o.unit_window) c.unit_window = *o.unit_window;
  if (o.guard_band) c.guard_band = *o.guard_band;
  if (o.tol) c.solver.tol = *o.tol;
  if (o.brute_force) c.synthesis.brute_force = true;
  if (!(c.unit_window > 0.0)) throw Error(ErrorKind::Configuration, "unit window must be > 0");
  if (!(c.solver.tol > 0.0 && c.solver.tol < 1.0)) throw Error(ErrorKind::Configuration, "tol must lie in (0, 1)");
  c.synthesis.validate();
  return c;
}

inline DesignBundle load_bundle(const std::string& path) {
  if (path.empty()) throw Error(ErrorKind::Input, "--design is required");
  return io::bundle_from_json(io::read_json_file(path));
}

inline PdnGeometry load_pdn(const std::string& path, const DesignBundle& b) {
  if (path.empty()) return generate_uniform_pdn(b);
  auto g = io::geometry_from_json(io::read_json_file(path), b.technology);
  const auto problems = check_geometry(g, b.design.die, b.technology);
  if (!problems.empty()) throw Error(ErrorKind::Input, "'" + path + "': " + problems.front());
  return g;
}

inline void write_analysis(Run& run, const DesignBundle& b, const Analysis& a, const std::string& tag) {
  const auto& tech = b.technology;
  run.stream("ir_" + tag, "ir_" + tag + ".csv", [&](std::ostream& os) { write_ir_csv(os, a.ir, tech); });
  run.stream("em_" + tag, "em_" + tag + ".csv",
             [&](std::ostream& os) { write_em_csv(os, a.verification.em, tech); });
  run.stream("congestion", "congestion.csv", [&](std::ostream& os) { write_congestion_csv(os, a.congestion); });
  run.stream("windows", "windows.csv",
             [&](std::ostream& os) { write_windows_csv(os, a.windows, a.metrics, a.safety, a.candidates); });
  run.stream("heatmap_congestion", "heatmap_congestion.svg",
             [&](std::ostream& os) { write_congestion_heatmap_svg(os, a.congestion); });
}

inline void write_ir_heatmap(Run& run, const DesignBundle& b, const IrSolution& sol, const FlowConfig& cfg) {
  const auto grid = partition(b.design.die, cfg.unit_window);
  const auto metrics = window_metrics(sol, grid, nullptr, cfg.safety(b.technology.ir_limit));
  run.stream("heatmap_ir", "heatmap_ir.svg",
             [&](std::ostream& os) { write_ir_heatmap_svg(os, grid, metrics, b.technology.ir_limit); });
}

inline void write_reports(Run& run, const DesignBundle& b, const PdnGeometry& base, const PdnGeometry& final_pdn,
                          const IrSolution& ir_base, const IrSolution& ir_final, std::ostream& out) {
  const auto len = pdn_length_report(base, final_pdn, b.technology);
  const auto ir = ir_distribution_report(ir_base, ir_final);
  run.stream("report_csv", "report.csv", [&](std::ostream& os) { write_report_csv(os, len, ir); });
  std::ostringstream txt;
  write_report_text(txt, len, ir);
  run.text("report_txt", "report.txt", txt.str());
  run.stream("ir_histogram", "ir_histogram.csv", [&](std::ostream& os) { write_ir_histogram_csv(os, ir); });
  out << txt.str();
}

// ---- subcommands ----

inline int cmd_gen(const Options& o, const json& cfg_snapshot, std::ostream& out) {
  SyntheticParams p;
  json file = json::object();
  if (!o.config.empty()) file = io::read_json_file(o.config);
  if (!cfg_snapshot.is_null()) file = cfg_snapshot;
  if (file.contains("synthetic")) io::merge_synthetic(p, file.at("synthetic"));
  std::uint64_t seed = 7;
  if (file.contains("seed")) seed = file.at("seed").get<std::uint64_t>();
  if (o.seed) seed = *o.seed;
  Run run("gen", o.out);
  run.seed = seed;
  run.config = {{"seed", seed}, {"synthetic", io::to_json(p)}};
  const DesignBundle b = run.stages.run("generate", [&] { return default_bundle(p, seed); });
  run.json_file("design", "design.json", io::to_json(b));
  run.finish();
  out << "generated " << b.design.sources.size() << " sources, " << b.design.nets.size() << " nets, "
      << b.design.pads.size() << " pads (seed " << seed << ")\n";
  return kExitOk;
}

inline void copy_inputs(Run& run, const Options& o, const DesignBundle& b, const std::optional<PdnGeometry>& pdn) {
  run.inputs = {{"design", o.design}, {"config", o.config.empty() ? json(nullptr) : json(o.config)},
                {"pdn", o.pdn.empty() ? json(nullptr) : json(o.pdn)}};
  if (o.seed) run.seed = *o.seed;
  run.json_file("design", "design.json", io::to_json(b));
  if (pdn) run.json_file("pdn_input", "pdn_input.json", io::to_json(*pdn, b.technology));
}

inline int cmd_analyze(const Options& o, std::ostream& out) {
  const FlowConfig cfg = load_config(o);
  const DesignBundle b = load_bundle(o.design);
  const PdnGeometry pdn = load_pdn(o.pdn, b);
  Run run("analyze", o.out);
  run.config = io::to_json(cfg);
  copy_inputs(run, o, b, o.pdn.empty() ? std::nullopt : std::optional<PdnGeometry>(pdn));
  run.json_file("pdn_base", "pdn_base.json", io::to_json(pdn, b.technology));
  const Analysis a = run.stages.run("analyze", [&] { return analyze(b, pdn, cfg); });
  write_analysis(run, b, a, "base");
  write_ir_heatmap(run, b, a.ir, cfg);
  run.finish();
  out << "analyze: " << a.verification.summary() << "; " << a.candidates.size() << " candidate windows of "
      << a.windows.size() << "\n";
  return kExitOk;
}

inline int cmd_synthesize(const Options& o, std::ostream& out) {
  const FlowConfig cfg = load_config(o);
  const DesignBundle b = load_bundle(o.design);
  const PdnGeometry pdn = load_pdn(o.pdn, b);
  Run run("synthesize", o.out);
  run.config = io::to_json(cfg);
  copy_inputs(run, o, b, o.pdn.empty() ? std::nullopt : std::optional<PdnGeometry>(pdn));
  run.json_file("pdn_base", "pdn_base.json", io::to_json(pdn, b.technology));
  const Analysis a = run.stages.run("analyze", [&] { return analyze(b, pdn, cfg); });
  write_analysis(run, b, a, "base");
  const SynthesisResult r = run.stages.run("synthesize", [&] { return synthesize(b, pdn, cfg, a); });
  const IrSolution ir_final = run.stages.run("verify", [&] { return solve(build_system(r.geometry, b.design, b.technology), cfg.solver); });
  run.json_file("pdn_final", "pdn_final.json", io::to_json(r.geometry, b.technology));
  run.stream("ir_final", "ir_final.csv", [&](std::ostream& os) { write_ir_csv(os, ir_final, b.technology); });
  run.stream("em_final", "em_final.csv",
             [&](std::ostream& os) { write_em_csv(os, em_check(ir_final, b.technology), b.technology); });
  run.json_file("plan", "plan.json", io::to_json(r.plan, a.windows, b.technology));
  run.stream("iterations", "iterations.jsonl", [&](std::ostream& os) {
    for (const auto& rec : r.log) os << io::to_json(rec).dump() << '\n';
  });
  write_ir_heatmap(run, b, ir_final, cfg);
  write_reports(run, b, pdn, r.geometry, a.ir, ir_final, out);
  run.finish();
  out << "synthesize: " << r.plan.windows.size() << " windows modified, " << r.plan.segment_count()
      << " segments removed, " << r.iterations << " iteration(s)" << (r.rolled_back ? ", rolled back" : "") << "; "
      << r.verification.summary() << "\n";
  return kExitOk;
}

inline int cmd_verify(const Options& o, std::ostream& out) {
  const FlowConfig cfg = load_config(o);
  const DesignBundle b = load_bundle(o.design);
  if (o.pdn.empty()) throw Error(ErrorKind::Input, "--pdn is required");
  const PdnGeometry pdn = load_pdn(o.pdn, b);
  const IrSolution sol = solve(build_system(pdn, b.design, b.technology), cfg.solver);
  const Verification v = verify_solution(sol, b.technology);
  if (!o.out.empty()) {
    Run run("verify", o.out);
    run.config = io::to_json(cfg);
    copy_inputs(run, o, b, pdn);
    run.stream("ir_verify", "ir_verify.csv", [&](std::ostream& os) { write_ir_csv(os, sol, b.technology); });
    run.stream("em_verify", "em_verify.csv", [&](std::ostream& os) { write_em_csv(os, v.em, b.technology); });
    run.finish();
  }
  out << (v.pass() ? "PASS: " : "FAIL: ") << v.summary() << "\n";
  return v.pass() ? kExitOk : kExitViolations;
}

struct ManifestView {
  fs::path dir;
  json doc;

  std::string output(const std::string& key) const {
    if (!doc.contains("outputs") || !doc["outputs"].contains(key)) return {};
    return (dir / doc["outputs"][key].get<std::string>()).string();
  }
};

inline ManifestView load_manifest(const std::string& path) {
  if (path.empty()) throw Error(ErrorKind::Input, "manifest path is required");
  ManifestView m{fs::path(path).parent_path(), io::read_json_file(path)};
  if (!m.doc.contains("command") || !m.doc.contains("config"))
    throw Error(ErrorKind::Input, "'" + path + "' is not a pdnsynth manifest");
  return m;
}

inline int cmd_report(const Options& o, std::ostream& out) {
  const ManifestView base = load_manifest(o.base);
  const ManifestView fin = load_manifest(o.final_manifest);
  const DesignBundle b = load_bundle(base.output("design"));
  auto geometry_of = [&](const ManifestView& m) {
    std::string p = m.output("pdn_final");
    if (p.empty()) p = m.output("pdn_base");
    if (p.empty()) throw Error(ErrorKind::Input, "manifest lists no PDN geometry");
    return load_pdn(p, b);
  };
  const PdnGeometry g0 = geometry_of(base);
  const PdnGeometry g1 = geometry_of(fin);
  FlowConfig cfg = io::config_from_json(base.doc.at("config"));
  Run run("report", o.out);
  run.inputs = {{"base", o.base}, {"final", o.final_manifest}};
  run.config = io::to_json(cfg);
  const IrSolution s0 = solve(build_system(g0, b.design, b.technology), cfg.solver);
  const IrSolution s1 = solve(build_system(g1, b.design, b.technology), cfg.solver);
  write_reports(run, b, g0, g1, s0, s1, out);
  run.finish();
  return kExitOk;
}

int dispatch(const std::string& command, const Options& o, std::ostream& out);

/// Re-runs the command recorded in a manifest, from the inputs copied into
/// the manifest's directory and its configuration snapshot.
inline int cmd_replay(const Options& o, std::ostream& out) {
  const ManifestView m = load_manifest(o.manifest);
  const std::string command = m.doc.at("command").get<std::string>();
  if (o.out.empty()) throw Error(ErrorKind::Input, "--out is required");
  if (fs::exists(o.out) && fs::equivalent(o.out, m.dir))
    throw Error(ErrorKind::Input, "replay output must differ from the manifest directory");
  if (command == "gen") {
    Options g;
    g.out = o.out;
    return cmd_gen(g, m.doc.at("config"), out);
  }
  fs::create_directories(o.out);
  const std::string cfg_path = (fs::path(o.out) / "replay_config.json").string();
  io::write_json_file(cfg_path, m.doc.at("config"));
  Options r;
  r.out = o.out;
  r.config = cfg_path;
  if (command == "report") {
    r.base = m.doc["inputs"]["base"].get<std::string>();
    r.final_manifest = m.doc["inputs"]["final"].get<std::string>();
  } else {
    r.design = m.output("design");
    r.pdn = m.output("pdn_input");
    if (command == "verify" && r.pdn.empty()) throw Error(ErrorKind::Input, "verify manifest lacks its PDN copy");
  }
  return dispatch(command, r, out);
}

inline int dispatch(const std::string& command, const Options& o, std::ostream& out) {
  if (command == "analyze") return cmd_analyze(o, out);
  if (command == "synthesize") return cmd_synthesize(o, out);
  if (command == "verify") return cmd_verify(o, out);
  if (command == "report") return cmd_report(o, out);
  if (command == "replay") return cmd_replay(o, out);
  if (command == "gen") return cmd_gen(o, nullptr, out);
  throw Error(ErrorKind::Input, "unknown command '" + command + "'");
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Congestion-driven non-uniform PDN synthesis", "pdnsynth"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  Options o;

  auto flow_flags = [&o](CLI::App* s) {
    s->add_option("--design", o.design, "design bundle (JSON)");
    s->add_option("--config", o.config, "flow configuration (JSON); flags override it");
    s->add_option("--out", o.out, "output directory");
    s->add_option("--pdn", o.pdn, "PDN geometry (JSON); default: uniform PDN from the design's spec");
    s->add_option("--alpha", o.alpha, "congestion weight in the reduction ratio");
    s->add_option("--beta", o.beta, "inverse-drop weight in the reduction ratio, mV");
    s->add_option("--unit-window", o.unit_window, "window edge, um");
    s->add_option("--guard-band", o.guard_band, "guard-band step, um");
    s->add_flag("--brute-force", o.brute_force, "reduce every IR-safe window at the maximum ratio");
    s->add_option("--tol", o.tol, "solver relative residual");
    s->add_option("--seed", o.seed, "random seed (recorded only)");
  };
  auto* gen = app.add_subcommand("gen", "generate the synthetic example design");
  gen->add_option("--seed", o.seed, "random seed (default 7)");
  gen->add_option("--config", o.config, "JSON with optional 'seed' and 'synthetic' sections");
  gen->add_option("--out", o.out, "output directory")->required();
  flow_flags(app.add_subcommand("analyze", "IR, EM and congestion analysis of a PDN"));
  flow_flags(app.add_subcommand("synthesize", "congestion-driven PDN reduction with verification"));
  flow_flags(app.add_subcommand("verify", "IR and EM sign-off of a PDN; exit 1 on violations"));
  auto* rep = app.add_subcommand("report", "length and IR tables from two run manifests");
  rep->add_option("--base", o.base, "manifest of the base run")->required();
  rep->add_option("--final", o.final_manifest, "manifest of the modified run")->required();
  rep->add_option("--out", o.out, "output directory")->required();
  auto* rp = app.add_subcommand("replay", "re-run a manifest into a new directory");
  rp->add_option("--manifest", o.manifest, "manifest.json of a previous run")->required();
  rp->add_option("--out", o.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error[usage]: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    return dispatch(app.get_subcommands().front()->get_name(), o, out);
  } catch (const Error& e) {
    err << "error[" << to_string(e.kind()) << "]: " << e.what() << "\n";
  } catch (const json::exception& e) {
    err << "error[input]: " << e.what() << "\n";
  } catch (const fs::filesystem_error& e) {
    err << "error[input]: " << e.what() << "\n";
  }
  return kExitInput;
}

}  // namespace pdnsynth::cli
