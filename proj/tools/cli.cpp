#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vcsim/config.hpp"
#include "vcsim/placement.hpp"
#include "vcsim/report.hpp"

namespace vcsim::cli {
namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string seed;
  std::string output_dir;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("-c,--config", o.config_file, "Scenario config file (key = value)");
  app->add_option("--set", o.overrides, "Override a config key, KEY=VALUE (repeatable)");
  app->add_option("--seed", o.seed, "Top-level seed");
  app->add_option("-o,--output-dir", o.output_dir, "Output directory");
}

ScenarioConfig load_config(const CommonOptions& o, const std::vector<std::string>& extra = {}) {
  KeyValueConfig kv = o.config_file.empty() ? KeyValueConfig{} : KeyValueConfig::load(o.config_file);
  for (const auto& a : o.overrides) kv.set_assignment(a);
  for (const auto& a : extra) kv.set_assignment(a);
  if (!o.seed.empty()) kv.set("seed", o.seed);
  if (!o.output_dir.empty()) kv.set("output_dir", o.output_dir);
  return ScenarioConfig::from(kv);
}

std::ofstream open_output(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw UsageError("cannot write " + p.string());
  return out;
}

SummaryLabels labels_for(const ScenarioConfig& c, std::size_t n) {
  return {n, to_string(c.topology), c.controller, c.seed};
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vehicular collision detection over an SDN backhaul: discrete-event simulator", "vcsim"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string out_file;
  std::string vehicles, duration, refine_n, refine_iters;
  bool no_cdf = false;
  std::vector<std::string> summaries;

  auto* synth = app.add_subcommand("synth", "Write a synthetic trace CSV");
  add_common(synth, common);
  synth->add_option("--out", out_file, "Trace file (default <output_dir>/trace.csv)");
  synth->add_option("--vehicles", vehicles, "Number of vehicles");
  synth->add_option("--duration", duration, "Duration in seconds");

  auto* place = app.add_subcommand("place-rsus", "Greedy RSU placement, written as an RSU CSV");
  add_common(place, common);
  place->add_option("--out", out_file, "RSU file (default <output_dir>/rsus.csv)");

  auto* runc = app.add_subcommand("run", "Simulate one placement: records.csv, summary.json, topology.json");
  add_common(runc, common);
  runc->add_flag("--no-cdf", no_cdf, "Leave the per-component samples out of summary.json");

  auto* refinec = app.add_subcommand("refine", "Detector placement refinement: refine_log.csv, best_config.txt");
  add_common(refinec, common);
  refinec->add_option("-n,--detectors", refine_n, "Number of detectors");
  refinec->add_option("--iters", refine_iters, "Maximum number of evaluated placements");

  auto* report = app.add_subcommand("report", "Aggregate summary.json files into a comparison table");
  report->add_option("summaries", summaries, "summary.json files")->required();
  report->add_option("--out", out_file, "Table file (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "vcsim: usage error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (synth->parsed()) {
      std::vector<std::string> extra;
      if (!vehicles.empty()) extra.push_back("synth_vehicles=" + vehicles);
      if (!duration.empty()) extra.push_back("synth_duration=" + duration);
      const auto cfg = load_config(common, extra);
      const Trace trace = synth_trace(cfg.seed, cfg.synth_vehicles, cfg.synth_duration, cfg.bounds,
                                      SynthOptions{{cfg.speed_min, cfg.speed_max}, cfg.turn_probability});
      auto f = open_output(out_file.empty() ? cfg.output_dir / "trace.csv" : fs::path(out_file));
      emit_trace(f, trace);
    } else if (place->parsed()) {
      const auto cfg = load_config(common);
      const Trace trace = cfg.load_trace();
      const auto rsus = place_rsus(trace, grid_candidates(trace.bounds, cfg.rsu_spacing), cfg.rsu_count, cfg.rsu_radius);
      auto f = open_output(out_file.empty() ? cfg.output_dir / "rsus.csv" : fs::path(out_file));
      emit_rsus(f, rsus);
    } else if (runc->parsed()) {
      const auto cfg = load_config(common);
      if (cfg.placement.empty()) throw UsageError("run needs a placement (e.g. placement = core0+core1)");
      const Scenario sc = cfg.materialize();
      const TopologyGraph topo = build_topology(sc.rsus, sc.n_core, sc.topology, sc.link);
      const RunResult res = run(sc, topo);
      auto rec = open_output(cfg.output_dir / "records.csv");
      write_records_csv(rec, res.records);
      auto sum = open_output(cfg.output_dir / "summary.json");
      sum << summary_json(res.summary, labels_for(cfg, sc.placement.size()), !no_cdf);
      auto tj = open_output(cfg.output_dir / "topology.json");
      tj << topo.to_json() << '\n';
    } else if (refinec->parsed()) {
      std::vector<std::string> extra;
      if (!refine_n.empty()) extra.push_back("refine_n=" + refine_n);
      if (!refine_iters.empty()) extra.push_back("refine_iters=" + refine_iters);
      const auto cfg = load_config(common, extra);
      if (cfg.refine_n == 0) throw UsageError("refine needs refine_n (or --detectors) >= 1");
      const Scenario sc = cfg.materialize();
      RefineOptions opts;
      opts.invert_source = cfg.refine_invert;
      const RefineResult res = refine(cfg.refine_n, sc, cfg.refine_iters, cfg.seed, opts);
      auto log = open_output(cfg.output_dir / "refine_log.csv");
      write_refine_log(log, res.log);
      auto best = open_output(cfg.output_dir / "best_config.txt");
      best << res.best.key() << '\n';
    } else if (report->parsed()) {
      std::vector<SummaryDigest> digests;
      for (const auto& path : summaries) {
        std::ifstream in(path);
        if (!in) throw UsageError("cannot open " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        digests.push_back(parse_summary_json(ss.str()));
      }
      const auto rows = aggregate(digests);
      if (out_file.empty()) {
        write_report_csv(out, rows);
      } else {
        auto f = open_output(out_file);
        write_report_csv(f, rows);
      }
    }
  } catch (const UsageError& e) {
    err << "vcsim: usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "vcsim: error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace vcsim::cli
