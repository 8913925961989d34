/*
 *    Copyright 2026 The Rainbow Simulator Authors
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

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rainbow/experiment.hpp"

using namespace rainbow;

namespace {

struct WorkloadFlags {
  std::string gen;
  std::string trace;
  std::string label;
  std::string refs = "1e6";
  std::string footprint = "1G";
  std::string working_set = "256M";
  double zipf = 0.99;
  double write_fraction = 0.2;
  double hot_fraction = 0.7;
  std::string histogram;
  unsigned threads = 1;

  void attach(CLI::App* app, bool allow_trace)
  {
    app->add_option("--gen", gen, "generator: uniform, zipf, hotmix, gups");
    if (allow_trace)
      app->add_option("--trace", trace, "binary trace file")->check(CLI::ExistingFile);
    app->add_option("--label", label, "workload label used in cell ids and reports");
    app->add_option("--refs", refs, "references to generate (e.g. 1e6)");
    app->add_option("--footprint", footprint, "address span (bytes, K/M/G/T suffix)");
    app->add_option("--working-set", working_set, "bytes actually touched");
    app->add_option("--zipf", zipf, "zipf exponent");
    app->add_option("--write-fraction", write_fraction, "share of writes");
    app->add_option("--hot-fraction", hot_fraction, "hotmix: share of references to hot pages");
    app->add_option("--histogram", histogram, "hotmix: six bucket weights, comma separated");
    app->add_option("--threads", threads, "software threads (tids)");
  }

  GeneratorSpec spec(uint64_t seed) const
  {
    GeneratorSpec g;
    g.kind = parse_generator_kind(gen);
    g.refs = parse_count(refs);
    g.footprint_bytes = parse_size(footprint);
    g.working_set_bytes = parse_size(working_set);
    g.zipf_exponent = zipf;
    g.write_fraction = write_fraction;
    g.hot_fraction = hot_fraction;
    g.threads = threads;
    g.seed = seed;
    if (!histogram.empty()) {
      std::vector<double> w;
      std::string cur;
      for (char c : histogram + ",") {
        if (c == ',') {
          w.push_back(std::stod(cur));
          cur.clear();
        } else {
          cur += c;
        }
      }
      if (w.size() != g.histogram.size())
        throw std::invalid_argument("--histogram needs six weights");
      std::copy(w.begin(), w.end(), g.histogram.begin());
    }
    g.validate();
    return g;
  }

  WorkloadSpec workload(uint64_t seed) const
  {
    WorkloadSpec w;
    if (!trace.empty() && !gen.empty())
      throw std::invalid_argument("--gen and --trace are mutually exclusive");
    if (!trace.empty()) {
      w.trace = trace;
      w.label = label.empty() ? std::filesystem::path(trace).stem().string() : label;
    } else {
      if (gen.empty())
        throw std::invalid_argument("one of --gen or --trace is required");
      w.generator = spec(seed);
      w.label = label.empty() ? std::string(generator_kind_name(w.generator->kind)) : label;
    }
    return w;
  }
};

SimConfig base_config(const std::string& path, const std::vector<std::string>& sets)
{
  SimConfig cfg = path.empty() ? default_config() : load_config(path);
  for (const std::string& s : sets) {
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + s + "'");
    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  cfg.finalize();
  return cfg;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Trace-driven hybrid DRAM/NVM memory simulator"};
  app.require_subcommand(1);

  // run
  CLI::App* run_cmd = app.add_subcommand("run", "simulate policy x workload cells and write results.csv plus JSON sidecars");
  WorkloadFlags run_wl;
  run_wl.attach(run_cmd, true);
  std::vector<std::string> policies{"rainbow"};
  std::vector<std::string> sets;
  std::vector<std::string> sweeps;
  std::string config_path;
  std::string out_dir = "results";
  unsigned jobs = 1;
  uint64_t seed = 1;
  run_cmd->add_option("--policy", policies, "rainbow, flat-static, hscc-4k, hscc-2m, dram-only (repeatable or comma list)")
      ->delimiter(',');
  run_cmd->add_option("--config", config_path, "configuration file of section.key = value lines")->check(CLI::ExistingFile);
  run_cmd->add_option("--set", sets, "override one configuration key (key=value, repeatable)");
  run_cmd->add_option("--sweep", sweeps, "sweep one key: interval=..., topn=..., or section.key=v1,v2 (repeatable)");
  run_cmd->add_option("--seed", seed, "per-cell random seed");
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--jobs", jobs, "cells simulated concurrently")->check(CLI::PositiveNumber);

  // report
  CLI::App* report_cmd = app.add_subcommand("report", "normalize results to the flat-static baseline");
  std::string report_dir = "results";
  std::string report_out;
  report_cmd->add_option("--dir", report_dir, "directory holding results CSV files");
  report_cmd->add_option("--out", report_out, "write the table here instead of stdout");

  // gen
  CLI::App* gen_cmd = app.add_subcommand("gen", "write a synthetic binary trace");
  WorkloadFlags gen_wl;
  gen_wl.attach(gen_cmd, false);
  uint64_t gen_seed = 1;
  std::string gen_out;
  gen_cmd->add_option("--seed", gen_seed, "random seed");
  gen_cmd->add_option("--out", gen_out, "output trace file")->required();

  // trace-dump
  CLI::App* dump_cmd = app.add_subcommand("trace-dump", "print a binary trace as text");
  std::string dump_path;
  dump_cmd->add_option("trace", dump_path, "binary trace file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      SimConfig cfg = base_config(config_path, sets);
      WorkloadSpec wl = run_wl.workload(seed);
      std::vector<ExperimentCell> cells;
      for (const std::string& p : policies) {
        ExperimentCell c;
        c.policy = parse_policy_kind(p);
        c.workload = wl;
        c.seed = seed;
        c.id = make_cell_id(c.policy, wl.label, c.overrides);
        cells.push_back(std::move(c));
      }
      std::vector<Sweep> parsed;
      for (const std::string& s : sweeps)
        parsed.push_back(parse_sweep(s));
      ExperimentPlan plan{expand_sweeps(cells, parsed), out_dir, jobs};
      std::vector<CellResult> results = run_plan(plan, cfg);
      write_results(results, out_dir);
      for (const CellResult& r : results)
        std::cout << r.cell.id << ": " << r.report.references << " refs, " << r.report.total_cycles << " cycles, MPKR "
                  << r.report.mpkr() << ", traffic " << r.report.migration_traffic_bytes << " B\n";
      std::cout << "wrote " << (std::filesystem::path(out_dir) / "results.csv").string() << "\n";
    } else if (report_cmd->parsed()) {
      std::string table = format_report(build_report(report_dir));
      if (report_out.empty()) {
        std::cout << table;
      } else {
        std::ofstream(report_out) << table;
      }
    } else if (gen_cmd->parsed()) {
      if (gen_wl.gen.empty())
        throw std::invalid_argument("--gen is required");
      TraceGenerator g(gen_wl.spec(gen_seed));
      uint64_t n = write_trace(g, gen_out);
      std::cout << "wrote " << n << " records to " << gen_out << "\n";
    } else if (dump_cmd->parsed()) {
      TraceReader reader(dump_path);
      dump_trace(reader, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
