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

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rainbow/core.hpp"
#include "rainbow/engine.hpp"
#include "rainbow/policies.hpp"
#include "rainbow/workload.hpp"

namespace rainbow {

class ExperimentError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kCsvSchemaVersion = 1;

// Either a generator spec or a binary trace file.
struct WorkloadSpec {
  std::optional<GeneratorSpec> generator;
  std::filesystem::path trace;
  std::string label;
};

using Overrides = std::vector<std::pair<std::string, std::string>>;

struct ExperimentCell {
  std::string id;
  PolicyKind policy = PolicyKind::Rainbow;
  WorkloadSpec workload;
  Overrides overrides; // config key = value, applied in order
  uint64_t seed = 1;   // the only source of randomness for the cell
};

struct ExperimentPlan {
  std::vector<ExperimentCell> cells;
  std::filesystem::path output_dir;
  unsigned jobs = 1;

  // Unique ids; every override names a known key with a valid value.
  void validate(const SimConfig& base) const;
};

struct CellResult {
  ExperimentCell cell;
  SimConfig config;
  SimReport report;
};

// "interval=1e5,1e6" / "topn=10,50" / "<section.key>=v1,v2".
struct Sweep {
  std::string key;
  std::vector<std::string> values;
};
Sweep parse_sweep(std::string_view text);
std::string canonical_key(std::string_view key); // resolves the interval/topn aliases

// Cartesian product of the base cells with every sweep, ids extended with key=value.
std::vector<ExperimentCell> expand_sweeps(const std::vector<ExperimentCell>& base, const std::vector<Sweep>& sweeps);
std::string make_cell_id(PolicyKind policy, const std::string& workload, const Overrides& overrides);

SimConfig cell_config(const ExperimentCell& cell, const SimConfig& base);
CellResult run_cell(const ExperimentCell& cell, const SimConfig& base);

// Runs up to plan.jobs cells at once. Results are in plan order regardless of width.
std::vector<CellResult> run_plan(const ExperimentPlan& plan, const SimConfig& base);

// CSV: one header line, one row per cell. Columns are listed by csv_columns().
std::vector<std::string> csv_columns();
std::string csv_header();
std::string csv_row(const CellResult& r);
std::string json_sidecar(const CellResult& r); // pretty-printed, newline-terminated

// Writes results.csv plus <cell id>.json for every cell.
void write_results(const std::vector<CellResult>& results, const std::filesystem::path& dir);

using CsvRow = std::map<std::string, std::string>;
std::vector<CsvRow> read_csv(const std::filesystem::path& path);

struct NormalizedRow {
  std::string cell_id;
  std::string policy;
  std::string group;
  double cycle_ratio = 0;
  double mpkr_ratio = 0;
  double traffic_ratio = 0;
  double energy_ratio = 0;
};

// Each row divided by the flat-static row of the same workload and overrides. x/0 is
// reported as infinity, 0/0 as 1.
std::vector<NormalizedRow> normalize(const std::vector<CsvRow>& rows);
// Reads every results CSV under dir. Empty directories and missing baselines throw.
std::vector<NormalizedRow> build_report(const std::filesystem::path& dir);
std::string format_report(const std::vector<NormalizedRow>& rows);

// Whole numbers in plain or scientific notation ("1e6", "100000").
uint64_t parse_count(std::string_view text);
// Byte sizes with an optional K/M/G/T binary suffix ("4G", "256M", "1048576").
uint64_t parse_size(std::string_view text);

} // namespace rainbow
