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

#include "rainbow/experiment.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace rainbow {

using nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s)
{
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
    ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
    --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep)
{
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

std::string sanitize(std::string_view s)
{
  std::string out;
  for (char c : s)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '=' ? c : '_');
  return out;
}

std::string overrides_text(const Overrides& o)
{
  std::string out;
  for (const auto& [k, v] : o) {
    if (!out.empty())
      out += ';';
    out += k + "=" + v;
  }
  return out;
}

std::string csv_escape(const std::string& s)
{
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line)
{
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

struct Column {
  std::string name;
  std::function<ordered_json(const CellResult&)> value;
};

ordered_json u(uint64_t v) { return v; }

const std::vector<Column>& columns()
{
  static const std::vector<Column> cols = [] {
    std::vector<Column> c;
    auto add = [&](std::string name, std::function<ordered_json(const CellResult&)> f) { c.push_back({std::move(name), std::move(f)}); };
    auto rep = [&](std::string name, std::function<ordered_json(const SimReport&)> f) {
      c.push_back({name, [f](const CellResult& r) { return f(r.report); }});
    };

    add("schema_version", [](const CellResult&) { return ordered_json(kCsvSchemaVersion); });
    add("cell_id", [](const CellResult& r) { return ordered_json(r.cell.id); });
    add("policy", [](const CellResult& r) { return ordered_json(std::string(policy_name(r.cell.policy))); });
    add("workload", [](const CellResult& r) { return ordered_json(r.cell.workload.label); });
    add("overrides", [](const CellResult& r) { return ordered_json(overrides_text(r.cell.overrides)); });
    add("seed", [](const CellResult& r) { return u(r.cell.seed); });

    rep("references", [](const SimReport& r) { return u(r.references); });
    rep("total_cycles", [](const SimReport& r) { return u(r.total_cycles); });
    rep("cycles_per_kref", [](const SimReport& r) { return ordered_json(r.cycles_per_kref()); });
    rep("llc_hits", [](const SimReport& r) { return u(r.llc_hits); });
    rep("llc_misses", [](const SimReport& r) { return u(r.llc_misses); });

    const std::pair<const char*, TlbCounters SimReport::*> tlbs[] = {
        {"l1_4k", &SimReport::l1_4k}, {"l2_4k", &SimReport::l2_4k}, {"l1_2m", &SimReport::l1_2m}, {"l2_2m", &SimReport::l2_2m}};
    for (auto [prefix, field] : tlbs) {
      const std::pair<const char*, uint64_t TlbCounters::*> parts[] = {
          {"_lookups", &TlbCounters::lookups}, {"_hits", &TlbCounters::hits}, {"_misses", &TlbCounters::misses}};
      for (auto [suffix, member] : parts) {
        rep(std::string(prefix) + suffix, [field, member](const SimReport& r) { return u((r.*field).*member); });
      }
    }
    rep("translation_misses", [](const SimReport& r) { return u(r.translation_misses); });
    rep("mpkr", [](const SimReport& r) { return ordered_json(r.mpkr()); });
    rep("r_hit", [](const SimReport& r) { return ordered_json(r.superpage_hit_rate()); });
    rep("case1", [](const SimReport& r) { return u(r.cases[0]); });
    rep("case2", [](const SimReport& r) { return u(r.cases[1]); });
    rep("case3", [](const SimReport& r) { return u(r.cases[2]); });
    rep("case4", [](const SimReport& r) { return u(r.cases[3]); });
    rep("translation_only", [](const SimReport& r) { return u(r.translation_only); });

    const std::pair<const char*, TranslationCategory> cats[] = {
        {"tlb", TranslationCategory::Tlb},         {"bitmap_hit", TranslationCategory::BitmapHit},
        {"bitmap_miss", TranslationCategory::BitmapMiss}, {"walk_4k", TranslationCategory::Walk4K},
        {"walk_2m", TranslationCategory::Walk2M}, {"remap", TranslationCategory::Remap}};
    for (auto [name, cat] : cats) {
      rep(std::string("tr_") + name + "_cycles", [cat](const SimReport& r) { return u(r.translation[static_cast<size_t>(cat)]); });
    }
    for (auto [name, cat] : cats) {
      rep(std::string("share_") + name, [cat](const SimReport& r) { return ordered_json(r.translation_share(cat)); });
    }
    rep("translation_cycles", [](const SimReport& r) { return u(r.translation_cycles()); });
    rep("llc_cycles", [](const SimReport& r) { return u(r.llc_cycles); });
    rep("device_cycles", [](const SimReport& r) { return u(r.device_cycles); });
    rep("mig_copy_cycles", [](const SimReport& r) { return u(r.migration.copy); });
    rep("mig_clflush_cycles", [](const SimReport& r) { return u(r.migration.clflush); });
    rep("mig_writeback_cycles", [](const SimReport& r) { return u(r.migration.writeback); });
    rep("mig_restore_cycles", [](const SimReport& r) { return u(r.migration.restore); });
    rep("mig_shootdown_cycles", [](const SimReport& r) { return u(r.migration.shootdown); });
    rep("migration_cycles", [](const SimReport& r) { return u(r.migration_cycles()); });
    rep("bitmap_hits", [](const SimReport& r) { return u(r.bitmap_hits); });
    rep("bitmap_misses", [](const SimReport& r) { return u(r.bitmap_misses); });
    rep("dram_reads", [](const SimReport& r) { return u(r.dram.reads); });
    rep("dram_writes", [](const SimReport& r) { return u(r.dram.writes); });
    rep("dram_row_hits", [](const SimReport& r) { return u(r.dram.row_hits); });
    rep("dram_row_misses", [](const SimReport& r) { return u(r.dram.row_misses); });
    rep("nvm_reads", [](const SimReport& r) { return u(r.nvm.reads); });
    rep("nvm_writes", [](const SimReport& r) { return u(r.nvm.writes); });
    rep("nvm_row_hits", [](const SimReport& r) { return u(r.nvm.row_hits); });
    rep("nvm_row_misses", [](const SimReport& r) { return u(r.nvm.row_misses); });
    rep("migrations", [](const SimReport& r) { return u(r.migrations); });
    rep("clean_evictions", [](const SimReport& r) { return u(r.clean_evictions); });
    rep("dirty_evictions", [](const SimReport& r) { return u(r.dirty_evictions); });
    rep("migration_traffic_bytes", [](const SimReport& r) { return u(r.migration_traffic_bytes); });
    rep("energy_dram_read_pj", [](const SimReport& r) { return ordered_json(r.energy.dram.read_pj); });
    rep("energy_dram_write_pj", [](const SimReport& r) { return ordered_json(r.energy.dram.write_pj); });
    rep("energy_dram_metadata_pj", [](const SimReport& r) { return ordered_json(r.energy.dram.metadata_pj); });
    rep("energy_dram_migration_pj", [](const SimReport& r) { return ordered_json(r.energy.dram.migration_pj); });
    rep("energy_dram_background_pj", [](const SimReport& r) { return ordered_json(r.energy.dram_background_pj); });
    rep("energy_nvm_read_pj", [](const SimReport& r) { return ordered_json(r.energy.nvm.read_pj); });
    rep("energy_nvm_write_pj", [](const SimReport& r) { return ordered_json(r.energy.nvm.write_pj); });
    rep("energy_nvm_metadata_pj", [](const SimReport& r) { return ordered_json(r.energy.nvm.metadata_pj); });
    rep("energy_nvm_migration_pj", [](const SimReport& r) { return ordered_json(r.energy.nvm.migration_pj); });
    rep("energy_total_pj", [](const SimReport& r) { return ordered_json(r.energy.total()); });
    rep("dram_bytes", [](const SimReport& r) { return u(r.dram_bytes); });
    rep("dram_addr_events", [](const SimReport& r) { return u(r.dram_addr_events); });
    rep("dram_addr_sp_hits", [](const SimReport& r) { return u(r.dram_addr_sp_hits); });
    rep("dram_addr_cycles", [](const SimReport& r) { return u(r.dram_addr_cycles); });
    rep("intervals", [](const SimReport& r) { return u(r.intervals); });
    rep("final_threshold", [](const SimReport& r) { return ordered_json(r.final_threshold); });
    rep("cycles_closed", [](const SimReport& r) { return ordered_json(cycles_closed(r) ? 1 : 0); });
    rep("energy_closed", [](const SimReport& r) { return ordered_json(energy_closed(r) ? 1 : 0); });
    return c;
  }();
  return cols;
}

std::string cell_text(const ordered_json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

double ratio(double x, double base)
{
  if (base == 0)
    return x == 0 ? 1.0 : std::numeric_limits<double>::infinity();
  return x / base;
}

double field(const CsvRow& row, const std::string& key)
{
  auto it = row.find(key);
  if (it == row.end())
    throw ExperimentError("results row lacks column '" + key + "'");
  return std::stod(it->second);
}

} // namespace

// ---------------------------------------------------------------------------

uint64_t parse_count(std::string_view text)
{
  Rational r;
  try {
    r = Rational::parse(text);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected a whole number, got '" + std::string(text) + "'");
  }
  if (r.den != 1 || r.num < 0)
    throw std::invalid_argument("expected a whole number, got '" + std::string(text) + "'");
  return static_cast<uint64_t>(r.num);
}

uint64_t parse_size(std::string_view text)
{
  std::string s = trim(text);
  if (s.empty())
    throw std::invalid_argument("empty size");
  unsigned shift = 0;
  switch (std::toupper(static_cast<unsigned char>(s.back()))) {
  case 'K':
    shift = 10;
    break;
  case 'M':
    shift = 20;
    break;
  case 'G':
    shift = 30;
    break;
  case 'T':
    shift = 40;
    break;
  default:
    break;
  }
  if (shift)
    s.pop_back();
  uint64_t v = parse_count(s);
  if (shift && v > (UINT64_MAX >> shift))
    throw std::invalid_argument("size out of range: " + std::string(text));
  return v << shift;
}

std::string canonical_key(std::string_view key)
{
  std::string k = trim(key);
  if (k == "interval")
    return "monitor.interval_cycles";
  if (k == "topn" || k == "top_n" || k == "n")
    return "monitor.top_n";
  return k;
}

Sweep parse_sweep(std::string_view text)
{
  size_t eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw std::invalid_argument("sweep must look like key=v1,v2,...: '" + std::string(text) + "'");
  Sweep s{canonical_key(text.substr(0, eq)), split(text.substr(eq + 1), ',')};
  for (const std::string& v : s.values)
    if (v.empty())
      throw std::invalid_argument("empty value in sweep '" + std::string(text) + "'");
  for (const std::string& v : s.values) {
    SimConfig probe = default_config();
    apply_setting(probe, s.key, v); // rejects unknown keys and malformed values early
    probe.finalize();
  }
  return s;
}

std::string make_cell_id(PolicyKind policy, const std::string& workload, const Overrides& overrides)
{
  std::string id = std::string(policy_name(policy)) + "__" + sanitize(workload);
  for (const auto& [k, v] : overrides)
    id += "__" + sanitize(k + "=" + v);
  return id;
}

std::vector<ExperimentCell> expand_sweeps(const std::vector<ExperimentCell>& base, const std::vector<Sweep>& sweeps)
{
  std::vector<ExperimentCell> cells = base;
  for (const Sweep& s : sweeps) {
    std::vector<ExperimentCell> next;
    for (const ExperimentCell& c : cells) {
      for (const std::string& v : s.values) {
        ExperimentCell n = c;
        n.overrides.emplace_back(s.key, v);
        n.id = make_cell_id(n.policy, n.workload.label, n.overrides);
        next.push_back(std::move(n));
      }
    }
    cells = std::move(next);
  }
  return cells;
}

void ExperimentPlan::validate(const SimConfig& base) const
{
  std::set<std::string> ids;
  for (const ExperimentCell& c : cells) {
    if (!ids.insert(c.id).second)
      throw ExperimentError("duplicate cell id '" + c.id + "'");
    if (!c.workload.generator && c.workload.trace.empty())
      throw ExperimentError("cell '" + c.id + "' has no workload");
    cell_config(c, base);
  }
  if (jobs == 0)
    throw ExperimentError("jobs must be at least 1");
}

SimConfig cell_config(const ExperimentCell& cell, const SimConfig& base)
{
  SimConfig cfg = base;
  for (const auto& [k, v] : cell.overrides)
    apply_setting(cfg, k, v);
  cfg.finalize();
  return cfg;
}

CellResult run_cell(const ExperimentCell& cell, const SimConfig& base)
{
  CellResult out{cell, cell_config(cell, base), {}};
  PolicySpec spec = make_policy_spec(cell.policy, out.config);
  if (cell.workload.generator) {
    GeneratorSpec g = *cell.workload.generator;
    g.seed = cell.seed;
    TraceGenerator gen(g);
    out.report = run(gen, spec, out.config);
  } else {
    TraceReader reader(cell.workload.trace);
    out.report = run(reader, spec, out.config);
  }
  out.report.workload = cell.workload.label;
  out.report.seed = cell.seed;
  return out;
}

std::vector<CellResult> run_plan(const ExperimentPlan& plan, const SimConfig& base)
{
  plan.validate(base);
  std::vector<std::optional<CellResult>> slots(plan.cells.size());
  std::vector<std::exception_ptr> errors(plan.cells.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < plan.cells.size(); i = next++) {
      try {
        slots[i] = run_cell(plan.cells[i], base);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned width = std::max(1u, std::min<unsigned>(plan.jobs, static_cast<unsigned>(plan.cells.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < width; ++t)
    pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool)
    t.join();

  std::vector<CellResult> out;
  for (size_t i = 0; i < slots.size(); ++i) {
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& e) {
        throw ExperimentError("cell '" + plan.cells[i].id + "': " + e.what());
      }
    }
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> csv_columns()
{
  std::vector<std::string> out;
  for (const Column& c : columns())
    out.push_back(c.name);
  return out;
}

std::string csv_header()
{
  std::string out;
  for (const Column& c : columns()) {
    if (!out.empty())
      out += ',';
    out += c.name;
  }
  return out;
}

std::string csv_row(const CellResult& r)
{
  std::string out;
  bool first = true;
  for (const Column& c : columns()) {
    if (!first)
      out += ',';
    first = false;
    out += csv_escape(cell_text(c.value(r)));
  }
  return out;
}

std::string json_sidecar(const CellResult& r)
{
  ordered_json j;
  j["schema_version"] = kCsvSchemaVersion;
  j["cell_id"] = r.cell.id;
  j["policy"] = std::string(policy_name(r.cell.policy));
  j["seed"] = r.cell.seed;

  ordered_json w;
  w["label"] = r.cell.workload.label;
  if (const auto& g = r.cell.workload.generator) {
    w["generator"] = std::string(generator_kind_name(g->kind));
    w["footprint_bytes"] = g->footprint_bytes;
    w["working_set_bytes"] = g->working_set_bytes;
    w["zipf_exponent"] = g->zipf_exponent;
    w["write_fraction"] = g->write_fraction;
    w["histogram"] = g->histogram;
    w["hot_fraction"] = g->hot_fraction;
    w["refs"] = g->refs;
    w["threads"] = g->threads;
  } else {
    w["trace"] = r.cell.workload.trace.string();
  }
  j["workload"] = w;

  ordered_json o = ordered_json::object();
  for (const auto& [k, v] : r.cell.overrides)
    o[k] = v;
  j["overrides"] = o;
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : config_entries(r.config))
    cfg[k] = v;
  j["config"] = cfg;
  j["derived_cycles"] = {{"t_dr", r.config.t_dr}, {"t_dw", r.config.t_dw},     {"t_nr", r.config.t_nr},
                         {"t_nw", r.config.t_nw}, {"t_mig", r.config.t_mig}, {"t_writeback", r.config.t_writeback}};

  ordered_json metrics;
  for (const Column& c : columns()) {
    const std::string& name = c.name;
    if (name == "schema_version" || name == "cell_id" || name == "policy" || name == "workload" || name == "overrides" || name == "seed")
      continue;
    metrics[name] = c.value(r);
  }
  j["metrics"] = metrics;
  return j.dump(2) + "\n";
}

void write_results(const std::vector<CellResult>& results, const std::filesystem::path& dir)
{
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "results.csv", std::ios::binary);
  if (!csv)
    throw ExperimentError("cannot write " + (dir / "results.csv").string());
  csv << csv_header() << "\n";
  for (const CellResult& r : results) {
    csv << csv_row(r) << "\n";
    std::ofstream js(dir / (r.cell.id + ".json"), std::ios::binary);
    if (!js)
      throw ExperimentError("cannot write sidecar for " + r.cell.id);
    js << json_sidecar(r);
  }
}

std::vector<CsvRow> read_csv(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ExperimentError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw ExperimentError(path.string() + ": empty file");
  std::vector<std::string> header = csv_split(line);
  std::vector<CsvRow> rows;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    std::vector<std::string> cells = csv_split(line);
    if (cells.size() != header.size())
      throw ExperimentError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(cells.size()));
    CsvRow row;
    for (size_t i = 0; i < header.size(); ++i)
      row[header[i]] = cells[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<NormalizedRow> normalize(const std::vector<CsvRow>& rows)
{
  auto group_of = [](const CsvRow& r) { return r.at("workload") + (r.at("overrides").empty() ? "" : " [" + r.at("overrides") + "]"); };
  std::map<std::string, const CsvRow*> baselines;
  for (const CsvRow& r : rows)
    if (r.at("policy") == policy_name(PolicyKind::FlatStatic))
      baselines.emplace(group_of(r), &r);

  std::vector<NormalizedRow> out;
  for (const CsvRow& r : rows) {
    std::string g = group_of(r);
    auto it = baselines.find(g);
    if (it == baselines.end())
      throw ExperimentError("no flat-static baseline cell for workload '" + g + "'");
    const CsvRow& b = *it->second;
    NormalizedRow n;
    n.cell_id = r.at("cell_id");
    n.policy = r.at("policy");
    n.group = g;
    n.cycle_ratio = ratio(field(r, "total_cycles"), field(b, "total_cycles"));
    n.mpkr_ratio = ratio(field(r, "mpkr"), field(b, "mpkr"));
    n.traffic_ratio = ratio(field(r, "migration_traffic_bytes"), field(b, "migration_traffic_bytes"));
    n.energy_ratio = ratio(field(r, "energy_total_pj"), field(b, "energy_total_pj"));
    out.push_back(n);
  }
  return out;
}

std::vector<NormalizedRow> build_report(const std::filesystem::path& dir)
{
  if (!std::filesystem::is_directory(dir))
    throw ExperimentError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv")
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<CsvRow> rows;
  for (const auto& f : files) {
    auto part = read_csv(f);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (rows.empty())
    throw ExperimentError("no results found under " + dir.string());
  return normalize(rows);
}

std::string format_report(const std::vector<NormalizedRow>& rows)
{
  std::ostringstream out;
  out << "cell_id,policy,workload,cycle_ratio,mpkr_ratio,traffic_ratio,energy_ratio\n";
  auto num = [](double v) {
    if (std::isinf(v))
      return std::string("inf");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  for (const NormalizedRow& r : rows)
    out << csv_escape(r.cell_id) << ',' << r.policy << ',' << csv_escape(r.group) << ',' << num(r.cycle_ratio) << ','
        << num(r.mpkr_ratio) << ',' << num(r.traffic_ratio) << ',' << num(r.energy_ratio) << '\n';
  return out.str();
}

} // namespace rainbow
