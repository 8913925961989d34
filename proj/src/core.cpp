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

#include "rainbow/core.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

namespace rainbow {

namespace {

using i128 = __int128;

i128 gcd128(i128 a, i128 b)
{
  if (a < 0)
    a = -a;
  if (b < 0)
    b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Rational reduce(i128 num, i128 den)
{
  if (den == 0)
    throw std::domain_error("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  constexpr i128 lim = std::numeric_limits<int64_t>::max();
  if (num > lim || num < -lim || den > lim)
    throw std::overflow_error("rational out of range");
  return {static_cast<int64_t>(num), static_cast<int64_t>(den)};
}

std::string trim(std::string_view s)
{
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
    ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
    --e;
  return std::string(s.substr(b, e - b));
}

} // namespace

Rational Rational::parse(std::string_view text)
{
  std::string s = trim(text);
  if (s.empty())
    throw std::invalid_argument("empty number");
  if (auto slash = s.find('/'); slash != std::string::npos)
    return parse(std::string_view(s).substr(0, slash)) / parse(std::string_view(s).substr(slash + 1));
  size_t pos = 0;
  bool negative = false;
  if (s[pos] == '+' || s[pos] == '-') {
    negative = s[pos] == '-';
    ++pos;
  }
  i128 num = 0;
  i128 den = 1;
  int digits = 0;
  bool seen_dot = false;
  for (; pos < s.size(); ++pos) {
    char c = s[pos];
    if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      if (++digits > 30)
        throw std::invalid_argument("too many digits: " + s);
      num = num * 10 + (c - '0');
      if (seen_dot)
        den *= 10;
    } else if (c == '_' || c == '\'') {
      continue;
    } else {
      break;
    }
  }
  if (digits == 0)
    throw std::invalid_argument("not a number: " + s);
  if (pos < s.size()) {
    if (s[pos] != 'e' && s[pos] != 'E')
      throw std::invalid_argument("not a number: " + s);
    ++pos;
    bool neg_exp = false;
    if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
      neg_exp = s[pos] == '-';
      ++pos;
    }
    if (pos == s.size())
      throw std::invalid_argument("bad exponent: " + s);
    int exp = 0;
    for (; pos < s.size(); ++pos) {
      if (!std::isdigit(static_cast<unsigned char>(s[pos])))
        throw std::invalid_argument("bad exponent: " + s);
      exp = exp * 10 + (s[pos] - '0');
      if (exp > 30)
        throw std::invalid_argument("exponent too large: " + s);
    }
    for (int i = 0; i < exp; ++i) {
      if (neg_exp)
        den *= 10;
      else
        num *= 10;
    }
  }
  return reduce(negative ? -num : num, den);
}

Rational Rational::normalized() const { return reduce(num, den); }

Rational operator*(Rational a, Rational b) { return reduce(i128{a.num} * b.num, i128{a.den} * b.den); }

Rational operator/(Rational a, Rational b) { return reduce(i128{a.num} * b.den, i128{a.den} * b.num); }

bool operator==(const Rational& a, const Rational& b) { return i128{a.num} * b.den == i128{b.num} * a.den; }

bool operator<(const Rational& a, const Rational& b) { return i128{a.num} * b.den < i128{b.num} * a.den; }

uint64_t ns_to_cycles(Rational ns, Rational freq_ghz)
{
  if (ns.num < 0 || freq_ghz.num < 0)
    throw std::domain_error("ns_to_cycles: negative input");
  i128 p = i128{ns.num} * freq_ghz.num;
  i128 q = i128{ns.den} * freq_ghz.den;
  return static_cast<uint64_t>((2 * p + q) / (2 * q));
}

uint64_t Rng::below(uint64_t bound)
{
  if (bound == 0)
    return 0;
  // Lemire's multiply-shift with rejection: unbiased and portable.
  unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
  uint64_t low = static_cast<uint64_t>(m);
  if (low < bound) {
    uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next()) * bound;
      low = static_cast<uint64_t>(m);
    }
  }
  return static_cast<uint64_t>(m >> 64);
}

double Rng::unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

// ---------------------------------------------------------------------------
// Configuration keys

namespace {

struct Key {
  std::function<void(SimConfig&, const std::string&)> set;
  std::function<std::string(const SimConfig&)> get;
};

uint64_t parse_uint(const std::string& v)
{
  Rational r = Rational::parse(v);
  if (r.den != 1 || r.num < 0)
    throw std::invalid_argument("expected a non-negative integer, got '" + v + "'");
  return static_cast<uint64_t>(r.num);
}

int64_t parse_int(const std::string& v)
{
  Rational r = Rational::parse(v);
  if (r.den != 1)
    throw std::invalid_argument("expected an integer, got '" + v + "'");
  return r.num;
}

double parse_double(const std::string& v)
{
  errno = 0;
  char* end = nullptr;
  double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE)
    throw std::invalid_argument("expected a number, got '" + v + "'");
  return d;
}

std::string fmt_double(double d)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

std::string fmt_rational(Rational r)
{
  if (r.den == 1)
    return std::to_string(r.num);
  // Exact decimal when the denominator divides a power of ten, otherwise num/den.
  int64_t den = r.den;
  int twos = 0;
  int fives = 0;
  while (den % 2 == 0) {
    den /= 2;
    ++twos;
  }
  while (den % 5 == 0) {
    den /= 5;
    ++fives;
  }
  if (den != 1)
    return std::to_string(r.num) + "/" + std::to_string(r.den);
  int places = std::max(twos, fives);
  i128 scaled = i128{r.num};
  i128 pow10 = 1;
  for (int i = 0; i < places; ++i)
    pow10 *= 10;
  scaled = scaled * pow10 / r.den;
  std::string digits = std::to_string(static_cast<int64_t>(scaled));
  while (static_cast<int>(digits.size()) <= places)
    digits.insert(digits.begin(), '0');
  digits.insert(digits.end() - places, '.');
  return digits;
}

template <typename T> Key uint_key(T SimConfig::*field)
{
  return {[field](SimConfig& c, const std::string& v) {
            uint64_t x = parse_uint(v);
            if (x > std::numeric_limits<T>::max())
              throw std::invalid_argument("value out of range: " + v);
            c.*field = static_cast<T>(x);
          },
          [field](const SimConfig& c) { return std::to_string(c.*field); }};
}

Key int_key(int64_t SimConfig::*field)
{
  return {[field](SimConfig& c, const std::string& v) { c.*field = parse_int(v); },
          [field](const SimConfig& c) { return std::to_string(c.*field); }};
}

Key double_key(double SimConfig::*field)
{
  return {[field](SimConfig& c, const std::string& v) { c.*field = parse_double(v); },
          [field](const SimConfig& c) { return fmt_double(c.*field); }};
}

Key rational_key(Rational SimConfig::*field)
{
  return {[field](SimConfig& c, const std::string& v) { c.*field = Rational::parse(v); },
          [field](const SimConfig& c) { return fmt_rational(c.*field); }};
}

Key tlb_key(TlbGeometry SimConfig::*geom, unsigned TlbGeometry::*field)
{
  return {[geom, field](SimConfig& c, const std::string& v) {
            uint64_t x = parse_uint(v);
            if (x > std::numeric_limits<unsigned>::max())
              throw std::invalid_argument("value out of range: " + v);
            (c.*geom).*field = static_cast<unsigned>(x);
          },
          [geom, field](const SimConfig& c) { return std::to_string((c.*geom).*field); }};
}

const std::map<std::string, Key>& key_table()
{
  static const std::map<std::string, Key> table = [] {
    std::map<std::string, Key> t;
    t["cpu.freq_ghz"] = rational_key(&SimConfig::cpu_freq_ghz);
    t["cpu.cores"] = uint_key(&SimConfig::cores);

    const std::pair<const char*, TlbGeometry SimConfig::*> tlbs[] = {
        {"tlb.l1_4k", &SimConfig::l1_4k},
        {"tlb.l1_2m", &SimConfig::l1_2m},
        {"tlb.l2_4k", &SimConfig::l2_4k},
        {"tlb.l2_2m", &SimConfig::l2_2m},
    };
    for (auto [prefix, geom] : tlbs) {
      t[std::string(prefix) + "_entries"] = tlb_key(geom, &TlbGeometry::entries);
      t[std::string(prefix) + "_ways"] = tlb_key(geom, &TlbGeometry::ways);
      t[std::string(prefix) + "_latency"] = tlb_key(geom, &TlbGeometry::latency);
    }
    t["tlb.shootdown_cycles"] = uint_key(&SimConfig::shootdown_cycles);
    t["tlb.local_invalidate_cycles"] = uint_key(&SimConfig::local_invalidate_cycles);

    t["llc.bytes"] = uint_key(&SimConfig::llc_bytes);
    t["llc.ways"] = uint_key(&SimConfig::llc_ways);
    t["llc.line_bytes"] = uint_key(&SimConfig::llc_line_bytes);
    t["llc.latency"] = uint_key(&SimConfig::llc_latency);

    t["bitmap.entries"] = uint_key(&SimConfig::bitmap_entries);
    t["bitmap.ways"] = uint_key(&SimConfig::bitmap_ways);
    t["bitmap.latency"] = uint_key(&SimConfig::bitmap_latency);

    t["dram.read_ns"] = rational_key(&SimConfig::dram_read_ns);
    t["dram.write_ns"] = rational_key(&SimConfig::dram_write_ns);
    t["dram.capacity_bytes"] = uint_key(&SimConfig::dram_capacity_bytes);
    t["dram.banks"] = uint_key(&SimConfig::dram_banks);
    t["dram.row_miss_penalty"] = uint_key(&SimConfig::dram_row_miss_penalty);

    t["nvm.read_ns"] = rational_key(&SimConfig::nvm_read_ns);
    t["nvm.write_ns"] = rational_key(&SimConfig::nvm_write_ns);
    t["nvm.capacity_bytes"] = uint_key(&SimConfig::nvm_capacity_bytes);
    t["nvm.banks"] = uint_key(&SimConfig::nvm_banks);
    t["nvm.row_miss_penalty"] = uint_key(&SimConfig::nvm_row_miss_penalty);

    t["energy.dram_voltage"] = double_key(&SimConfig::dram_voltage);
    t["energy.dram_standby_ma"] = double_key(&SimConfig::dram_standby_ma);
    t["energy.dram_refresh_ma"] = double_key(&SimConfig::dram_refresh_ma);
    t["energy.dram_precharge_ma"] = double_key(&SimConfig::dram_precharge_ma);
    t["energy.dram_read_hit_ma"] = double_key(&SimConfig::dram_read_hit_ma);
    t["energy.dram_write_hit_ma"] = double_key(&SimConfig::dram_write_hit_ma);
    t["energy.dram_read_miss_ma"] = double_key(&SimConfig::dram_read_miss_ma);
    t["energy.dram_write_miss_ma"] = double_key(&SimConfig::dram_write_miss_ma);
    t["energy.dram_refresh_duty"] = double_key(&SimConfig::dram_refresh_duty);
    t["energy.dram_reference_bytes"] = uint_key(&SimConfig::dram_energy_reference_bytes);
    t["energy.nvm_read_hit_pj_bit"] = double_key(&SimConfig::nvm_read_hit_pj_bit);
    t["energy.nvm_write_hit_pj_bit"] = double_key(&SimConfig::nvm_write_hit_pj_bit);
    t["energy.nvm_read_miss_pj_bit"] = double_key(&SimConfig::nvm_read_miss_pj_bit);
    t["energy.nvm_write_miss_pj_bit"] = double_key(&SimConfig::nvm_write_miss_pj_bit);

    t["monitor.write_weight"] = uint_key(&SimConfig::write_weight);
    t["monitor.top_n"] = uint_key(&SimConfig::top_n);
    t["monitor.interval_cycles"] = uint_key(&SimConfig::interval_cycles);

    t["migration.bandwidth_gbps"] = rational_key(&SimConfig::migration_bandwidth_gbps);
    t["migration.t_mig_cycles"] = uint_key(&SimConfig::t_mig_override);
    t["migration.t_writeback_cycles"] = uint_key(&SimConfig::t_writeback_override);
    t["migration.clflush_cycles"] = uint_key(&SimConfig::clflush_cycles);
    t["migration.hot_threshold"] = int_key(&SimConfig::hot_threshold);
    t["migration.threshold_max"] = int_key(&SimConfig::threshold_max);
    t["migration.threshold_step"] = int_key(&SimConfig::threshold_step);
    t["migration.traffic_high_fraction"] = double_key(&SimConfig::traffic_high_fraction);
    t["migration.traffic_low_fraction"] = double_key(&SimConfig::traffic_low_fraction);
    return t;
  }();
  return table;
}

void require(bool ok, const char* key, const std::string& what)
{
  if (!ok)
    throw ConfigError(std::string(key) + ": " + what);
}

void check_tlb(const TlbGeometry& g, const char* prefix)
{
  std::string p(prefix);
  require(g.ways > 0, (p + "_ways").c_str(), "must be positive");
  require(g.entries > 0 && g.entries % g.ways == 0, (p + "_entries").c_str(), "must be a positive multiple of ways");
  require(g.latency > 0, (p + "_latency").c_str(), "latency must be strictly positive");
}

} // namespace

void SimConfig::finalize()
{
  require(Rational{0, 1} < cpu_freq_ghz, "cpu.freq_ghz", "must be strictly positive");
  require(cores >= 1 && cores <= 256, "cpu.cores", "must be in [1, 256]");
  check_tlb(l1_4k, "tlb.l1_4k");
  check_tlb(l1_2m, "tlb.l1_2m");
  check_tlb(l2_4k, "tlb.l2_4k");
  check_tlb(l2_2m, "tlb.l2_2m");
  require(shootdown_cycles > 0, "tlb.shootdown_cycles", "latency must be strictly positive");
  require(local_invalidate_cycles > 0, "tlb.local_invalidate_cycles", "latency must be strictly positive");

  require(llc_ways > 0, "llc.ways", "must be positive");
  require(llc_line_bytes > 0 && (llc_line_bytes & (llc_line_bytes - 1)) == 0 && llc_line_bytes <= kSmallPageBytes,
          "llc.line_bytes", "must be a power of two no larger than 4096");
  require(llc_bytes > 0 && llc_bytes % (uint64_t{llc_line_bytes} * llc_ways) == 0, "llc.bytes",
          "must be a positive multiple of line_bytes * ways");
  require(llc_latency > 0, "llc.latency", "latency must be strictly positive");

  require(bitmap_ways > 0, "bitmap.ways", "must be positive");
  require(bitmap_entries > 0 && bitmap_entries % bitmap_ways == 0, "bitmap.entries", "must be a positive multiple of ways");
  require(bitmap_latency > 0, "bitmap.latency", "latency must be strictly positive");

  require(Rational{0, 1} < dram_read_ns, "dram.read_ns", "latency must be strictly positive");
  require(Rational{0, 1} < dram_write_ns, "dram.write_ns", "latency must be strictly positive");
  require(Rational{0, 1} < nvm_read_ns, "nvm.read_ns", "latency must be strictly positive");
  require(Rational{0, 1} < nvm_write_ns, "nvm.write_ns", "latency must be strictly positive");
  require(nvm_read_ns <= nvm_write_ns, "nvm.write_ns", "must be >= nvm.read_ns");
  require(dram_capacity_bytes > 0 && dram_capacity_bytes % kSuperpageBytes == 0, "dram.capacity_bytes",
          "must be a positive multiple of 2 MB");
  require(nvm_capacity_bytes > 0 && nvm_capacity_bytes % kSuperpageBytes == 0, "nvm.capacity_bytes",
          "must be a positive multiple of 2 MB");
  require(dram_banks > 0, "dram.banks", "must be positive");
  require(nvm_banks > 0, "nvm.banks", "must be positive");
  require(dram_energy_reference_bytes > 0, "energy.dram_reference_bytes", "must be positive");
  require(dram_refresh_duty >= 0 && dram_refresh_duty <= 1, "energy.dram_refresh_duty", "must be in [0, 1]");

  require(write_weight >= 1, "monitor.write_weight", "must be at least 1");
  require(interval_cycles >= 100'000, "monitor.interval_cycles", "must be >= 1e5");

  require(Rational{0, 1} < migration_bandwidth_gbps, "migration.bandwidth_gbps", "must be strictly positive");
  require(clflush_cycles > 0, "migration.clflush_cycles", "latency must be strictly positive");
  require(threshold_max >= hot_threshold, "migration.threshold_max", "must be >= migration.hot_threshold");
  require(threshold_step > 0, "migration.threshold_step", "must be positive");
  require(traffic_low_fraction >= 0 && traffic_low_fraction <= traffic_high_fraction, "migration.traffic_low_fraction",
          "must be in [0, traffic_high_fraction]");

  t_dr = ns_to_cycles(dram_read_ns, cpu_freq_ghz);
  t_dw = ns_to_cycles(dram_write_ns, cpu_freq_ghz);
  t_nr = ns_to_cycles(nvm_read_ns, cpu_freq_ghz);
  t_nw = ns_to_cycles(nvm_write_ns, cpu_freq_ghz);
  require(t_dr > 0 && t_dw > 0 && t_nr > 0 && t_nw > 0, "cpu.freq_ghz", "device latencies round to zero cycles");

  // Page copy = transfer at the migration bandwidth (bytes/ns) plus one read and one write.
  uint64_t transfer = ns_to_cycles(Rational::from_int(kSmallPageBytes) / migration_bandwidth_gbps, cpu_freq_ghz);
  t_mig = t_mig_override ? t_mig_override : transfer + t_nr + t_dw;
  t_writeback = t_writeback_override ? t_writeback_override : transfer + t_dr + t_nw;
}

SimConfig default_config()
{
  SimConfig c;
  c.finalize();
  return c;
}

void apply_setting(SimConfig& cfg, std::string_view key, std::string_view value)
{
  const auto& table = key_table();
  auto it = table.find(std::string(key));
  if (it == table.end())
    throw ConfigError("unknown key '" + std::string(key) + "'");
  try {
    it->second.set(cfg, trim(value));
  } catch (const std::exception& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

SimConfig parse_config(std::string_view text)
{
  SimConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::string body = trim(line);
    if (body.empty())
      continue;
    auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'section.key = value'");
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'section.key = value'");
    apply_setting(cfg, key, value);
  }
  cfg.finalize();
  return cfg;
}

SimConfig load_config(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::map<std::string, std::string> config_entries(const SimConfig& cfg)
{
  std::map<std::string, std::string> out;
  for (const auto& [name, key] : key_table())
    out[name] = key.get(cfg);
  return out;
}

} // namespace rainbow
