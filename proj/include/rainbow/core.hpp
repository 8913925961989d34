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

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rainbow {

// Page geometry. Only 4 KB small pages and 2 MB superpages exist.
inline constexpr unsigned kSmallPageShift = 12;
inline constexpr unsigned kSuperpageShift = 21;
inline constexpr uint64_t kSmallPageBytes = uint64_t{1} << kSmallPageShift;
inline constexpr uint64_t kSuperpageBytes = uint64_t{1} << kSuperpageShift;
inline constexpr unsigned kPagesPerSuperpage = 512;
inline constexpr uint64_t kAddressMask = (uint64_t{1} << 48) - 1;

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class TraceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct VirtualAddress {
  uint64_t raw = 0;

  constexpr uint64_t superpage() const { return raw >> kSuperpageShift; }
  constexpr unsigned small_index() const { return static_cast<unsigned>((raw >> kSmallPageShift) & (kPagesPerSuperpage - 1)); }
  constexpr unsigned offset() const { return static_cast<unsigned>(raw & (kSmallPageBytes - 1)); }
  constexpr uint64_t small_page() const { return raw >> kSmallPageShift; }

  friend constexpr bool operator==(VirtualAddress, VirtualAddress) = default;
};

struct AddressParts {
  uint64_t vsn = 0;
  unsigned idx = 0;
  unsigned offset = 0;

  friend constexpr bool operator==(const AddressParts&, const AddressParts&) = default;
};

constexpr AddressParts split_address(VirtualAddress va)
{
  return {va.superpage(), va.small_index(), va.offset()};
}

constexpr VirtualAddress join_address(const AddressParts& p)
{
  return {(p.vsn << kSuperpageShift) | (uint64_t{p.idx} << kSmallPageShift) | p.offset};
}

enum class Device : uint8_t { Dram, Nvm };
enum class PageSize : uint8_t { Small4K, Super2M };

struct PhysicalLocation {
  Device device = Device::Nvm;
  uint64_t frame = 0; // in units of page_size
  PageSize page_size = PageSize::Super2M;

  friend bool operator==(const PhysicalLocation&, const PhysicalLocation&) = default;
};

enum class Op : uint8_t { Read = 0, Write = 1 };

struct TraceRecord {
  Op op = Op::Read;
  VirtualAddress vaddr{};
  uint8_t tid = 0;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

// Exact non-negative rational used for the ns/GHz figures of the configuration.
struct Rational {
  int64_t num = 0;
  int64_t den = 1;

  static Rational parse(std::string_view text); // decimal literal, optional exponent
  static Rational from_int(int64_t v) { return {v, 1}; }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  Rational normalized() const;

  friend Rational operator*(Rational a, Rational b);
  friend Rational operator/(Rational a, Rational b);
  friend bool operator==(const Rational& a, const Rational& b);
  friend bool operator<(const Rational& a, const Rational& b);
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
};

// round(ns * freq_ghz), ties rounded up.
uint64_t ns_to_cycles(Rational ns, Rational freq_ghz);

// The single source of randomness. Range reduction is done here rather than with
// the <random> distributions so streams are identical on every standard library.
class Rng {
public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }
  uint64_t below(uint64_t bound); // uniform in [0, bound)
  double unit();                  // uniform in [0, 1)
  bool chance(double p) { return unit() < p; }

private:
  std::mt19937_64 engine_;
};

struct TlbGeometry {
  unsigned entries = 0;
  unsigned ways = 0;
  unsigned latency = 0;

  friend bool operator==(const TlbGeometry&, const TlbGeometry&) = default;
};

struct SimConfig {
  Rational cpu_freq_ghz{16, 5};
  unsigned cores = 8;

  TlbGeometry l1_4k{32, 4, 1};
  TlbGeometry l1_2m{32, 4, 1};
  TlbGeometry l2_4k{512, 8, 8};
  TlbGeometry l2_2m{512, 8, 8};
  uint64_t shootdown_cycles = 4000;
  uint64_t local_invalidate_cycles = 100;

  uint64_t llc_bytes = 8ull << 20;
  unsigned llc_ways = 16;
  unsigned llc_line_bytes = 64;
  uint64_t llc_latency = 34;

  unsigned bitmap_entries = 4000;
  unsigned bitmap_ways = 8;
  uint64_t bitmap_latency = 9;

  Rational dram_read_ns{27, 2};
  Rational dram_write_ns{57, 2};
  uint64_t dram_capacity_bytes = 4ull << 30;
  unsigned dram_banks = 32;
  uint64_t dram_row_miss_penalty = 0;

  Rational nvm_read_ns{39, 2};
  Rational nvm_write_ns{171, 1};
  uint64_t nvm_capacity_bytes = 32ull << 30;
  unsigned nvm_banks = 256;
  uint64_t nvm_row_miss_penalty = 0;

  // DRAM currents in mA at the given supply voltage, sized for dram_energy_reference_bytes.
  double dram_voltage = 1.5;
  double dram_standby_ma = 77;
  double dram_refresh_ma = 160;
  double dram_precharge_ma = 37;
  double dram_read_hit_ma = 120;
  double dram_write_hit_ma = 125;
  double dram_read_miss_ma = 237;
  double dram_write_miss_ma = 242;
  double dram_refresh_duty = 0.0333;
  uint64_t dram_energy_reference_bytes = 4ull << 30;
  // PCM dynamic energy in pJ/bit.
  double nvm_read_hit_pj_bit = 1.616;
  double nvm_write_hit_pj_bit = 1.616;
  double nvm_read_miss_pj_bit = 81.2;
  double nvm_write_miss_pj_bit = 1684.8;

  unsigned write_weight = 4;
  unsigned top_n = 100;
  uint64_t interval_cycles = 100'000'000;

  Rational migration_bandwidth_gbps{107, 10};
  uint64_t t_mig_override = 0;       // 0 = derive
  uint64_t t_writeback_override = 0; // 0 = derive
  uint64_t clflush_cycles = 512;
  int64_t hot_threshold = 0;
  int64_t threshold_max = 1 << 24;
  int64_t threshold_step = 1024;
  double traffic_high_fraction = 0.25;
  double traffic_low_fraction = 0.05;

  // Derived at validation time; all downstream arithmetic uses these integers.
  uint64_t t_dr = 0;
  uint64_t t_dw = 0;
  uint64_t t_nr = 0;
  uint64_t t_nw = 0;
  uint64_t t_mig = 0;
  uint64_t t_writeback = 0;

  uint64_t dram_frames() const { return dram_capacity_bytes / kSmallPageBytes; }

  // Validates invariants and fills the derived cycle fields. Throws ConfigError naming the key.
  void finalize();

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

SimConfig default_config(); // baseline hardware, finalized

// Applies `section.key = value` assignments. Unknown keys and bad values throw ConfigError.
void apply_setting(SimConfig& cfg, std::string_view key, std::string_view value);
SimConfig parse_config(std::string_view text);
SimConfig load_config(const std::filesystem::path& path);

// Every recognised key with its current value, in a stable order.
std::map<std::string, std::string> config_entries(const SimConfig& cfg);

} // namespace rainbow
