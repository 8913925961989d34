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

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rainbow/core.hpp"
#include "rainbow/dramcache.hpp"
#include "rainbow/set_assoc.hpp"
#include "rainbow/tlb.hpp"
#include "rainbow/workload.hpp"

namespace rainbow {

class SimulationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Physical 4 KB frame on one device.
struct Placement {
  Device device = Device::Nvm;
  uint64_t frame = 0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

inline uint64_t physical_address(Placement p, unsigned offset = 0)
{
  return (p.device == Device::Nvm ? uint64_t{1} << 62 : 0) | (p.frame << kSmallPageShift) | offset;
}

// Shared last-level cache used only to decide which references reach memory.
class LlcFilter {
public:
  LlcFilter(uint64_t bytes, unsigned ways, unsigned line_bytes, uint64_t latency);
  explicit LlcFilter(const SimConfig& cfg) : LlcFilter(cfg.llc_bytes, cfg.llc_ways, cfg.llc_line_bytes, cfg.llc_latency) {}

  bool access(uint64_t phys_addr); // true on hit; misses allocate
  void invalidate_page(Placement page);
  bool contains(uint64_t phys_addr) const { return lines_.contains(phys_addr >> line_shift_); }

  uint64_t latency() const { return latency_; }
  uint64_t hits() const { return hits_; }
  uint64_t misses() const { return misses_; }

private:
  SetAssocArray<uint8_t> lines_;
  unsigned line_bytes_;
  unsigned line_shift_;
  uint64_t latency_;
  uint64_t hits_ = 0;
  uint64_t misses_ = 0;
};

enum class TranslationCategory : uint8_t { Tlb, BitmapHit, BitmapMiss, Walk4K, Walk2M, Remap, Count };
inline constexpr size_t kTranslationCategories = static_cast<size_t>(TranslationCategory::Count);

struct DeviceEnergy {
  double read_pj = 0;
  double write_pj = 0;
  double metadata_pj = 0;  // page-table, bitmap and redirect references
  double migration_pj = 0; // page copies and write-backs

  double dynamic() const { return read_pj + write_pj + metadata_pj + migration_pj; }
};

struct EnergyLedger {
  DeviceEnergy dram;
  DeviceEnergy nvm;
  double dram_background_pj = 0;

  double total() const { return dram.dynamic() + nvm.dynamic() + dram_background_pj; }
};

struct DeviceCounters {
  uint64_t reads = 0;
  uint64_t writes = 0;
  uint64_t row_hits = 0;
  uint64_t row_misses = 0;
};

// Latency and energy of one memory device with an open-row-per-bank buffer model.
class DeviceModel {
public:
  DeviceModel(Device device, const SimConfig& cfg);

  struct Access {
    uint64_t latency;
    double energy_pj;
    bool row_hit;
  };

  Access access(uint64_t frame, Op op); // demand line access; updates the row buffer
  // Energy of `bytes` moved outside the row-buffer model: the first line pays the
  // row-miss rate, the rest the row-hit rate.
  double transfer_energy(Op op, uint64_t bytes) const;
  double line_energy(Op op, bool row_hit) const;

  Device device() const { return device_; }
  uint64_t read_latency() const { return read_; }
  uint64_t write_latency() const { return write_; }
  const DeviceCounters& counters() const { return counters_; }

private:
  Device device_;
  uint64_t read_;
  uint64_t write_;
  uint64_t row_miss_penalty_;
  std::vector<uint64_t> open_row_;
  std::array<double, 4> line_pj_{}; // [read hit, read miss, write hit, write miss]
  unsigned line_bytes_;
  DeviceCounters counters_;
};

struct SimReport {
  std::string policy;
  std::string workload;
  uint64_t seed = 0;

  uint64_t references = 0;
  uint64_t total_cycles = 0;
  uint64_t llc_hits = 0;
  uint64_t llc_misses = 0;

  TlbCounters l1_4k, l2_4k, l1_2m, l2_2m;
  uint64_t translation_misses = 0; // references for which no pipe hit
  std::array<uint64_t, 4> cases{};
  uint64_t translation_only = 0; // LLC hits: translated, no memory access

  std::array<uint64_t, kTranslationCategories> translation{};
  uint64_t llc_cycles = 0;
  uint64_t device_cycles = 0;
  MigrationCharges migration;

  uint64_t bitmap_hits = 0;
  uint64_t bitmap_misses = 0;
  DeviceCounters dram, nvm;

  uint64_t migrations = 0;
  uint64_t clean_evictions = 0;
  uint64_t dirty_evictions = 0;
  uint64_t migration_traffic_bytes = 0;

  EnergyLedger energy;
  double charged_energy_pj = 0; // sum of per-event charges, for closure
  uint64_t dram_bytes = 0;      // DRAM capacity the background term was scaled for

  // DRAM-page addressing through the redirect: LLC misses to migrated pages that missed
  // the 4 KB TLB, how many of them hit the superpage TLB, and the cycles they cost.
  uint64_t dram_addr_events = 0;
  uint64_t dram_addr_sp_hits = 0;
  uint64_t dram_addr_cycles = 0;

  uint64_t intervals = 0;
  int64_t final_threshold = 0;

  uint64_t translation_cycles() const;
  uint64_t migration_cycles() const { return migration.total(); }
  double mpkr() const { return references ? 1000.0 * static_cast<double>(translation_misses) / static_cast<double>(references) : 0; }
  double cycles_per_kref() const
  {
    return references ? 1000.0 * static_cast<double>(total_cycles) / static_cast<double>(references) : 0;
  }
  double superpage_hit_rate() const; // R_hit over all superpage-pipe lookups
  double translation_share(TranslationCategory c) const;
};

// total = translation + LLC + device + migration charges.
bool cycles_closed(const SimReport& r);
// ledger total = per-event charges + background, to 1e-9 relative.
bool energy_closed(const SimReport& r);

struct StepCharge {
  uint64_t cycles = 0;
  double energy_pj = 0;
  int addressing_case = 0; // 1..4
  bool llc_hit = false;
};

// Services a policy uses to charge time and energy for one reference or one migration.
class MemorySystem {
public:
  MemorySystem(const SimConfig& cfg, TlbPipes pipes);

  const SimConfig& config() const { return cfg_; }

  void charge_llc();
  void charge_translation(TranslationCategory c, uint64_t cycles);
  DeviceModel::Access device_access(Placement p, Op op);
  // Page-table, bitmap and redirect references: one row-miss line each. Time is charged
  // separately through charge_translation.
  void metadata_access(Device d, Op op, unsigned lines = 1);
  void transfer(Device d, Op op, uint64_t bytes); // migration traffic energy
  void charge_migration(const MigrationCharges& charges);
  void note_dram_addressing(bool superpage_hit, uint64_t cycles);

  SplitTlb tlb;
  LlcFilter llc;
  DeviceModel dram;
  DeviceModel nvm;

  uint64_t clock() const { return clock_; }
  SimReport& report() { return report_; }
  const SimReport& report() const { return report_; }

  void begin_reference();
  StepCharge end_reference();
  void finish(uint64_t dram_bytes);

private:
  DeviceModel& device(Device d) { return d == Device::Dram ? dram : nvm; }
  DeviceEnergy& ledger(Device d) { return d == Device::Dram ? report_.energy.dram : report_.energy.nvm; }
  void add_energy(double pj);

  const SimConfig& cfg_;
  uint64_t clock_ = 0;
  StepCharge current_;
  SimReport report_;
};

// Engine hooks implemented by each placement/migration policy.
class Policy {
public:
  virtual ~Policy() = default;

  virtual TlbPipes pipes() const = 0;
  virtual uint64_t dram_bytes() const = 0;
  // Authoritative current location of the page; may allocate on first touch. Uncharged.
  virtual Placement place(const TraceRecord& rec) = 0;
  // The reference hit the LLC: update translation state only.
  virtual void on_llc_hit(const TraceRecord& rec, const TranslationOutcome& tlb, Placement where, MemorySystem& ms) = 0;
  // The reference goes to memory: charge translation and device access.
  virtual void on_llc_miss(const TraceRecord& rec, const TranslationOutcome& tlb, Placement where, MemorySystem& ms) = 0;
  virtual void end_interval(MemorySystem& ms) = 0;
  virtual void finish(SimReport& report) const = 0;
  // Cross-structure invariants (list partition, remap bijection, bitmap agreement).
  virtual bool consistent() const { return true; }
};

enum class PolicyKind : uint8_t;
struct PolicySpec;

class Engine {
public:
  Engine(const SimConfig& cfg, const PolicySpec& spec);
  ~Engine();

  StepCharge step(const TraceRecord& rec);
  SimReport finish();

  const MemorySystem& memory() const { return *ms_; }
  MemorySystem& memory() { return *ms_; }
  Policy& policy() { return *policy_; }
  uint64_t next_boundary() const { return next_boundary_; }

private:
  SimConfig cfg_;
  std::unique_ptr<Policy> policy_;
  std::unique_ptr<MemorySystem> ms_;
  uint64_t next_boundary_;
  uint64_t intervals_ = 0;
};

SimReport run(TraceSource& source, const PolicySpec& spec, const SimConfig& cfg);

// Analytical DRAM-page addressing cost: superpage-TLB redirect versus a 4-level walk.
struct AddressingCost {
  double rainbow = 0;
  double walk = 0;
};
AddressingCost analytical_dram_addressing_cost(double r_hit, double t_nr, double t_dr);

} // namespace rainbow
