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
#include <list>
#include <optional>
#include <unordered_map>
#include <vector>

#include "rainbow/core.hpp"
#include "rainbow/migmap.hpp"
#include "rainbow/tlb.hpp"

namespace rainbow {

// Migration economics, all in CPU cycles.
struct CostModel {
  int64_t t_nr = 0;
  int64_t t_nw = 0;
  int64_t t_dr = 0;
  int64_t t_dw = 0;
  int64_t t_mig = 0;
  int64_t t_writeback = 0;

  int64_t threshold = 0;
  int64_t initial_threshold = 0;
  int64_t max_threshold = 0;
  int64_t threshold_step = 1;
  double traffic_high_fraction = 0.25;
  double traffic_low_fraction = 0.05;
  uint64_t dram_capacity_bytes = 0;

  // unit_pages scales the copy costs for policies that move whole superpages.
  static CostModel from_config(const SimConfig& cfg, unsigned unit_pages = 1);
};

// Cycles saved over the next interval by serving (reads, writes) from DRAM, less the copy.
int64_t benefit(uint64_t reads, uint64_t writes, const CostModel& model);

// Benefit of bringing in p2 at the price of evicting p1 (dirty write-back included).
int64_t swap_benefit(uint64_t reads_p2, uint64_t writes_p2, uint64_t reads_p1, uint64_t writes_p1, const CostModel& model);

// Same as swap_benefit with an explicit eviction cost (a clean victim only restores its redirect).
int64_t swap_benefit_with_cost(uint64_t reads_p2, uint64_t writes_p2, uint64_t reads_p1, uint64_t writes_p1,
                               int64_t eviction_cycles, const CostModel& model);

// Doubles the threshold (from at least one step) when the window's bidirectional traffic
// exceeds the high-water share of DRAM; halves it back toward the initial value below the
// low-water share.
int64_t adjust_threshold(CostModel& model, uint64_t window_swap_bytes);

struct PageKey {
  uint64_t psn = 0;
  unsigned idx = 0;

  friend bool operator==(const PageKey&, const PageKey&) = default;
};

struct PageKeyHash {
  size_t operator()(const PageKey& k) const noexcept { return std::hash<uint64_t>{}((k.psn << 9) ^ k.idx); }
};

// Frames are partitioned into free, clean and dirty lists. Clean and dirty are FIFO in
// order of arrival; the remap table is a bijection between occupied frames and pages.
class DramManager {
public:
  struct Resident {
    PageKey key;
    uint64_t vpn = 0;
    bool dirty = false;
    uint64_t reads = 0; // tallies for the current interval
    uint64_t writes = 0;
    std::list<uint64_t>::iterator pos;
  };

  explicit DramManager(uint64_t frames) : total_(frames) {}

  uint64_t total_frames() const { return total_; }
  uint64_t free_count() const { return recycled_.size() + (total_ - next_fresh_); }
  uint64_t clean_count() const { return clean_.size(); }
  uint64_t dirty_count() const { return dirty_.size(); }
  uint64_t occupied() const { return residents_.size(); }
  bool has_free() const { return free_count() > 0; }

  std::optional<uint64_t> frame_of(const PageKey& key) const;
  const Resident* resident(uint64_t frame) const;
  // Clean head first, then dirty head.
  std::optional<uint64_t> next_victim() const;

  uint64_t occupy(const PageKey& key, uint64_t vpn); // pre: has_free() and key absent
  Resident release(uint64_t frame);                  // pre: frame occupied
  void mark_dirty(uint64_t frame);
  void record_access(uint64_t frame, Op op);
  void reset_tallies();

  template <typename F> void for_each_resident(F&& fn) const
  {
    for (const auto& [frame, r] : residents_)
      fn(frame, r);
  }

  // Partition and bijection checks; returns false on any violation.
  bool consistent() const;

private:
  uint64_t total_;
  uint64_t next_fresh_ = 0;
  std::vector<uint64_t> recycled_;
  std::list<uint64_t> clean_;
  std::list<uint64_t> dirty_;
  std::unordered_map<uint64_t, Resident> residents_;
  std::unordered_map<PageKey, uint64_t, PageKeyHash> inverse_;
};

struct MigrationCharges {
  uint64_t copy = 0;      // T_mig
  uint64_t clflush = 0;
  uint64_t writeback = 0; // dirty victim T_writeback
  uint64_t restore = 0;   // clean victim: redirect bytes written back
  uint64_t shootdown = 0;

  uint64_t total() const { return copy + clflush + writeback + restore + shootdown; }
  MigrationCharges& operator+=(const MigrationCharges& o)
  {
    copy += o.copy;
    clflush += o.clflush;
    writeback += o.writeback;
    restore += o.restore;
    shootdown += o.shootdown;
    return *this;
  }
};

struct EvictionResult {
  PageKey key;
  uint64_t vpn = 0;
  uint64_t frame = 0;
  bool dirty = false;
  MigrationCharges charges;
  uint64_t traffic_bytes = 0;
};

struct MigrationResult {
  uint64_t frame = 0;
  MigrationCharges charges;
  uint64_t traffic_bytes = 0;
  std::optional<EvictionResult> victim;

  uint64_t charged_cycles() const { return charges.total(); }
};

struct DramCacheOptions {
  unsigned unit_pages = 1;          // 4 KB pages moved per migration (512 for superpages)
  bool redirect = true;             // NVM copy keeps an 8-byte pointer; bitmap tracks residency
  bool shootdown_on_migrate = false; // the page's own mapping changes on migration
  PageSize tlb_page_size = PageSize::Small4K;
};

struct DramCacheStats {
  uint64_t migrations = 0;
  uint64_t clean_evictions = 0;
  uint64_t dirty_evictions = 0;
  uint64_t traffic_bytes = 0;
  uint64_t window_swap_bytes = 0; // bidirectional traffic since the last threshold update
  MigrationCharges charges;
};

// DRAM manager plus the migrate/evict procedures and their consistency charges.
class DramCache {
public:
  DramCache(const SimConfig& cfg, DramCacheOptions options, SplitTlb& tlb, MigrationMap* bitmap);

  MigrationResult migrate_page(const PageKey& key, uint64_t vpn);
  EvictionResult evict_page(uint64_t frame);

  // Benefit of the next migration given the victim it would displace (Eq. 1 when free).
  int64_t projected_benefit(uint64_t reads, uint64_t writes) const;

  int64_t end_window(); // threshold update from the window's swap traffic

  DramManager& manager() { return manager_; }
  const DramManager& manager() const { return manager_; }
  CostModel& model() { return model_; }
  const CostModel& model() const { return model_; }
  const DramCacheStats& stats() const { return stats_; }
  uint64_t unit_bytes() const { return uint64_t{options_.unit_pages} * kSmallPageBytes; }

private:
  uint64_t shootdown(uint64_t vpn);

  DramCacheOptions options_;
  CostModel model_;
  DramManager manager_;
  SplitTlb& tlb_;
  MigrationMap* bitmap_;
  uint64_t clflush_cycles_;
  uint64_t restore_cycles_;
  DramCacheStats stats_;
};

} // namespace rainbow
