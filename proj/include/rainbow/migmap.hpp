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

#include <bitset>
#include <cstdint>
#include <unordered_map>

#include "rainbow/core.hpp"
#include "rainbow/set_assoc.hpp"

namespace rainbow {

using SmallPageBits = std::bitset<kPagesPerSuperpage>;

// Authoritative migrated flags, one 512-bit vector per physical superpage.
class MigrationBitmap {
public:
  bool test(uint64_t psn, unsigned idx) const;
  void set(uint64_t psn, unsigned idx);
  void clear(uint64_t psn, unsigned idx);
  SmallPageBits bits(uint64_t psn) const;
  size_t popcount(uint64_t psn) const { return bits(psn).count(); }
  size_t total_set() const;

private:
  std::unordered_map<uint64_t, SmallPageBits> bits_;
};

struct BitmapLookup {
  bool flag = false;
  uint64_t latency = 0;
  bool hit = false;

  friend bool operator==(const BitmapLookup&, const BitmapLookup&) = default;
};

// Controller-side cache of bitmaps plus the backing store it fronts. Set/clear are
// write-through; a miss reads the backing line from where the bitmaps live.
class MigrationMap {
public:
  MigrationMap(unsigned entries, unsigned ways, uint64_t hit_latency, uint64_t backing_read_latency);
  explicit MigrationMap(const SimConfig& cfg);

  BitmapLookup is_migrated(uint64_t psn, unsigned idx);
  void set_migrated(uint64_t psn, unsigned idx);
  void clear_migrated(uint64_t psn, unsigned idx);
  void cache_fill_on_sptlb_miss(uint64_t psn);

  // Reads the authoritative bit without touching the cache.
  bool migrated(uint64_t psn, unsigned idx) const { return backing_.test(psn, idx); }
  const MigrationBitmap& backing() const { return backing_; }
  bool cached(uint64_t psn) const { return cache_.contains(psn); }
  const SmallPageBits* cached_bits(uint64_t psn) const { return cache_.peek(psn); }

  uint64_t hits() const { return hits_; }
  uint64_t misses() const { return misses_; }
  unsigned entries() const { return entries_; }
  uint64_t capacity_bytes() const;
  const SetAssocArray<SmallPageBits>& cache() const { return cache_; }

private:
  unsigned entries_;
  uint64_t hit_latency_;
  uint64_t backing_read_latency_;
  SetAssocArray<SmallPageBits> cache_;
  MigrationBitmap backing_;
  uint64_t hits_ = 0;
  uint64_t misses_ = 0;
};

// SRAM bookkeeping for the controller-side structures.
struct StorageAccounting {
  uint64_t bitmap_cache_bytes = 0;       // entries x (4 B tag + 64 B bitmap)
  uint64_t superpage_counter_bytes = 0;  // 2 B per 2 MB of NVM
  uint64_t psn_list_bytes = 0;           // 4 B per monitored superpage
  uint64_t fine_counter_bytes = 0;       // 512 x 2 B per monitored superpage
  uint64_t full_bitmap_bytes = 0;        // all bitmaps, held in main memory (not SRAM)

  uint64_t sram_total() const { return bitmap_cache_bytes + superpage_counter_bytes + psn_list_bytes + fine_counter_bytes; }
  friend bool operator==(const StorageAccounting&, const StorageAccounting&) = default;
};

inline constexpr uint64_t kBitmapCacheEntryBytes = 4 + kPagesPerSuperpage / 8;

StorageAccounting storage_accounting(uint64_t nvm_bytes, uint64_t top_n, uint64_t bitmap_cache_entries = 4000);

} // namespace rainbow
