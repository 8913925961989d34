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

#include "rainbow/migmap.hpp"

namespace rainbow {

bool MigrationBitmap::test(uint64_t psn, unsigned idx) const
{
  auto it = bits_.find(psn);
  return it != bits_.end() && it->second.test(idx);
}

void MigrationBitmap::set(uint64_t psn, unsigned idx) { bits_[psn].set(idx); }

void MigrationBitmap::clear(uint64_t psn, unsigned idx)
{
  auto it = bits_.find(psn);
  if (it == bits_.end())
    return;
  it->second.reset(idx);
  if (it->second.none())
    bits_.erase(it);
}

SmallPageBits MigrationBitmap::bits(uint64_t psn) const
{
  auto it = bits_.find(psn);
  return it == bits_.end() ? SmallPageBits{} : it->second;
}

size_t MigrationBitmap::total_set() const
{
  size_t n = 0;
  for (const auto& [psn, b] : bits_)
    n += b.count();
  return n;
}

MigrationMap::MigrationMap(unsigned entries, unsigned ways, uint64_t hit_latency, uint64_t backing_read_latency)
    : entries_(entries), hit_latency_(hit_latency), backing_read_latency_(backing_read_latency), cache_(entries, ways)
{
}

// Bitmaps describe NVM superpages and live in NVM, so a miss costs one NVM read.
MigrationMap::MigrationMap(const SimConfig& cfg)
    : MigrationMap(cfg.bitmap_entries, cfg.bitmap_ways, cfg.bitmap_latency, cfg.t_nr)
{
}

BitmapLookup MigrationMap::is_migrated(uint64_t psn, unsigned idx)
{
  if (const SmallPageBits* bits = cache_.find(psn)) {
    ++hits_;
    return {bits->test(idx), hit_latency_, true};
  }
  ++misses_;
  SmallPageBits bits = backing_.bits(psn);
  cache_.insert(psn, bits);
  return {bits.test(idx), hit_latency_ + backing_read_latency_, false};
}

void MigrationMap::set_migrated(uint64_t psn, unsigned idx)
{
  backing_.set(psn, idx);
  if (SmallPageBits* bits = cache_.peek_mut(psn))
    bits->set(idx);
}

void MigrationMap::clear_migrated(uint64_t psn, unsigned idx)
{
  backing_.clear(psn, idx);
  if (SmallPageBits* bits = cache_.peek_mut(psn))
    bits->reset(idx);
}

void MigrationMap::cache_fill_on_sptlb_miss(uint64_t psn)
{
  if (cache_.find(psn))
    return;
  cache_.insert(psn, backing_.bits(psn));
}

uint64_t MigrationMap::capacity_bytes() const { return uint64_t{entries_} * kBitmapCacheEntryBytes; }

StorageAccounting storage_accounting(uint64_t nvm_bytes, uint64_t top_n, uint64_t bitmap_cache_entries)
{
  StorageAccounting s;
  uint64_t superpages = nvm_bytes / kSuperpageBytes;
  s.bitmap_cache_bytes = bitmap_cache_entries * kBitmapCacheEntryBytes;
  s.superpage_counter_bytes = superpages * 2;
  s.psn_list_bytes = top_n * 4;
  s.fine_counter_bytes = top_n * kPagesPerSuperpage * 2;
  s.full_bitmap_bytes = nvm_bytes / kSmallPageBytes / 8;
  return s;
}

} // namespace rainbow
