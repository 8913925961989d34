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

#include <doctest.h>

#include <map>
#include <set>
#include <vector>

#include "rainbow/migmap.hpp"

using namespace rainbow;

TEST_CASE("lookup latency and fill")
{
  MigrationMap m(4000, 8, 9, 62);
  BitmapLookup cold = m.is_migrated(12, 0);
  CHECK(cold == BitmapLookup{false, 9 + 62, false});
  CHECK(m.is_migrated(12, 0) == BitmapLookup{false, 9, true});
  m.set_migrated(12, 3);
  CHECK(m.is_migrated(12, 3).flag);
  CHECK(m.capacity_bytes() == 272000);
  CHECK(MigrationMap(default_config()).capacity_bytes() == 272000);
}

TEST_CASE("set and clear touch one bit")
{
  MigrationMap m(4000, 8, 9, 62);
  m.set_migrated(1, 5);
  m.clear_migrated(1, 5);
  CHECK_FALSE(m.is_migrated(1, 5).flag);

  m.set_migrated(2, 511);
  SmallPageBits b = m.backing().bits(2);
  CHECK(b.count() == 1);
  CHECK(b.test(511));

  for (unsigned i = 0; i < 512; ++i)
    m.set_migrated(3, i);
  CHECK(m.backing().popcount(3) == 512);
}

TEST_CASE("fill on superpage TLB miss")
{
  MigrationMap m(16, 8, 9, 62); // 2 sets
  SUBCASE("absent psn into a non-full set")
  {
    m.cache_fill_on_sptlb_miss(0);
    CHECK(m.cached(0));
    CHECK(m.is_migrated(0, 0).hit);
  }
  SUBCASE("ninth psn of one set evicts the LRU")
  {
    for (uint64_t k = 0; k < 8; ++k)
      m.cache_fill_on_sptlb_miss(k * 2);
    m.cache_fill_on_sptlb_miss(16);
    CHECK_FALSE(m.cached(0));
    for (uint64_t k = 1; k < 8; ++k)
      CHECK(m.cached(k * 2));
  }
  SUBCASE("resident psn only refreshes")
  {
    for (uint64_t k = 0; k < 8; ++k)
      m.cache_fill_on_sptlb_miss(k * 2);
    m.cache_fill_on_sptlb_miss(0); // 0 is now most recent; 2 is LRU
    m.cache_fill_on_sptlb_miss(16);
    CHECK(m.cached(0));
    CHECK_FALSE(m.cached(2));
  }
}

TEST_CASE("recently touched entries survive seven further fills")
{
  MigrationMap m(4000, 8, 9, 62);
  Rng rng(4);
  std::map<uint64_t, std::vector<uint64_t>> history; // set -> fill order of distinct psns
  for (int i = 0; i < 20000; ++i) {
    uint64_t psn = rng.below(20000);
    m.is_migrated(psn, 0);
    auto& h = history[psn % 500];
    h.erase(std::remove(h.begin(), h.end(), psn), h.end());
    h.push_back(psn);
    // The last eight distinct psns of the set must all be resident.
    for (size_t k = h.size() > 8 ? h.size() - 8 : 0; k < h.size(); ++k)
      REQUIRE(m.cached(h[k]));
  }
}

TEST_CASE("misses are bounded by distinct superpages when nothing overflows")
{
  MigrationMap m(4000, 8, 9, 62);
  Rng rng(6);
  for (int i = 0; i < 100000; ++i)
    m.is_migrated(rng.below(500 * 8), static_cast<unsigned>(rng.below(512)));
  CHECK(m.misses() <= 4000);
  CHECK(m.hits() + m.misses() == 100000);
}

TEST_CASE("cache agrees with an uncached shadow bitmap")
{
  MigrationMap m(4000, 8, 9, 62);
  std::map<uint64_t, std::set<unsigned>> shadow;
  Rng rng(2024);
  uint64_t mismatches = 0;
  for (int i = 0; i < 100000; ++i) {
    uint64_t psn = rng.below(12000); // several times the cache reach
    unsigned idx = static_cast<unsigned>(rng.below(512));
    switch (rng.below(4)) {
    case 0:
      m.set_migrated(psn, idx);
      shadow[psn].insert(idx);
      break;
    case 1:
      m.clear_migrated(psn, idx);
      shadow[psn].erase(idx);
      break;
    case 2:
      m.cache_fill_on_sptlb_miss(psn);
      break;
    default:
      if (m.is_migrated(psn, idx).flag != (shadow[psn].count(idx) == 1))
        ++mismatches;
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("storage accounting")
{
  StorageAccounting tb = storage_accounting(1ull << 40, 100);
  CHECK(tb.bitmap_cache_bytes == 272000);
  CHECK(tb.superpage_counter_bytes == 1ull << 20);
  CHECK(tb.psn_list_bytes == 400);
  CHECK(tb.fine_counter_bytes == 100 * 1024);
  CHECK(tb.full_bitmap_bytes == 32ull << 20);

  StorageAccounting one = storage_accounting(2ull << 20, 0);
  CHECK(one.bitmap_cache_bytes == 272000);
  CHECK(one.superpage_counter_bytes == 2);
  CHECK(one.psn_list_bytes == 0);
  CHECK(one.fine_counter_bytes == 0);
}
