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

#include "rainbow/dramcache.hpp"

using namespace rainbow;

namespace {

// Worked-example latencies with the migration cost the examples assume.
CostModel example_model()
{
  CostModel m = CostModel::from_config(default_config());
  m.t_mig = 1379;
  m.t_writeback = 1379;
  return m;
}

SimConfig small_dram(uint64_t frames)
{
  SimConfig c = default_config();
  c.dram_capacity_bytes = frames * kSmallPageBytes;
  return c; // frame counts below 512 are not a valid file setting but are fine here
}

bool agrees(const DramManager& dm, const MigrationMap& map)
{
  bool ok = map.backing().total_set() == dm.occupied();
  dm.for_each_resident([&](uint64_t, const DramManager::Resident& r) { ok = ok && map.migrated(r.key.psn, r.key.idx); });
  return ok && dm.consistent();
}

} // namespace

TEST_CASE("migration benefit")
{
  CostModel m = example_model();
  CHECK(benefit(0, 0, m) == -1379);
  CHECK(benefit(100, 10, m) == 5081);
  CHECK(benefit(200, 10, m) - benefit(100, 10, m) == 19 * 100);
}

TEST_CASE("swap benefit")
{
  CostModel m = example_model();
  CHECK(swap_benefit(30, 7, 30, 7, m) == -1379 - 1379);
  CHECK(swap_benefit(120, 9, 0, 0, m) == benefit(120, 9, m) - m.t_writeback);
  CHECK(swap_benefit(200, 20, 50, 5, m) == 6932);
}

TEST_CASE("cost formulas agree with an independent oracle")
{
  Rng rng(77);
  for (int i = 0; i < 10000; ++i) {
    CostModel m;
    m.t_dr = int64_t(rng.below(200));
    m.t_dw = int64_t(rng.below(300));
    m.t_nr = m.t_dr + int64_t(rng.below(300));
    m.t_nw = m.t_dw + int64_t(rng.below(2000));
    m.t_mig = int64_t(rng.below(1u << 20));
    m.t_writeback = int64_t(rng.below(1u << 20));
    uint64_t r2 = rng.below(1u << 20), w2 = rng.below(1u << 20), r1 = rng.below(1u << 20), w1 = rng.below(1u << 20);
    // Oracle in 128-bit arithmetic, written out term by term.
    __int128 e1 = __int128(m.t_nr - m.t_dr) * __int128(r2) + __int128(m.t_nw - m.t_dw) * __int128(w2) - m.t_mig;
    __int128 e2 = __int128(m.t_nr - m.t_dr) * (__int128(r2) - __int128(r1)) +
                  __int128(m.t_nw - m.t_dw) * (__int128(w2) - __int128(w1)) - m.t_mig - m.t_writeback;
    REQUIRE(__int128(benefit(r2, w2, m)) == e1);
    REQUIRE(__int128(swap_benefit(r2, w2, r1, w1, m)) == e2);
    REQUIRE(swap_benefit(r2, w2, 0, 0, m) == benefit(r2, w2, m) - m.t_writeback);
  }
}

TEST_CASE("threshold adjustment")
{
  CostModel m = CostModel::from_config(default_config());
  m.threshold = 8000;
  m.initial_threshold = 1000;
  m.max_threshold = 20000;
  SUBCASE("no traffic decays toward the initial value")
  {
    CHECK(adjust_threshold(m, 0) == 4000);
    CHECK(adjust_threshold(m, 0) == 2000);
    CHECK(adjust_threshold(m, 0) == 1000);
    CHECK(adjust_threshold(m, 0) == 1000);
  }
  SUBCASE("traffic equal to DRAM capacity doubles")
  {
    CHECK(adjust_threshold(m, m.dram_capacity_bytes) == 16000);
    CHECK(adjust_threshold(m, m.dram_capacity_bytes) == 20000);
    CHECK(adjust_threshold(m, m.dram_capacity_bytes) == 20000);
  }
  SUBCASE("mid-band traffic leaves it alone")
  {
    CHECK(adjust_threshold(m, m.dram_capacity_bytes / 10) == 8000);
  }
  SUBCASE("a zero threshold still rises by one step")
  {
    m.threshold = m.initial_threshold = 0;
    CHECK(adjust_threshold(m, m.dram_capacity_bytes) == m.threshold_step);
  }
}

TEST_CASE("migrate and evict charges")
{
  SimConfig cfg = small_dram(2);
  SplitTlb tlb(cfg);
  MigrationMap map(cfg);
  DramCache cache(cfg, {1, true, false, PageSize::Small4K}, tlb, &map);

  SUBCASE("free frame: copy plus clflush only")
  {
    MigrationResult r = cache.migrate_page({1, 2}, 100);
    CHECK_FALSE(r.victim.has_value());
    CHECK(r.charged_cycles() == cfg.t_mig + cfg.clflush_cycles);
    CHECK(r.traffic_bytes == 4096);
    CHECK(map.migrated(1, 2));
    CHECK_THROWS_AS(cache.migrate_page({1, 2}, 100), std::logic_error);
  }
  SUBCASE("only dirty frames left: dirty victim written back and shot down")
  {
    MigrationResult a = cache.migrate_page({1, 0}, 10);
    MigrationResult b = cache.migrate_page({1, 1}, 11);
    cache.manager().mark_dirty(a.frame);
    cache.manager().mark_dirty(b.frame);
    tlb.fill(PageSize::Small4K, 10, a.frame, 1); // another core holds the victim's mapping
    MigrationResult c = cache.migrate_page({1, 2}, 12);
    REQUIRE(c.victim.has_value());
    CHECK(c.victim->dirty);
    CHECK(c.victim->key == PageKey{1, 0});
    CHECK(c.charged_cycles() == cfg.t_mig + cfg.clflush_cycles + cfg.t_writeback + cfg.shootdown_cycles);
    CHECK(c.traffic_bytes == 8192);
    CHECK_FALSE(map.migrated(1, 0));
    CHECK_FALSE(tlb.present_anywhere(PageSize::Small4K, 10));
    CHECK(agrees(cache.manager(), map));
  }
  SUBCASE("clean eviction restores the redirect")
  {
    MigrationResult a = cache.migrate_page({1, 0}, 10);
    EvictionResult e = cache.evict_page(a.frame);
    CHECK_FALSE(e.dirty);
    CHECK(e.charges.total() == cfg.t_nw + cfg.local_invalidate_cycles);
    CHECK(e.traffic_bytes == 0);
    CHECK_THROWS_AS(cache.evict_page(a.frame), std::logic_error);
  }
  SUBCASE("dirty eviction")
  {
    MigrationResult a = cache.migrate_page({1, 0}, 10);
    cache.manager().mark_dirty(a.frame);
    EvictionResult e = cache.evict_page(a.frame);
    CHECK(e.charges.total() == cfg.t_writeback + cfg.local_invalidate_cycles);
    CHECK(e.traffic_bytes == 4096);
  }
  SUBCASE("evict then migrate again")
  {
    MigrationResult a = cache.migrate_page({1, 0}, 10);
    cache.evict_page(a.frame);
    CHECK_FALSE(map.migrated(1, 0));
    cache.migrate_page({1, 0}, 10);
    CHECK(map.migrated(1, 0));
    CHECK(agrees(cache.manager(), map));
  }
  SUBCASE("clean frames are preferred over dirty ones")
  {
    MigrationResult a = cache.migrate_page({1, 0}, 10);
    cache.migrate_page({1, 1}, 11);
    cache.manager().mark_dirty(a.frame);
    MigrationResult c = cache.migrate_page({1, 2}, 12);
    REQUIRE(c.victim.has_value());
    CHECK(c.victim->key == PageKey{1, 1});
  }
}

TEST_CASE("zero DRAM refuses migration")
{
  SimConfig cfg = default_config();
  cfg.dram_capacity_bytes = 0;
  SplitTlb tlb(cfg);
  DramCache cache(cfg, {}, tlb, nullptr);
  CHECK_THROWS_AS(cache.migrate_page({0, 0}, 0), std::logic_error);
}

TEST_CASE("random migrate/evict/dirty keeps the partition, bijection and bitmap agreement")
{
  SimConfig cfg = small_dram(64);
  SplitTlb tlb(cfg);
  MigrationMap map(cfg);
  DramCache cache(cfg, {1, true, false, PageSize::Small4K}, tlb, &map);
  Rng rng(31);
  for (int i = 0; i < 20000; ++i) {
    PageKey k{rng.below(4), static_cast<unsigned>(rng.below(64))};
    DramManager& dm = cache.manager();
    switch (rng.below(3)) {
    case 0:
      if (!dm.frame_of(k))
        cache.migrate_page(k, (k.psn << 9) | k.idx);
      break;
    case 1:
      if (auto f = dm.frame_of(k))
        cache.evict_page(*f);
      break;
    default:
      if (auto f = dm.frame_of(k))
        dm.mark_dirty(*f);
    }
    REQUIRE(dm.free_count() + dm.clean_count() + dm.dirty_count() == dm.total_frames());
    REQUIRE(agrees(dm, map));
  }
  std::set<uint64_t> frames;
  cache.manager().for_each_resident([&](uint64_t f, const DramManager::Resident& r) {
    CHECK(frames.insert(f).second);
    CHECK(cache.manager().frame_of(r.key) == f);
  });
}
