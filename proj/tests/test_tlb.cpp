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

#include "rainbow/set_assoc.hpp"
#include "rainbow/tlb.hpp"

using namespace rainbow;

namespace {

VirtualAddress va_of(uint64_t vsn, unsigned idx, unsigned off = 0) { return join_address({vsn, idx, off}); }

// No tag may appear twice within a set.
template <typename P> bool unique_tags(const SetAssocArray<P>& a)
{
  for (uint64_t s = 0; s < a.sets(); ++s) {
    std::set<uint64_t> seen;
    for (const auto& w : a.set_contents(s))
      if (w.valid && !seen.insert(w.tag).second)
        return false;
  }
  return true;
}

} // namespace

TEST_CASE("empty TLBs miss both pipes at L1 + L2 latency")
{
  SplitTlb tlb(default_config());
  TranslationOutcome o = tlb.lookup_parallel(va_of(5, 7), 0);
  CHECK(o.kind == TlbOutcome::MissBoth);
  CHECK(o.latency == 9);
  CHECK_FALSE(o.hit_4k);
  CHECK_FALSE(o.hit_2m);
}

TEST_CASE("superpage fill covers every small page of the superpage")
{
  SplitTlb tlb(default_config());
  tlb.fill(PageSize::Super2M, 5, 77, 0);
  for (unsigned idx : {0u, 1u, 300u, 511u}) {
    TranslationOutcome o = tlb.lookup_parallel(va_of(5, idx, 123), 0);
    CHECK(o.kind == TlbOutcome::Hit2M);
    CHECK(o.frame == 77);
  }
  CHECK(tlb.lookup_parallel(va_of(6, 0), 0).kind == TlbOutcome::MissBoth);
}

TEST_CASE("4 KB mapping wins when both pipes hit")
{
  SplitTlb tlb(default_config());
  VirtualAddress va = va_of(5, 9);
  tlb.fill(PageSize::Super2M, 5, 77, 0);
  tlb.fill(PageSize::Small4K, va.small_page(), 1234, 0);
  TranslationOutcome o = tlb.lookup_parallel(va, 0);
  CHECK(o.kind == TlbOutcome::Hit4K);
  CHECK(o.frame == 1234);
  CHECK(o.hit_2m);
  CHECK(o.latency == 1);
}

TEST_CASE("L2 hit refills L1")
{
  SimConfig cfg = default_config();
  cfg.cores = 2;
  SplitTlb tlb(cfg);
  tlb.fill(PageSize::Super2M, 5, 77, 0);
  // Core 1 finds it only in the shared L2.
  TranslationOutcome first = tlb.lookup_parallel(va_of(5, 0), 1);
  CHECK(first.kind == TlbOutcome::Hit2M);
  CHECK(first.latency == 9);
  uint64_t l1_hits = tlb.l1_counters(PageSize::Super2M).hits;
  tlb.lookup_parallel(va_of(5, 0), 1);
  CHECK(tlb.l1_counters(PageSize::Super2M).hits == l1_hits + 1);
  // With the 4 KB pipe also holding the page the lookup costs only L1.
  tlb.fill(PageSize::Small4K, va_of(5, 0).small_page(), 1, 1);
  CHECK(tlb.lookup_parallel(va_of(5, 0), 1).latency == 1);
}

TEST_CASE("fill eviction follows LRU and is idempotent")
{
  TlbLevel level({32, 4, 1}); // 8 sets
  SUBCASE("empty set: no eviction")
  {
    CHECK_FALSE(level.fill(0, 100).has_value());
  }
  SUBCASE("fifth fill in a 4-way set evicts the LRU entry")
  {
    for (uint64_t k = 0; k < 4; ++k)
      CHECK_FALSE(level.fill(k * 8, k).has_value());
    level.lookup(0); // refresh tag 0; tag 8 becomes LRU
    auto victim = level.fill(32, 4);
    REQUIRE(victim.has_value());
    CHECK(victim->vpn == 8);
    CHECK(level.contains(0));
  }
  SUBCASE("refilling the same mapping never evicts")
  {
    for (uint64_t k = 0; k < 4; ++k)
      level.fill(k * 8, k);
    CHECK_FALSE(level.fill(16, 2).has_value());
    CHECK(level.probe(16) == 2);
  }
}

TEST_CASE("shootdown cost depends on remote residency")
{
  SimConfig cfg = default_config();
  cfg.cores = 4;
  SplitTlb tlb(cfg);
  SUBCASE("absent everywhere: local cost")
  {
    CHECK(tlb.shootdown_4k(42) == cfg.local_invalidate_cycles);
  }
  SUBCASE("present in two remote L1s: full cost, then gone everywhere")
  {
    tlb.fill(PageSize::Small4K, 42, 9, 1);
    tlb.fill(PageSize::Small4K, 42, 9, 2);
    CHECK(tlb.present_anywhere(PageSize::Small4K, 42));
    CHECK(tlb.shootdown_4k(42) == cfg.shootdown_cycles);
    // Oracle: probe every structure of every core.
    for (uint8_t t = 0; t < 4; ++t)
      CHECK_FALSE(tlb.probe(PageSize::Small4K, 42, t).has_value());
    CHECK_FALSE(tlb.present_anywhere(PageSize::Small4K, 42));
    CHECK(tlb.shootdown_4k(42) == cfg.local_invalidate_cycles);
  }
  SUBCASE("only in the initiator's L1: local cost")
  {
    tlb.fill(PageSize::Small4K, 42, 9, 0);
    CHECK(tlb.shootdown_4k(42) == cfg.local_invalidate_cycles);
  }
  SUBCASE("superpage shootdown")
  {
    tlb.fill(PageSize::Super2M, 3, 1, 3);
    CHECK(tlb.shootdown_2m(3) == cfg.shootdown_cycles);
    CHECK_FALSE(tlb.present_anywhere(PageSize::Super2M, 3));
  }
}

TEST_CASE("walk cost")
{
  CHECK(SplitTlb::walk_cost(PageSize::Small4K, 43) == 172);
  CHECK(SplitTlb::walk_cost(PageSize::Super2M, 62) == 186);
  CHECK(SplitTlb::walk_cost(PageSize::Small4K, 0) == 0);
  CHECK(SplitTlb::walk_cost(PageSize::Super2M, 0) == 0);
}

TEST_CASE("property: 4 KB priority, counter closure and one frame per vpn")
{
  SimConfig cfg = default_config();
  cfg.cores = 2;
  SplitTlb tlb(cfg);
  Rng rng(11);
  std::map<uint64_t, uint64_t> small_map; // vpn -> frame, the reference mapping
  std::map<uint64_t, uint64_t> super_map;
  uint64_t lookups = 0;
  for (int i = 0; i < 200000; ++i) {
    uint64_t vsn = rng.below(64);
    unsigned idx = static_cast<unsigned>(rng.below(8));
    uint8_t tid = static_cast<uint8_t>(rng.below(2));
    VirtualAddress va = va_of(vsn, idx);
    switch (rng.below(4)) {
    case 0: {
      uint64_t f = small_map.try_emplace(va.small_page(), rng.below(1 << 20)).first->second;
      tlb.fill(PageSize::Small4K, va.small_page(), f, tid);
      break;
    }
    case 1: {
      uint64_t f = super_map.try_emplace(vsn, rng.below(1 << 20)).first->second;
      tlb.fill(PageSize::Super2M, vsn, f, tid);
      break;
    }
    default: {
      bool had_small = tlb.probe(PageSize::Small4K, va.small_page(), tid).has_value();
      TranslationOutcome o = tlb.lookup_parallel(va, tid);
      ++lookups;
      if (had_small)
        REQUIRE(o.kind == TlbOutcome::Hit4K);
      if (o.kind == TlbOutcome::Hit4K)
        REQUIRE(o.frame == small_map.at(va.small_page()));
      if (o.kind == TlbOutcome::Hit2M)
        REQUIRE(o.frame == super_map.at(vsn));
    }
    }
  }
  for (PageSize s : {PageSize::Small4K, PageSize::Super2M}) {
    TlbCounters l1 = tlb.l1_counters(s);
    TlbCounters l2 = tlb.l2_counters(s);
    CHECK(l1.lookups == l1.hits + l1.misses);
    CHECK(l2.lookups == l2.hits + l2.misses);
    CHECK(l1.lookups == lookups);
    CHECK(l2.lookups == l1.misses);
  }
  CHECK(tlb.total_lookups() == lookups);
}

TEST_CASE("set-associative array keeps tags unique and LRU stamps distinct")
{
  SetAssocArray<int> a(64, 8);
  Rng rng(5);
  for (int i = 0; i < 50000; ++i) {
    uint64_t tag = rng.below(200);
    if (rng.below(3) == 0)
      a.invalidate(tag);
    else if (!a.find(tag))
      a.insert(tag, i);
  }
  CHECK(unique_tags(a));
  for (uint64_t s = 0; s < a.sets(); ++s) {
    std::set<uint64_t> stamps;
    for (const auto& w : a.set_contents(s))
      if (w.valid)
        CHECK(stamps.insert(w.stamp).second);
  }
  CHECK_THROWS_AS(SetAssocArray<int>(10, 4), std::invalid_argument);
}

TEST_CASE("replaying a sequence twice gives identical counters")
{
  auto replay = [] {
    SplitTlb tlb(default_config());
    Rng rng(99);
    for (int i = 0; i < 20000; ++i) {
      VirtualAddress va = va_of(rng.below(2000), static_cast<unsigned>(rng.below(512)));
      TranslationOutcome o = tlb.lookup_parallel(va, 0);
      if (o.kind == TlbOutcome::MissBoth)
        tlb.fill(PageSize::Super2M, va.superpage(), va.superpage(), 0);
    }
    return std::make_pair(tlb.l1_counters(PageSize::Super2M), tlb.l2_counters(PageSize::Super2M));
  };
  CHECK(replay() == replay());
}
