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

#include <algorithm>
#include <map>

#include "rainbow/monitor.hpp"

using namespace rainbow;

TEST_CASE("superpage counters weight writes and saturate")
{
  SuperpageCounterTable t;
  t.record(3, Op::Read, 4);
  CHECK(t.count(3) == 1);

  SuperpageCounterTable w;
  w.record(3, Op::Write, 4);
  CHECK(w.count(3) == 4);

  SuperpageCounterTable s;
  for (int i = 0; i < 70000; ++i)
    s.record(9, Op::Read, 4);
  CHECK(s.count(9) == 65535);
  CHECK(s.count(10) == 0);
}

TEST_CASE("select_top_n")
{
  SuperpageCounterTable t;
  for (int i = 0; i < 10; ++i)
    t.record(5, Op::Read, 4);
  for (int i = 0; i < 3; ++i)
    t.record(7, Op::Read, 4);
  CHECK(select_top_n(t, 1) == std::vector<uint64_t>{5});

  SuperpageCounterTable tie;
  for (int i = 0; i < 10; ++i) {
    tie.record(7, Op::Read, 4);
    tie.record(5, Op::Read, 4);
  }
  CHECK(select_top_n(tie, 1) == std::vector<uint64_t>{5});
  CHECK(select_top_n(tie, 5) == std::vector<uint64_t>{5, 7});

  SuperpageCounterTable empty;
  CHECK(select_top_n(empty, 100).empty());
}

TEST_CASE("select_top_n matches a stable-sort oracle")
{
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    SuperpageCounterTable t;
    std::map<uint64_t, uint64_t> shadow;
    for (int i = 0; i < 2000; ++i) {
      uint64_t psn = rng.below(300);
      Op op = rng.chance(0.3) ? Op::Write : Op::Read;
      t.record(psn, op, 4);
      shadow[psn] = std::min<uint64_t>(shadow[psn] + (op == Op::Write ? 4 : 1), 65535);
    }
    std::vector<std::pair<uint64_t, uint64_t>> v(shadow.begin(), shadow.end()); // ascending psn
    std::stable_sort(v.begin(), v.end(), [](auto& a, auto& b) { return a.second > b.second; });
    size_t n = rng.below(120);
    std::vector<uint64_t> expect;
    for (size_t i = 0; i < std::min(n, v.size()); ++i)
      expect.push_back(v[i].first);
    REQUIRE(select_top_n(t, n) == expect);
  }
}

TEST_CASE("fine-grain counters")
{
  FineGrainSet set(std::vector<uint64_t>{4});
  record_small_access(set, 4, 10, Op::Read, 4);
  CHECK(set.table(4)->value(10) == 1);
  CHECK_FALSE(set.table(4)->overflow(10));

  for (int i = 0; i < 40000; ++i)
    record_small_access(set, 4, 11, Op::Read, 4);
  CHECK(set.table(4)->value(11) == 32767);
  CHECK(set.table(4)->overflow(11));
  CHECK(set.table(4)->reads(11) == 40000);

  FineGrainSet before = set;
  record_small_access(set, 99, 10, Op::Write, 4); // unmonitored
  CHECK(set.tables().size() == before.tables().size());
  for (unsigned i = 0; i < kPagesPerSuperpage; ++i)
    CHECK(set.table(4)->raw(i) == before.table(4)->raw(i));
  CHECK(set.table(99) == nullptr);

  CHECK(kFineTableBytes == 1028);
  FineGrainSet many(std::vector<uint64_t>{1, 2, 3});
  CHECK(many.footprint_bytes() == 3 * 1028);
}

TEST_CASE("classify_hot")
{
  CostModel m = CostModel::from_config(default_config());
  m.t_mig = 1379; // the figure the worked example assumes

  SUBCASE("untouched pages are never hot")
  {
    FineGrainSet set(std::vector<uint64_t>{1});
    CHECK(classify_hot(set, -1'000'000, m).empty());
  }
  SUBCASE("an overflowed counter is hot whatever the threshold")
  {
    FineGrainSet set(std::vector<uint64_t>{1});
    for (int i = 0; i < 33000; ++i)
      record_small_access(set, 1, 2, Op::Read, 4);
    HotClassification hot = classify_hot(set, INT64_MAX, m);
    REQUIRE(hot.size() == 1);
    CHECK(hot[0].idx == 2);
    CHECK(hot[0].overflow);
  }
  SUBCASE("C_r = 100, C_w = 10 at threshold 0")
  {
    FineGrainSet set(std::vector<uint64_t>{1});
    for (int i = 0; i < 100; ++i)
      record_small_access(set, 1, 7, Op::Read, 4);
    for (int i = 0; i < 10; ++i)
      record_small_access(set, 1, 7, Op::Write, 4);
    HotClassification hot = classify_hot(set, 0, m);
    REQUIRE(hot.size() == 1);
    CHECK(hot[0].reads == 100);
    CHECK(hot[0].writes == 10);
    CHECK(hot[0].benefit == 19 * 100 + 456 * 10 - 1379);
  }
  SUBCASE("exactly the pages above threshold, sorted by benefit")
  {
    FineGrainSet set(std::vector<uint64_t>{1, 2});
    Rng rng(3);
    for (int i = 0; i < 20000; ++i)
      record_small_access(set, 1 + rng.below(2), static_cast<unsigned>(rng.below(40)), rng.chance(0.2) ? Op::Write : Op::Read, 4);
    int64_t threshold = 500;
    HotClassification hot = classify_hot(set, threshold, m);
    size_t expected = 0;
    for (uint64_t psn : {1, 2})
      for (unsigned idx = 0; idx < kPagesPerSuperpage; ++idx) {
        const FineGrainTable* t = set.table(psn);
        int64_t b = (m.t_nr - m.t_dr) * int64_t(t->reads(idx)) + (m.t_nw - m.t_dw) * int64_t(t->writes(idx)) - m.t_mig;
        if ((t->reads(idx) || t->writes(idx)) && b > threshold)
          ++expected;
      }
    CHECK(hot.size() == expected);
    for (size_t i = 0; i < hot.size(); ++i) {
      CHECK(hot[i].benefit > threshold);
      if (i)
        CHECK(hot[i - 1].benefit >= hot[i].benefit);
    }
    CHECK(classify_hot(set, threshold, m) == hot);
  }
}

TEST_CASE("two-stage monitor alternates and resets")
{
  TwoStageMonitor mon(2, 4);
  CHECK(mon.phase() == TwoStageMonitor::Phase::Superpages);
  for (int i = 0; i < 5; ++i)
    mon.record(10, 0, Op::Read);
  for (int i = 0; i < 3; ++i)
    mon.record(20, 0, Op::Read);
  mon.record(30, 0, Op::Read);
  CHECK_FALSE(mon.end_interval().has_value());
  CHECK(mon.phase() == TwoStageMonitor::Phase::SmallPages);
  CHECK(mon.monitored() == std::vector<uint64_t>{10, 20});

  mon.record(10, 4, Op::Write);
  mon.record(30, 4, Op::Write); // not monitored this round
  auto tables = mon.end_interval();
  REQUIRE(tables.has_value());
  CHECK(tables->size() == 2);
  CHECK(tables->table(10)->writes(4) == 1);
  CHECK(tables->table(30) == nullptr);
  CHECK(mon.phase() == TwoStageMonitor::Phase::Superpages);
  CHECK(select_top_n(mon.superpage_counters(), 100).empty());
  CHECK(mon.monitored().empty());
}

TEST_CASE("identical intervals select identical top-N")
{
  auto interval = [](TwoStageMonitor& m) {
    Rng rng(8);
    for (int i = 0; i < 5000; ++i)
      m.record(rng.below(500), 0, rng.chance(0.5) ? Op::Write : Op::Read);
    m.end_interval();
    return m.monitored();
  };
  TwoStageMonitor a(20, 4);
  std::vector<uint64_t> first = interval(a);
  a.end_interval();
  CHECK(interval(a) == first);
}
