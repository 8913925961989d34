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
#include <optional>
#include <vector>

#include "rainbow/core.hpp"
#include "rainbow/set_assoc.hpp"

namespace rainbow {

struct TlbCounters {
  uint64_t lookups = 0;
  uint64_t hits = 0;
  uint64_t misses = 0;

  TlbCounters& operator+=(const TlbCounters& o)
  {
    lookups += o.lookups;
    hits += o.hits;
    misses += o.misses;
    return *this;
  }
  friend bool operator==(const TlbCounters&, const TlbCounters&) = default;
};

struct TlbEntry {
  uint64_t vpn;
  uint64_t frame;
};

// One translation cache level. Tags are virtual page numbers of the level's page size.
class TlbLevel {
public:
  TlbLevel() = default;
  explicit TlbLevel(const TlbGeometry& geometry);

  std::optional<uint64_t> lookup(uint64_t vpn); // counts, refreshes LRU
  std::optional<TlbEntry> fill(uint64_t vpn, uint64_t frame);
  bool invalidate(uint64_t vpn);
  bool contains(uint64_t vpn) const { return array_.contains(vpn); }
  std::optional<uint64_t> probe(uint64_t vpn) const;

  unsigned latency() const { return latency_; }
  const TlbCounters& counters() const { return counters_; }
  const SetAssocArray<uint64_t>& array() const { return array_; }

private:
  SetAssocArray<uint64_t> array_;
  unsigned latency_ = 0;
  TlbCounters counters_;
};

enum class TlbOutcome : uint8_t { Hit4K, Hit2M, MissBoth };

struct TranslationOutcome {
  TlbOutcome kind = TlbOutcome::MissBoth;
  uint64_t frame = 0;        // frame of the winning pipe
  bool hit_4k = false;       // raw per-pipe results, for case attribution
  bool hit_2m = false;
  uint64_t latency = 0;
};

struct FillResult {
  std::optional<TlbEntry> l1_victim;
  std::optional<TlbEntry> l2_victim;
};

// Which page-size pipes a policy populates. Disabled pipes are never consulted.
struct TlbPipes {
  bool small = true;
  bool super = true;
};

// Per-core L1 and shared L2 for each page size, looked up L1 then L2 with the two
// page-size pipes in parallel.
class SplitTlb {
public:
  SplitTlb(const SimConfig& cfg, TlbPipes pipes = {});

  TranslationOutcome lookup_parallel(VirtualAddress va, uint8_t tid);
  FillResult fill(PageSize size, uint64_t vpn, uint64_t frame, uint8_t tid);

  // Removes vpn from every 4 KB structure of every core. The full shootdown cost is
  // charged only if a core other than the initiator held it in its L1.
  uint64_t shootdown_4k(uint64_t vpn, unsigned initiator = 0);
  uint64_t shootdown_2m(uint64_t vsn, unsigned initiator = 0);

  // Page-table walk: 4 levels for 4 KB, 3 for 2 MB, each one read of the table device.
  static uint64_t walk_cost(PageSize size, uint64_t table_read_cycles);

  bool present_anywhere(PageSize size, uint64_t vpn) const;
  std::optional<uint64_t> probe(PageSize size, uint64_t vpn, uint8_t tid) const;

  TlbCounters l1_counters(PageSize size) const;
  TlbCounters l2_counters(PageSize size) const;
  uint64_t total_lookups() const { return lookups_; }
  TlbPipes pipes() const { return pipes_; }
  unsigned cores() const { return static_cast<unsigned>(l1_4k_.size()); }

private:
  struct PipeResult {
    bool hit = false;
    uint64_t frame = 0;
    uint64_t latency = 0;
  };
  PipeResult lookup_pipe(TlbLevel& l1, TlbLevel& l2, uint64_t vpn);
  uint64_t shootdown(std::vector<TlbLevel>& l1s, TlbLevel& l2, uint64_t vpn, unsigned initiator);
  unsigned core_of(uint8_t tid) const { return tid % cores(); }

  TlbPipes pipes_;
  std::vector<TlbLevel> l1_4k_;
  std::vector<TlbLevel> l1_2m_;
  TlbLevel l2_4k_;
  TlbLevel l2_2m_;
  uint64_t shootdown_cycles_;
  uint64_t local_invalidate_cycles_;
  uint64_t lookups_ = 0;
};

} // namespace rainbow
