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
#include <map>
#include <unordered_map>
#include <vector>

#include "rainbow/core.hpp"
#include "rainbow/dramcache.hpp"

namespace rainbow {

inline constexpr uint16_t kSuperpageCounterMax = 0xFFFF;
inline constexpr uint16_t kFineValueMax = 0x7FFF;
inline constexpr uint16_t kFineOverflowBit = 0x8000;
inline constexpr uint64_t kFineTableBytes = 4 + kPagesPerSuperpage * 2;

// Stage 1: one 16-bit saturating counter per physical superpage.
class SuperpageCounterTable {
public:
  void record(uint64_t psn, Op op, unsigned write_weight);
  uint16_t count(uint64_t psn) const;
  void reset() { counters_.clear(); }
  const std::unordered_map<uint64_t, uint16_t>& counters() const { return counters_; }

private:
  std::unordered_map<uint64_t, uint16_t> counters_;
};

// Highest counters first; equal counters in ascending PSN order. Zero counters never qualify.
std::vector<uint64_t> select_top_n(const SuperpageCounterTable& table, size_t n);

// Stage 2: per-small-page counters of one monitored superpage. Each 16-bit slot holds a
// 15-bit saturating value and an overflow flag. Exact read/write tallies ride alongside
// for the cost model; they are not part of the hardware footprint.
class FineGrainTable {
public:
  explicit FineGrainTable(uint32_t psn = 0) : psn_(psn) {}

  void record(unsigned idx, Op op, unsigned write_weight);

  uint32_t psn() const { return psn_; }
  uint16_t value(unsigned idx) const { return slots_[idx] & kFineValueMax; }
  bool overflow(unsigned idx) const { return (slots_[idx] & kFineOverflowBit) != 0; }
  uint16_t raw(unsigned idx) const { return slots_[idx]; }
  uint64_t reads(unsigned idx) const { return reads_[idx]; }
  uint64_t writes(unsigned idx) const { return writes_[idx]; }

private:
  uint32_t psn_;
  std::array<uint16_t, kPagesPerSuperpage> slots_{};
  std::array<uint32_t, kPagesPerSuperpage> reads_{};
  std::array<uint32_t, kPagesPerSuperpage> writes_{};
};

// Tables for the monitored superpages, ordered by PSN.
class FineGrainSet {
public:
  FineGrainSet() = default;
  explicit FineGrainSet(const std::vector<uint64_t>& monitored);

  bool monitors(uint64_t psn) const { return tables_.count(psn) != 0; }
  const FineGrainTable* table(uint64_t psn) const;
  const std::map<uint64_t, FineGrainTable>& tables() const { return tables_; }
  size_t size() const { return tables_.size(); }
  uint64_t footprint_bytes() const { return kFineTableBytes * tables_.size(); }

  friend void record_small_access(FineGrainSet& set, uint64_t psn, unsigned idx, Op op, unsigned write_weight);

private:
  std::map<uint64_t, FineGrainTable> tables_;
};

// Unmonitored superpages are ignored.
void record_small_access(FineGrainSet& set, uint64_t psn, unsigned idx, Op op, unsigned write_weight);

struct HotPage {
  uint64_t psn = 0;
  unsigned idx = 0;
  uint64_t reads = 0;
  uint64_t writes = 0;
  int64_t benefit = 0;
  bool overflow = false;

  friend bool operator==(const HotPage&, const HotPage&) = default;
};

using HotClassification = std::vector<HotPage>;

// Pages with benefit above threshold, plus any page whose counter overflowed. Sorted by
// benefit descending, then (psn, idx) ascending.
HotClassification classify_hot(const FineGrainSet& tables, int64_t threshold, const CostModel& model);

// Whole-superpage variant: tallies summed over the 512 small pages.
HotClassification classify_hot_superpages(const FineGrainSet& tables, int64_t threshold, const CostModel& model);

// Alternating two-stage monitor. A superpage-counting interval chooses the top-N set that
// the following small-page interval watches; the small-page interval ends in a
// classification and a full reset.
class TwoStageMonitor {
public:
  enum class Phase : uint8_t { Superpages, SmallPages };

  TwoStageMonitor(unsigned top_n, unsigned write_weight) : top_n_(top_n), write_weight_(write_weight) {}

  void record(uint64_t psn, unsigned idx, Op op);

  // Ends the current interval. Returns the stage-2 tables when a small-page interval ends.
  std::optional<FineGrainSet> end_interval();
  void reset_interval();

  Phase phase() const { return phase_; }
  const SuperpageCounterTable& superpage_counters() const { return stage1_; }
  const FineGrainSet& fine_tables() const { return stage2_; }
  const std::vector<uint64_t>& monitored() const { return monitored_; }
  unsigned top_n() const { return top_n_; }
  unsigned write_weight() const { return write_weight_; }

private:
  unsigned top_n_;
  unsigned write_weight_;
  Phase phase_ = Phase::Superpages;
  SuperpageCounterTable stage1_;
  FineGrainSet stage2_;
  std::vector<uint64_t> monitored_;
};

} // namespace rainbow
