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

#include "rainbow/monitor.hpp"

#include <algorithm>

namespace rainbow {

namespace {

unsigned weight_of(Op op, unsigned write_weight) { return op == Op::Write ? write_weight : 1; }

bool by_benefit(const HotPage& a, const HotPage& b)
{
  if (a.benefit != b.benefit)
    return a.benefit > b.benefit;
  if (a.psn != b.psn)
    return a.psn < b.psn;
  return a.idx < b.idx;
}

} // namespace

void SuperpageCounterTable::record(uint64_t psn, Op op, unsigned write_weight)
{
  uint16_t& c = counters_[psn];
  uint32_t next = uint32_t{c} + weight_of(op, write_weight);
  c = static_cast<uint16_t>(std::min<uint32_t>(next, kSuperpageCounterMax));
}

uint16_t SuperpageCounterTable::count(uint64_t psn) const
{
  auto it = counters_.find(psn);
  return it == counters_.end() ? 0 : it->second;
}

std::vector<uint64_t> select_top_n(const SuperpageCounterTable& table, size_t n)
{
  std::vector<std::pair<uint16_t, uint64_t>> ranked;
  ranked.reserve(table.counters().size());
  for (const auto& [psn, count] : table.counters())
    if (count > 0)
      ranked.emplace_back(count, psn);
  auto order = [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; };
  size_t keep = std::min(n, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), order);
  std::vector<uint64_t> out;
  out.reserve(keep);
  for (size_t i = 0; i < keep; ++i)
    out.push_back(ranked[i].second);
  return out;
}

void FineGrainTable::record(unsigned idx, Op op, unsigned write_weight)
{
  uint16_t& slot = slots_[idx];
  uint32_t next = uint32_t{static_cast<uint16_t>(slot & kFineValueMax)} + weight_of(op, write_weight);
  if (next > kFineValueMax)
    slot = kFineValueMax | kFineOverflowBit;
  else
    slot = static_cast<uint16_t>((slot & kFineOverflowBit) | next);
  if (op == Op::Write)
    ++writes_[idx];
  else
    ++reads_[idx];
}

FineGrainSet::FineGrainSet(const std::vector<uint64_t>& monitored)
{
  for (uint64_t psn : monitored)
    tables_.emplace(psn, FineGrainTable(static_cast<uint32_t>(psn)));
}

const FineGrainTable* FineGrainSet::table(uint64_t psn) const
{
  auto it = tables_.find(psn);
  return it == tables_.end() ? nullptr : &it->second;
}

void record_small_access(FineGrainSet& set, uint64_t psn, unsigned idx, Op op, unsigned write_weight)
{
  auto it = set.tables_.find(psn);
  if (it == set.tables_.end())
    return;
  it->second.record(idx, op, write_weight);
}

HotClassification classify_hot(const FineGrainSet& tables, int64_t threshold, const CostModel& model)
{
  HotClassification out;
  for (const auto& [psn, t] : tables.tables()) {
    for (unsigned idx = 0; idx < kPagesPerSuperpage; ++idx) {
      uint64_t r = t.reads(idx);
      uint64_t w = t.writes(idx);
      if (r == 0 && w == 0)
        continue;
      int64_t b = benefit(r, w, model);
      bool ovf = t.overflow(idx);
      if (ovf || b > threshold)
        out.push_back({psn, idx, r, w, b, ovf});
    }
  }
  std::sort(out.begin(), out.end(), by_benefit);
  return out;
}

HotClassification classify_hot_superpages(const FineGrainSet& tables, int64_t threshold, const CostModel& model)
{
  HotClassification out;
  for (const auto& [psn, t] : tables.tables()) {
    uint64_t r = 0;
    uint64_t w = 0;
    bool ovf = false;
    for (unsigned idx = 0; idx < kPagesPerSuperpage; ++idx) {
      r += t.reads(idx);
      w += t.writes(idx);
      ovf = ovf || t.overflow(idx);
    }
    if (r == 0 && w == 0)
      continue;
    int64_t b = benefit(r, w, model);
    if (ovf || b > threshold)
      out.push_back({psn, 0, r, w, b, ovf});
  }
  std::sort(out.begin(), out.end(), by_benefit);
  return out;
}

void TwoStageMonitor::record(uint64_t psn, unsigned idx, Op op)
{
  if (phase_ == Phase::Superpages)
    stage1_.record(psn, op, write_weight_);
  else
    record_small_access(stage2_, psn, idx, op, write_weight_);
}

std::optional<FineGrainSet> TwoStageMonitor::end_interval()
{
  if (phase_ == Phase::Superpages) {
    monitored_ = select_top_n(stage1_, top_n_);
    stage2_ = FineGrainSet(monitored_);
    stage1_.reset();
    phase_ = Phase::SmallPages;
    return std::nullopt;
  }
  FineGrainSet done = std::move(stage2_);
  reset_interval();
  return done;
}

void TwoStageMonitor::reset_interval()
{
  stage1_.reset();
  stage2_ = FineGrainSet();
  monitored_.clear();
  phase_ = Phase::Superpages;
}

} // namespace rainbow
