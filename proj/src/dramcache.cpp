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

#include "rainbow/dramcache.hpp"

#include <algorithm>
#include <stdexcept>

namespace rainbow {

CostModel CostModel::from_config(const SimConfig& cfg, unsigned unit_pages)
{
  CostModel m;
  m.t_nr = static_cast<int64_t>(cfg.t_nr);
  m.t_nw = static_cast<int64_t>(cfg.t_nw);
  m.t_dr = static_cast<int64_t>(cfg.t_dr);
  m.t_dw = static_cast<int64_t>(cfg.t_dw);
  m.t_mig = static_cast<int64_t>(cfg.t_mig) * unit_pages;
  m.t_writeback = static_cast<int64_t>(cfg.t_writeback) * unit_pages;
  m.threshold = cfg.hot_threshold;
  m.initial_threshold = cfg.hot_threshold;
  m.max_threshold = cfg.threshold_max;
  m.threshold_step = cfg.threshold_step;
  m.traffic_high_fraction = cfg.traffic_high_fraction;
  m.traffic_low_fraction = cfg.traffic_low_fraction;
  m.dram_capacity_bytes = cfg.dram_capacity_bytes;
  return m;
}

int64_t benefit(uint64_t reads, uint64_t writes, const CostModel& m)
{
  return (m.t_nr - m.t_dr) * static_cast<int64_t>(reads) + (m.t_nw - m.t_dw) * static_cast<int64_t>(writes) - m.t_mig;
}

int64_t swap_benefit_with_cost(uint64_t reads_p2, uint64_t writes_p2, uint64_t reads_p1, uint64_t writes_p1,
                               int64_t eviction_cycles, const CostModel& m)
{
  int64_t dr = static_cast<int64_t>(reads_p2) - static_cast<int64_t>(reads_p1);
  int64_t dw = static_cast<int64_t>(writes_p2) - static_cast<int64_t>(writes_p1);
  return (m.t_nr - m.t_dr) * dr + (m.t_nw - m.t_dw) * dw - m.t_mig - eviction_cycles;
}

int64_t swap_benefit(uint64_t reads_p2, uint64_t writes_p2, uint64_t reads_p1, uint64_t writes_p1, const CostModel& m)
{
  return swap_benefit_with_cost(reads_p2, writes_p2, reads_p1, writes_p1, m.t_writeback, m);
}

int64_t adjust_threshold(CostModel& m, uint64_t window_swap_bytes)
{
  double capacity = static_cast<double>(m.dram_capacity_bytes);
  double traffic = static_cast<double>(window_swap_bytes);
  if (traffic > m.traffic_high_fraction * capacity) {
    int64_t raised = std::max(m.threshold * 2, m.threshold + m.threshold_step);
    m.threshold = std::min(raised, m.max_threshold);
    m.threshold = std::max(m.threshold, m.initial_threshold);
  } else if (traffic < m.traffic_low_fraction * capacity) {
    m.threshold = std::max(m.initial_threshold, m.threshold / 2);
  }
  return m.threshold;
}

// ---------------------------------------------------------------------------

std::optional<uint64_t> DramManager::frame_of(const PageKey& key) const
{
  auto it = inverse_.find(key);
  if (it == inverse_.end())
    return std::nullopt;
  return it->second;
}

const DramManager::Resident* DramManager::resident(uint64_t frame) const
{
  auto it = residents_.find(frame);
  return it == residents_.end() ? nullptr : &it->second;
}

std::optional<uint64_t> DramManager::next_victim() const
{
  if (!clean_.empty())
    return clean_.front();
  if (!dirty_.empty())
    return dirty_.front();
  return std::nullopt;
}

uint64_t DramManager::occupy(const PageKey& key, uint64_t vpn)
{
  if (!has_free())
    throw std::logic_error("DramManager::occupy: no free frame");
  if (inverse_.count(key))
    throw std::logic_error("DramManager::occupy: page already resident");
  uint64_t frame;
  if (!recycled_.empty()) {
    frame = recycled_.back();
    recycled_.pop_back();
  } else {
    frame = next_fresh_++;
  }
  clean_.push_back(frame);
  Resident r;
  r.key = key;
  r.vpn = vpn;
  r.pos = std::prev(clean_.end());
  residents_.emplace(frame, r);
  inverse_.emplace(key, frame);
  return frame;
}

DramManager::Resident DramManager::release(uint64_t frame)
{
  auto it = residents_.find(frame);
  if (it == residents_.end())
    throw std::logic_error("DramManager::release: frame not occupied");
  Resident r = it->second;
  (r.dirty ? dirty_ : clean_).erase(r.pos);
  inverse_.erase(r.key);
  residents_.erase(it);
  recycled_.push_back(frame);
  return r;
}

void DramManager::mark_dirty(uint64_t frame)
{
  auto it = residents_.find(frame);
  if (it == residents_.end() || it->second.dirty)
    return;
  clean_.erase(it->second.pos);
  dirty_.push_back(frame);
  it->second.pos = std::prev(dirty_.end());
  it->second.dirty = true;
}

void DramManager::record_access(uint64_t frame, Op op)
{
  auto it = residents_.find(frame);
  if (it == residents_.end())
    return;
  if (op == Op::Write)
    ++it->second.writes;
  else
    ++it->second.reads;
}

void DramManager::reset_tallies()
{
  for (auto& [frame, r] : residents_)
    r.reads = r.writes = 0;
}

bool DramManager::consistent() const
{
  if (free_count() + clean_.size() + dirty_.size() != total_)
    return false;
  if (residents_.size() != clean_.size() + dirty_.size() || inverse_.size() != residents_.size())
    return false;
  for (const auto& [frame, r] : residents_) {
    auto inv = inverse_.find(r.key);
    if (inv == inverse_.end() || inv->second != frame)
      return false;
    if (*r.pos != frame)
      return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

DramCache::DramCache(const SimConfig& cfg, DramCacheOptions options, SplitTlb& tlb, MigrationMap* bitmap)
    : options_(options),
      model_(CostModel::from_config(cfg, options.unit_pages)),
      manager_(cfg.dram_capacity_bytes / (uint64_t{options.unit_pages} * kSmallPageBytes)),
      tlb_(tlb),
      bitmap_(bitmap),
      clflush_cycles_(cfg.clflush_cycles * options.unit_pages),
      restore_cycles_(cfg.t_nw)
{
}

uint64_t DramCache::shootdown(uint64_t vpn)
{
  return options_.tlb_page_size == PageSize::Small4K ? tlb_.shootdown_4k(vpn) : tlb_.shootdown_2m(vpn);
}

EvictionResult DramCache::evict_page(uint64_t frame)
{
  if (!manager_.resident(frame))
    throw std::logic_error("evict_page: frame " + std::to_string(frame) + " is not occupied");
  DramManager::Resident r = manager_.release(frame);
  EvictionResult out;
  out.key = r.key;
  out.vpn = r.vpn;
  out.frame = frame;
  out.dirty = r.dirty;
  if (r.dirty) {
    out.charges.writeback = static_cast<uint64_t>(model_.t_writeback);
    out.traffic_bytes = unit_bytes();
    ++stats_.dirty_evictions;
  } else {
    if (options_.redirect)
      out.charges.restore = restore_cycles_;
    ++stats_.clean_evictions;
  }
  out.charges.shootdown = shootdown(r.vpn);
  if (bitmap_ && options_.redirect)
    bitmap_->clear_migrated(r.key.psn, r.key.idx);
  stats_.traffic_bytes += out.traffic_bytes;
  stats_.window_swap_bytes += out.traffic_bytes;
  stats_.charges += out.charges;
  return out;
}

MigrationResult DramCache::migrate_page(const PageKey& key, uint64_t vpn)
{
  if (manager_.total_frames() == 0)
    throw std::logic_error("migrate_page: DRAM has no frames configured");
  if (manager_.frame_of(key))
    throw std::logic_error("migrate_page: page already resident in DRAM");
  if (bitmap_ && options_.redirect && bitmap_->migrated(key.psn, key.idx))
    throw std::logic_error("migrate_page: migration bit already set");

  MigrationResult out;
  bool swapped = false;
  if (!manager_.has_free()) {
    out.victim = evict_page(*manager_.next_victim());
    out.charges += out.victim->charges;
    swapped = true;
  }
  out.frame = manager_.occupy(key, vpn);
  if (bitmap_ && options_.redirect)
    bitmap_->set_migrated(key.psn, key.idx);

  MigrationCharges own;
  own.copy = static_cast<uint64_t>(model_.t_mig);
  own.clflush = clflush_cycles_;
  if (options_.shootdown_on_migrate)
    own.shootdown = shootdown(vpn);
  out.charges += own;
  stats_.charges += own;

  out.traffic_bytes = unit_bytes() + (out.victim ? out.victim->traffic_bytes : 0);
  stats_.traffic_bytes += unit_bytes();
  if (swapped)
    stats_.window_swap_bytes += unit_bytes();
  ++stats_.migrations;
  return out;
}

int64_t DramCache::projected_benefit(uint64_t reads, uint64_t writes) const
{
  if (manager_.has_free())
    return benefit(reads, writes, model_);
  auto victim = manager_.next_victim();
  if (!victim)
    return benefit(reads, writes, model_);
  const DramManager::Resident* r = manager_.resident(*victim);
  int64_t eviction = r->dirty ? model_.t_writeback : (options_.redirect ? static_cast<int64_t>(restore_cycles_) : 0);
  return swap_benefit_with_cost(reads, writes, r->reads, r->writes, eviction, model_);
}

int64_t DramCache::end_window()
{
  int64_t t = adjust_threshold(model_, stats_.window_swap_bytes);
  stats_.window_swap_bytes = 0;
  return t;
}

} // namespace rainbow
