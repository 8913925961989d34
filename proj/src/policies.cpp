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

#include "rainbow/policies.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>
#include <vector>

#include "rainbow/migmap.hpp"
#include "rainbow/monitor.hpp"

namespace rainbow {

namespace {

std::string lowered(std::string_view s)
{
  std::string out;
  for (char c : s)
    if (c != '-' && c != '_')
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

// TLB payload: frame number with the device in the top bit.
uint64_t tlb_frame(Placement p) { return (p.device == Device::Nvm ? uint64_t{1} << 63 : 0) | p.frame; }

// First-touch allocation of frames (4 KB or 2 MB units) on one device.
class FrameAllocator {
public:
  FrameAllocator(uint64_t capacity, std::string what) : capacity_(capacity), what_(std::move(what)) {}

  uint64_t map(uint64_t key)
  {
    auto [it, fresh] = frames_.try_emplace(key, owners_.size());
    if (fresh) {
      if (owners_.size() >= capacity_) {
        frames_.erase(it);
        throw SimulationError(what_ + " capacity exhausted after " + std::to_string(capacity_) + " frames");
      }
      owners_.push_back(key);
    }
    return it->second;
  }
  uint64_t owner(uint64_t frame) const { return owners_.at(frame); }
  uint64_t used() const { return owners_.size(); }

private:
  uint64_t capacity_;
  std::string what_;
  std::unordered_map<uint64_t, uint64_t> frames_;
  std::vector<uint64_t> owners_;
};

// ---------------------------------------------------------------------------
// Static placements.

class FlatStaticPolicy final : public Policy {
public:
  FlatStaticPolicy(const SimConfig& cfg)
      : cfg_(cfg), dram_(cfg.dram_frames(), "DRAM"), nvm_(cfg.nvm_capacity_bytes / kSuperpageBytes, "NVM")
  {
  }

  TlbPipes pipes() const override { return pipes_for(PolicyKind::FlatStatic); }
  uint64_t dram_bytes() const override { return cfg_.dram_capacity_bytes; }

  Placement place(const TraceRecord& rec) override
  {
    uint64_t vpn = rec.vaddr.small_page();
    if (vpn % 9 == 0)
      return {Device::Dram, dram_.map(vpn)};
    return {Device::Nvm, nvm_.map(rec.vaddr.superpage()) * kPagesPerSuperpage + rec.vaddr.small_index()};
  }

  void on_llc_hit(const TraceRecord& rec, const TranslationOutcome& tr, Placement where, MemorySystem& ms) override
  {
    if (tr.kind == TlbOutcome::MissBoth)
      ms.tlb.fill(PageSize::Small4K, rec.vaddr.small_page(), tlb_frame(where), rec.tid);
  }

  void on_llc_miss(const TraceRecord& rec, const TranslationOutcome& tr, Placement where, MemorySystem& ms) override
  {
    if (tr.kind == TlbOutcome::MissBoth) {
      ms.charge_translation(TranslationCategory::Walk4K, SplitTlb::walk_cost(PageSize::Small4K, cfg_.t_dr));
      ms.metadata_access(Device::Dram, Op::Read, 4);
      ms.tlb.fill(PageSize::Small4K, rec.vaddr.small_page(), tlb_frame(where), rec.tid);
    }
    ms.device_access(where, rec.op);
  }

  void end_interval(MemorySystem&) override {}
  void finish(SimReport&) const override {}

private:
  const SimConfig& cfg_;
  FrameAllocator dram_;
  FrameAllocator nvm_;
};

class DramOnlyPolicy final : public Policy {
public:
  // DRAM sized to the NVM capacity of the hybrid systems.
  DramOnlyPolicy(const SimConfig& cfg) : cfg_(cfg), dram_(cfg.nvm_capacity_bytes / kSuperpageBytes, "DRAM") {}

  TlbPipes pipes() const override { return pipes_for(PolicyKind::DramOnly); }
  uint64_t dram_bytes() const override { return cfg_.nvm_capacity_bytes; }

  Placement place(const TraceRecord& rec) override
  {
    return {Device::Dram, dram_.map(rec.vaddr.superpage()) * kPagesPerSuperpage + rec.vaddr.small_index()};
  }

  void on_llc_hit(const TraceRecord& rec, const TranslationOutcome& tr, Placement where, MemorySystem& ms) override
  {
    if (tr.kind == TlbOutcome::MissBoth)
      ms.tlb.fill(PageSize::Super2M, rec.vaddr.superpage(), where.frame / kPagesPerSuperpage, rec.tid);
  }

  void on_llc_miss(const TraceRecord& rec, const TranslationOutcome& tr, Placement where, MemorySystem& ms) override
  {
    if (tr.kind == TlbOutcome::MissBoth) {
      ms.charge_translation(TranslationCategory::Walk2M, SplitTlb::walk_cost(PageSize::Super2M, cfg_.t_dr));
      ms.metadata_access(Device::Dram, Op::Read, 3);
      ms.tlb.fill(PageSize::Super2M, rec.vaddr.superpage(), where.frame / kPagesPerSuperpage, rec.tid);
    }
    ms.device_access(where, rec.op);
  }

  void end_interval(MemorySystem&) override {}
  void finish(SimReport&) const override {}

private:
  const SimConfig& cfg_;
  FrameAllocator dram_;
};

// ---------------------------------------------------------------------------
// Monitored migration into a DRAM cache of NVM pages. Pages live in NVM by superpage
// first touch; DRAM holds copies of hot units (4 KB or whole superpages).

class MigratingPolicy : public Policy {
public:
  MigratingPolicy(const SimConfig& cfg, MemorySystem& ms, DramCacheOptions options, bool with_bitmap)
      : cfg_(cfg), nvm_(cfg.nvm_capacity_bytes / kSuperpageBytes, "NVM"),
        bitmap_(with_bitmap ? std::make_unique<MigrationMap>(cfg) : nullptr), cache_(cfg, options, ms.tlb, bitmap_.get()),
        monitor_(cfg.top_n, cfg.write_weight), unit_(options.unit_pages)
  {
  }

  uint64_t dram_bytes() const override { return cfg_.dram_capacity_bytes; }

  Placement place(const TraceRecord& rec) override
  {
    uint64_t psn = nvm_.map(rec.vaddr.superpage());
    unsigned idx = rec.vaddr.small_index();
    if (auto f = cache_.manager().frame_of(key_of(psn, idx)))
      return {Device::Dram, unit_ == 1 ? *f : *f * kPagesPerSuperpage + idx};
    return {Device::Nvm, psn * kPagesPerSuperpage + idx};
  }

  void end_interval(MemorySystem& ms) override
  {
    if (auto tables = monitor_.end_interval()) {
      const CostModel& model = cache_.model();
      int64_t threshold = model.threshold;
      HotClassification hot = unit_ == 1 ? classify_hot(*tables, threshold, model) : classify_hot_superpages(*tables, threshold, model);
      for (const HotPage& p : hot) {
        PageKey key = key_of(p.psn, p.idx);
        if (cache_.manager().frame_of(key))
          continue;
        // Displacing a resident unit must pay for itself against that unit's recent use.
        if (!cache_.manager().has_free() && !p.overflow && cache_.projected_benefit(p.reads, p.writes) <= threshold)
          continue;
        migrate(key, ms);
      }
      cache_.end_window();
    }
    cache_.manager().reset_tallies();
  }

  void finish(SimReport& r) const override
  {
    const DramCacheStats& s = cache_.stats();
    r.migrations = s.migrations;
    r.clean_evictions = s.clean_evictions;
    r.dirty_evictions = s.dirty_evictions;
    r.migration_traffic_bytes = s.traffic_bytes;
    r.final_threshold = cache_.model().threshold;
    if (bitmap_) {
      r.bitmap_hits = bitmap_->hits();
      r.bitmap_misses = bitmap_->misses();
    }
  }

  bool consistent() const override
  {
    if (!cache_.manager().consistent())
      return false;
    if (!bitmap_)
      return true;
    bool ok = bitmap_->backing().total_set() == cache_.manager().occupied();
    cache_.manager().for_each_resident([&](uint64_t, const DramManager::Resident& r) {
      ok = ok && bitmap_->migrated(r.key.psn, r.key.idx);
      if (const SmallPageBits* cached = bitmap_->cached_bits(r.key.psn))
        ok = ok && cached->test(r.key.idx);
    });
    return ok;
  }

  const DramCache& cache() const { return cache_; }
  const TwoStageMonitor& monitor() const { return monitor_; }

protected:
  PageKey key_of(uint64_t psn, unsigned idx) const { return unit_ == 1 ? PageKey{psn, idx} : PageKey{psn, 0}; }

  // DRAM unit frame of a DRAM placement.
  uint64_t unit_frame(Placement where) const { return unit_ == 1 ? where.frame : where.frame / kPagesPerSuperpage; }

  // Pre-LLC or post-LLC access counting, by where the reference was served.
  void count(const TraceRecord& rec, Placement where)
  {
    if (where.device == Device::Dram) {
      cache_.manager().record_access(unit_frame(where), rec.op);
      return;
    }
    monitor_.record(where.frame / kPagesPerSuperpage, rec.vaddr.small_index(), rec.op);
  }

  void mark_if_written(const TraceRecord& rec, Placement where)
  {
    if (rec.op == Op::Write && where.device == Device::Dram)
      cache_.manager().mark_dirty(unit_frame(where));
  }

  void flush_unit(MemorySystem& ms, Device d, uint64_t frame)
  {
    for (unsigned i = 0; i < unit_; ++i)
      ms.llc.invalidate_page({d, frame * unit_ + i});
  }

  virtual void migrate(const PageKey& key, MemorySystem& ms)
  {
    uint64_t vsn = nvm_.owner(key.psn);
    uint64_t vpn = unit_ == 1 ? (vsn << 9) | key.idx : vsn;
    uint64_t nvm_unit = unit_ == 1 ? key.psn * kPagesPerSuperpage + key.idx : key.psn;
    uint64_t bytes = cache_.unit_bytes();

    MigrationResult res = cache_.migrate_page(key, vpn);
    if (res.victim) {
      flush_unit(ms, Device::Dram, res.victim->frame);
      if (res.victim->dirty) {
        ms.transfer(Device::Dram, Op::Read, bytes);
        ms.transfer(Device::Nvm, Op::Write, bytes);
      } else if (bitmap_) {
        ms.metadata_access(Device::Nvm, Op::Write);
      }
    }
    flush_unit(ms, Device::Nvm, nvm_unit);
    ms.transfer(Device::Nvm, Op::Read, bytes);
    ms.transfer(Device::Dram, Op::Write, bytes);
    if (bitmap_)
      ms.metadata_access(Device::Nvm, Op::Write); // redirect pointer into the NVM copy
    ms.charge_migration(res.charges);
  }

  const SimConfig& cfg_;
  FrameAllocator nvm_;
  std::unique_ptr<MigrationMap> bitmap_;
  DramCache cache_;
  TwoStageMonitor monitor_;
  unsigned unit_;
};

class RainbowPolicy final : public MigratingPolicy {
public:
  RainbowPolicy(const SimConfig& cfg, MemorySystem& ms)
      : MigratingPolicy(cfg, ms, DramCacheOptions{1, true, false, PageSize::Small4K}, true)
  {
  }

  TlbPipes pipes() const override { return pipes_for(PolicyKind::Rainbow); }

  void on_llc_hit(const TraceRecord& rec, const TranslationOutcome& tr, Placement where, MemorySystem& ms) override
  {
    uint64_t vsn = rec.vaddr.superpage();
    if (tr.kind == TlbOutcome::MissBoth)
      ms.tlb.fill(PageSize::Super2M, vsn, where.device == Device::Nvm ? where.frame / kPagesPerSuperpage : nvm_.map(vsn), rec.tid);
    if (where.device == Device::Dram && !tr.hit_4k)
      ms.tlb.fill(PageSize::Small4K, rec.vaddr.small_page(), tlb_frame(where), rec.tid);
    mark_if_written(rec, where);
  }

  void on_llc_miss(const TraceRecord& rec, const TranslationOutcome& tr, Placement where, MemorySystem& ms) override
  {
    if (tr.kind == TlbOutcome::Hit4K) {
      if (where.device != Device::Dram || tr.frame != tlb_frame(where))
        throw SimulationError("stale 4 KB translation for vpn " + std::to_string(rec.vaddr.small_page()));
      serve_dram(rec, where, ms);
      return;
    }

    uint64_t psn = nvm_.map(rec.vaddr.superpage());
    unsigned idx = rec.vaddr.small_index();
    uint64_t addressing = 0;
    if (tr.kind == TlbOutcome::MissBoth) {
      uint64_t walk = SplitTlb::walk_cost(PageSize::Super2M, cfg_.t_nr);
      ms.charge_translation(TranslationCategory::Walk2M, walk);
      ms.metadata_access(Device::Nvm, Op::Read, 3);
      ms.tlb.fill(PageSize::Super2M, rec.vaddr.superpage(), psn, rec.tid);
      // The bitmap line is fetched alongside the walk.
      if (!bitmap_->cached(psn))
        ms.metadata_access(Device::Nvm, Op::Read);
      bitmap_->cache_fill_on_sptlb_miss(psn);
      addressing += walk;
    }

    BitmapLookup b = bitmap_->is_migrated(psn, idx);
    ms.charge_translation(b.hit ? TranslationCategory::BitmapHit : TranslationCategory::BitmapMiss, b.latency);
    if (!b.hit)
      ms.metadata_access(Device::Nvm, Op::Read);

    if (!b.flag) {
      ms.device_access(where, rec.op);
      count(rec, where);
      return;
    }
    // Follow the redirect stored in the NVM copy, then install the 4 KB mapping.
    ms.charge_translation(TranslationCategory::Remap, cfg_.t_nr);
    ms.metadata_access(Device::Nvm, Op::Read);
    addressing += cfg_.t_nr;
    ms.note_dram_addressing(tr.kind == TlbOutcome::Hit2M, addressing);
    ms.tlb.fill(PageSize::Small4K, rec.vaddr.small_page(), tlb_frame(where), rec.tid);
    serve_dram(rec, where, ms);
  }

private:
  void serve_dram(const TraceRecord& rec, Placement where, MemorySystem& ms)
  {
    ms.device_access(where, rec.op);
    count(rec, where);
    mark_if_written(rec, where);
  }
};

// Counts every reference at translation time, before the LLC.
class HsccPolicy final : public MigratingPolicy {
public:
  HsccPolicy(const SimConfig& cfg, MemorySystem& ms, PolicyKind kind)
      : MigratingPolicy(cfg, ms,
                        kind == PolicyKind::Hscc4kMig ? DramCacheOptions{1, false, true, PageSize::Small4K}
                                                      : DramCacheOptions{kPagesPerSuperpage, false, true, PageSize::Super2M},
                        false),
        kind_(kind)
  {
  }

  TlbPipes pipes() const override { return pipes_for(kind_); }

  void on_llc_hit(const TraceRecord& rec, const TranslationOutcome& tr, Placement where, MemorySystem& ms) override
  {
    count(rec, where);
    mark_if_written(rec, where);
    if (tr.kind == TlbOutcome::MissBoth)
      fill(rec, where, ms);
  }

  void on_llc_miss(const TraceRecord& rec, const TranslationOutcome& tr, Placement where, MemorySystem& ms) override
  {
    count(rec, where);
    mark_if_written(rec, where);
    if (tr.kind == TlbOutcome::MissBoth) {
      if (unit_ == 1) {
        ms.charge_translation(TranslationCategory::Walk4K, SplitTlb::walk_cost(PageSize::Small4K, cfg_.t_dr));
        ms.metadata_access(Device::Dram, Op::Read, 4);
      } else {
        ms.charge_translation(TranslationCategory::Walk2M, SplitTlb::walk_cost(PageSize::Super2M, cfg_.t_nr));
        ms.metadata_access(Device::Nvm, Op::Read, 3);
      }
      fill(rec, where, ms);
    }
    ms.device_access(where, rec.op);
  }

private:
  void fill(const TraceRecord& rec, Placement where, MemorySystem& ms)
  {
    if (unit_ == 1)
      ms.tlb.fill(PageSize::Small4K, rec.vaddr.small_page(), tlb_frame(where), rec.tid);
    else
      ms.tlb.fill(PageSize::Super2M, rec.vaddr.superpage(), tlb_frame({where.device, where.frame / kPagesPerSuperpage}), rec.tid);
  }

  PolicyKind kind_;
};

} // namespace

PolicyKind parse_policy_kind(std::string_view name)
{
  std::string n = lowered(name);
  if (n == "rainbow")
    return PolicyKind::Rainbow;
  if (n == "flatstatic" || n == "flat")
    return PolicyKind::FlatStatic;
  if (n == "hscc4k" || n == "hscc4kmig")
    return PolicyKind::Hscc4kMig;
  if (n == "hscc2m" || n == "hscc2mmig")
    return PolicyKind::Hscc2mMig;
  if (n == "dramonly")
    return PolicyKind::DramOnly;
  throw PolicyError("unknown policy '" + std::string(name) + "' (expected rainbow, flat-static, hscc-4k, hscc-2m or dram-only)");
}

std::string_view policy_name(PolicyKind kind)
{
  switch (kind) {
  case PolicyKind::Rainbow:
    return "rainbow";
  case PolicyKind::FlatStatic:
    return "flat-static";
  case PolicyKind::Hscc4kMig:
    return "hscc-4k";
  case PolicyKind::Hscc2mMig:
    return "hscc-2m";
  case PolicyKind::DramOnly:
    return "dram-only";
  }
  return "?";
}

TlbPipes pipes_for(PolicyKind kind)
{
  switch (kind) {
  case PolicyKind::Rainbow:
    return {true, true};
  case PolicyKind::FlatStatic:
  case PolicyKind::Hscc4kMig:
    return {true, false};
  case PolicyKind::Hscc2mMig:
  case PolicyKind::DramOnly:
    return {false, true};
  }
  return {};
}

PolicySpec make_policy_spec(PolicyKind kind, const SimConfig& cfg)
{
  PolicySpec s;
  s.kind = kind;
  s.dram_bytes = cfg.dram_capacity_bytes;
  s.nvm_bytes = cfg.nvm_capacity_bytes;
  switch (kind) {
  case PolicyKind::Rainbow:
    s.page_regime = PageSize::Super2M;
    s.migration_bytes = kSmallPageBytes;
    s.placement = "superpages in NVM, hot 4 KB pages copied to DRAM";
    break;
  case PolicyKind::FlatStatic:
    s.page_regime = PageSize::Small4K;
    s.placement = "DRAM iff page number mod 9 == 0";
    break;
  case PolicyKind::Hscc4kMig:
    s.page_regime = PageSize::Small4K;
    s.migration_bytes = kSmallPageBytes;
    s.placement = "4 KB pages in NVM, hot pages remapped to DRAM";
    break;
  case PolicyKind::Hscc2mMig:
    s.page_regime = PageSize::Super2M;
    s.migration_bytes = kSuperpageBytes;
    s.placement = "superpages in NVM, hot superpages remapped to DRAM";
    break;
  case PolicyKind::DramOnly:
    s.page_regime = PageSize::Super2M;
    s.placement = "all superpages in DRAM";
    s.dram_bytes = cfg.nvm_capacity_bytes;
    s.nvm_bytes = 0;
    break;
  }
  return s;
}

std::unique_ptr<Policy> build_policy(const PolicySpec& spec, const SimConfig& cfg, MemorySystem& ms)
{
  switch (spec.kind) {
  case PolicyKind::Rainbow:
    return std::make_unique<RainbowPolicy>(cfg, ms);
  case PolicyKind::FlatStatic:
    return std::make_unique<FlatStaticPolicy>(cfg);
  case PolicyKind::Hscc4kMig:
  case PolicyKind::Hscc2mMig:
    return std::make_unique<HsccPolicy>(cfg, ms, spec.kind);
  case PolicyKind::DramOnly:
    return std::make_unique<DramOnlyPolicy>(cfg);
  }
  throw PolicyError("unknown policy kind");
}

} // namespace rainbow
