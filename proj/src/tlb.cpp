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

#include "rainbow/tlb.hpp"

#include <algorithm>

namespace rainbow {

TlbLevel::TlbLevel(const TlbGeometry& geometry) : array_(geometry.entries, geometry.ways), latency_(geometry.latency) {}

std::optional<uint64_t> TlbLevel::lookup(uint64_t vpn)
{
  ++counters_.lookups;
  if (const uint64_t* frame = array_.find(vpn)) {
    ++counters_.hits;
    return *frame;
  }
  ++counters_.misses;
  return std::nullopt;
}

std::optional<TlbEntry> TlbLevel::fill(uint64_t vpn, uint64_t frame)
{
  auto evicted = array_.insert(vpn, frame);
  if (!evicted)
    return std::nullopt;
  return TlbEntry{evicted->tag, evicted->payload};
}

bool TlbLevel::invalidate(uint64_t vpn) { return array_.invalidate(vpn); }

std::optional<uint64_t> TlbLevel::probe(uint64_t vpn) const
{
  if (const uint64_t* frame = array_.peek(vpn))
    return *frame;
  return std::nullopt;
}

SplitTlb::SplitTlb(const SimConfig& cfg, TlbPipes pipes)
    : pipes_(pipes),
      l1_4k_(cfg.cores, TlbLevel(cfg.l1_4k)),
      l1_2m_(cfg.cores, TlbLevel(cfg.l1_2m)),
      l2_4k_(cfg.l2_4k),
      l2_2m_(cfg.l2_2m),
      shootdown_cycles_(cfg.shootdown_cycles),
      local_invalidate_cycles_(cfg.local_invalidate_cycles)
{
}

SplitTlb::PipeResult SplitTlb::lookup_pipe(TlbLevel& l1, TlbLevel& l2, uint64_t vpn)
{
  if (auto frame = l1.lookup(vpn))
    return {true, *frame, l1.latency()};
  uint64_t latency = uint64_t{l1.latency()} + l2.latency();
  if (auto frame = l2.lookup(vpn)) {
    l1.fill(vpn, *frame);
    return {true, *frame, latency};
  }
  return {false, 0, latency};
}

TranslationOutcome SplitTlb::lookup_parallel(VirtualAddress va, uint8_t tid)
{
  ++lookups_;
  unsigned core = core_of(tid);
  TranslationOutcome out;
  PipeResult small;
  PipeResult super;
  if (pipes_.small) {
    small = lookup_pipe(l1_4k_[core], l2_4k_, va.small_page());
    out.latency = std::max(out.latency, small.latency);
  }
  if (pipes_.super) {
    super = lookup_pipe(l1_2m_[core], l2_2m_, va.superpage());
    out.latency = std::max(out.latency, super.latency);
  }
  out.hit_4k = small.hit;
  out.hit_2m = super.hit;
  if (small.hit) {
    out.kind = TlbOutcome::Hit4K;
    out.frame = small.frame;
  } else if (super.hit) {
    out.kind = TlbOutcome::Hit2M;
    out.frame = super.frame;
  }
  return out;
}

FillResult SplitTlb::fill(PageSize size, uint64_t vpn, uint64_t frame, uint8_t tid)
{
  unsigned core = core_of(tid);
  if (size == PageSize::Small4K)
    return {l1_4k_[core].fill(vpn, frame), l2_4k_.fill(vpn, frame)};
  return {l1_2m_[core].fill(vpn, frame), l2_2m_.fill(vpn, frame)};
}

uint64_t SplitTlb::shootdown(std::vector<TlbLevel>& l1s, TlbLevel& l2, uint64_t vpn, unsigned initiator)
{
  bool remote = false;
  for (unsigned core = 0; core < l1s.size(); ++core)
    if (l1s[core].invalidate(vpn) && core != initiator)
      remote = true;
  l2.invalidate(vpn);
  return remote ? shootdown_cycles_ : local_invalidate_cycles_;
}

uint64_t SplitTlb::shootdown_4k(uint64_t vpn, unsigned initiator) { return shootdown(l1_4k_, l2_4k_, vpn, initiator); }

uint64_t SplitTlb::shootdown_2m(uint64_t vsn, unsigned initiator) { return shootdown(l1_2m_, l2_2m_, vsn, initiator); }

uint64_t SplitTlb::walk_cost(PageSize size, uint64_t table_read_cycles)
{
  return (size == PageSize::Small4K ? 4 : 3) * table_read_cycles;
}

bool SplitTlb::present_anywhere(PageSize size, uint64_t vpn) const
{
  const auto& l1s = size == PageSize::Small4K ? l1_4k_ : l1_2m_;
  const auto& l2 = size == PageSize::Small4K ? l2_4k_ : l2_2m_;
  if (l2.contains(vpn))
    return true;
  return std::any_of(l1s.begin(), l1s.end(), [vpn](const TlbLevel& l) { return l.contains(vpn); });
}

std::optional<uint64_t> SplitTlb::probe(PageSize size, uint64_t vpn, uint8_t tid) const
{
  unsigned core = core_of(tid);
  const TlbLevel& l1 = size == PageSize::Small4K ? l1_4k_[core] : l1_2m_[core];
  const TlbLevel& l2 = size == PageSize::Small4K ? l2_4k_ : l2_2m_;
  if (auto f = l1.probe(vpn))
    return f;
  return l2.probe(vpn);
}

TlbCounters SplitTlb::l1_counters(PageSize size) const
{
  TlbCounters total;
  for (const TlbLevel& l : size == PageSize::Small4K ? l1_4k_ : l1_2m_)
    total += l.counters();
  return total;
}

TlbCounters SplitTlb::l2_counters(PageSize size) const
{
  return size == PageSize::Small4K ? l2_4k_.counters() : l2_2m_.counters();
}

} // namespace rainbow
