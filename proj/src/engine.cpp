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

#include "rainbow/engine.hpp"

#include <bit>
#include <cmath>
#include <numeric>

#include "rainbow/policies.hpp"

namespace rainbow {

LlcFilter::LlcFilter(uint64_t bytes, unsigned ways, unsigned line_bytes, uint64_t latency)
    : lines_(bytes / line_bytes, ways), line_bytes_(line_bytes), line_shift_(static_cast<unsigned>(std::countr_zero(line_bytes))),
      latency_(latency)
{
  if (!std::has_single_bit(line_bytes))
    throw ConfigError("llc.line_bytes: must be a power of two");
}

bool LlcFilter::access(uint64_t phys_addr)
{
  uint64_t line = phys_addr >> line_shift_;
  if (lines_.find(line)) {
    ++hits_;
    return true;
  }
  ++misses_;
  lines_.insert(line, 1);
  return false;
}

void LlcFilter::invalidate_page(Placement page)
{
  uint64_t base = physical_address(page) >> line_shift_;
  for (uint64_t i = 0; i < kSmallPageBytes / line_bytes_; ++i)
    lines_.invalidate(base + i);
}

// ---------------------------------------------------------------------------

DeviceModel::DeviceModel(Device device, const SimConfig& cfg) : device_(device), line_bytes_(cfg.llc_line_bytes)
{
  if (device == Device::Dram) {
    read_ = cfg.t_dr;
    write_ = cfg.t_dw;
    row_miss_penalty_ = cfg.dram_row_miss_penalty;
    open_row_.assign(cfg.dram_banks, UINT64_MAX);
    // mA x V = mW; mW x ns = pJ. A row miss also pays the precharge current.
    double tr = cfg.dram_read_ns.to_double();
    double tw = cfg.dram_write_ns.to_double();
    double v = cfg.dram_voltage;
    line_pj_ = {v * cfg.dram_read_hit_ma * tr, v * (cfg.dram_read_miss_ma + cfg.dram_precharge_ma) * tr,
                v * cfg.dram_write_hit_ma * tw, v * (cfg.dram_write_miss_ma + cfg.dram_precharge_ma) * tw};
  } else {
    read_ = cfg.t_nr;
    write_ = cfg.t_nw;
    row_miss_penalty_ = cfg.nvm_row_miss_penalty;
    open_row_.assign(cfg.nvm_banks, UINT64_MAX);
    double bits = 8.0 * cfg.llc_line_bytes;
    line_pj_ = {cfg.nvm_read_hit_pj_bit * bits, cfg.nvm_read_miss_pj_bit * bits, cfg.nvm_write_hit_pj_bit * bits,
                cfg.nvm_write_miss_pj_bit * bits};
  }
}

double DeviceModel::line_energy(Op op, bool row_hit) const
{
  return line_pj_[(op == Op::Write ? 2 : 0) + (row_hit ? 0 : 1)];
}

DeviceModel::Access DeviceModel::access(uint64_t frame, Op op)
{
  uint64_t& open = open_row_[frame % open_row_.size()];
  bool hit = open == frame;
  open = frame;
  if (hit)
    ++counters_.row_hits;
  else
    ++counters_.row_misses;
  if (op == Op::Write)
    ++counters_.writes;
  else
    ++counters_.reads;
  uint64_t lat = (op == Op::Write ? write_ : read_) + (hit ? 0 : row_miss_penalty_);
  return {lat, line_energy(op, hit), hit};
}

double DeviceModel::transfer_energy(Op op, uint64_t bytes) const
{
  uint64_t lines = (bytes + line_bytes_ - 1) / line_bytes_;
  if (lines == 0)
    return 0;
  return line_energy(op, false) + static_cast<double>(lines - 1) * line_energy(op, true);
}

// ---------------------------------------------------------------------------

uint64_t SimReport::translation_cycles() const { return std::accumulate(translation.begin(), translation.end(), uint64_t{0}); }

double SimReport::superpage_hit_rate() const
{
  if (l1_2m.lookups == 0)
    return 0;
  return static_cast<double>(l1_2m.hits + l2_2m.hits) / static_cast<double>(l1_2m.lookups);
}

double SimReport::translation_share(TranslationCategory c) const
{
  uint64_t total = translation_cycles();
  return total ? static_cast<double>(translation[static_cast<size_t>(c)]) / static_cast<double>(total) : 0;
}

bool cycles_closed(const SimReport& r)
{
  return r.translation_cycles() + r.llc_cycles + r.device_cycles + r.migration_cycles() == r.total_cycles;
}

bool energy_closed(const SimReport& r)
{
  double expect = r.charged_energy_pj + r.energy.dram_background_pj;
  double got = r.energy.total();
  return std::fabs(got - expect) <= 1e-9 * std::max(1.0, std::fabs(expect));
}

// ---------------------------------------------------------------------------

MemorySystem::MemorySystem(const SimConfig& cfg, TlbPipes pipes)
    : tlb(cfg, pipes), llc(cfg), dram(Device::Dram, cfg), nvm(Device::Nvm, cfg), cfg_(cfg)
{
}

void MemorySystem::add_energy(double pj)
{
  current_.energy_pj += pj;
  report_.charged_energy_pj += pj;
}

void MemorySystem::charge_llc()
{
  report_.llc_cycles += llc.latency();
  current_.cycles += llc.latency();
}

void MemorySystem::charge_translation(TranslationCategory c, uint64_t cycles)
{
  report_.translation[static_cast<size_t>(c)] += cycles;
  current_.cycles += cycles;
}

DeviceModel::Access MemorySystem::device_access(Placement p, Op op)
{
  DeviceModel::Access a = device(p.device).access(p.frame, op);
  report_.device_cycles += a.latency;
  current_.cycles += a.latency;
  DeviceEnergy& e = ledger(p.device);
  (op == Op::Write ? e.write_pj : e.read_pj) += a.energy_pj;
  add_energy(a.energy_pj);
  return a;
}

void MemorySystem::metadata_access(Device d, Op op, unsigned lines)
{
  double pj = lines * device(d).line_energy(op, false);
  ledger(d).metadata_pj += pj;
  add_energy(pj);
}

void MemorySystem::transfer(Device d, Op op, uint64_t bytes)
{
  double pj = device(d).transfer_energy(op, bytes);
  ledger(d).migration_pj += pj;
  add_energy(pj);
}

void MemorySystem::charge_migration(const MigrationCharges& charges)
{
  report_.migration += charges;
  clock_ += charges.total();
}

void MemorySystem::note_dram_addressing(bool superpage_hit, uint64_t cycles)
{
  ++report_.dram_addr_events;
  if (superpage_hit)
    ++report_.dram_addr_sp_hits;
  report_.dram_addr_cycles += cycles;
}

void MemorySystem::begin_reference() { current_ = StepCharge{}; }

StepCharge MemorySystem::end_reference()
{
  clock_ += current_.cycles;
  ++report_.references;
  return current_;
}

void MemorySystem::finish(uint64_t dram_bytes)
{
  SimReport& r = report_;
  r.total_cycles = clock_;
  r.dram_bytes = dram_bytes;
  r.l1_4k = tlb.l1_counters(PageSize::Small4K);
  r.l2_4k = tlb.l2_counters(PageSize::Small4K);
  r.l1_2m = tlb.l1_counters(PageSize::Super2M);
  r.l2_2m = tlb.l2_counters(PageSize::Super2M);
  r.llc_hits = llc.hits();
  r.llc_misses = llc.misses();
  r.dram = dram.counters();
  r.nvm = nvm.counters();

  // Standby plus duty-weighted refresh, scaled from the reference part to the installed DRAM.
  double ns = static_cast<double>(clock_) / cfg_.cpu_freq_ghz.to_double();
  double mw = cfg_.dram_voltage * (cfg_.dram_standby_ma + cfg_.dram_refresh_ma * cfg_.dram_refresh_duty);
  double scale = static_cast<double>(dram_bytes) / static_cast<double>(cfg_.dram_energy_reference_bytes);
  r.energy.dram_background_pj = mw * ns * scale;
}

// ---------------------------------------------------------------------------

Engine::Engine(const SimConfig& cfg, const PolicySpec& spec) : cfg_(cfg), next_boundary_(cfg.interval_cycles)
{
  cfg_.finalize();
  next_boundary_ = cfg_.interval_cycles;
  ms_ = std::make_unique<MemorySystem>(cfg_, pipes_for(spec.kind));
  policy_ = build_policy(spec, cfg_, *ms_);
  ms_->report().policy = std::string(policy_name(spec.kind));
}

Engine::~Engine() = default;

StepCharge Engine::step(const TraceRecord& rec)
{
  MemorySystem& ms = *ms_;
  ms.begin_reference();
  TranslationOutcome tr = ms.tlb.lookup_parallel(rec.vaddr, rec.tid);
  Placement where = policy_->place(rec);
  bool hit = ms.llc.access(physical_address(where, rec.vaddr.offset()));
  ms.charge_llc();
  SimReport& r = ms.report();
  int c = tr.hit_4k ? (tr.hit_2m ? 1 : 2) : (tr.hit_2m ? 3 : 4);
  ++r.cases[c - 1];
  if (tr.kind == TlbOutcome::MissBoth)
    ++r.translation_misses;

  if (hit) {
    ++r.translation_only;
    policy_->on_llc_hit(rec, tr, where, ms);
  } else {
    ms.charge_translation(TranslationCategory::Tlb, tr.latency);
    policy_->on_llc_miss(rec, tr, where, ms);
  }
  StepCharge s = ms.end_reference();
  s.addressing_case = c;
  s.llc_hit = hit;

  while (ms.clock() >= next_boundary_) {
    policy_->end_interval(ms);
    ++intervals_;
    next_boundary_ += cfg_.interval_cycles;
  }
  return s;
}

SimReport Engine::finish()
{
  policy_->finish(ms_->report());
  ms_->report().intervals = intervals_;
  ms_->finish(policy_->dram_bytes());
  return ms_->report();
}

SimReport run(TraceSource& source, const PolicySpec& spec, const SimConfig& cfg)
{
  Engine engine(cfg, spec);
  while (auto rec = source.next())
    engine.step(*rec);
  return engine.finish();
}

AddressingCost analytical_dram_addressing_cost(double r_hit, double t_nr, double t_dr)
{
  if (!(r_hit >= 0 && r_hit <= 1))
    throw std::invalid_argument("analytical_dram_addressing_cost: R_hit must lie in [0, 1]");
  return {r_hit * t_nr + (1 - r_hit) * 4 * t_nr, 4 * t_dr};
}

} // namespace rainbow
