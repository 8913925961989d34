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

#include "rainbow/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <stdexcept>

namespace rainbow {

namespace {

constexpr unsigned kLineBytes = 64;

void put_le64(unsigned char* p, uint64_t v)
{
  for (int i = 0; i < 8; ++i)
    p[i] = static_cast<unsigned char>(v >> (8 * i));
}

uint64_t get_le64(const unsigned char* p)
{
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= uint64_t{p[i]} << (8 * i);
  return v;
}

} // namespace

GeneratorKind parse_generator_kind(std::string_view name)
{
  if (name == "uniform")
    return GeneratorKind::Uniform;
  if (name == "zipf")
    return GeneratorKind::Zipf;
  if (name == "hotmix" || name == "hot-superpage-mix")
    return GeneratorKind::HotSuperpageMix;
  if (name == "random-update" || name == "gups")
    return GeneratorKind::RandomUpdate;
  throw std::invalid_argument("unknown generator '" + std::string(name) + "'");
}

std::string_view generator_kind_name(GeneratorKind kind)
{
  switch (kind) {
  case GeneratorKind::Uniform:
    return "uniform";
  case GeneratorKind::Zipf:
    return "zipf";
  case GeneratorKind::HotSuperpageMix:
    return "hotmix";
  case GeneratorKind::RandomUpdate:
    return "random-update";
  }
  return "?";
}

void GeneratorSpec::validate() const
{
  if (working_set_bytes < kSmallPageBytes)
    throw std::invalid_argument("working set must be at least one 4 KB page");
  if (footprint_bytes < working_set_bytes)
    throw std::invalid_argument("footprint must be >= working set");
  if (base_address % kSuperpageBytes != 0 || ((base_address + footprint_bytes) & ~kAddressMask) != 0)
    throw std::invalid_argument("address span must be superpage aligned and fit in 48 bits");
  if (write_fraction < 0 || write_fraction > 1)
    throw std::invalid_argument("write fraction must be in [0, 1]");
  if (hot_fraction < 0 || hot_fraction > 1)
    throw std::invalid_argument("hot fraction must be in [0, 1]");
  if (zipf_exponent <= 0)
    throw std::invalid_argument("zipf exponent must be positive");
  if (threads == 0 || threads > 256)
    throw std::invalid_argument("threads must be in [1, 256]");
  double sum = 0;
  for (double f : histogram) {
    if (f < 0)
      throw std::invalid_argument("histogram fractions must be non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("histogram fractions must sum to 1");
}

TraceGenerator::TraceGenerator(const GeneratorSpec& spec) : spec_(spec), rng_(spec.seed)
{
  spec_.validate();
  ws_pages_ = spec_.working_set_bytes / kSmallPageBytes;
  ws_superpages_ = (ws_pages_ + kPagesPerSuperpage - 1) / kPagesPerSuperpage;
  footprint_superpages_ = std::max<uint64_t>(spec_.footprint_bytes / kSuperpageBytes, 1);
  if (ws_superpages_ > footprint_superpages_)
    throw std::invalid_argument("working set does not fit the footprint");
  // Odd strides coprime with the span keep the placement a bijection and spread
  // consecutive superpages over every TLB set.
  stride_ = std::max<uint64_t>(footprint_superpages_ / ws_superpages_, 1);
  while (stride_ > 1 && (stride_ % 2 == 0 || std::gcd(stride_, footprint_superpages_) != 1))
    --stride_;

  switch (spec_.kind) {
  case GeneratorKind::Zipf: {
    zipf_cdf_.resize(ws_pages_);
    double total = 0;
    for (uint64_t r = 0; r < ws_pages_; ++r) {
      total += 1.0 / std::pow(static_cast<double>(r + 1), spec_.zipf_exponent);
      zipf_cdf_[r] = total;
    }
    for (double& c : zipf_cdf_)
      c /= total;
    zipf_rank_to_page_.resize(ws_pages_);
    std::iota(zipf_rank_to_page_.begin(), zipf_rank_to_page_.end(), 0);
    for (uint64_t i = ws_pages_; i > 1; --i)
      std::swap(zipf_rank_to_page_[i - 1], zipf_rank_to_page_[rng_.below(i)]);
    break;
  }
  case GeneratorKind::HotSuperpageMix: {
    std::vector<unsigned> slots(kPagesPerSuperpage);
    for (uint64_t sp = 0; sp < ws_superpages_; ++sp) {
      unsigned pages_here = static_cast<unsigned>(std::min<uint64_t>(kPagesPerSuperpage, ws_pages_ - sp * kPagesPerSuperpage));
      double u = rng_.unit();
      size_t bucket = 0;
      double acc = 0;
      for (; bucket + 1 < spec_.histogram.size(); ++bucket) {
        acc += spec_.histogram[bucket];
        if (u < acc)
          break;
      }
      auto [lo, hi] = kHotPageBuckets[bucket];
      unsigned count = lo + static_cast<unsigned>(rng_.below(hi - lo + 1));
      count = std::min(count, pages_here);
      std::iota(slots.begin(), slots.begin() + pages_here, 0u);
      for (unsigned i = 0; i < count; ++i) {
        unsigned j = i + static_cast<unsigned>(rng_.below(pages_here - i));
        std::swap(slots[i], slots[j]);
        hot_pages_.push_back(sp * kPagesPerSuperpage + slots[i]);
      }
    }
    break;
  }
  case GeneratorKind::Uniform:
  case GeneratorKind::RandomUpdate:
    break;
  }
}

uint64_t TraceGenerator::page_address(uint64_t k) const
{
  uint64_t sp = k / kPagesPerSuperpage;
  uint64_t idx = k % kPagesPerSuperpage;
  // Working-set superpages are spread over the footprint.
  uint64_t vsn = sp * stride_ % footprint_superpages_;
  return spec_.base_address + (vsn << kSuperpageShift) + (idx << kSmallPageShift);
}

uint64_t TraceGenerator::pick_page()
{
  switch (spec_.kind) {
  case GeneratorKind::Zipf: {
    double u = rng_.unit();
    auto it = std::upper_bound(zipf_cdf_.begin(), zipf_cdf_.end(), u);
    size_t rank = std::min<size_t>(static_cast<size_t>(it - zipf_cdf_.begin()), ws_pages_ - 1);
    return zipf_rank_to_page_[rank];
  }
  case GeneratorKind::HotSuperpageMix:
    if (!hot_pages_.empty() && rng_.chance(spec_.hot_fraction))
      return hot_pages_[rng_.below(hot_pages_.size())];
    return rng_.below(ws_pages_);
  case GeneratorKind::Uniform:
  case GeneratorKind::RandomUpdate:
    break;
  }
  return rng_.below(ws_pages_);
}

std::optional<TraceRecord> TraceGenerator::next()
{
  if (emitted_ == spec_.refs)
    return std::nullopt;
  uint8_t tid = static_cast<uint8_t>(emitted_ % spec_.threads);
  ++emitted_;
  if (pending_write_) {
    TraceRecord r = *pending_write_;
    r.tid = tid;
    pending_write_.reset();
    return r;
  }
  uint64_t page = pick_page();
  uint64_t line = rng_.below(kSmallPageBytes / kLineBytes);
  VirtualAddress va{page_address(page) + line * kLineBytes};
  if (spec_.kind == GeneratorKind::RandomUpdate) {
    pending_write_ = TraceRecord{Op::Write, va, tid};
    return TraceRecord{Op::Read, va, tid};
  }
  return TraceRecord{pick_op(), va, tid};
}

InterleavedSource::InterleavedSource(std::vector<std::unique_ptr<TraceSource>> sources, unsigned shift)
    : sources_(std::move(sources)), done_(sources_.size(), false), shift_(shift)
{
  if (sources_.size() > 256)
    throw std::invalid_argument("at most 256 interleaved programs");
  if (shift_ >= 48 || ((uint64_t{sources_.size()} << shift_) & ~kAddressMask) != 0)
    throw std::invalid_argument("interleave shift leaves no room for program ids in 48 bits");
}

std::optional<TraceRecord> InterleavedSource::next()
{
  for (size_t tries = 0; tries < sources_.size(); ++tries) {
    size_t k = cursor_;
    cursor_ = (cursor_ + 1) % sources_.size();
    if (done_[k])
      continue;
    auto r = sources_[k]->next();
    if (!r) {
      done_[k] = true;
      continue;
    }
    uint64_t own = r->vaddr.raw & ((uint64_t{1} << shift_) - 1);
    r->vaddr.raw = (uint64_t{k} << shift_) | own;
    r->tid = static_cast<uint8_t>(k);
    return r;
  }
  return std::nullopt;
}

std::vector<TraceRecord> collect(TraceSource& source)
{
  std::vector<TraceRecord> out;
  while (auto r = source.next())
    out.push_back(*r);
  return out;
}

uint64_t write_trace(TraceSource& source, const std::filesystem::path& path)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw TraceError("cannot open '" + path.string() + "' for writing");
  unsigned char header[kTraceHeaderBytes] = {};
  std::memcpy(header, kTraceMagic.data(), kTraceMagic.size());
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  uint64_t count = 0;
  while (auto r = source.next()) {
    unsigned char rec[kTraceRecordBytes] = {};
    rec[0] = static_cast<unsigned char>(r->op);
    rec[1] = r->tid;
    put_le64(rec + 8, r->vaddr.raw);
    out.write(reinterpret_cast<const char*>(rec), sizeof rec);
    ++count;
  }
  put_le64(header + 8, count);
  out.seekp(0);
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  out.flush();
  if (!out)
    throw TraceError("write failed for '" + path.string() + "'");
  return count;
}

uint64_t write_trace(std::span<const TraceRecord> records, const std::filesystem::path& path)
{
  VectorSource src(std::vector<TraceRecord>(records.begin(), records.end()));
  return write_trace(src, path);
}

TraceReader::TraceReader(const std::filesystem::path& path) : in_(path, std::ios::binary), name_(path.string())
{
  if (!in_)
    throw TraceError("cannot open trace '" + name_ + "'");
  unsigned char header[kTraceHeaderBytes];
  in_.read(reinterpret_cast<char*>(header), sizeof header);
  if (in_.gcount() < 8 || std::memcmp(header, kTraceMagic.data(), kTraceMagic.size()) != 0)
    throw TraceError(name_ + ": bad magic at byte offset 0 (not a trace file)");
  if (in_.gcount() != static_cast<std::streamsize>(sizeof header))
    throw TraceError(name_ + ": truncated header at byte offset " + std::to_string(in_.gcount()));
  count_ = get_le64(header + 8);
}

std::optional<TraceRecord> TraceReader::next()
{
  if (read_ == count_)
    return std::nullopt;
  uint64_t offset = kTraceHeaderBytes + read_ * kTraceRecordBytes;
  unsigned char rec[kTraceRecordBytes];
  in_.read(reinterpret_cast<char*>(rec), sizeof rec);
  if (in_.gcount() != static_cast<std::streamsize>(sizeof rec))
    throw TraceError(name_ + ": truncated record " + std::to_string(read_) + " at byte offset " +
                     std::to_string(offset + static_cast<uint64_t>(in_.gcount())));
  if (rec[0] > 1)
    throw TraceError(name_ + ": bad op byte at byte offset " + std::to_string(offset));
  for (int i = 2; i < 8; ++i)
    if (rec[i] != 0)
      throw TraceError(name_ + ": nonzero reserved byte at byte offset " + std::to_string(offset + i));
  uint64_t va = get_le64(rec + 8);
  if ((va & ~kAddressMask) != 0)
    throw TraceError(name_ + ": non-canonical address at byte offset " + std::to_string(offset + 8));
  ++read_;
  return TraceRecord{static_cast<Op>(rec[0]), VirtualAddress{va}, rec[1]};
}

std::vector<TraceRecord> read_trace(const std::filesystem::path& path)
{
  TraceReader reader(path);
  return collect(reader);
}

void dump_trace(TraceSource& source, std::ostream& out)
{
  uint64_t i = 0;
  char buf[64];
  while (auto r = source.next()) {
    std::snprintf(buf, sizeof buf, "%llu %c %u 0x%012llx\n", static_cast<unsigned long long>(i++),
                  r->op == Op::Write ? 'W' : 'R', unsigned{r->tid}, static_cast<unsigned long long>(r->vaddr.raw));
    out << buf;
  }
}

} // namespace rainbow
