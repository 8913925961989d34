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
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rainbow/core.hpp"

namespace rainbow {

class TraceSource {
public:
  virtual ~TraceSource() = default;
  virtual std::optional<TraceRecord> next() = 0;
};

class VectorSource : public TraceSource {
public:
  explicit VectorSource(std::vector<TraceRecord> records) : records_(std::move(records)) {}
  std::optional<TraceRecord> next() override
  {
    if (pos_ == records_.size())
      return std::nullopt;
    return records_[pos_++];
  }

private:
  std::vector<TraceRecord> records_;
  size_t pos_ = 0;
};

enum class GeneratorKind : uint8_t { Uniform, Zipf, HotSuperpageMix, RandomUpdate };

GeneratorKind parse_generator_kind(std::string_view name);
std::string_view generator_kind_name(GeneratorKind kind);

// Hot-page-count buckets per superpage: 1-32, 33-64, 65-128, 129-256, 257-384, 385-512.
inline constexpr std::array<std::pair<unsigned, unsigned>, 6> kHotPageBuckets{
    {{1, 32}, {33, 64}, {65, 128}, {129, 256}, {257, 384}, {385, 512}}};

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::Uniform;
  uint64_t footprint_bytes = 1ull << 30;   // address span
  uint64_t working_set_bytes = 256ull << 20; // bytes actually touched
  double zipf_exponent = 0.99;
  double write_fraction = 0.2;
  std::array<double, 6> histogram{1, 0, 0, 0, 0, 0};
  double hot_fraction = 0.7;
  uint64_t refs = 1'000'000;
  uint64_t seed = 1;
  unsigned threads = 1;
  uint64_t base_address = 0;

  void validate() const; // throws std::invalid_argument
};

// Streams records for a spec; identical output for identical (spec, seed).
class TraceGenerator : public TraceSource {
public:
  explicit TraceGenerator(const GeneratorSpec& spec);
  std::optional<TraceRecord> next() override;

  const GeneratorSpec& spec() const { return spec_; }
  uint64_t working_set_pages() const { return ws_pages_; }
  // Virtual base address of working-set page k.
  uint64_t page_address(uint64_t k) const;
  // HotSuperpageMix only: the chosen hot pages, as working-set page indices.
  const std::vector<uint64_t>& hot_pages() const { return hot_pages_; }

private:
  uint64_t pick_page();
  Op pick_op() { return rng_.chance(spec_.write_fraction) ? Op::Write : Op::Read; }

  GeneratorSpec spec_;
  Rng rng_;
  uint64_t ws_pages_ = 0;
  uint64_t ws_superpages_ = 0;
  uint64_t footprint_superpages_ = 0;
  uint64_t stride_ = 1;
  std::vector<double> zipf_cdf_;
  std::vector<uint64_t> zipf_rank_to_page_;
  std::vector<uint64_t> hot_pages_;
  uint64_t emitted_ = 0;
  std::optional<TraceRecord> pending_write_;
};

// Round-robin interleave of several programs. Program k gets tid k and the address bits
// (k << shift) so footprints never overlap.
class InterleavedSource : public TraceSource {
public:
  InterleavedSource(std::vector<std::unique_ptr<TraceSource>> sources, unsigned shift = 40);
  std::optional<TraceRecord> next() override;

private:
  std::vector<std::unique_ptr<TraceSource>> sources_;
  std::vector<bool> done_;
  unsigned shift_;
  size_t cursor_ = 0;
};

std::vector<TraceRecord> collect(TraceSource& source);

// Binary trace: "RNBWTRC1", u64 LE count, then 16-byte records
// {op u8, tid u8, 6 zero bytes, vaddr u64 LE}.
inline constexpr std::array<char, 8> kTraceMagic{'R', 'N', 'B', 'W', 'T', 'R', 'C', '1'};
inline constexpr size_t kTraceHeaderBytes = 16;
inline constexpr size_t kTraceRecordBytes = 16;

uint64_t write_trace(TraceSource& source, const std::filesystem::path& path);
uint64_t write_trace(std::span<const TraceRecord> records, const std::filesystem::path& path);

class TraceReader : public TraceSource {
public:
  explicit TraceReader(const std::filesystem::path& path);
  std::optional<TraceRecord> next() override;
  uint64_t count() const { return count_; }

private:
  std::ifstream in_;
  std::string name_;
  uint64_t count_ = 0;
  uint64_t read_ = 0;
};

std::vector<TraceRecord> read_trace(const std::filesystem::path& path);

// One line per record: "<index> <R|W> <tid> 0x<vaddr>".
void dump_trace(TraceSource& source, std::ostream& out);

} // namespace rainbow
