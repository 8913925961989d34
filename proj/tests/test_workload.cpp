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

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rainbow/workload.hpp"

using namespace rainbow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
  fs::path dir = fs::temp_directory_path() / "rainbow_workload_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_bytes(const fs::path& p, const std::string& bytes) { std::ofstream(p, std::ios::binary) << bytes; }

std::string read_bytes(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("trace files round-trip")
{
  GeneratorSpec g;
  g.kind = GeneratorKind::RandomUpdate;
  g.refs = 5000;
  g.threads = 3;
  TraceGenerator gen(g);
  std::vector<TraceRecord> recs = collect(gen);
  fs::path p = scratch("rt.trace");
  CHECK(write_trace(recs, p) == 5000);
  CHECK(fs::file_size(p) == kTraceHeaderBytes + 5000 * kTraceRecordBytes);
  CHECK(read_trace(p) == recs);
}

TEST_CASE("trace format errors name the problem")
{
  std::vector<TraceRecord> one{{Op::Write, {0x1234}, 2}};
  fs::path good = scratch("one.trace");
  write_trace(one, good);
  std::string bytes = read_bytes(good);

  auto fails_with = [](const fs::path& p, const std::string& what) {
    try {
      read_trace(p);
      return false;
    } catch (const TraceError& e) {
      return std::string(e.what()).find(what) != std::string::npos;
    }
  };
  SUBCASE("bad magic")
  {
    std::string b = bytes;
    b[0] = 'X';
    write_bytes(scratch("magic.trace"), b);
    CHECK(fails_with(scratch("magic.trace"), "bad magic"));
  }
  SUBCASE("truncated record")
  {
    write_bytes(scratch("trunc.trace"), bytes.substr(0, bytes.size() - 3));
    CHECK(fails_with(scratch("trunc.trace"), "truncated record 0"));
  }
  SUBCASE("truncated header")
  {
    write_bytes(scratch("hdr.trace"), bytes.substr(0, 10));
    CHECK(fails_with(scratch("hdr.trace"), "truncated header"));
  }
  SUBCASE("bad op")
  {
    std::string b = bytes;
    b[kTraceHeaderBytes] = 7;
    write_bytes(scratch("op.trace"), b);
    CHECK(fails_with(scratch("op.trace"), "bad op byte at byte offset 16"));
  }
  SUBCASE("non-canonical address")
  {
    std::string b = bytes;
    b[kTraceHeaderBytes + 15] = 1;
    write_bytes(scratch("addr.trace"), b);
    CHECK(fails_with(scratch("addr.trace"), "non-canonical"));
  }
  SUBCASE("missing file")
  {
    CHECK(fails_with(scratch("nope.trace"), "cannot open"));
  }
}

TEST_CASE("trace dump")
{
  VectorSource src({{Op::Read, {0x1000}, 0}, {Op::Write, {0x2040}, 1}});
  std::ostringstream out;
  dump_trace(src, out);
  CHECK(out.str() == "0 R 0 0x000000001000\n1 W 1 0x000000002040\n");
}

TEST_CASE("generators are deterministic per seed")
{
  for (GeneratorKind k : {GeneratorKind::Uniform, GeneratorKind::Zipf, GeneratorKind::HotSuperpageMix, GeneratorKind::RandomUpdate}) {
    GeneratorSpec g;
    g.kind = k;
    g.refs = 3000;
    g.working_set_bytes = 8ull << 20;
    TraceGenerator a(g), b(g);
    CHECK(collect(a) == collect(b));
    g.seed = 2;
    TraceGenerator c(g);
    TraceGenerator d(GeneratorSpec{g.kind, g.footprint_bytes, g.working_set_bytes, g.zipf_exponent, g.write_fraction,
                                   g.histogram, g.hot_fraction, g.refs, 1});
    CHECK(collect(c) != collect(d));
  }
}

TEST_CASE("uniform generator stays inside its working set")
{
  GeneratorSpec g;
  g.refs = 200'000;
  g.footprint_bytes = 64ull << 20;
  g.working_set_bytes = 4ull << 20; // 2 superpages spread over 32
  g.write_fraction = 0.25;
  TraceGenerator gen(g);
  std::set<uint64_t> pages;
  uint64_t writes = 0;
  while (auto r = gen.next()) {
    REQUIRE(r->vaddr.raw < g.footprint_bytes);
    REQUIRE(r->vaddr.offset() % 64 == 0);
    pages.insert(r->vaddr.small_page());
    writes += r->op == Op::Write;
  }
  CHECK(pages.size() == 1024);
  CHECK(double(writes) / double(g.refs) == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("random update pairs each read with a write to the same line")
{
  GeneratorSpec g;
  g.kind = GeneratorKind::RandomUpdate;
  g.refs = 1000;
  TraceGenerator gen(g);
  std::vector<TraceRecord> v = collect(gen);
  for (size_t i = 0; i + 1 < v.size(); i += 2) {
    CHECK(v[i].op == Op::Read);
    CHECK(v[i + 1].op == Op::Write);
    CHECK(v[i].vaddr == v[i + 1].vaddr);
  }
}

TEST_CASE("hot superpage mix follows its histogram")
{
  GeneratorSpec g;
  g.kind = GeneratorKind::HotSuperpageMix;
  g.working_set_bytes = 256ull << 20;
  SUBCASE("first bucket: at most 32 hot pages per superpage")
  {
    TraceGenerator gen(g);
    std::map<uint64_t, std::set<uint64_t>> per_sp;
    for (uint64_t p : gen.hot_pages())
      per_sp[p / kPagesPerSuperpage].insert(p);
    CHECK(per_sp.size() == 128);
    for (auto& [sp, s] : per_sp) {
      CHECK(s.size() >= 1);
      CHECK(s.size() <= 32);
    }
  }
  SUBCASE("last bucket")
  {
    g.histogram = {0, 0, 0, 0, 0, 1};
    TraceGenerator gen(g);
    std::map<uint64_t, unsigned> per_sp;
    for (uint64_t p : gen.hot_pages())
      ++per_sp[p / kPagesPerSuperpage];
    for (auto& [sp, n] : per_sp)
      CHECK(n >= 385);
  }
  SUBCASE("invalid histogram")
  {
    g.histogram = {0.5, 0.6, 0, 0, 0, 0};
    CHECK_THROWS_AS(TraceGenerator{g}, std::invalid_argument);
  }
}

TEST_CASE("spec validation")
{
  GeneratorSpec g;
  g.working_set_bytes = 100;
  CHECK_THROWS_AS(TraceGenerator{g}, std::invalid_argument);
  g = {};
  g.footprint_bytes = 1 << 20;
  CHECK_THROWS_AS(TraceGenerator{g}, std::invalid_argument);
  g = {};
  g.write_fraction = 1.5;
  CHECK_THROWS_AS(TraceGenerator{g}, std::invalid_argument);
  CHECK_THROWS_AS(parse_generator_kind("gaussian"), std::invalid_argument);
  CHECK(parse_generator_kind(generator_kind_name(GeneratorKind::HotSuperpageMix)) == GeneratorKind::HotSuperpageMix);
}

TEST_CASE("interleaving assigns tids and disjoint address ranges")
{
  std::vector<std::unique_ptr<TraceSource>> progs;
  progs.push_back(std::make_unique<VectorSource>(std::vector<TraceRecord>{{Op::Read, {0x1000}, 0}, {Op::Read, {0x2000}, 0}}));
  progs.push_back(std::make_unique<VectorSource>(std::vector<TraceRecord>{{Op::Write, {0x1000}, 0}}));
  InterleavedSource mix(std::move(progs));
  std::vector<TraceRecord> v = collect(mix);
  REQUIRE(v.size() == 3);
  CHECK(v[0] == TraceRecord{Op::Read, {0x1000}, 0});
  CHECK(v[1] == TraceRecord{Op::Write, {(uint64_t{1} << 40) | 0x1000}, 1});
  CHECK(v[2] == TraceRecord{Op::Read, {0x2000}, 0});
}
