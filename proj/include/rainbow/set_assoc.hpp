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
#include <span>
#include <stdexcept>
#include <vector>

namespace rainbow {

// Exact-LRU set-associative array keyed by a 64-bit tag. Set index is tag mod sets.
template <typename Payload> class SetAssocArray {
public:
  struct Way {
    bool valid = false;
    uint64_t tag = 0;
    uint64_t stamp = 0;
    Payload payload{};
  };

  struct Evicted {
    uint64_t tag;
    Payload payload;
  };

  SetAssocArray() = default;
  SetAssocArray(uint64_t entries, unsigned ways) : sets_(entries / ways), ways_(ways), slots_(entries)
  {
    if (ways == 0 || entries == 0 || entries % ways != 0)
      throw std::invalid_argument("set-associative geometry: entries must be a positive multiple of ways");
  }

  uint64_t sets() const { return sets_; }
  unsigned ways() const { return ways_; }
  uint64_t set_of(uint64_t tag) const { return tag % sets_; }

  // Hit refreshes LRU.
  Payload* find(uint64_t tag)
  {
    Way* w = locate(tag);
    if (!w)
      return nullptr;
    w->stamp = ++clock_;
    return &w->payload;
  }

  // No LRU side effect.
  const Payload* peek(uint64_t tag) const
  {
    const Way* w = const_cast<SetAssocArray*>(this)->locate(tag);
    return w ? &w->payload : nullptr;
  }
  Payload* peek_mut(uint64_t tag) { Way* w = locate(tag); return w ? &w->payload : nullptr; }

  bool contains(uint64_t tag) const { return peek(tag) != nullptr; }

  // Installs or refreshes tag; returns the LRU victim when a valid entry had to go.
  std::optional<Evicted> insert(uint64_t tag, const Payload& payload)
  {
    if (Way* w = locate(tag)) {
      w->payload = payload;
      w->stamp = ++clock_;
      return std::nullopt;
    }
    std::span<Way> set = set_span(tag);
    Way* victim = &set[0];
    for (Way& w : set) {
      if (!w.valid) {
        victim = &w;
        break;
      }
      if (w.stamp < victim->stamp)
        victim = &w;
    }
    std::optional<Evicted> out;
    if (victim->valid)
      out = Evicted{victim->tag, victim->payload};
    *victim = Way{true, tag, ++clock_, payload};
    return out;
  }

  bool invalidate(uint64_t tag)
  {
    if (Way* w = locate(tag)) {
      w->valid = false;
      return true;
    }
    return false;
  }

  std::span<const Way> set_contents(uint64_t set_index) const
  {
    return std::span<const Way>(slots_).subspan(set_index * ways_, ways_);
  }

  uint64_t occupancy() const
  {
    uint64_t n = 0;
    for (const Way& w : slots_)
      n += w.valid ? 1 : 0;
    return n;
  }

private:
  std::span<Way> set_span(uint64_t tag) { return std::span<Way>(slots_).subspan(set_of(tag) * ways_, ways_); }

  Way* locate(uint64_t tag)
  {
    for (Way& w : set_span(tag))
      if (w.valid && w.tag == tag)
        return &w;
    return nullptr;
  }

  uint64_t sets_ = 0;
  unsigned ways_ = 0;
  uint64_t clock_ = 0;
  std::vector<Way> slots_;
};

} // namespace rainbow
