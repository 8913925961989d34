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
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rainbow/core.hpp"
#include "rainbow/engine.hpp"

namespace rainbow {

class PolicyError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class PolicyKind : uint8_t { Rainbow, FlatStatic, Hscc4kMig, Hscc2mMig, DramOnly };

inline constexpr std::array<PolicyKind, 5> kAllPolicies{PolicyKind::Rainbow, PolicyKind::FlatStatic, PolicyKind::Hscc4kMig,
                                                       PolicyKind::Hscc2mMig, PolicyKind::DramOnly};

// Accepts the CLI spellings (rainbow, flat-static, hscc-4k, hscc-2m, dram-only) and the
// enum spellings, case-insensitively. Throws PolicyError otherwise.
PolicyKind parse_policy_kind(std::string_view name);
std::string_view policy_name(PolicyKind kind); // CLI spelling

struct PolicySpec {
  PolicyKind kind = PolicyKind::Rainbow;
  PageSize page_regime = PageSize::Super2M;
  uint64_t migration_bytes = 0; // 0 = never migrates
  std::string placement;
  uint64_t dram_bytes = 0;
  uint64_t nvm_bytes = 0;
};

PolicySpec make_policy_spec(PolicyKind kind, const SimConfig& cfg);
TlbPipes pipes_for(PolicyKind kind);

// The spec's TLBs, LLC and devices live in `ms`; the returned hooks borrow them.
std::unique_ptr<Policy> build_policy(const PolicySpec& spec, const SimConfig& cfg, MemorySystem& ms);

} // namespace rainbow
