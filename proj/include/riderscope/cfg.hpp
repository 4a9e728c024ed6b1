// Copyright 2026 The Riderscope Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RIDERSCOPE_CFG_HPP_
#define RIDERSCOPE_CFG_HPP_

#include <algorithm>
#include <compare>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "riderscope/common.hpp"
#include "riderscope/dex.hpp"
#include "riderscope/hash.hpp"

namespace riderscope {

// Per-method identity: a structural digest of the canonical basic-block
// graph plus a feature digest of the framework-API annotations. Identifiers
// of non-framework symbols never reach either half, which is what makes the
// fingerprints survive layout obfuscation.

// The opcode space collapsed into shape-relevant buckets; register
// allocation and literal churn disappear, control and call structure stay.
enum class OpCategory : std::uint8_t {
  kMove = 0,
  kConst,
  kInvoke,
  kBranch,
  kCompare,
  kArith,
  kField,
  kArray,
  kReturn,
  kThrow,
  kMonitor,
  kOther,
};

inline OpCategory opcode_category(std::uint8_t op) {
  if (op >= 0x01 && op <= 0x0d) return OpCategory::kMove;
  if (op >= 0x0e && op <= 0x11) return OpCategory::kReturn;
  if ((op >= 0x12 && op <= 0x1c) || op == 0xfe || op == 0xff) return OpCategory::kConst;
  if (op == 0x1d || op == 0x1e) return OpCategory::kMonitor;
  if (op == 0x21 || (op >= 0x23 && op <= 0x26) || (op >= 0x44 && op <= 0x51)) {
    return OpCategory::kArray;
  }
  if (op == 0x27) return OpCategory::kThrow;
  if ((op >= 0x28 && op <= 0x2c) || (op >= 0x32 && op <= 0x3d)) {
    return OpCategory::kBranch;
  }
  if ((op >= 0x2d && op <= 0x31) || op == 0x20) return OpCategory::kCompare;
  if (op >= 0x52 && op <= 0x6d) return OpCategory::kField;
  if ((op >= 0x6e && op <= 0x72) || (op >= 0x74 && op <= 0x78) ||
      (op >= 0xfa && op <= 0xfd)) {
    return OpCategory::kInvoke;
  }
  if (op >= 0x7b && op <= 0xe2) return OpCategory::kArith;
  return OpCategory::kOther;
}

struct BasicBlock {
  std::uint32_t first_instruction = 0;  // index into the method's instruction list
  std::uint32_t instruction_count = 0;
  // One category code per instruction; this is the block's shape signature.
  std::vector<std::uint8_t> categories;
  // Successor block indices: fall-through first, then explicit targets in
  // operand order.
  std::vector<std::uint32_t> successors;
  bool reachable = false;
  // Framework-API invocation tokens, kept as a multiset for behavior
  // profiling; only the token set enters the hashes.
  std::map<std::string, std::uint32_t> annotations;
};

struct AnnotatedCfg {
  std::vector<BasicBlock> blocks;  // entry = index 0
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    for (std::uint32_t b = 0; b < blocks.size(); ++b) {
      for (std::uint32_t s : blocks[b].successors) out.emplace_back(b, s);
    }
    return out;
  }
};

struct MethodFingerprint {
  std::uint64_t structural = 0;
  std::uint64_t features = 0;

  std::string hex() const { return u64_hex(structural) + u64_hex(features); }

  static std::optional<MethodFingerprint> from_hex(std::string_view hex) {
    if (hex.size() != 32) return std::nullopt;
    auto half = [](std::string_view h) -> std::optional<std::uint64_t> {
      std::uint64_t v = 0;
      for (char c : h) {
        v <<= 4;
        if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
        else return std::nullopt;
      }
      return v;
    };
    auto s = half(hex.substr(0, 16));
    auto f = half(hex.substr(16, 16));
    if (!s || !f) return std::nullopt;
    return MethodFingerprint{*s, *f};
  }

  friend auto operator<=>(const MethodFingerprint&, const MethodFingerprint&) = default;
};

// Block boundaries: method entry, every branch/switch target, and the
// instruction after any branch, switch, return, or throw. Exceptional
// (catch) edges are not modeled: recompiling try ranges must not move
// fingerprints, and the graph stays the high-level shape.
inline AnnotatedCfg build_cfg(const dex::MethodBody& body) {
  if (body.instructions.empty()) {
    throw Error(ErrorCode::kCfgMalformed, "method body has no instructions");
  }

  std::map<std::uint32_t, std::uint32_t> offset_to_index;
  for (std::uint32_t i = 0; i < body.instructions.size(); ++i) {
    offset_to_index[body.instructions[i].offset] = i;
  }

  auto index_of_target = [&](std::uint32_t target_offset) {
    auto it = offset_to_index.find(target_offset);
    if (it == offset_to_index.end()) {
      throw Error(ErrorCode::kCfgMalformed,
                  "branch into the middle of an instruction");
    }
    return it->second;
  };

  std::set<std::uint32_t> leaders;
  leaders.insert(0);
  for (std::uint32_t i = 0; i < body.instructions.size(); ++i) {
    const dex::Instruction& ins = body.instructions[i];
    bool splits = dex::is_goto(ins.opcode) || dex::is_switch(ins.opcode) ||
                  dex::is_conditional_branch(ins.opcode) ||
                  dex::is_return(ins.opcode) || dex::is_throw(ins.opcode);
    if (splits && i + 1 < body.instructions.size()) leaders.insert(i + 1);
    if (dex::is_goto(ins.opcode) || dex::is_switch(ins.opcode) ||
        dex::is_conditional_branch(ins.opcode)) {
      for (std::uint32_t t : ins.branch_targets) leaders.insert(index_of_target(t));
    }
  }

  AnnotatedCfg cfg;
  std::map<std::uint32_t, std::uint32_t> leader_to_block;
  for (std::uint32_t leader : leaders) {
    leader_to_block[leader] = static_cast<std::uint32_t>(cfg.blocks.size());
    BasicBlock block;
    block.first_instruction = leader;
    cfg.blocks.push_back(block);
  }
  for (std::uint32_t b = 0; b < cfg.blocks.size(); ++b) {
    std::uint32_t end = b + 1 < cfg.blocks.size()
                            ? cfg.blocks[b + 1].first_instruction
                            : static_cast<std::uint32_t>(body.instructions.size());
    cfg.blocks[b].instruction_count = end - cfg.blocks[b].first_instruction;
    for (std::uint32_t i = cfg.blocks[b].first_instruction; i < end; ++i) {
      cfg.blocks[b].categories.push_back(
          static_cast<std::uint8_t>(opcode_category(body.instructions[i].opcode)));
    }
  }

  for (std::uint32_t b = 0; b < cfg.blocks.size(); ++b) {
    BasicBlock& block = cfg.blocks[b];
    std::uint32_t last = block.first_instruction + block.instruction_count - 1;
    const dex::Instruction& ins = body.instructions[last];
    bool has_fallthrough = last + 1 < body.instructions.size();
    if (dex::is_return(ins.opcode) || dex::is_throw(ins.opcode)) {
      continue;  // no successors
    }
    if (dex::is_goto(ins.opcode)) {
      block.successors.push_back(leader_to_block.at(index_of_target(ins.branch_targets[0])));
      continue;
    }
    if (dex::is_conditional_branch(ins.opcode) || dex::is_switch(ins.opcode)) {
      if (has_fallthrough) block.successors.push_back(b + 1);
      for (std::uint32_t t : ins.branch_targets) {
        block.successors.push_back(leader_to_block.at(index_of_target(t)));
      }
      continue;
    }
    if (has_fallthrough) block.successors.push_back(b + 1);
  }

  // Reachability from the entry block, in successor order.
  std::vector<std::uint32_t> stack = {0};
  while (!stack.empty()) {
    std::uint32_t b = stack.back();
    stack.pop_back();
    if (cfg.blocks[b].reachable) continue;
    cfg.blocks[b].reachable = true;
    for (auto it = cfg.blocks[b].successors.rbegin();
         it != cfg.blocks[b].successors.rend(); ++it) {
      if (!cfg.blocks[*it].reachable) stack.push_back(*it);
    }
  }
  return cfg;
}

inline const std::vector<std::string>& default_api_prefixes() {
  static const std::vector<std::string> kPrefixes = {"android.", "java.", "javax.",
                                                     "dalvik."};
  return kPrefixes;
}

// Attaches framework invoke targets to their blocks. Non-framework calls
// contribute nothing, by design: only platform surface is identity-bearing.
inline void annotate(AnnotatedCfg* cfg, const dex::MethodBody& body,
                     const dex::DexModule& module,
                     const std::vector<std::string>& api_prefixes = default_api_prefixes()) {
  for (BasicBlock& block : cfg->blocks) {
    for (std::uint32_t i = block.first_instruction;
         i < block.first_instruction + block.instruction_count; ++i) {
      const dex::Instruction& ins = body.instructions[i];
      if (ins.invoke_method < 0) continue;
      std::string name =
          module.method_signature(static_cast<std::uint32_t>(ins.invoke_method));
      for (const std::string& prefix : api_prefixes) {
        if (name.compare(0, prefix.size(), prefix) == 0) {
          ++block.annotations[name];
          break;
        }
      }
    }
  }
}

namespace detail {

inline void ser32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void ser64(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace detail

// Canonical form: depth-first preorder from the entry block over the stored
// successor order; each visited block contributes its instruction count, its
// opcode-category sequence, and its successors' preorder numbers. Token
// hashes are folded in through the feature half, so renaming-only and
// annotation-only edits move exactly the half they should.
inline MethodFingerprint fingerprint(const AnnotatedCfg& cfg) {
  constexpr std::uint32_t kUnvisited = 0xffffffffu;
  std::vector<std::uint32_t> preorder(cfg.blocks.size(), kUnvisited);
  std::vector<std::uint32_t> order;
  std::vector<std::uint32_t> stack = {0};
  while (!stack.empty()) {
    std::uint32_t b = stack.back();
    stack.pop_back();
    if (preorder[b] != kUnvisited) continue;
    preorder[b] = static_cast<std::uint32_t>(order.size());
    order.push_back(b);
    const auto& succ = cfg.blocks[b].successors;
    for (auto it = succ.rbegin(); it != succ.rend(); ++it) {
      if (preorder[*it] == kUnvisited) stack.push_back(*it);
    }
  }

  Bytes structural_bytes;
  for (std::uint32_t b : order) {
    const BasicBlock& block = cfg.blocks[b];
    detail::ser32(structural_bytes, block.instruction_count);
    structural_bytes.insert(structural_bytes.end(), block.categories.begin(),
                            block.categories.end());
    detail::ser32(structural_bytes, static_cast<std::uint32_t>(block.successors.size()));
    for (std::uint32_t s : block.successors) {
      detail::ser32(structural_bytes, preorder[s]);
    }
  }

  std::set<std::uint64_t> token_hashes;
  for (const BasicBlock& block : cfg.blocks) {
    for (const auto& [token, count] : block.annotations) {
      token_hashes.insert(murmur64(token));
    }
  }
  Bytes feature_bytes;
  for (std::uint64_t h : token_hashes) detail::ser64(feature_bytes, h);

  MethodFingerprint fp;
  fp.structural = murmur64(ByteSpan(structural_bytes.data(), structural_bytes.size()));
  fp.features = murmur64(ByteSpan(feature_bytes.data(), feature_bytes.size()));
  return fp;
}

// Union of annotation tokens across all blocks, the per-method view the
// taxonomy consumes.
inline std::set<std::string> annotation_tokens(const AnnotatedCfg& cfg) {
  std::set<std::string> tokens;
  for (const BasicBlock& block : cfg.blocks) {
    for (const auto& [token, count] : block.annotations) tokens.insert(token);
  }
  return tokens;
}

}  // namespace riderscope

#endif  // RIDERSCOPE_CFG_HPP_
