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

#ifndef RIDERSCOPE_RESOURCES_HPP_
#define RIDERSCOPE_RESOURCES_HPP_

#include <map>
#include <set>
#include <string>

#include "riderscope/common.hpp"
#include "riderscope/fraction.hpp"

namespace riderscope {

// Differential analysis over embedded executables is exact-hash only:
// byte-identical content, never similarity. The per-sample sets here hold
// digests of ELF_EXEC / TEXT_EXEC members at any nesting depth.
inline std::set<std::string> common_resources(
    const std::map<std::string, std::set<std::string>>& per_sample_digests,
    const Fraction& cutoff) {
  std::map<std::string, std::int64_t> counts;
  for (const auto& [sample_id, digests] : per_sample_digests) {
    for (const std::string& digest : digests) ++counts[digest];
  }
  std::set<std::string> common;
  auto total = static_cast<std::int64_t>(per_sample_digests.size());
  for (const auto& [digest, count] : counts) {
    if (cutoff.meets(count, total)) common.insert(digest);
  }
  return common;
}

}  // namespace riderscope

#endif  // RIDERSCOPE_RESOURCES_HPP_
