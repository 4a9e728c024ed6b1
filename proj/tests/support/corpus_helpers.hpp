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

#ifndef RIDERSCOPE_TESTS_SUPPORT_CORPUS_HELPERS_HPP_
#define RIDERSCOPE_TESTS_SUPPORT_CORPUS_HELPERS_HPP_

#include <filesystem>
#include <map>
#include <string>

#include "riderscope/common.hpp"
#include "riderscope/digest.hpp"

namespace riderscope::testing {

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Relative path -> content digest for every regular file under root.
inline std::map<std::string, std::string> tree_digests(
    const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    Bytes data = read_file(entry.path());
    out[std::filesystem::relative(entry.path(), root).string()] =
        sha256_hex(ByteSpan(data.data(), data.size()));
  }
  return out;
}

}  // namespace riderscope::testing

#endif  // RIDERSCOPE_TESTS_SUPPORT_CORPUS_HELPERS_HPP_
