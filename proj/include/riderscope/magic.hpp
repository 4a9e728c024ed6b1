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

#ifndef RIDERSCOPE_MAGIC_HPP_
#define RIDERSCOPE_MAGIC_HPP_

#include <string_view>

#include "riderscope/common.hpp"

namespace riderscope {

enum class FileType {
  kDalvikExec,
  kAppArchive,
  kElfExec,
  kTextExec,
  kOther,
};

inline const char* file_type_name(FileType t) {
  switch (t) {
    case FileType::kDalvikExec: return "DALVIK_EXEC";
    case FileType::kAppArchive: return "APP_ARCHIVE";
    case FileType::kElfExec: return "ELF_EXEC";
    case FileType::kTextExec: return "TEXT_EXEC";
    case FileType::kOther: return "OTHER";
  }
  return "OTHER";
}

inline FileType file_type_from_name(std::string_view name) {
  if (name == "DALVIK_EXEC") return FileType::kDalvikExec;
  if (name == "APP_ARCHIVE") return FileType::kAppArchive;
  if (name == "ELF_EXEC") return FileType::kElfExec;
  if (name == "TEXT_EXEC") return FileType::kTextExec;
  return FileType::kOther;
}

namespace detail {

inline bool starts_with(ByteSpan data, std::string_view prefix) {
  if (data.size() < prefix.size()) return false;
  for (size_t i = 0; i < prefix.size(); ++i) {
    if (data[i] != static_cast<std::uint8_t>(prefix[i])) return false;
  }
  return true;
}

}  // namespace detail

// Pure, total typing by magic number. Short inputs simply fail the longer
// patterns and fall through to OTHER.
inline FileType classify_magic(ByteSpan prefix) {
  using detail::starts_with;
  // "dex\n035\0" .. any three-digit version; parse_dex enforces 035-039.
  if (prefix.size() >= 8 && starts_with(prefix, "dex\n") && prefix[7] == 0 &&
      prefix[4] >= '0' && prefix[4] <= '9' && prefix[5] >= '0' && prefix[5] <= '9' &&
      prefix[6] >= '0' && prefix[6] <= '9') {
    return FileType::kDalvikExec;
  }
  if (starts_with(prefix, "\x7f""ELF")) return FileType::kElfExec;
  if (starts_with(prefix, "PK\x03\x04") || starts_with(prefix, "PK\x05\x06")) {
    return FileType::kAppArchive;
  }
  if (starts_with(prefix, "#!")) return FileType::kTextExec;
  return FileType::kOther;
}

}  // namespace riderscope

#endif  // RIDERSCOPE_MAGIC_HPP_
