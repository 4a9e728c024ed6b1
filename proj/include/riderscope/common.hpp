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

#ifndef RIDERSCOPE_COMMON_HPP_
#define RIDERSCOPE_COMMON_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace riderscope {

using ByteSpan = std::span<const std::uint8_t>;
using Bytes = std::vector<std::uint8_t>;

enum class ErrorCode {
  kManifestIo,
  kManifestSchema,
  kArchiveCorrupt,
  kDepthExceeded,
  kDexMagic,
  kDexTruncated,
  kDexBadIndex,
  kCfgMalformed,
  kFamilyTooSmall,
  kMissingAnnotation,
  kElfMalformed,
  kElfUnsupportedClass,
  kScriptBinaryish,
  kFitDegenerate,
  kSynthIo,
  kFamilyNotAnalyzed,
  kStoreIo,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kManifestIo: return "MANIFEST_IO";
    case ErrorCode::kManifestSchema: return "MANIFEST_SCHEMA";
    case ErrorCode::kArchiveCorrupt: return "ARCHIVE_CORRUPT";
    case ErrorCode::kDepthExceeded: return "DEPTH_EXCEEDED";
    case ErrorCode::kDexMagic: return "DEX_MAGIC";
    case ErrorCode::kDexTruncated: return "DEX_TRUNCATED";
    case ErrorCode::kDexBadIndex: return "DEX_BAD_INDEX";
    case ErrorCode::kCfgMalformed: return "CFG_MALFORMED";
    case ErrorCode::kFamilyTooSmall: return "FAMILY_TOO_SMALL";
    case ErrorCode::kMissingAnnotation: return "MISSING_ANNOTATION";
    case ErrorCode::kElfMalformed: return "ELF_MALFORMED";
    case ErrorCode::kElfUnsupportedClass: return "ELF_UNSUPPORTED_CLASS";
    case ErrorCode::kScriptBinaryish: return "SCRIPT_BINARYISH";
    case ErrorCode::kFitDegenerate: return "FIT_DEGENERATE";
    case ErrorCode::kSynthIo: return "SYNTH_IO";
    case ErrorCode::kFamilyNotAnalyzed: return "FAMILY_NOT_ANALYZED";
    case ErrorCode::kStoreIo: return "STORE_IO";
  }
  return "UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// A recoverable per-item problem (bad manifest line, corrupt archive member,
// skipped method). Pipelines collect these instead of aborting.
struct Diagnostic {
  ErrorCode code;
  std::string context;  // line number, member path, method name, ...
  std::string message;
};

inline std::string to_hex(ByteSpan bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

inline std::string u64_hex(std::uint64_t v) {
  std::uint8_t raw[8];
  for (int i = 0; i < 8; ++i) raw[i] = static_cast<std::uint8_t>(v >> (56 - 8 * i));
  return to_hex(ByteSpan(raw, 8));
}

inline bool is_hex_digest(std::string_view s) {
  if (s.size() != 64) return false;
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kManifestIo, "cannot open " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return data;
}

inline void write_file(const std::filesystem::path& path, ByteSpan data) {
  if (!path.parent_path().empty()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kStoreIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
}

inline void write_file(const std::filesystem::path& path, std::string_view text) {
  write_file(path, ByteSpan(reinterpret_cast<const std::uint8_t*>(text.data()),
                            text.size()));
}

}  // namespace riderscope

#endif  // RIDERSCOPE_COMMON_HPP_
