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

#ifndef RIDERSCOPE_SCRIPT_FEATURES_HPP_
#define RIDERSCOPE_SCRIPT_FEATURES_HPP_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "riderscope/common.hpp"

namespace riderscope {

// Keyword-frequency features over embedded shell scripts. Tokens split on
// whitespace and shell separators; plain keywords match whole tokens,
// path-like keywords (containing '/') match as substrings so they survive
// being buried inside longer paths.

struct ScriptFeatureSet {
  std::string resource;
  std::map<std::string, std::uint32_t> keyword_counts;  // present keys only
};

// Commands and keys looked for in payloads in the wild.
inline const std::vector<std::string>& default_script_vocabulary() {
  static const std::vector<std::string> kVocabulary = {
      "/system/bin/su", "/system/bin/am", "/system/app",  "/sdcard",
      "/data/data",     "install",        "chown",        "mkdir",
      "grep",           "/system/bin/sh", "/system/bin/pm", "dalvik-cache",
      "getprop",        "mkpartfs",       "remount",      "chmod",
      "mount",          "root",           "Superuser.apk", "/system/xbin",
      "/etc/init.d",    "busybox",        "setprop",      "toolbox",
      "tune2fs",        "fstab",          "start",        "rm",
  };
  return kVocabulary;
}

namespace script_detail {

inline bool is_separator(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == ';' || c == '|' ||
         c == '&';
}

inline std::vector<std::string_view> tokenize(std::string_view text) {
  std::vector<std::string_view> tokens;
  size_t start = 0;
  for (size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || is_separator(text[i])) {
      if (i > start) tokens.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  return tokens;
}

inline std::uint32_t substring_count(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  std::uint32_t count = 0;
  size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
    ++count;
    pos += needle.size();  // non-overlapping
  }
  return count;
}

inline bool mostly_printable(ByteSpan bytes) {
  std::uint64_t considered = 0;
  std::uint64_t printable = 0;
  for (std::uint8_t b : bytes) {
    if (b == ' ' || b == '\t' || b == '\r' || b == '\n') continue;
    ++considered;
    if (b >= 0x20 && b <= 0x7e) ++printable;
  }
  return considered == 0 || printable * 10 >= considered * 9;
}

}  // namespace script_detail

inline ScriptFeatureSet extract_script_features(
    ByteSpan bytes, const std::vector<std::string>& vocabulary =
                        default_script_vocabulary()) {
  if (!script_detail::mostly_printable(bytes)) {
    throw Error(ErrorCode::kScriptBinaryish,
                "payload is not mostly printable text");
  }
  std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  std::vector<std::string_view> tokens = script_detail::tokenize(text);

  ScriptFeatureSet features;
  for (const std::string& keyword : vocabulary) {
    std::uint32_t count = 0;
    bool path_like = keyword.find('/') != std::string::npos;
    for (std::string_view token : tokens) {
      if (path_like) {
        count += script_detail::substring_count(token, keyword);
      } else if (token == keyword) {
        ++count;
      }
    }
    if (count > 0) features.keyword_counts[keyword] = count;
  }
  return features;
}

}  // namespace riderscope

#endif  // RIDERSCOPE_SCRIPT_FEATURES_HPP_
