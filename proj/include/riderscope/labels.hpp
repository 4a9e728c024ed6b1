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

#ifndef RIDERSCOPE_LABELS_HPP_
#define RIDERSCOPE_LABELS_HPP_

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace riderscope {

struct VendorLabelSet {
  std::string sample_id;
  std::map<std::string, std::string> labels;  // vendor -> raw label, kept verbatim
};

inline const std::set<std::string>& default_label_stopwords() {
  static const std::set<std::string> kStopwords = {
      "trojan", "virus",    "malware", "android", "andr",   "adware", "riskware",
      "generic", "agent",   "variant", "win32",   "a",      "b",      "c",
  };
  return kStopwords;
}

namespace detail {

inline std::vector<std::string> label_tokens(std::string_view raw) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : raw) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      current.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

}  // namespace detail

// Plurality family naming over multi-vendor labels: lowercase, split on
// non-alphanumerics, drop stopwords, and keep the token named by the most
// vendors when that count reaches min_agreement. Ties go to the
// lexicographically smallest token; no winner means the sample stays a
// singleton (nullopt). A token counts once per vendor no matter how often
// one label repeats it, so the result is independent of map iteration order
// and of vendor names.
inline std::optional<std::string> normalize_family(
    const VendorLabelSet& labels, const std::set<std::string>& stopwords,
    int min_agreement) {
  std::map<std::string, int> vendor_count;
  for (const auto& [vendor, raw] : labels.labels) {
    std::set<std::string> seen;
    for (std::string& token : detail::label_tokens(raw)) {
      if (stopwords.count(token) > 0) continue;
      if (seen.insert(token).second) ++vendor_count[token];
    }
  }
  std::optional<std::string> best;
  int best_count = 0;
  for (const auto& [token, count] : vendor_count) {
    if (count > best_count) {  // map order makes ties resolve to smallest token
      best = token;
      best_count = count;
    }
  }
  if (!best || best_count < min_agreement) return std::nullopt;
  return best;
}

}  // namespace riderscope

#endif  // RIDERSCOPE_LABELS_HPP_
