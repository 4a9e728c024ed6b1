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

#ifndef RIDERSCOPE_TAXONOMY_HPP_
#define RIDERSCOPE_TAXONOMY_HPP_

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "riderscope/cfg.hpp"
#include "riderscope/common.hpp"

namespace riderscope {

// API behavior categories. android sub-packages name themselves (second
// level, uppercased); other framework packages keep their full name with
// underscores; a handful of categories are defined by representative calls
// rather than packages and take precedence over any package rule.

class Taxonomy {
 public:
  Taxonomy() {
    // Defined by representative calls, not packages.
    explicit_methods_ = {
        {"java.lang.System.loadLibrary", "JAVA_NATIVE"},
        {"java.lang.Runtime.loadLibrary", "JAVA_NATIVE"},
        {"java.lang.Runtime.exec", "JAVA_EXEC"},
    };
    explicit_prefixes_ = {
        {"java.lang.ProcessBuilder.", "JAVA_EXEC"},
    };
  }

  // Longest-match override table; "prefix CATEGORY" lines, '#' comments.
  void add_override(const std::string& prefix, const std::string& category) {
    overrides_[prefix] = category;
  }

  void load_overrides(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream fields(line);
      std::string prefix, category;
      if (fields >> prefix >> category) add_override(prefix, category);
    }
  }

  // The most specific category for one fully-qualified dotted name, or
  // nullopt for non-framework names.
  std::optional<std::string> api_category(std::string_view name) const {
    // Config overrides win, longest prefix first.
    const std::string* best = nullptr;
    size_t best_len = 0;
    for (const auto& [prefix, category] : overrides_) {
      if (name.substr(0, prefix.size()) == prefix && prefix.size() >= best_len) {
        best = &category;
        best_len = prefix.size();
      }
    }
    if (best != nullptr) return *best;

    for (const auto& [method, category] : explicit_methods_) {
      if (name == method) return category;
    }
    for (const auto& [prefix, category] : explicit_prefixes_) {
      if (name.substr(0, prefix.size()) == prefix) return category;
    }

    if (starts_with(name, "android.support.")) return "SUPPORT";
    if (starts_with(name, "android.telephony.")) {
      std::string_view rest = name.substr(18);
      if (starts_with(rest, "SmsManager.")) return "SMS";
      if (starts_with(rest, "SmsMessage.")) return "SMSMESSAGE";
      return "TELEPHONY";
    }
    if (starts_with(name, "android.")) {
      // Second-level package, if there is one before the class segment;
      // classes sitting directly in android.* fall back to the umbrella.
      std::string_view rest = name.substr(8);
      auto dot = rest.find('.');
      if (dot == std::string_view::npos) return std::nullopt;  // android.Foo alone
      std::string_view second = rest.substr(0, dot);
      if (!second.empty() && std::isupper(static_cast<unsigned char>(second[0]))) {
        return "ANDROID";
      }
      std::string upper;
      for (char c : second) upper.push_back(static_cast<char>(std::toupper(
          static_cast<unsigned char>(c))));
      return upper;
    }
    if (starts_with(name, "dalvik.system.")) return "DALVIK_SYSTEM";
    if (starts_with(name, "java.lang.reflect.")) return "JAVA_REFLECTION";
    if (starts_with(name, "javax.crypto.")) return "JAVAX_CRYPTO";
    return std::nullopt;
  }

  // Full category set for one name: the specific category plus the ANDROID
  // umbrella for anything under android.*; the umbrella is a roll-up row
  // that has to be able to dominate its children.
  std::set<std::string> api_categories(std::string_view name) const {
    std::set<std::string> out;
    auto specific = api_category(name);
    if (specific) out.insert(*specific);
    if (starts_with(name, "android.")) out.insert("ANDROID");
    return out;
  }

 private:
  static bool starts_with(std::string_view s, std::string_view prefix) {
    return s.substr(0, prefix.size()) == prefix;
  }

  std::vector<std::pair<std::string, std::string>> explicit_methods_;
  std::vector<std::pair<std::string, std::string>> explicit_prefixes_;
  std::map<std::string, std::string> overrides_;
};

struct BehaviorProfile {
  std::string family;
  std::string basis;  // which cutoff produced the rider set
  // category -> number of rider methods carrying it; zero-count categories
  // are simply absent.
  std::map<std::string, std::uint32_t> categories;
};

// A category is present when at least one rider method invokes at least one
// API inside it; the count is how many rider methods witness it.
inline BehaviorProfile behavior_profile(
    const std::string& family, const std::set<MethodFingerprint>& riders,
    const std::map<MethodFingerprint, std::set<std::string>>& annotations,
    const Taxonomy& taxonomy, const std::string& basis = "hco") {
  BehaviorProfile profile;
  profile.family = family;
  profile.basis = basis;
  for (const MethodFingerprint& fp : riders) {
    auto it = annotations.find(fp);
    if (it == annotations.end()) {
      throw Error(ErrorCode::kMissingAnnotation,
                  "no stored annotations for fingerprint " + fp.hex());
    }
    std::set<std::string> method_categories;
    for (const std::string& token : it->second) {
      for (const std::string& cat : taxonomy.api_categories(token)) {
        method_categories.insert(cat);
      }
    }
    for (const std::string& cat : method_categories) ++profile.categories[cat];
  }
  return profile;
}

struct BehaviorTableRow {
  std::string category;
  double pct_families = 0;
  double pct_samples = 0;
};

// The macro view: share of families (and of samples, weighting each family
// by size) whose rider profile exhibits the category. Categories present
// nowhere are omitted.
inline std::vector<BehaviorTableRow> corpus_behavior_table(
    const std::vector<BehaviorProfile>& profiles,
    const std::map<std::string, std::uint64_t>& sample_counts) {
  std::uint64_t total_samples = 0;
  for (const auto& [family, count] : sample_counts) total_samples += count;
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> hits;  // fams, samples
  for (const BehaviorProfile& p : profiles) {
    auto size_it = sample_counts.find(p.family);
    std::uint64_t size = size_it == sample_counts.end() ? 0 : size_it->second;
    for (const auto& [cat, count] : p.categories) {
      hits[cat].first += 1;
      hits[cat].second += size;
    }
  }
  std::vector<BehaviorTableRow> rows;
  for (const auto& [cat, hit] : hits) {
    BehaviorTableRow row;
    row.category = cat;
    row.pct_families = profiles.empty()
                           ? 0
                           : 100.0 * static_cast<double>(hit.first) /
                                 static_cast<double>(profiles.size());
    row.pct_samples = total_samples == 0
                          ? 0
                          : 100.0 * static_cast<double>(hit.second) /
                                static_cast<double>(total_samples);
    rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end(), [](const BehaviorTableRow& a,
                                         const BehaviorTableRow& b) {
    if (a.pct_families != b.pct_families) return a.pct_families > b.pct_families;
    return a.category < b.category;
  });
  return rows;
}

}  // namespace riderscope

#endif  // RIDERSCOPE_TAXONOMY_HPP_
