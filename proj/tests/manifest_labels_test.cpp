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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "riderscope/labels.hpp"
#include "riderscope/manifest.hpp"

namespace riderscope {
namespace {

std::filesystem::path write_temp_manifest(const std::string& name,
                                          const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / name;
  write_file(path, content);
  return path;
}

TEST(Manifest, ParsesWellFormedLine) {
  std::string digest(64, 'a');
  auto path = write_temp_manifest(
      "rs_manifest_ok.jsonl",
      "{\"sha256\":\"" + digest +
          "\",\"family\":\"dowgin\",\"first_seen\":\"2014-02-01T00:00:00Z\","
          "\"dex_date\":\"2014-01-20T10:00:00Z\",\"path\":\"apks/a.apk\"}\n");
  ManifestResult result = load_manifest(path);
  ASSERT_EQ(result.records.size(), 1u);
  EXPECT_TRUE(result.diagnostics.empty());
  const SampleRecord& rec = result.records[0];
  EXPECT_EQ(rec.sample_id, digest);
  EXPECT_EQ(rec.family, "dowgin");
  EXPECT_EQ(format_utc(rec.first_seen), "2014-02-01T00:00:00Z");
  ASSERT_TRUE(rec.dex_date.has_value());
  EXPECT_EQ(format_utc(*rec.dex_date), "2014-01-20T10:00:00Z");
  EXPECT_EQ(rec.source_path, "apks/a.apk");
}

TEST(Manifest, EmptyFileYieldsNothing) {
  auto path = write_temp_manifest("rs_manifest_empty.jsonl", "");
  ManifestResult result = load_manifest(path);
  EXPECT_TRUE(result.records.empty());
  EXPECT_TRUE(result.diagnostics.empty());
}

TEST(Manifest, BadTimestampRejectedWithLineNumber) {
  std::string digest(64, 'b');
  auto path = write_temp_manifest(
      "rs_manifest_badts.jsonl",
      "{\"sha256\":\"" + digest +
          "\",\"family\":\"x\",\"first_seen\":\"not-a-date\",\"path\":\"a.apk\"}\n");
  ManifestResult result = load_manifest(path);
  EXPECT_TRUE(result.records.empty());
  ASSERT_EQ(result.diagnostics.size(), 1u);
  EXPECT_EQ(result.diagnostics[0].code, ErrorCode::kManifestSchema);
  EXPECT_EQ(result.diagnostics[0].context, "line 1");
}

TEST(Manifest, DiagnosticsDoNotAbortTheRest) {
  std::string good(64, 'c');
  auto path = write_temp_manifest(
      "rs_manifest_mixed.jsonl",
      "not json at all\n"
      "{\"sha256\":\"short\",\"family\":\"x\",\"first_seen\":\"2014-01-01T00:00:00Z\",\"path\":\"a\"}\n"
      "{\"sha256\":\"" + good +
          "\",\"family\":\"ok\",\"first_seen\":\"2014-01-01T00:00:00Z\",\"path\":\"b\"}\n");
  ManifestResult result = load_manifest(path);
  ASSERT_EQ(result.records.size(), 1u);
  EXPECT_EQ(result.records[0].family, "ok");
  ASSERT_EQ(result.diagnostics.size(), 2u);
  EXPECT_EQ(result.diagnostics[0].context, "line 1");
  EXPECT_EQ(result.diagnostics[1].context, "line 2");
}

TEST(Manifest, AvLabelsSubstituteForFamily) {
  std::string digest(64, 'd');
  auto path = write_temp_manifest(
      "rs_manifest_av.jsonl",
      "{\"sha256\":\"" + digest +
          "\",\"first_seen\":\"2014-01-01T00:00:00Z\",\"path\":\"a\","
          "\"av_labels\":{\"ava\":\"Trojan.Dowgin.A\"}}\n"
          "{\"sha256\":\"" + digest +
          "\",\"first_seen\":\"2014-01-01T00:00:00Z\",\"path\":\"a\"}\n");
  ManifestResult result = load_manifest(path);
  ASSERT_EQ(result.records.size(), 1u);
  EXPECT_TRUE(result.records[0].family.empty());
  EXPECT_EQ(result.records[0].av_labels.size(), 1u);
  ASSERT_EQ(result.diagnostics.size(), 1u);  // second line has neither
  EXPECT_EQ(result.diagnostics[0].context, "line 2");
}

TEST(Manifest, DuplicateSampleIdsRejected) {
  std::string digest(64, 'f');
  std::string line = "{\"sha256\":\"" + digest +
                     "\",\"family\":\"x\",\"first_seen\":\"2014-01-01T00:00:00Z\","
                     "\"path\":\"a\"}\n";
  auto path = write_temp_manifest("rs_manifest_dup.jsonl", line + line);
  ManifestResult result = load_manifest(path);
  EXPECT_EQ(result.records.size(), 1u);
  ASSERT_EQ(result.diagnostics.size(), 1u);
  EXPECT_EQ(result.diagnostics[0].context, "line 2");
}

TEST(Manifest, MissingFileThrows) {
  EXPECT_THROW(load_manifest("/nonexistent/manifest.jsonl"), Error);
}

// ---------------------------------------------------------------------------

VendorLabelSet label_set(std::map<std::string, std::string> labels) {
  VendorLabelSet set;
  set.sample_id = std::string(64, 'e');
  set.labels = std::move(labels);
  return set;
}

TEST(Labels, PluralityWins) {
  auto result = normalize_family(
      label_set({{"A", "Trojan.Android.Dowgin.x"},
                 {"B", "Andr/Dowgin-C"},
                 {"C", "Adware.Dowgin"}}),
      {"trojan", "android", "andr", "adware"}, 2);
  ASSERT_TRUE(result.has_value());
  EXPECT_EQ(*result, "dowgin");
}

TEST(Labels, AllStopwordedIsSingleton) {
  auto result = normalize_family(label_set({{"A", "Generic.Malware"}}),
                                 {"generic", "malware"}, 1);
  EXPECT_FALSE(result.has_value());
}

TEST(Labels, NoAgreementIsSingleton) {
  auto result = normalize_family(label_set({{"A", "abc.Foo"}, {"B", "xyz.Bar"}}),
                                 {}, 2);
  EXPECT_FALSE(result.has_value());
}

TEST(Labels, TiesBreakLexicographically) {
  auto result = normalize_family(
      label_set({{"A", "alpha beta"}, {"B", "beta alpha"}}), {}, 2);
  ASSERT_TRUE(result.has_value());
  EXPECT_EQ(*result, "alpha");
}

TEST(Labels, RepeatedTokenInOneVendorCountsOnce) {
  // "foo" twice in one label is still one vendor's vote.
  auto result = normalize_family(
      label_set({{"A", "foo.foo.foo"}, {"B", "bar.baz"}}), {}, 2);
  EXPECT_FALSE(result.has_value());
}

TEST(Labels, VendorRenamingInvariance) {
  std::map<std::string, std::string> original = {
      {"v1", "Trojan.Dowgin.A"}, {"v2", "Andr/Dowgin"}, {"v3", "Generic.Kuguo"}};
  std::map<std::string, std::string> renamed = {
      {"x9", "Trojan.Dowgin.A"}, {"q2", "Andr/Dowgin"}, {"m7", "Generic.Kuguo"}};
  auto a = normalize_family(label_set(original), default_label_stopwords(), 2);
  auto b = normalize_family(label_set(renamed), default_label_stopwords(), 2);
  EXPECT_EQ(a, b);
}

// Randomized: permuting vendors never changes the outcome, and adding a
// stopword that is not the winner never turns a singleton into a family.
TEST(Labels, PermutationAndStopwordMonotonicity) {
  std::mt19937 rng(23);
  const std::vector<std::string> words = {"dowgin", "kuguo", "airpush", "zanu",
                                          "plankton", "generic", "mobi"};
  for (int trial = 0; trial < 100; ++trial) {
    std::map<std::string, std::string> labels;
    int vendors = 2 + static_cast<int>(rng() % 5);
    for (int v = 0; v < vendors; ++v) {
      std::string label = words[rng() % words.size()] + "." +
                          words[rng() % words.size()];
      labels["vendor" + std::to_string(v)] = label;
    }
    std::set<std::string> stops = {"generic"};
    auto base = normalize_family(label_set(labels), stops, 2);

    // Same content under permuted vendor names.
    std::map<std::string, std::string> permuted;
    int i = 0;
    for (const auto& [vendor, label] : labels) {
      permuted["z" + std::to_string(99 - i++)] = label;
    }
    EXPECT_EQ(normalize_family(label_set(permuted), stops, 2), base);

    // Stopword monotonicity on non-winning tokens.
    if (!base.has_value()) {
      stops.insert("zanu");
      EXPECT_FALSE(normalize_family(label_set(labels), stops, 2).has_value());
    }
  }
}

}  // namespace
}  // namespace riderscope
