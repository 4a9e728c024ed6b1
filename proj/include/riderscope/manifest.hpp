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

#ifndef RIDERSCOPE_MANIFEST_HPP_
#define RIDERSCOPE_MANIFEST_HPP_

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "riderscope/common.hpp"
#include "riderscope/magic.hpp"
#include "riderscope/utc.hpp"

namespace riderscope {

struct ExecutableRef {
  std::string member_path;     // nested segments joined by "!/"
  std::string content_digest;  // sha256 of decompressed bytes
  int depth = 0;
  UtcSeconds mod_time = 0;
  Bytes bytes;  // populated only when the walk is asked to keep payloads
};

struct ResourceRef {
  std::string member_path;
  FileType file_type = FileType::kOther;
  std::string content_digest;
  int depth = 0;
  Bytes bytes;
};

struct SampleRecord {
  std::string sample_id;  // 64-hex content digest
  std::string family;     // normalized lowercase token; empty = unlabeled
  UtcSeconds first_seen = 0;                 // T_vt
  std::optional<UtcSeconds> dex_date;        // T_dex; proxied from the archive when absent
  std::string source_path;
  std::vector<ExecutableRef> executables;
  std::vector<ResourceRef> resources;
  std::map<std::string, std::string> av_labels;
  bool malformed = false;
};

struct ManifestResult {
  std::vector<SampleRecord> records;
  std::vector<Diagnostic> diagnostics;
};

// One JSON object per line: required sha256, first_seen, path; family is
// required unless av_labels is present; dex_date and av_labels optional.
// Bad lines become MANIFEST_SCHEMA diagnostics carrying the line number.
inline ManifestResult load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kManifestIo, "cannot open " + path.string());

  ManifestResult result;
  std::set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& msg) {
      result.diagnostics.push_back(
          {ErrorCode::kManifestSchema, "line " + std::to_string(line_no), msg});
    };
    nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      fail("not a JSON object");
      continue;
    }
    SampleRecord rec;
    if (!obj.contains("sha256") || !obj["sha256"].is_string() ||
        !is_hex_digest(obj["sha256"].get<std::string>())) {
      fail("missing or malformed sha256");
      continue;
    }
    rec.sample_id = obj["sha256"].get<std::string>();
    if (!seen_ids.insert(rec.sample_id).second) {
      fail("duplicate sample id " + rec.sample_id);
      continue;
    }
    if (!obj.contains("path") || !obj["path"].is_string()) {
      fail("missing path");
      continue;
    }
    rec.source_path = obj["path"].get<std::string>();
    if (!obj.contains("first_seen") || !obj["first_seen"].is_string()) {
      fail("missing first_seen");
      continue;
    }
    auto first_seen = parse_utc(obj["first_seen"].get<std::string>());
    if (!first_seen) {
      fail("unparseable first_seen: " + obj["first_seen"].get<std::string>());
      continue;
    }
    rec.first_seen = *first_seen;
    if (obj.contains("dex_date")) {
      if (!obj["dex_date"].is_string()) {
        fail("dex_date must be a string");
        continue;
      }
      auto dex_date = parse_utc(obj["dex_date"].get<std::string>());
      if (!dex_date) {
        fail("unparseable dex_date: " + obj["dex_date"].get<std::string>());
        continue;
      }
      rec.dex_date = *dex_date;
    }
    if (obj.contains("av_labels") && obj["av_labels"].is_object()) {
      for (auto& [vendor, label] : obj["av_labels"].items()) {
        if (label.is_string()) rec.av_labels[vendor] = label.get<std::string>();
      }
    }
    if (obj.contains("family") && obj["family"].is_string()) {
      rec.family = obj["family"].get<std::string>();
    } else if (rec.av_labels.empty()) {
      fail("record carries neither family nor av_labels");
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

}  // namespace riderscope

#endif  // RIDERSCOPE_MANIFEST_HPP_
