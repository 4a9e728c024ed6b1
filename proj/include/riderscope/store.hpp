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

#ifndef RIDERSCOPE_STORE_HPP_
#define RIDERSCOPE_STORE_HPP_

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "riderscope/common.hpp"

namespace riderscope {

// The intermediate store is a directory of structured-text files, one per
// family per stage: diffable, greppable, no service to run. Writers emit
// deterministic bytes so reruns (and different thread counts) leave the
// store bit-identical.
class Store {
 public:
  explicit Store(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }

  std::filesystem::path path(const std::string& relative) const {
    return root_ / relative;
  }

  bool exists(const std::string& relative) const {
    return std::filesystem::exists(path(relative));
  }

  void write(const std::string& relative, std::string_view content) const {
    write_file(path(relative), content);
  }

  std::string read(const std::string& relative) const {
    Bytes raw = read_file(path(relative));
    return std::string(raw.begin(), raw.end());
  }

  void write_json(const std::string& relative, const nlohmann::json& value) const {
    write(relative, value.dump(2) + "\n");
  }

  nlohmann::json read_json(const std::string& relative) const {
    return nlohmann::json::parse(read(relative));
  }

  void write_jsonl(const std::string& relative,
                   const std::vector<nlohmann::json>& lines) const {
    std::string out;
    for (const nlohmann::json& line : lines) {
      out += line.dump();
      out += '\n';
    }
    write(relative, out);
  }

  std::vector<nlohmann::json> read_jsonl(const std::string& relative) const {
    std::ifstream in(path(relative));
    if (!in) throw Error(ErrorCode::kStoreIo, "cannot open " + path(relative).string());
    std::vector<nlohmann::json> lines;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      lines.push_back(nlohmann::json::parse(line));
    }
    return lines;
  }

  // Families become file names; anything outside [a-z0-9_-] is hex-escaped
  // so distinct families can never collide on disk.
  static std::string family_file_token(const std::string& family) {
    std::string out;
    for (char c : family) {
      if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-') {
        out.push_back(c);
      } else {
        static const char* kHex = "0123456789abcdef";
        out.push_back('%');
        out.push_back(kHex[(static_cast<unsigned char>(c) >> 4) & 0xf]);
        out.push_back(kHex[static_cast<unsigned char>(c) & 0xf]);
      }
    }
    return out.empty() ? "%empty" : out;
  }

  // Feature queries keep case ("SMS", "SmsManager.sendTextMessage"); dots
  // become underscores.
  static std::string feature_file_token(const std::string& feature) {
    std::string out;
    for (char c : feature) {
      if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
          c == '_' || c == '-') {
        out.push_back(c);
      } else {
        out.push_back('_');
      }
    }
    return out.empty() ? "_empty" : out;
  }

 private:
  std::filesystem::path root_;
};

}  // namespace riderscope

#endif  // RIDERSCOPE_STORE_HPP_
