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

#ifndef RIDERSCOPE_CSV_HPP_
#define RIDERSCOPE_CSV_HPP_

#include <cstdio>
#include <string>
#include <vector>

namespace riderscope {

// UTF-8, comma-separated, header row, RFC-style quoting. Output bytes are a
// pure function of the rows, so CSVs are safe for golden comparisons.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) {
    append_row(header);
  }

  void row(const std::vector<std::string>& cells) { append_row(cells); }

  const std::string& str() const { return out_; }

  static std::string number(double value, int decimals = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
  }

 private:
  static bool needs_quoting(const std::string& cell) {
    return cell.find_first_of(",\"\r\n") != std::string::npos;
  }

  void append_row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out_.push_back(',');
      if (needs_quoting(cells[i])) {
        out_.push_back('"');
        for (char c : cells[i]) {
          if (c == '"') out_.push_back('"');
          out_.push_back(c);
        }
        out_.push_back('"');
      } else {
        out_ += cells[i];
      }
    }
    out_.push_back('\n');
  }

  std::string out_;
};

}  // namespace riderscope

#endif  // RIDERSCOPE_CSV_HPP_
