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

#ifndef RIDERSCOPE_UTC_HPP_
#define RIDERSCOPE_UTC_HPP_

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace riderscope {

// Seconds since the Unix epoch, always UTC. Calendar math uses the
// days-from-civil algorithm so results are identical on every platform.
using UtcSeconds = std::int64_t;

namespace detail {

constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct CivilDate {
  std::int64_t year;
  unsigned month;
  unsigned day;
};

constexpr CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {y + (m <= 2), m, d};
}

inline bool read_digits(std::string_view s, size_t pos, size_t count, int* out) {
  if (pos + count > s.size()) return false;
  int v = 0;
  for (size_t i = 0; i < count; ++i) {
    char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  *out = v;
  return true;
}

}  // namespace detail

// Accepts "YYYY-MM-DDTHH:MM:SS[.fff][Z]" and the space-separated variant.
// Fractional seconds are discarded; anything else malformed is rejected.
inline std::optional<UtcSeconds> parse_utc(std::string_view text) {
  int year, month, day, hour = 0, minute = 0, second = 0;
  if (!detail::read_digits(text, 0, 4, &year)) return std::nullopt;
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  if (!detail::read_digits(text, 5, 2, &month)) return std::nullopt;
  if (!detail::read_digits(text, 8, 2, &day)) return std::nullopt;
  size_t pos = 10;
  if (pos < text.size()) {
    if (text[pos] != 'T' && text[pos] != ' ') return std::nullopt;
    ++pos;
    if (!detail::read_digits(text, pos, 2, &hour)) return std::nullopt;
    if (pos + 5 > text.size() || text[pos + 2] != ':') return std::nullopt;
    if (!detail::read_digits(text, pos + 3, 2, &minute)) return std::nullopt;
    pos += 5;
    if (pos < text.size() && text[pos] == ':') {
      if (!detail::read_digits(text, pos + 1, 2, &second)) return std::nullopt;
      pos += 3;
    }
    if (pos < text.size() && text[pos] == '.') {
      ++pos;
      while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    }
    if (pos < text.size()) {
      if (text[pos] != 'Z' || pos + 1 != text.size()) return std::nullopt;
    }
  }
  if (month < 1 || month > 12 || day < 1 || day > 31) return std::nullopt;
  if (hour > 23 || minute > 59 || second > 60) return std::nullopt;
  std::int64_t days = detail::days_from_civil(year, static_cast<unsigned>(month),
                                              static_cast<unsigned>(day));
  return days * 86400 + hour * 3600 + minute * 60 + second;
}

inline std::string format_utc(UtcSeconds t) {
  std::int64_t days = t / 86400;
  std::int64_t rem = t % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  detail::CivilDate cd = detail::civil_from_days(days);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(cd.year), cd.month, cd.day,
                static_cast<long long>(rem / 3600),
                static_cast<long long>((rem / 60) % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

// Calendar quarters, numbered year*4 + (0..3). Quarter intervals are
// half-open, so midnight of Apr 1 falls in Q2.
using QuarterId = std::int64_t;

inline QuarterId quarter_of(UtcSeconds t) {
  std::int64_t days = t / 86400;
  if (t % 86400 < 0) --days;
  detail::CivilDate cd = detail::civil_from_days(days);
  return cd.year * 4 + (cd.month - 1) / 3;
}

inline std::string quarter_label(QuarterId q) {
  return std::to_string(q / 4) + "Q" + std::to_string(q % 4 + 1);
}

// "2014Q3" -> quarter id.
inline std::optional<QuarterId> parse_quarter(std::string_view text) {
  auto qpos = text.find('Q');
  if (qpos == std::string_view::npos || qpos == 0 || qpos + 2 != text.size()) {
    return std::nullopt;
  }
  int year = 0;
  if (!detail::read_digits(text, 0, qpos, &year)) return std::nullopt;
  char qc = text[qpos + 1];
  if (qc < '1' || qc > '4') return std::nullopt;
  return static_cast<QuarterId>(year) * 4 + (qc - '1');
}

inline UtcSeconds quarter_start(QuarterId q) {
  std::int64_t year = q / 4;
  unsigned month = static_cast<unsigned>(q % 4) * 3 + 1;
  return detail::days_from_civil(year, month, 1) * 86400;
}

}  // namespace riderscope

#endif  // RIDERSCOPE_UTC_HPP_
