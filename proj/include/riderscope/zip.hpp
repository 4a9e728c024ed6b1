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

#ifndef RIDERSCOPE_ZIP_HPP_
#define RIDERSCOPE_ZIP_HPP_

#include <zlib.h>

#include <cstdint>
#include <string>
#include <vector>

#include "riderscope/common.hpp"
#include "riderscope/utc.hpp"

namespace riderscope {

// Minimal ZIP container access: enough to walk app packages (central
// directory driven, stored + deflate members) and to emit deterministic
// fixture archives (stored members only). No zip64, no encryption — the
// corpus era predates both in practice, and oversized values are treated
// as corrupt rather than guessed at.

struct ZipEntry {
  std::string name;
  std::uint16_t method = 0;  // 0 = stored, 8 = deflate
  std::uint32_t crc32 = 0;
  std::uint32_t comp_size = 0;
  std::uint32_t uncomp_size = 0;
  std::uint16_t dos_time = 0;
  std::uint16_t dos_date = 0;
  std::uint32_t local_header_off = 0;
};

namespace detail {

inline std::uint16_t rd16(ByteSpan d, size_t off) {
  return static_cast<std::uint16_t>(d[off] | (d[off + 1] << 8));
}

inline std::uint32_t rd32(ByteSpan d, size_t off) {
  return static_cast<std::uint32_t>(d[off]) |
         (static_cast<std::uint32_t>(d[off + 1]) << 8) |
         (static_cast<std::uint32_t>(d[off + 2]) << 16) |
         (static_cast<std::uint32_t>(d[off + 3]) << 24);
}

inline void wr16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void wr32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace detail

// DOS timestamps carry no zone; the toolkit reads them as UTC, which is the
// only reproducible choice for corpus-wide ordering.
inline UtcSeconds dos_to_utc(std::uint16_t dos_date, std::uint16_t dos_time) {
  int year = 1980 + ((dos_date >> 9) & 0x7f);
  unsigned month = (dos_date >> 5) & 0x0f;
  unsigned day = dos_date & 0x1f;
  if (month < 1 || month > 12) month = 1;
  if (day < 1 || day > 31) day = 1;
  int hour = (dos_time >> 11) & 0x1f;
  int minute = (dos_time >> 5) & 0x3f;
  int second = (dos_time & 0x1f) * 2;
  return detail::days_from_civil(year, month, day) * 86400 + hour * 3600 +
         minute * 60 + second;
}

inline std::pair<std::uint16_t, std::uint16_t> utc_to_dos(UtcSeconds t) {
  std::int64_t days = t / 86400;
  std::int64_t rem = t % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  detail::CivilDate cd = detail::civil_from_days(days);
  std::int64_t year = cd.year < 1980 ? 1980 : cd.year;
  if (year > 2107) year = 2107;
  std::uint16_t date = static_cast<std::uint16_t>(((year - 1980) << 9) |
                                                  (cd.month << 5) | cd.day);
  std::uint16_t time = static_cast<std::uint16_t>(
      ((rem / 3600) << 11) | (((rem / 60) % 60) << 5) | ((rem % 60) / 2));
  return {date, time};
}

class ZipReader {
 public:
  // The buffer must outlive the reader.
  explicit ZipReader(ByteSpan data) : data_(data) {
    size_t eocd = find_eocd();
    std::uint16_t count = detail::rd16(data_, eocd + 10);
    std::uint32_t cd_size = detail::rd32(data_, eocd + 12);
    std::uint32_t cd_off = detail::rd32(data_, eocd + 16);
    if (static_cast<std::uint64_t>(cd_off) + cd_size > eocd) {
      throw Error(ErrorCode::kArchiveCorrupt, "central directory out of bounds");
    }
    size_t pos = cd_off;
    entries_.reserve(count);
    for (std::uint16_t i = 0; i < count; ++i) {
      if (pos + 46 > data_.size() || detail::rd32(data_, pos) != 0x02014b50) {
        throw Error(ErrorCode::kArchiveCorrupt, "bad central directory entry");
      }
      ZipEntry e;
      e.method = detail::rd16(data_, pos + 10);
      e.dos_time = detail::rd16(data_, pos + 12);
      e.dos_date = detail::rd16(data_, pos + 14);
      e.crc32 = detail::rd32(data_, pos + 16);
      e.comp_size = detail::rd32(data_, pos + 20);
      e.uncomp_size = detail::rd32(data_, pos + 24);
      std::uint16_t name_len = detail::rd16(data_, pos + 28);
      std::uint16_t extra_len = detail::rd16(data_, pos + 30);
      std::uint16_t comment_len = detail::rd16(data_, pos + 32);
      e.local_header_off = detail::rd32(data_, pos + 42);
      if (pos + 46 + name_len > data_.size()) {
        throw Error(ErrorCode::kArchiveCorrupt, "entry name out of bounds");
      }
      e.name.assign(reinterpret_cast<const char*>(data_.data() + pos + 46), name_len);
      if (e.comp_size == 0xffffffffu || e.uncomp_size == 0xffffffffu) {
        throw Error(ErrorCode::kArchiveCorrupt, "zip64 sizes unsupported");
      }
      entries_.push_back(std::move(e));
      pos += 46u + name_len + extra_len + comment_len;
    }
  }

  const std::vector<ZipEntry>& entries() const { return entries_; }

  // Decompresses one member; max_size bounds the output so hostile size
  // fields cannot balloon memory.
  Bytes read(const ZipEntry& e, std::uint64_t max_size) const {
    if (e.uncomp_size > max_size) {
      throw Error(ErrorCode::kArchiveCorrupt,
                  "member exceeds size ceiling: " + e.name);
    }
    size_t lh = e.local_header_off;
    if (lh + 30 > data_.size() || detail::rd32(data_, lh) != 0x04034b50) {
      throw Error(ErrorCode::kArchiveCorrupt, "bad local header: " + e.name);
    }
    std::uint16_t name_len = detail::rd16(data_, lh + 26);
    std::uint16_t extra_len = detail::rd16(data_, lh + 28);
    size_t data_off = lh + 30 + name_len + extra_len;
    if (data_off + e.comp_size > data_.size()) {
      throw Error(ErrorCode::kArchiveCorrupt, "member data out of bounds: " + e.name);
    }
    ByteSpan comp = data_.subspan(data_off, e.comp_size);
    Bytes out;
    if (e.method == 0) {
      if (e.comp_size != e.uncomp_size) {
        throw Error(ErrorCode::kArchiveCorrupt, "stored size mismatch: " + e.name);
      }
      out.assign(comp.begin(), comp.end());
    } else if (e.method == 8) {
      out.resize(e.uncomp_size);
      z_stream zs{};
      if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) {
        throw Error(ErrorCode::kArchiveCorrupt, "inflate init failed");
      }
      zs.next_in = const_cast<Bytef*>(comp.data());
      zs.avail_in = static_cast<uInt>(comp.size());
      zs.next_out = out.data();
      zs.avail_out = static_cast<uInt>(out.size());
      int rc = inflate(&zs, Z_FINISH);
      bool ok = rc == Z_STREAM_END && zs.total_out == e.uncomp_size;
      inflateEnd(&zs);
      if (!ok) throw Error(ErrorCode::kArchiveCorrupt, "inflate failed: " + e.name);
    } else {
      throw Error(ErrorCode::kArchiveCorrupt,
                  "unsupported compression method: " + e.name);
    }
    std::uint32_t crc = static_cast<std::uint32_t>(
        ::crc32(0L, out.data(), static_cast<uInt>(out.size())));
    if (crc != e.crc32) {
      throw Error(ErrorCode::kArchiveCorrupt, "crc mismatch: " + e.name);
    }
    return out;
  }

 private:
  size_t find_eocd() const {
    if (data_.size() < 22) {
      throw Error(ErrorCode::kArchiveCorrupt, "too small for a zip container");
    }
    size_t scan_floor = data_.size() > 22 + 65535 ? data_.size() - 22 - 65535 : 0;
    for (size_t pos = data_.size() - 22; ; --pos) {
      if (detail::rd32(data_, pos) == 0x06054b50) return pos;
      if (pos == scan_floor) break;
    }
    throw Error(ErrorCode::kArchiveCorrupt, "end-of-central-directory not found");
  }

  ByteSpan data_;
  std::vector<ZipEntry> entries_;
};

// Emits members stored (method 0) in insertion order. Callers that need
// byte-identical output across runs add members in sorted order with fixed
// timestamps.
class ZipWriter {
 public:
  void add(const std::string& name, ByteSpan content, UtcSeconds mod_time = 0) {
    Member m;
    m.name = name;
    m.content.assign(content.begin(), content.end());
    auto [date, time] = utc_to_dos(mod_time);
    m.dos_date = date;
    m.dos_time = time;
    members_.push_back(std::move(m));
  }

  Bytes finish() const {
    Bytes out;
    std::vector<std::uint32_t> offsets;
    offsets.reserve(members_.size());
    for (const Member& m : members_) {
      offsets.push_back(static_cast<std::uint32_t>(out.size()));
      std::uint32_t crc = static_cast<std::uint32_t>(
          ::crc32(0L, m.content.data(), static_cast<uInt>(m.content.size())));
      detail::wr32(out, 0x04034b50);
      detail::wr16(out, 20);  // version needed
      detail::wr16(out, 0);   // flags
      detail::wr16(out, 0);   // stored
      detail::wr16(out, m.dos_time);
      detail::wr16(out, m.dos_date);
      detail::wr32(out, crc);
      detail::wr32(out, static_cast<std::uint32_t>(m.content.size()));
      detail::wr32(out, static_cast<std::uint32_t>(m.content.size()));
      detail::wr16(out, static_cast<std::uint16_t>(m.name.size()));
      detail::wr16(out, 0);  // extra
      out.insert(out.end(), m.name.begin(), m.name.end());
      out.insert(out.end(), m.content.begin(), m.content.end());
    }
    std::uint32_t cd_off = static_cast<std::uint32_t>(out.size());
    for (size_t i = 0; i < members_.size(); ++i) {
      const Member& m = members_[i];
      std::uint32_t crc = static_cast<std::uint32_t>(
          ::crc32(0L, m.content.data(), static_cast<uInt>(m.content.size())));
      detail::wr32(out, 0x02014b50);
      detail::wr16(out, 20);  // version made by
      detail::wr16(out, 20);  // version needed
      detail::wr16(out, 0);
      detail::wr16(out, 0);
      detail::wr16(out, m.dos_time);
      detail::wr16(out, m.dos_date);
      detail::wr32(out, crc);
      detail::wr32(out, static_cast<std::uint32_t>(m.content.size()));
      detail::wr32(out, static_cast<std::uint32_t>(m.content.size()));
      detail::wr16(out, static_cast<std::uint16_t>(m.name.size()));
      detail::wr16(out, 0);
      detail::wr16(out, 0);
      detail::wr16(out, 0);
      detail::wr16(out, 0);
      detail::wr32(out, 0);
      detail::wr32(out, offsets[i]);
      out.insert(out.end(), m.name.begin(), m.name.end());
    }
    std::uint32_t cd_size = static_cast<std::uint32_t>(out.size()) - cd_off;
    detail::wr32(out, 0x06054b50);
    detail::wr16(out, 0);
    detail::wr16(out, 0);
    detail::wr16(out, static_cast<std::uint16_t>(members_.size()));
    detail::wr16(out, static_cast<std::uint16_t>(members_.size()));
    detail::wr32(out, cd_size);
    detail::wr32(out, cd_off);
    detail::wr16(out, 0);
    return out;
  }

 private:
  struct Member {
    std::string name;
    Bytes content;
    std::uint16_t dos_date = 0;
    std::uint16_t dos_time = 0;
  };

  std::vector<Member> members_;
};

}  // namespace riderscope

#endif  // RIDERSCOPE_ZIP_HPP_
