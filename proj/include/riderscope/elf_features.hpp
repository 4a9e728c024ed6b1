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

#ifndef RIDERSCOPE_ELF_FEATURES_HPP_
#define RIDERSCOPE_ELF_FEATURES_HPP_

#include <cstdint>
#include <set>
#include <string>

#include "riderscope/common.hpp"

namespace riderscope {

// Import surface of an embedded native executable: undefined function
// symbols out of the dynamic symbol table (names resolved through each
// section's sh_link string table) and DT_NEEDED libraries out of the dynamic
// section. Both ELF classes and both byte orders are handled; corpus
// binaries ship for x86 and ARM alike.

struct ElfFeatureSet {
  std::string resource;  // content digest of the bytes analyzed
  std::set<std::string> imported_functions;
  std::set<std::string> needed_libraries;
  std::string machine;
};

namespace elf_detail {

struct Reader {
  ByteSpan data;
  bool big_endian = false;

  std::uint8_t u8(std::uint64_t off) const {
    if (off >= data.size()) throw Error(ErrorCode::kElfMalformed, "offset out of bounds");
    return data[off];
  }

  std::uint16_t u16(std::uint64_t off) const {
    std::uint16_t a = u8(off), b = u8(off + 1);
    return big_endian ? static_cast<std::uint16_t>((a << 8) | b)
                      : static_cast<std::uint16_t>((b << 8) | a);
  }

  std::uint32_t u32(std::uint64_t off) const {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v = (v << 8) | u8(off + (big_endian ? i : 3 - i));
    }
    return v;
  }

  std::uint64_t u64(std::uint64_t off) const {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v = (v << 8) | u8(off + (big_endian ? i : 7 - i));
    }
    return v;
  }
};

inline std::string machine_name(std::uint16_t e_machine) {
  switch (e_machine) {
    case 3: return "x86";
    case 8: return "mips";
    case 20: return "ppc";
    case 21: return "ppc64";
    case 40: return "arm";
    case 62: return "x86_64";
    case 183: return "aarch64";
    case 243: return "riscv";
    default: return "em_" + std::to_string(e_machine);
  }
}

// Import features are bare names; "memcpy@GLIBC_2.4"-style decorations are
// linker noise.
inline std::string strip_version_suffix(std::string name) {
  auto at = name.find('@');
  if (at != std::string::npos) name.erase(at);
  return name;
}

inline std::string string_at(const Reader& r, std::uint64_t strtab_off,
                             std::uint64_t strtab_size, std::uint64_t index) {
  if (index >= strtab_size) throw Error(ErrorCode::kElfMalformed, "string index out of table");
  std::string out;
  std::uint64_t off = strtab_off + index;
  while (true) {
    std::uint8_t c = r.u8(off++);
    if (c == 0) break;
    if (out.size() > 4096) throw Error(ErrorCode::kElfMalformed, "unterminated string");
    out.push_back(static_cast<char>(c));
  }
  return out;
}

}  // namespace elf_detail

inline ElfFeatureSet parse_elf_features(ByteSpan bytes) {
  using elf_detail::Reader;
  if (bytes.size() < 0x34 || bytes[0] != 0x7f || bytes[1] != 'E' || bytes[2] != 'L' ||
      bytes[3] != 'F') {
    throw Error(ErrorCode::kElfMalformed, "missing or truncated ELF header");
  }
  std::uint8_t ei_class = bytes[4];
  std::uint8_t ei_data = bytes[5];
  if (ei_class != 1 && ei_class != 2) {
    throw Error(ErrorCode::kElfUnsupportedClass,
                "unknown ELF class " + std::to_string(ei_class));
  }
  if (ei_data != 1 && ei_data != 2) {
    throw Error(ErrorCode::kElfMalformed, "unknown ELF data encoding");
  }
  const bool is64 = ei_class == 2;
  Reader r{bytes, ei_data == 2};

  ElfFeatureSet features;
  features.machine = elf_detail::machine_name(r.u16(0x12));

  std::uint64_t shoff = is64 ? r.u64(0x28) : r.u32(0x20);
  std::uint16_t shentsize = r.u16(is64 ? 0x3a : 0x2e);
  std::uint16_t shnum = r.u16(is64 ? 0x3c : 0x30);
  if (shoff == 0 || shnum == 0) return features;  // no sections: nothing imported
  std::uint64_t expected_entsize = is64 ? 64 : 40;
  if (shentsize < expected_entsize) {
    throw Error(ErrorCode::kElfMalformed, "section header entry too small");
  }

  struct Section {
    std::uint32_t type = 0;
    std::uint32_t link = 0;
    std::uint64_t offset = 0;
    std::uint64_t size = 0;
    std::uint64_t entsize = 0;
  };
  std::vector<Section> sections(shnum);
  for (std::uint16_t i = 0; i < shnum; ++i) {
    std::uint64_t base = shoff + static_cast<std::uint64_t>(i) * shentsize;
    Section& s = sections[i];
    s.type = r.u32(base + 4);
    if (is64) {
      s.offset = r.u64(base + 0x18);
      s.size = r.u64(base + 0x20);
      s.link = r.u32(base + 0x28);
      s.entsize = r.u64(base + 0x38);
    } else {
      s.offset = r.u32(base + 0x10);
      s.size = r.u32(base + 0x14);
      s.link = r.u32(base + 0x18);
      s.entsize = r.u32(base + 0x24);
    }
  }

  auto string_table = [&](std::uint32_t link) -> const Section& {
    if (link >= sections.size()) {
      throw Error(ErrorCode::kElfMalformed, "sh_link out of range");
    }
    return sections[link];
  };

  constexpr std::uint32_t kDynsym = 11;
  constexpr std::uint32_t kDynamic = 6;
  constexpr std::uint16_t kUndef = 0;

  for (const Section& s : sections) {
    if (s.type == kDynsym) {
      const Section& strtab = string_table(s.link);
      std::uint64_t entsize = s.entsize != 0 ? s.entsize : (is64 ? 24 : 16);
      std::uint64_t count = entsize == 0 ? 0 : s.size / entsize;
      for (std::uint64_t i = 1; i < count; ++i) {  // entry 0 is the null symbol
        std::uint64_t sym = s.offset + i * entsize;
        std::uint32_t name_off = r.u32(sym);
        std::uint8_t info = is64 ? r.u8(sym + 4) : r.u8(sym + 12);
        std::uint16_t shndx = is64 ? r.u16(sym + 6) : r.u16(sym + 14);
        std::uint8_t type = info & 0xf;
        if (shndx != kUndef) continue;
        if (type != 0 /*NOTYPE*/ && type != 2 /*FUNC*/) continue;
        std::string name = elf_detail::string_at(r, strtab.offset, strtab.size, name_off);
        if (name.empty()) continue;
        features.imported_functions.insert(elf_detail::strip_version_suffix(name));
      }
    } else if (s.type == kDynamic) {
      const Section& strtab = string_table(s.link);
      std::uint64_t entsize = s.entsize != 0 ? s.entsize : (is64 ? 16 : 8);
      std::uint64_t count = entsize == 0 ? 0 : s.size / entsize;
      for (std::uint64_t i = 0; i < count; ++i) {
        std::uint64_t dyn = s.offset + i * entsize;
        std::int64_t tag = is64 ? static_cast<std::int64_t>(r.u64(dyn))
                                : static_cast<std::int32_t>(r.u32(dyn));
        std::uint64_t value = is64 ? r.u64(dyn + 8) : r.u32(dyn + 4);
        if (tag == 0) break;  // DT_NULL
        if (tag == 1) {       // DT_NEEDED
          features.needed_libraries.insert(
              elf_detail::string_at(r, strtab.offset, strtab.size, value));
        }
      }
    }
  }
  return features;
}

}  // namespace riderscope

#endif  // RIDERSCOPE_ELF_FEATURES_HPP_
