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

#ifndef RIDERSCOPE_DEX_HPP_
#define RIDERSCOPE_DEX_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "riderscope/common.hpp"
#include "riderscope/digest.hpp"

namespace riderscope::dex {

// Dalvik executable parsing, limited to what control-flow construction
// needs: identifier tables, class definitions, and per-method instruction
// streams decoded far enough to resolve branch and invoke targets.

// ---------------------------------------------------------------------------
// Instruction formats. Width is in 16-bit code units. The table covers the
// whole opcode space so a stray byte cannot desynchronize the decoder.

enum class Format : std::uint8_t {
  k10x, k12x, k11n, k11x, k10t, k20t, k22x, k21t, k21s, k21h, k21c, k23x,
  k22b, k22t, k22s, k22c, k30t, k32x, k31i, k31t, k31c, k35c, k3rc, k45cc,
  k4rcc, k51l,
};

inline int format_width(Format f) {
  switch (f) {
    case Format::k10x: case Format::k12x: case Format::k11n: case Format::k11x:
    case Format::k10t:
      return 1;
    case Format::k20t: case Format::k22x: case Format::k21t: case Format::k21s:
    case Format::k21h: case Format::k21c: case Format::k23x: case Format::k22b:
    case Format::k22t: case Format::k22s: case Format::k22c:
      return 2;
    case Format::k30t: case Format::k32x: case Format::k31i: case Format::k31t:
    case Format::k31c: case Format::k35c: case Format::k3rc:
      return 3;
    case Format::k45cc: case Format::k4rcc:
      return 4;
    case Format::k51l:
      return 5;
  }
  return 1;
}

inline const Format* opcode_formats() {
  static const Format kTable[256] = {
      /*0x00 nop*/ Format::k10x,
      /*0x01*/ Format::k12x, /*0x02*/ Format::k22x, /*0x03*/ Format::k32x,
      /*0x04*/ Format::k12x, /*0x05*/ Format::k22x, /*0x06*/ Format::k32x,
      /*0x07*/ Format::k12x, /*0x08*/ Format::k22x, /*0x09*/ Format::k32x,
      /*0x0a*/ Format::k11x, /*0x0b*/ Format::k11x, /*0x0c*/ Format::k11x,
      /*0x0d*/ Format::k11x,
      /*0x0e return-void*/ Format::k10x,
      /*0x0f*/ Format::k11x, /*0x10*/ Format::k11x, /*0x11*/ Format::k11x,
      /*0x12 const/4*/ Format::k11n,
      /*0x13*/ Format::k21s, /*0x14*/ Format::k31i, /*0x15*/ Format::k21h,
      /*0x16*/ Format::k21s, /*0x17*/ Format::k31i, /*0x18*/ Format::k51l,
      /*0x19*/ Format::k21h, /*0x1a const-string*/ Format::k21c,
      /*0x1b*/ Format::k31c, /*0x1c*/ Format::k21c,
      /*0x1d*/ Format::k11x, /*0x1e*/ Format::k11x,
      /*0x1f check-cast*/ Format::k21c, /*0x20 instance-of*/ Format::k22c,
      /*0x21 array-length*/ Format::k12x, /*0x22 new-instance*/ Format::k21c,
      /*0x23 new-array*/ Format::k22c, /*0x24*/ Format::k35c, /*0x25*/ Format::k3rc,
      /*0x26 fill-array-data*/ Format::k31t,
      /*0x27 throw*/ Format::k11x,
      /*0x28 goto*/ Format::k10t, /*0x29 goto/16*/ Format::k20t,
      /*0x2a goto/32*/ Format::k30t,
      /*0x2b packed-switch*/ Format::k31t, /*0x2c sparse-switch*/ Format::k31t,
      /*0x2d*/ Format::k23x, /*0x2e*/ Format::k23x, /*0x2f*/ Format::k23x,
      /*0x30*/ Format::k23x, /*0x31*/ Format::k23x,
      /*0x32..0x37 if-test*/ Format::k22t, Format::k22t, Format::k22t,
      Format::k22t, Format::k22t, Format::k22t,
      /*0x38..0x3d if-testz*/ Format::k21t, Format::k21t, Format::k21t,
      Format::k21t, Format::k21t, Format::k21t,
      /*0x3e..0x43 unused*/ Format::k10x, Format::k10x, Format::k10x,
      Format::k10x, Format::k10x, Format::k10x,
      /*0x44..0x51 aget/aput*/ Format::k23x, Format::k23x, Format::k23x,
      Format::k23x, Format::k23x, Format::k23x, Format::k23x, Format::k23x,
      Format::k23x, Format::k23x, Format::k23x, Format::k23x, Format::k23x,
      Format::k23x,
      /*0x52..0x5f iget/iput*/ Format::k22c, Format::k22c, Format::k22c,
      Format::k22c, Format::k22c, Format::k22c, Format::k22c, Format::k22c,
      Format::k22c, Format::k22c, Format::k22c, Format::k22c, Format::k22c,
      Format::k22c,
      /*0x60..0x6d sget/sput*/ Format::k21c, Format::k21c, Format::k21c,
      Format::k21c, Format::k21c, Format::k21c, Format::k21c, Format::k21c,
      Format::k21c, Format::k21c, Format::k21c, Format::k21c, Format::k21c,
      Format::k21c,
      /*0x6e..0x72 invoke*/ Format::k35c, Format::k35c, Format::k35c,
      Format::k35c, Format::k35c,
      /*0x73 unused*/ Format::k10x,
      /*0x74..0x78 invoke/range*/ Format::k3rc, Format::k3rc, Format::k3rc,
      Format::k3rc, Format::k3rc,
      /*0x79..0x7a unused*/ Format::k10x, Format::k10x,
      /*0x7b..0x8f unop*/ Format::k12x, Format::k12x, Format::k12x, Format::k12x,
      Format::k12x, Format::k12x, Format::k12x, Format::k12x, Format::k12x,
      Format::k12x, Format::k12x, Format::k12x, Format::k12x, Format::k12x,
      Format::k12x, Format::k12x, Format::k12x, Format::k12x, Format::k12x,
      Format::k12x, Format::k12x,
      /*0x90..0xaf binop*/ Format::k23x, Format::k23x, Format::k23x, Format::k23x,
      Format::k23x, Format::k23x, Format::k23x, Format::k23x, Format::k23x,
      Format::k23x, Format::k23x, Format::k23x, Format::k23x, Format::k23x,
      Format::k23x, Format::k23x, Format::k23x, Format::k23x, Format::k23x,
      Format::k23x, Format::k23x, Format::k23x, Format::k23x, Format::k23x,
      Format::k23x, Format::k23x, Format::k23x, Format::k23x, Format::k23x,
      Format::k23x, Format::k23x, Format::k23x,
      /*0xb0..0xcf binop/2addr*/ Format::k12x, Format::k12x, Format::k12x,
      Format::k12x, Format::k12x, Format::k12x, Format::k12x, Format::k12x,
      Format::k12x, Format::k12x, Format::k12x, Format::k12x, Format::k12x,
      Format::k12x, Format::k12x, Format::k12x, Format::k12x, Format::k12x,
      Format::k12x, Format::k12x, Format::k12x, Format::k12x, Format::k12x,
      Format::k12x, Format::k12x, Format::k12x, Format::k12x, Format::k12x,
      Format::k12x, Format::k12x, Format::k12x, Format::k12x,
      /*0xd0..0xd7 binop/lit16*/ Format::k22s, Format::k22s, Format::k22s,
      Format::k22s, Format::k22s, Format::k22s, Format::k22s, Format::k22s,
      /*0xd8..0xe2 binop/lit8*/ Format::k22b, Format::k22b, Format::k22b,
      Format::k22b, Format::k22b, Format::k22b, Format::k22b, Format::k22b,
      Format::k22b, Format::k22b, Format::k22b,
      /*0xe3..0xf9 unused*/ Format::k10x, Format::k10x, Format::k10x,
      Format::k10x, Format::k10x, Format::k10x, Format::k10x, Format::k10x,
      Format::k10x, Format::k10x, Format::k10x, Format::k10x, Format::k10x,
      Format::k10x, Format::k10x, Format::k10x, Format::k10x, Format::k10x,
      Format::k10x, Format::k10x, Format::k10x, Format::k10x, Format::k10x,
      /*0xfa invoke-polymorphic*/ Format::k45cc,
      /*0xfb invoke-polymorphic/range*/ Format::k4rcc,
      /*0xfc invoke-custom*/ Format::k35c,
      /*0xfd invoke-custom/range*/ Format::k3rc,
      /*0xfe const-method-handle*/ Format::k21c,
      /*0xff const-method-type*/ Format::k21c,
  };
  return kTable;
}

inline bool is_invoke_with_method_ref(std::uint8_t op) {
  // invoke-kind, invoke-kind/range, invoke-polymorphic[/range]; the custom
  // variants (0xfc/0xfd) reference call sites, not methods.
  return (op >= 0x6e && op <= 0x72) || (op >= 0x74 && op <= 0x78) ||
         op == 0xfa || op == 0xfb;
}

inline bool is_return(std::uint8_t op) { return op >= 0x0e && op <= 0x11; }
inline bool is_throw(std::uint8_t op) { return op == 0x27; }
inline bool is_goto(std::uint8_t op) { return op >= 0x28 && op <= 0x2a; }
inline bool is_switch(std::uint8_t op) { return op == 0x2b || op == 0x2c; }
inline bool is_conditional_branch(std::uint8_t op) { return op >= 0x32 && op <= 0x3d; }

// ---------------------------------------------------------------------------

struct Instruction {
  std::uint32_t offset = 0;  // code units from method start
  std::uint8_t opcode = 0;
  std::uint8_t width = 1;  // code units
  // Absolute code-unit offsets. For switches these are the case targets in
  // payload order; the fall-through default is derived by the CFG builder.
  std::vector<std::uint32_t> branch_targets;
  std::int32_t invoke_method = -1;  // method table index, or -1
};

struct MethodBody {
  std::uint32_t method_idx = 0;
  std::uint16_t registers = 0;
  std::vector<Instruction> instructions;
  std::vector<std::uint32_t> invoked_methods;  // in instruction order
};

struct EncodedMethod {
  std::uint32_t method_idx = 0;
  std::uint32_t access_flags = 0;
  std::optional<MethodBody> body;  // absent for abstract/native declarations
};

struct ClassDef {
  std::uint32_t class_type_idx = 0;
  std::uint32_t superclass_type_idx = 0xffffffffu;
  std::vector<EncodedMethod> direct_methods;
  std::vector<EncodedMethod> virtual_methods;
};

struct ProtoId {
  std::uint32_t shorty_idx = 0;
  std::uint32_t return_type_idx = 0;
  std::vector<std::uint32_t> param_type_idxs;
};

struct MethodId {
  std::uint32_t class_type_idx = 0;
  std::uint32_t proto_idx = 0;
  std::uint32_t name_idx = 0;
};

// "Lcom/foo/Bar;" -> "com.foo.Bar"; arrays keep a [] suffix per dimension.
inline std::string descriptor_to_dotted(std::string_view descriptor) {
  int dims = 0;
  while (!descriptor.empty() && descriptor.front() == '[') {
    descriptor.remove_prefix(1);
    ++dims;
  }
  std::string out;
  if (!descriptor.empty() && descriptor.front() == 'L' && descriptor.back() == ';') {
    out.assign(descriptor.substr(1, descriptor.size() - 2));
    for (char& c : out) {
      if (c == '/') c = '.';
    }
  } else {
    out.assign(descriptor);
  }
  for (int i = 0; i < dims; ++i) out += "[]";
  return out;
}

class DexModule {
 public:
  static DexModule parse(ByteSpan bytes);

  const std::vector<std::string>& strings() const { return strings_; }
  const std::vector<std::uint32_t>& types() const { return types_; }
  const std::vector<ProtoId>& protos() const { return protos_; }
  const std::vector<MethodId>& methods() const { return methods_; }
  const std::vector<ClassDef>& classes() const { return classes_; }
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }
  const std::string& source_digest() const { return source_digest_; }

  const std::string& type_descriptor(std::uint32_t type_idx) const {
    return strings_.at(types_.at(type_idx));
  }

  std::string class_dotted_name(std::uint32_t type_idx) const {
    return descriptor_to_dotted(type_descriptor(type_idx));
  }

  // "defining.class.Name.methodName", the form the taxonomy consumes.
  std::string method_signature(std::uint32_t method_idx) const {
    if (method_idx < method_id_valid_.size() && !method_id_valid_[method_idx]) {
      return "<invalid method id " + std::to_string(method_idx) + ">";
    }
    const MethodId& m = methods_.at(method_idx);
    return class_dotted_name(m.class_type_idx) + "." + strings_.at(m.name_idx);
  }

  bool method_id_valid(std::uint32_t method_idx) const {
    return method_idx < method_id_valid_.size() && method_id_valid_[method_idx];
  }

 private:
  std::vector<std::string> strings_;
  std::vector<std::uint32_t> types_;  // indices into strings_
  std::vector<ProtoId> protos_;
  std::vector<MethodId> methods_;
  std::vector<bool> method_id_valid_;
  std::vector<ClassDef> classes_;
  std::vector<Diagnostic> diagnostics_;
  std::string source_digest_;
};

namespace detail {

class Cursor {
 public:
  Cursor(ByteSpan data, size_t pos) : data_(data), pos_(pos) {}

  std::uint8_t u8() {
    check(1);
    return data_[pos_++];
  }

  std::uint16_t u16() {
    check(2);
    std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }

  std::uint32_t u32() {
    check(4);
    std::uint32_t v = static_cast<std::uint32_t>(data_[pos_]) |
                      (static_cast<std::uint32_t>(data_[pos_ + 1]) << 8) |
                      (static_cast<std::uint32_t>(data_[pos_ + 2]) << 16) |
                      (static_cast<std::uint32_t>(data_[pos_ + 3]) << 24);
    pos_ += 4;
    return v;
  }

  std::uint32_t uleb128() {
    std::uint32_t result = 0;
    int shift = 0;
    while (true) {
      std::uint8_t b = u8();
      result |= static_cast<std::uint32_t>(b & 0x7f) << shift;
      if ((b & 0x80) == 0) break;
      shift += 7;
      if (shift > 31) throw Error(ErrorCode::kDexTruncated, "uleb128 overflow");
    }
    return result;
  }

  size_t pos() const { return pos_; }
  void seek(size_t pos) { pos_ = pos; }

 private:
  void check(size_t n) const {
    if (pos_ + n > data_.size()) {
      throw Error(ErrorCode::kDexTruncated, "read past end of file");
    }
  }

  ByteSpan data_;
  size_t pos_;
};

// Decodes one code item's instruction stream. Switch/fill-array payloads are
// measured for width and skipped; the parent switch carries the resolved
// case targets.
inline std::vector<Instruction> decode_instructions(ByteSpan insns_bytes) {
  const size_t unit_count = insns_bytes.size() / 2;
  auto unit_at = [&](size_t u) -> std::uint16_t {
    return static_cast<std::uint16_t>(insns_bytes[2 * u] | (insns_bytes[2 * u + 1] << 8));
  };

  std::vector<Instruction> out;
  size_t offset = 0;
  while (offset < unit_count) {
    std::uint16_t unit = unit_at(offset);
    std::uint8_t op = static_cast<std::uint8_t>(unit & 0xff);
    std::uint8_t high = static_cast<std::uint8_t>(unit >> 8);

    if (op == 0x00 && high != 0x00) {
      // Pseudo-instruction payload.
      size_t width;
      if (high == 0x01) {  // packed-switch payload
        if (offset + 2 > unit_count) throw Error(ErrorCode::kDexTruncated, "payload");
        width = static_cast<size_t>(unit_at(offset + 1)) * 2 + 4;
      } else if (high == 0x02) {  // sparse-switch payload
        if (offset + 2 > unit_count) throw Error(ErrorCode::kDexTruncated, "payload");
        width = static_cast<size_t>(unit_at(offset + 1)) * 4 + 2;
      } else if (high == 0x03) {  // fill-array-data payload
        if (offset + 4 > unit_count) throw Error(ErrorCode::kDexTruncated, "payload");
        std::uint16_t elem_width = unit_at(offset + 1);
        std::uint32_t size = static_cast<std::uint32_t>(unit_at(offset + 2)) |
                             (static_cast<std::uint32_t>(unit_at(offset + 3)) << 16);
        width = (static_cast<std::uint64_t>(size) * elem_width + 1) / 2 + 4;
      } else {
        throw Error(ErrorCode::kDexTruncated, "unknown payload ident");
      }
      if (offset + width > unit_count) {
        throw Error(ErrorCode::kDexTruncated, "payload extends past code item");
      }
      offset += width;
      continue;
    }

    Format fmt = opcode_formats()[op];
    int width = format_width(fmt);
    if (offset + static_cast<size_t>(width) > unit_count) {
      throw Error(ErrorCode::kDexTruncated, "instruction extends past code item");
    }

    Instruction ins;
    ins.offset = static_cast<std::uint32_t>(offset);
    ins.opcode = op;
    ins.width = static_cast<std::uint8_t>(width);

    auto rel_target = [&](std::int64_t rel) {
      std::int64_t abs = static_cast<std::int64_t>(offset) + rel;
      if (abs < 0 || abs >= static_cast<std::int64_t>(unit_count)) {
        throw Error(ErrorCode::kDexTruncated, "branch target outside code item");
      }
      return static_cast<std::uint32_t>(abs);
    };

    switch (fmt) {
      case Format::k10t:
        ins.branch_targets.push_back(rel_target(static_cast<std::int8_t>(high)));
        break;
      case Format::k20t:
        ins.branch_targets.push_back(
            rel_target(static_cast<std::int16_t>(unit_at(offset + 1))));
        break;
      case Format::k30t: {
        std::int32_t rel = static_cast<std::int32_t>(
            static_cast<std::uint32_t>(unit_at(offset + 1)) |
            (static_cast<std::uint32_t>(unit_at(offset + 2)) << 16));
        ins.branch_targets.push_back(rel_target(rel));
        break;
      }
      case Format::k21t:
      case Format::k22t:
        ins.branch_targets.push_back(
            rel_target(static_cast<std::int16_t>(unit_at(offset + 1))));
        break;
      case Format::k31t: {
        std::int32_t rel = static_cast<std::int32_t>(
            static_cast<std::uint32_t>(unit_at(offset + 1)) |
            (static_cast<std::uint32_t>(unit_at(offset + 2)) << 16));
        if (is_switch(op)) {
          std::uint32_t payload = rel_target(rel);
          std::uint16_t ident = unit_at(payload);
          if (op == 0x2b) {  // packed-switch
            if (ident != 0x0100 || payload + 2 > unit_count) {
              throw Error(ErrorCode::kDexTruncated, "bad packed-switch payload");
            }
            std::uint16_t size = unit_at(payload + 1);
            if (payload + 4 + 2ull * size > unit_count) {
              throw Error(ErrorCode::kDexTruncated, "packed-switch targets truncated");
            }
            for (std::uint16_t i = 0; i < size; ++i) {
              std::int32_t t = static_cast<std::int32_t>(
                  static_cast<std::uint32_t>(unit_at(payload + 4 + 2 * i)) |
                  (static_cast<std::uint32_t>(unit_at(payload + 5 + 2 * i)) << 16));
              ins.branch_targets.push_back(rel_target(t));
            }
          } else {  // sparse-switch
            if (ident != 0x0200 || payload + 2 > unit_count) {
              throw Error(ErrorCode::kDexTruncated, "bad sparse-switch payload");
            }
            std::uint16_t size = unit_at(payload + 1);
            if (payload + 2 + 4ull * size > unit_count) {
              throw Error(ErrorCode::kDexTruncated, "sparse-switch targets truncated");
            }
            size_t targets_base = payload + 2 + 2ull * size;
            for (std::uint16_t i = 0; i < size; ++i) {
              std::int32_t t = static_cast<std::int32_t>(
                  static_cast<std::uint32_t>(unit_at(targets_base + 2 * i)) |
                  (static_cast<std::uint32_t>(unit_at(targets_base + 2 * i + 1)) << 16));
              ins.branch_targets.push_back(rel_target(t));
            }
          }
        }
        break;
      }
      case Format::k35c:
      case Format::k3rc:
      case Format::k45cc:
      case Format::k4rcc:
        if (is_invoke_with_method_ref(op)) {
          ins.invoke_method = static_cast<std::int32_t>(unit_at(offset + 1));
        }
        break;
      default:
        break;
    }

    out.push_back(std::move(ins));
    offset += width;
  }
  return out;
}

}  // namespace detail

inline DexModule DexModule::parse(ByteSpan bytes) {
  if (bytes.size() < 0x70) throw Error(ErrorCode::kDexTruncated, "shorter than header");
  static const char kMagicPrefix[4] = {'d', 'e', 'x', '\n'};
  for (int i = 0; i < 4; ++i) {
    if (bytes[i] != static_cast<std::uint8_t>(kMagicPrefix[i])) {
      throw Error(ErrorCode::kDexMagic, "not a Dalvik executable");
    }
  }
  // Versions 035-039 cover the corpus era; anything else is rejected.
  if (bytes[4] != '0' || bytes[5] != '3' || bytes[6] < '5' || bytes[6] > '9' ||
      bytes[7] != 0) {
    throw Error(ErrorCode::kDexMagic, "unsupported dex version");
  }

  detail::Cursor header(bytes, 0x20);
  std::uint32_t file_size = header.u32();
  std::uint32_t header_size = header.u32();
  std::uint32_t endian_tag = header.u32();
  if (endian_tag != 0x12345678u) {
    throw Error(ErrorCode::kDexMagic, "unsupported endianness tag");
  }
  if (file_size > bytes.size() || header_size < 0x70) {
    throw Error(ErrorCode::kDexTruncated, "declared sizes exceed actual length");
  }
  header.seek(0x38);  // past link_size/link_off/map_off
  std::uint32_t string_ids_size = header.u32();
  std::uint32_t string_ids_off = header.u32();
  std::uint32_t type_ids_size = header.u32();
  std::uint32_t type_ids_off = header.u32();
  std::uint32_t proto_ids_size = header.u32();
  std::uint32_t proto_ids_off = header.u32();
  std::uint32_t field_ids_size = header.u32();
  std::uint32_t field_ids_off = header.u32();
  (void)field_ids_size;
  (void)field_ids_off;
  std::uint32_t method_ids_size = header.u32();
  std::uint32_t method_ids_off = header.u32();
  std::uint32_t class_defs_size = header.u32();
  std::uint32_t class_defs_off = header.u32();

  DexModule mod;
  mod.source_digest_ = sha256_hex(bytes);

  mod.strings_.reserve(string_ids_size);
  for (std::uint32_t i = 0; i < string_ids_size; ++i) {
    detail::Cursor id(bytes, string_ids_off + 4ull * i);
    std::uint32_t data_off = id.u32();
    detail::Cursor data(bytes, data_off);
    std::uint32_t utf16_size = data.uleb128();
    (void)utf16_size;
    std::string s;
    while (true) {
      std::uint8_t b = data.u8();
      if (b == 0) break;
      s.push_back(static_cast<char>(b));
    }
    mod.strings_.push_back(std::move(s));
  }

  mod.types_.reserve(type_ids_size);
  for (std::uint32_t i = 0; i < type_ids_size; ++i) {
    detail::Cursor id(bytes, type_ids_off + 4ull * i);
    std::uint32_t descriptor_idx = id.u32();
    if (descriptor_idx >= mod.strings_.size()) {
      throw Error(ErrorCode::kDexBadIndex, "type descriptor index out of range");
    }
    mod.types_.push_back(descriptor_idx);
  }

  mod.protos_.reserve(proto_ids_size);
  for (std::uint32_t i = 0; i < proto_ids_size; ++i) {
    detail::Cursor id(bytes, proto_ids_off + 12ull * i);
    ProtoId proto;
    proto.shorty_idx = id.u32();
    proto.return_type_idx = id.u32();
    std::uint32_t params_off = id.u32();
    if (proto.shorty_idx >= mod.strings_.size() ||
        proto.return_type_idx >= mod.types_.size()) {
      throw Error(ErrorCode::kDexBadIndex, "proto indices out of range");
    }
    if (params_off != 0) {
      detail::Cursor list(bytes, params_off);
      std::uint32_t count = list.u32();
      for (std::uint32_t j = 0; j < count; ++j) {
        std::uint16_t type_idx = list.u16();
        if (type_idx >= mod.types_.size()) {
          throw Error(ErrorCode::kDexBadIndex, "param type index out of range");
        }
        proto.param_type_idxs.push_back(type_idx);
      }
    }
    mod.protos_.push_back(std::move(proto));
  }

  // A corrupt method id row only poisons the methods that reference it.
  mod.methods_.reserve(method_ids_size);
  mod.method_id_valid_.reserve(method_ids_size);
  for (std::uint32_t i = 0; i < method_ids_size; ++i) {
    detail::Cursor id(bytes, method_ids_off + 8ull * i);
    MethodId m;
    m.class_type_idx = id.u16();
    m.proto_idx = id.u16();
    m.name_idx = id.u32();
    bool valid = m.class_type_idx < mod.types_.size() &&
                 m.proto_idx < mod.protos_.size() &&
                 m.name_idx < mod.strings_.size();
    if (!valid) {
      mod.diagnostics_.push_back({ErrorCode::kDexBadIndex,
                                  "method id " + std::to_string(i),
                                  "indices out of range"});
      m = MethodId{};
    }
    mod.methods_.push_back(m);
    mod.method_id_valid_.push_back(valid);
  }

  auto parse_code_item = [&](std::uint32_t code_off, std::uint32_t method_idx,
                             const std::string& context) -> std::optional<MethodBody> {
    detail::Cursor code(bytes, code_off);
    MethodBody body;
    body.method_idx = method_idx;
    body.registers = code.u16();
    code.u16();  // ins_size
    code.u16();  // outs_size
    std::uint16_t tries_size = code.u16();
    (void)tries_size;
    code.u32();  // debug_info_off
    std::uint32_t insns_size = code.u32();
    size_t insns_start = code.pos();
    if (insns_start + 2ull * insns_size > bytes.size()) {
      throw Error(ErrorCode::kDexTruncated, "code item extends past file: " + context);
    }
    body.instructions =
        detail::decode_instructions(bytes.subspan(insns_start, 2ull * insns_size));
    for (const Instruction& ins : body.instructions) {
      if (ins.invoke_method >= 0) {
        auto target = static_cast<std::uint32_t>(ins.invoke_method);
        if (target >= mod.methods_.size() || !mod.method_id_valid_[target]) {
          throw Error(ErrorCode::kDexBadIndex, "invoke target unresolvable");
        }
        body.invoked_methods.push_back(target);
      }
    }
    return body;
  };

  auto parse_method_list = [&](detail::Cursor& data, std::uint32_t count,
                               std::vector<EncodedMethod>* out) {
    std::uint32_t method_idx = 0;
    for (std::uint32_t i = 0; i < count; ++i) {
      method_idx += data.uleb128();
      EncodedMethod em;
      em.method_idx = method_idx;
      em.access_flags = data.uleb128();
      std::uint32_t code_off = data.uleb128();
      if (method_idx >= mod.methods_.size()) {
        throw Error(ErrorCode::kDexBadIndex, "encoded method index out of range");
      }
      if (!mod.method_id_valid_[method_idx]) {
        mod.diagnostics_.push_back({ErrorCode::kDexBadIndex,
                                    "method id " + std::to_string(method_idx),
                                    "encoded method references a corrupt id"});
        out->push_back(std::move(em));
        continue;
      }
      if (code_off != 0) {
        std::string context = mod.method_signature(method_idx);
        try {
          em.body = parse_code_item(code_off, method_idx, context);
        } catch (const Error& e) {
          // One broken body never takes the whole file down.
          mod.diagnostics_.push_back({e.code(), context, e.what()});
          em.body = std::nullopt;
        }
      }
      out->push_back(std::move(em));
    }
  };

  mod.classes_.reserve(class_defs_size);
  for (std::uint32_t i = 0; i < class_defs_size; ++i) {
    detail::Cursor def(bytes, class_defs_off + 32ull * i);
    ClassDef cls;
    cls.class_type_idx = def.u32();
    def.u32();  // access_flags
    cls.superclass_type_idx = def.u32();
    def.u32();  // interfaces_off
    def.u32();  // source_file_idx
    def.u32();  // annotations_off
    std::uint32_t class_data_off = def.u32();
    if (cls.class_type_idx >= mod.types_.size()) {
      throw Error(ErrorCode::kDexBadIndex, "class type index out of range");
    }
    if (class_data_off != 0) {
      detail::Cursor data(bytes, class_data_off);
      std::uint32_t static_fields = data.uleb128();
      std::uint32_t instance_fields = data.uleb128();
      std::uint32_t direct_methods = data.uleb128();
      std::uint32_t virtual_methods = data.uleb128();
      for (std::uint32_t f = 0; f < static_fields + instance_fields; ++f) {
        data.uleb128();  // field_idx_diff
        data.uleb128();  // access_flags
      }
      parse_method_list(data, direct_methods, &cls.direct_methods);
      parse_method_list(data, virtual_methods, &cls.virtual_methods);
    }
    mod.classes_.push_back(std::move(cls));
  }

  return mod;
}

}  // namespace riderscope::dex

#endif  // RIDERSCOPE_DEX_HPP_
