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

#ifndef RIDERSCOPE_DEX_BUILDER_HPP_
#define RIDERSCOPE_DEX_BUILDER_HPP_

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "riderscope/common.hpp"
#include "riderscope/digest.hpp"

namespace riderscope::dex {

// Emits structurally valid version-035 Dalvik executables for the corpus
// generator and for test fixtures: identifier tables sorted per the format
// rules, adler32 checksum and sha1 signature filled in. Bodies are never
// executed, so no verifier-level typing is attempted.

using MethodHandle = std::uint32_t;

// Label-based assembly of one method body. Two passes: widths are fixed per
// opcode, so offsets are known before branch patching.
class MethodAsm {
 public:
  using Label = int;

  Label new_label() {
    labels_.push_back(-1);
    return static_cast<Label>(labels_.size() - 1);
  }

  void bind(Label label) { labels_.at(label) = static_cast<int>(offset_); }

  void nop() { emit({0x0000}); }

  void const4(int reg, int literal) {
    emit({static_cast<std::uint16_t>(0x12 | (reg << 8) | ((literal & 0xf) << 12))});
  }

  void const16(int reg, int literal) {
    emit({static_cast<std::uint16_t>(0x13 | (reg << 8)),
          static_cast<std::uint16_t>(literal & 0xffff)});
  }

  void move(int dst, int src) {
    emit({static_cast<std::uint16_t>(0x01 | (dst << 8) | (src << 12))});
  }

  void add_int_lit8(int dst, int src, int literal) {
    emit({static_cast<std::uint16_t>(0xd8 | (dst << 8)),
          static_cast<std::uint16_t>((src & 0xff) | ((literal & 0xff) << 8))});
  }

  void if_eqz(int reg, Label target) {
    emit({static_cast<std::uint16_t>(0x38 | (reg << 8)), 0}, target, 1);
  }

  void if_eq(int reg_a, int reg_b, Label target) {
    emit({static_cast<std::uint16_t>(0x32 | (reg_a << 8) | (reg_b << 12)), 0},
         target, 1);
  }

  void goto16(Label target) { emit({0x0029, 0}, target, 1); }

  void return_void() { emit({0x000e}); }

  void invoke_virtual(MethodHandle method, int receiver_reg) {
    emit_invoke(0x6e, method, {receiver_reg});
  }

  void invoke_static(MethodHandle method) { emit_invoke(0x71, method, {}); }

  void move_result_object(int reg) {
    emit({static_cast<std::uint16_t>(0x0c | (reg << 8))});
  }

  std::uint32_t unit_count() const { return offset_; }

  // Resolves labels; method references stay as handles for DexBuilder to
  // patch once the sorted method table exists.
  std::vector<std::uint16_t> assemble() const {
    std::vector<std::uint16_t> units;
    units.reserve(offset_);
    for (const Ins& ins : code_) {
      std::vector<std::uint16_t> u = ins.units;
      if (ins.branch_label >= 0) {
        int target = labels_.at(ins.branch_label);
        if (target < 0) throw std::logic_error("unbound label");
        int rel = target - static_cast<int>(ins.offset);
        u[ins.branch_unit] = static_cast<std::uint16_t>(rel & 0xffff);
      }
      units.insert(units.end(), u.begin(), u.end());
    }
    return units;
  }

  struct MethodPatch {
    std::uint32_t unit_index;
    MethodHandle handle;
  };
  const std::vector<MethodPatch>& method_patches() const { return method_patches_; }

 private:
  struct Ins {
    std::vector<std::uint16_t> units;
    std::uint32_t offset = 0;
    int branch_label = -1;
    int branch_unit = 0;
  };

  void emit(std::vector<std::uint16_t> units, int branch_label = -1,
            int branch_unit = 0) {
    Ins ins;
    ins.offset = offset_;
    ins.branch_label = branch_label;
    ins.branch_unit = branch_unit;
    offset_ += static_cast<std::uint32_t>(units.size());
    ins.units = std::move(units);
    code_.push_back(std::move(ins));
  }

  void emit_invoke(std::uint8_t op, MethodHandle method, std::vector<int> regs) {
    std::uint16_t unit0 =
        static_cast<std::uint16_t>(op | (static_cast<int>(regs.size()) << 12));
    std::uint16_t unit2 = 0;
    for (size_t i = 0; i < regs.size() && i < 4; ++i) {
      unit2 |= static_cast<std::uint16_t>((regs[i] & 0xf) << (4 * i));
    }
    method_patches_.push_back({offset_ + 1, method});
    emit({unit0, 0 /* method idx patched later */, unit2});
  }

  std::vector<Ins> code_;
  std::vector<int> labels_;
  std::vector<MethodPatch> method_patches_;
  std::uint32_t offset_ = 0;
};

class DexBuilder {
 public:
  // Declares (or reuses) a method reference; proto is ()V for generated
  // bodies and for framework targets, whose true signatures are irrelevant
  // to name-level annotation.
  MethodHandle method_ref(const std::string& class_descriptor,
                          const std::string& name) {
    auto key = std::make_pair(class_descriptor, name);
    auto it = method_index_.find(key);
    if (it != method_index_.end()) return it->second;
    methods_.push_back({class_descriptor, name});
    MethodHandle handle = static_cast<MethodHandle>(methods_.size() - 1);
    method_index_[key] = handle;
    return handle;
  }

  void add_class(const std::string& descriptor,
                 const std::string& superclass = "Ljava/lang/Object;") {
    classes_.push_back({descriptor, superclass, {}});
    class_index_[descriptor] = classes_.size() - 1;
  }

  void add_method(const std::string& class_descriptor, const std::string& name,
                  const MethodAsm& code, std::uint16_t registers = 8) {
    auto it = class_index_.find(class_descriptor);
    if (it == class_index_.end()) throw std::logic_error("class not declared");
    Body body;
    body.handle = method_ref(class_descriptor, name);
    body.registers = registers;
    body.units = code.assemble();
    body.patches = code.method_patches();
    classes_[it->second].bodies.push_back(std::move(body));
  }

  Bytes build() const;

 private:
  struct MethodDecl {
    std::string class_descriptor;
    std::string name;
  };

  struct Body {
    MethodHandle handle = 0;
    std::uint16_t registers = 8;
    std::vector<std::uint16_t> units;
    std::vector<MethodAsm::MethodPatch> patches;
  };

  struct ClassDecl {
    std::string descriptor;
    std::string superclass;
    std::vector<Body> bodies;
  };

  std::vector<MethodDecl> methods_;
  std::map<std::pair<std::string, std::string>, MethodHandle> method_index_;
  std::vector<ClassDecl> classes_;
  std::map<std::string, size_t> class_index_;
};

namespace detail {

inline void put16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put32_at(Bytes& out, size_t pos, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out[pos + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

inline void put_uleb(Bytes& out, std::uint32_t v) {
  do {
    std::uint8_t b = v & 0x7f;
    v >>= 7;
    if (v != 0) b |= 0x80;
    out.push_back(b);
  } while (v != 0);
}

inline void align4(Bytes& out) {
  while (out.size() % 4 != 0) out.push_back(0);
}

}  // namespace detail

inline Bytes DexBuilder::build() const {
  using detail::align4;
  using detail::put16;
  using detail::put32;
  using detail::put32_at;
  using detail::put_uleb;

  // --- identifier pools ------------------------------------------------
  const std::string kVoidDesc = "V";
  const std::string kShortyVoid = "V";

  std::vector<std::string> strings;
  auto want_string = [&strings](const std::string& s) { strings.push_back(s); };
  want_string(kVoidDesc);

  std::vector<std::string> type_descs;
  auto want_type = [&](const std::string& d) {
    type_descs.push_back(d);
    want_string(d);
  };
  want_type(kVoidDesc);
  for (const MethodDecl& m : methods_) {
    want_type(m.class_descriptor);
    want_string(m.name);
  }
  for (const ClassDecl& c : classes_) {
    want_type(c.descriptor);
    want_type(c.superclass);
  }

  auto sort_unique = [](std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  sort_unique(strings);
  sort_unique(type_descs);

  std::map<std::string, std::uint32_t> string_idx;
  for (std::uint32_t i = 0; i < strings.size(); ++i) string_idx[strings[i]] = i;
  std::map<std::string, std::uint32_t> type_idx;
  for (std::uint32_t i = 0; i < type_descs.size(); ++i) type_idx[type_descs[i]] = i;

  // One proto: ()V.
  const std::uint32_t void_type = type_idx.at(kVoidDesc);
  const std::uint32_t shorty_void_str = string_idx.at(kShortyVoid);

  // method_ids sorted by (class type idx, name string idx, proto idx).
  struct SortedMethod {
    std::uint32_t class_type;
    std::uint32_t name_str;
    MethodHandle handle;
  };
  std::vector<SortedMethod> sorted_methods;
  sorted_methods.reserve(methods_.size());
  for (MethodHandle h = 0; h < methods_.size(); ++h) {
    sorted_methods.push_back({type_idx.at(methods_[h].class_descriptor),
                              string_idx.at(methods_[h].name), h});
  }
  std::sort(sorted_methods.begin(), sorted_methods.end(),
            [](const SortedMethod& a, const SortedMethod& b) {
              if (a.class_type != b.class_type) return a.class_type < b.class_type;
              return a.name_str < b.name_str;
            });
  std::vector<std::uint32_t> handle_to_idx(methods_.size());
  for (std::uint32_t i = 0; i < sorted_methods.size(); ++i) {
    handle_to_idx[sorted_methods[i].handle] = i;
  }

  // --- layout -----------------------------------------------------------
  Bytes out(0x70, 0);  // header patched last

  const std::uint32_t string_ids_off = static_cast<std::uint32_t>(out.size());
  std::vector<size_t> string_id_slots;
  for (size_t i = 0; i < strings.size(); ++i) {
    string_id_slots.push_back(out.size());
    put32(out, 0);
  }

  const std::uint32_t type_ids_off = static_cast<std::uint32_t>(out.size());
  for (const std::string& d : type_descs) put32(out, string_idx.at(d));

  const std::uint32_t proto_ids_off = static_cast<std::uint32_t>(out.size());
  put32(out, shorty_void_str);
  put32(out, void_type);
  put32(out, 0);  // no parameters

  const std::uint32_t method_ids_off = static_cast<std::uint32_t>(out.size());
  for (const SortedMethod& m : sorted_methods) {
    put16(out, static_cast<std::uint16_t>(m.class_type));
    put16(out, 0);  // proto ()V
    put32(out, m.name_str);
  }

  const std::uint32_t class_defs_off = static_cast<std::uint32_t>(out.size());
  std::vector<size_t> class_data_slots;
  for (const ClassDecl& c : classes_) {
    put32(out, type_idx.at(c.descriptor));
    put32(out, 0x0001);  // ACC_PUBLIC
    put32(out, type_idx.at(c.superclass));
    put32(out, 0);           // interfaces_off
    put32(out, 0xffffffff);  // source_file_idx
    put32(out, 0);           // annotations_off
    class_data_slots.push_back(out.size());
    put32(out, 0);  // class_data_off, patched below
    put32(out, 0);  // static_values_off
  }

  const std::uint32_t data_off = static_cast<std::uint32_t>(out.size());

  // string data
  for (size_t i = 0; i < strings.size(); ++i) {
    put32_at(out, string_id_slots[i], static_cast<std::uint32_t>(out.size()));
    put_uleb(out, static_cast<std::uint32_t>(strings[i].size()));  // ASCII only
    out.insert(out.end(), strings[i].begin(), strings[i].end());
    out.push_back(0);
  }

  // code items
  std::map<MethodHandle, std::uint32_t> code_offsets;
  std::uint32_t code_item_count = 0;
  std::uint32_t first_code_off = 0;
  for (const ClassDecl& c : classes_) {
    for (const Body& body : c.bodies) {
      align4(out);
      std::uint32_t off = static_cast<std::uint32_t>(out.size());
      if (first_code_off == 0) first_code_off = off;
      code_offsets[body.handle] = off;
      ++code_item_count;
      put16(out, body.registers);
      put16(out, 0);  // ins: generated bodies are static, no args
      put16(out, 4);  // outs
      put16(out, 0);  // tries
      put32(out, 0);  // debug_info_off
      put32(out, static_cast<std::uint32_t>(body.units.size()));
      std::vector<std::uint16_t> units = body.units;
      for (const MethodAsm::MethodPatch& patch : body.patches) {
        units.at(patch.unit_index) =
            static_cast<std::uint16_t>(handle_to_idx.at(patch.handle));
      }
      for (std::uint16_t u : units) put16(out, u);
    }
  }

  // class data
  std::uint32_t first_class_data_off = 0;
  for (size_t ci = 0; ci < classes_.size(); ++ci) {
    const ClassDecl& c = classes_[ci];
    std::uint32_t off = static_cast<std::uint32_t>(out.size());
    if (first_class_data_off == 0) first_class_data_off = off;
    put32_at(out, class_data_slots[ci], off);
    put_uleb(out, 0);  // static fields
    put_uleb(out, 0);  // instance fields
    put_uleb(out, static_cast<std::uint32_t>(c.bodies.size()));  // direct methods
    put_uleb(out, 0);  // virtual methods

    std::vector<const Body*> ordered;
    for (const Body& b : c.bodies) ordered.push_back(&b);
    std::sort(ordered.begin(), ordered.end(), [&](const Body* a, const Body* b) {
      return handle_to_idx[a->handle] < handle_to_idx[b->handle];
    });
    std::uint32_t prev_idx = 0;
    for (size_t i = 0; i < ordered.size(); ++i) {
      std::uint32_t idx = handle_to_idx[ordered[i]->handle];
      put_uleb(out, i == 0 ? idx : idx - prev_idx);
      prev_idx = idx;
      put_uleb(out, 0x0009);  // ACC_PUBLIC | ACC_STATIC
      put_uleb(out, code_offsets.at(ordered[i]->handle));
    }
  }

  // map list
  align4(out);
  const std::uint32_t map_off = static_cast<std::uint32_t>(out.size());
  struct MapItem {
    std::uint16_t type;
    std::uint32_t size;
    std::uint32_t offset;
  };
  std::vector<MapItem> map_items = {
      {0x0000, 1, 0},
      {0x0001, static_cast<std::uint32_t>(strings.size()), string_ids_off},
      {0x0002, static_cast<std::uint32_t>(type_descs.size()), type_ids_off},
      {0x0003, 1, proto_ids_off},
      {0x0005, static_cast<std::uint32_t>(methods_.size()), method_ids_off},
  };
  if (!classes_.empty()) {
    map_items.push_back(
        {0x0006, static_cast<std::uint32_t>(classes_.size()), class_defs_off});
  }
  map_items.push_back(
      {0x2002, static_cast<std::uint32_t>(strings.size()), data_off});
  if (code_item_count > 0) map_items.push_back({0x2001, code_item_count, first_code_off});
  if (!classes_.empty()) {
    map_items.push_back({0x2000, static_cast<std::uint32_t>(classes_.size()),
                         first_class_data_off});
  }
  map_items.push_back({0x1000, 1, map_off});
  put32(out, static_cast<std::uint32_t>(map_items.size()));
  for (const MapItem& mi : map_items) {
    put16(out, mi.type);
    put16(out, 0);
    put32(out, mi.size);
    put32(out, mi.offset);
  }

  // --- header -----------------------------------------------------------
  const char kMagic[8] = {'d', 'e', 'x', '\n', '0', '3', '5', '\0'};
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(kMagic[i]);
  put32_at(out, 0x20, static_cast<std::uint32_t>(out.size()));  // file_size
  put32_at(out, 0x24, 0x70);                                    // header_size
  put32_at(out, 0x28, 0x12345678);                              // endian_tag
  put32_at(out, 0x2c, 0);                                       // link_size
  put32_at(out, 0x30, 0);                                       // link_off
  put32_at(out, 0x34, map_off);
  put32_at(out, 0x38, static_cast<std::uint32_t>(strings.size()));
  put32_at(out, 0x3c, string_ids_off);
  put32_at(out, 0x40, static_cast<std::uint32_t>(type_descs.size()));
  put32_at(out, 0x44, type_ids_off);
  put32_at(out, 0x48, 1);  // proto_ids_size
  put32_at(out, 0x4c, proto_ids_off);
  put32_at(out, 0x50, 0);  // field_ids
  put32_at(out, 0x54, 0);
  put32_at(out, 0x58, static_cast<std::uint32_t>(methods_.size()));
  put32_at(out, 0x5c, method_ids_off);
  put32_at(out, 0x60, static_cast<std::uint32_t>(classes_.size()));
  put32_at(out, 0x64, classes_.empty() ? 0 : class_defs_off);
  put32_at(out, 0x68, static_cast<std::uint32_t>(out.size()) - data_off);
  put32_at(out, 0x6c, data_off);

  auto signature = sha1_raw(ByteSpan(out.data() + 32, out.size() - 32));
  std::copy(signature.begin(), signature.end(), out.begin() + 12);
  std::uint32_t checksum = static_cast<std::uint32_t>(
      adler32(1L, out.data() + 12, static_cast<uInt>(out.size() - 12)));
  put32_at(out, 8, checksum);
  return out;
}

}  // namespace riderscope::dex

#endif  // RIDERSCOPE_DEX_BUILDER_HPP_
