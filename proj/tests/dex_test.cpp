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

#include <filesystem>

#include "riderscope/dex.hpp"
#include "riderscope/dex_builder.hpp"

namespace riderscope::dex {
namespace {

const std::filesystem::path kFixtures = RIDERSCOPE_FIXTURE_DIR;

Bytes fixture_dex() { return read_file(kFixtures / "minimal.dex"); }

// minimal.dex was assembled by hand (make_dex_fixture.py) straight from the
// published container layout, so these counts are an oracle the parser did
// not produce itself.
TEST(DexParse, HandAssembledFixture) {
  Bytes data = fixture_dex();
  DexModule mod = DexModule::parse(ByteSpan(data.data(), data.size()));

  EXPECT_EQ(mod.strings().size(), 9u);
  EXPECT_EQ(mod.types().size(), 5u);
  EXPECT_EQ(mod.methods().size(), 3u);
  ASSERT_EQ(mod.classes().size(), 1u);
  EXPECT_TRUE(mod.diagnostics().empty());

  const ClassDef& fix = mod.classes()[0];
  EXPECT_EQ(mod.class_dotted_name(fix.class_type_idx), "com.example.Fix");
  ASSERT_EQ(fix.virtual_methods.size(), 2u);

  // getId: const/4; invoke-virtual; move-result-object; return-void
  const EncodedMethod& get_id = fix.virtual_methods[0];
  EXPECT_EQ(mod.method_signature(get_id.method_idx), "com.example.Fix.getId");
  ASSERT_TRUE(get_id.body.has_value());
  ASSERT_EQ(get_id.body->instructions.size(), 4u);
  EXPECT_EQ(get_id.body->instructions[0].opcode, 0x12);
  EXPECT_EQ(get_id.body->instructions[1].opcode, 0x6e);
  EXPECT_EQ(get_id.body->instructions[1].width, 3);
  EXPECT_EQ(get_id.body->instructions[2].opcode, 0x0c);
  EXPECT_EQ(get_id.body->instructions[3].opcode, 0x0e);
  ASSERT_EQ(get_id.body->invoked_methods.size(), 1u);
  EXPECT_EQ(mod.method_signature(get_id.body->invoked_methods[0]),
            "android.telephony.TelephonyManager.getDeviceId");

  const EncodedMethod& run = fix.virtual_methods[1];
  EXPECT_EQ(mod.method_signature(run.method_idx), "com.example.Fix.run");
  ASSERT_TRUE(run.body.has_value());
  EXPECT_EQ(run.body->instructions.size(), 1u);
}

TEST(DexParse, RoundTripStable) {
  Bytes data = fixture_dex();
  DexModule a = DexModule::parse(ByteSpan(data.data(), data.size()));
  DexModule b = DexModule::parse(ByteSpan(data.data(), data.size()));
  EXPECT_EQ(a.strings(), b.strings());
  EXPECT_EQ(a.types(), b.types());
  EXPECT_EQ(a.source_digest(), b.source_digest());
  ASSERT_EQ(a.classes().size(), b.classes().size());
  for (size_t i = 0; i < a.classes().size(); ++i) {
    EXPECT_EQ(a.classes()[i].virtual_methods.size(),
              b.classes()[i].virtual_methods.size());
  }
}

TEST(DexParse, WrongMagicRejected) {
  Bytes zip = {'P', 'K', 0x03, 0x04};
  zip.resize(0x80, 0);
  try {
    DexModule::parse(ByteSpan(zip.data(), zip.size()));
    FAIL() << "expected DEX_MAGIC";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDexMagic);
  }
}

TEST(DexParse, UnsupportedVersionRejected) {
  Bytes data = fixture_dex();
  data[6] = '4';  // "dex\n045\0" is outside the supported window
  try {
    DexModule::parse(ByteSpan(data.data(), data.size()));
    FAIL() << "expected DEX_MAGIC";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDexMagic);
  }
}

TEST(DexParse, TruncationRejected) {
  Bytes data = fixture_dex();
  Bytes head(data.begin(), data.begin() + 0x40);
  EXPECT_THROW(DexModule::parse(ByteSpan(head.data(), head.size())), Error);
  // Declared file_size larger than actual bytes.
  Bytes lying = data;
  lying[0x20] = 0xff;
  lying[0x21] = 0xff;
  try {
    DexModule::parse(ByteSpan(lying.data(), lying.size()));
    FAIL() << "expected DEX_TRUNCATED";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDexTruncated);
  }
}

TEST(DexParse, BrokenBodyDegradesPerMethod) {
  // Stomp getId's insns_size (the u4 right before its first instruction
  // bytes); the method must drop out with a diagnostic while run() and the
  // identifier tables survive.
  Bytes data = fixture_dex();
  const std::uint8_t pattern[] = {0x12, 0x00, 0x6e, 0x10};
  size_t pos = 0;
  for (; pos + 4 <= data.size(); ++pos) {
    if (std::equal(pattern, pattern + 4, data.begin() + pos)) break;
  }
  ASSERT_LT(pos + 4, data.size());
  for (int i = 0; i < 4; ++i) data[pos - 4 + i] = 0xff;

  DexModule mod = DexModule::parse(ByteSpan(data.data(), data.size()));
  ASSERT_EQ(mod.diagnostics().size(), 1u);
  EXPECT_EQ(mod.diagnostics()[0].context, "com.example.Fix.getId");
  ASSERT_EQ(mod.classes().size(), 1u);
  const ClassDef& fix = mod.classes()[0];
  ASSERT_EQ(fix.virtual_methods.size(), 2u);
  EXPECT_FALSE(fix.virtual_methods[0].body.has_value());  // getId dropped
  EXPECT_TRUE(fix.virtual_methods[1].body.has_value());   // run intact
}

TEST(DexParse, CorruptMethodIdPoisonsOnlyItsCallers) {
  Bytes data = fixture_dex();
  // Stomp the name index of method id 0 (TelephonyManager.getDeviceId).
  std::uint32_t method_ids_off = static_cast<std::uint32_t>(data[0x5c]) |
                                 (static_cast<std::uint32_t>(data[0x5d]) << 8);
  for (int i = 0; i < 4; ++i) data[method_ids_off + 4 + i] = 0xff;

  DexModule mod = DexModule::parse(ByteSpan(data.data(), data.size()));
  EXPECT_FALSE(mod.method_id_valid(0));
  // getId invokes method 0 and gets skipped; run survives untouched.
  EXPECT_GE(mod.diagnostics().size(), 2u);  // bad id + skipped caller
  ASSERT_EQ(mod.classes().size(), 1u);
  const ClassDef& fix = mod.classes()[0];
  ASSERT_EQ(fix.virtual_methods.size(), 2u);
  EXPECT_FALSE(fix.virtual_methods[0].body.has_value());
  EXPECT_TRUE(fix.virtual_methods[1].body.has_value());
}

TEST(DexParse, DescriptorConversion) {
  EXPECT_EQ(descriptor_to_dotted("Landroid/telephony/TelephonyManager;"),
            "android.telephony.TelephonyManager");
  EXPECT_EQ(descriptor_to_dotted("Ljava/lang/Runtime;"), "java.lang.Runtime");
  EXPECT_EQ(descriptor_to_dotted("Lcom/foo/a;"), "com.foo.a");
  EXPECT_EQ(descriptor_to_dotted("[Ljava/lang/String;"), "java.lang.String[]");
  EXPECT_EQ(descriptor_to_dotted("I"), "I");
}

// The builder and the parser are independent encode/decode routes over the
// same published format; disagreements surface here.
TEST(DexBuilder, BuilderOutputParsesBack) {
  DexBuilder builder;
  builder.add_class("Lcom/synthetic/Carrier;");
  MethodHandle exec = builder.method_ref("Ljava/lang/Runtime;", "exec");
  MethodHandle load = builder.method_ref("Ljava/lang/System;", "loadLibrary");

  MethodAsm body;
  auto skip = body.new_label();
  body.const4(0, 1);
  body.if_eqz(0, skip);
  body.invoke_virtual(exec, 0);
  body.bind(skip);
  body.invoke_static(load);
  body.return_void();
  builder.add_method("Lcom/synthetic/Carrier;", "go", body);

  MethodAsm trivial;
  trivial.return_void();
  builder.add_method("Lcom/synthetic/Carrier;", "noop", trivial);

  Bytes dex = builder.build();
  DexModule mod = DexModule::parse(ByteSpan(dex.data(), dex.size()));
  EXPECT_TRUE(mod.diagnostics().empty());
  ASSERT_EQ(mod.classes().size(), 1u);
  ASSERT_EQ(mod.classes()[0].direct_methods.size(), 2u);

  const EncodedMethod* go = nullptr;
  for (const EncodedMethod& m : mod.classes()[0].direct_methods) {
    if (mod.method_signature(m.method_idx) == "com.synthetic.Carrier.go") go = &m;
  }
  ASSERT_NE(go, nullptr);
  ASSERT_TRUE(go->body.has_value());
  ASSERT_EQ(go->body->invoked_methods.size(), 2u);
  EXPECT_EQ(mod.method_signature(go->body->invoked_methods[0]),
            "java.lang.Runtime.exec");
  EXPECT_EQ(mod.method_signature(go->body->invoked_methods[1]),
            "java.lang.System.loadLibrary");

  // The if-eqz target must land exactly on the invoke-static boundary.
  const Instruction& branch = go->body->instructions[1];
  ASSERT_EQ(branch.branch_targets.size(), 1u);
  EXPECT_EQ(branch.branch_targets[0], go->body->instructions[3].offset);
}

TEST(DexBuilder, DeterministicBytes) {
  auto build_once = [] {
    DexBuilder builder;
    builder.add_class("La/b/C;");
    MethodAsm body;
    body.const16(1, 4242);
    body.return_void();
    builder.add_method("La/b/C;", "m", body);
    return builder.build();
  };
  EXPECT_EQ(build_once(), build_once());
}

// Widths frozen from the published format list, asserted over a stream the
// builder did not produce.
TEST(DexDecode, WidthTableSpotChecks) {
  // const/4 v0,#0 ; const-wide v0,#imm64 ; goto/32 +3 ; return-void
  std::vector<std::uint16_t> units = {
      0x0012,                                    // const/4 (1)
      0x0018, 0x1111, 0x2222, 0x3333, 0x4444,    // const-wide (5)
      0x002a, 0x0003, 0x0000,                    // goto/32 +3 (3)
      0x000e,                                    // return-void (1)
  };
  Bytes raw;
  for (std::uint16_t u : units) {
    raw.push_back(static_cast<std::uint8_t>(u));
    raw.push_back(static_cast<std::uint8_t>(u >> 8));
  }
  auto decoded = detail::decode_instructions(ByteSpan(raw.data(), raw.size()));
  ASSERT_EQ(decoded.size(), 4u);
  EXPECT_EQ(decoded[0].width, 1);
  EXPECT_EQ(decoded[1].width, 5);
  EXPECT_EQ(decoded[2].width, 3);
  ASSERT_EQ(decoded[2].branch_targets.size(), 1u);
  EXPECT_EQ(decoded[2].branch_targets[0], 9u);  // 6 + 3
  EXPECT_EQ(decoded[3].width, 1);
}

TEST(DexDecode, PackedSwitchPayload) {
  // v0 = 0; packed-switch v0 -> payload at +6; 3 case targets; return-void.
  //   0: const/4 v0,#0
  //   1: packed-switch v0, payload@7       (31t, width 3)
  //   4: return-void                        (case a / fallthrough)
  //   5: return-void                        (case b)
  //   6: return-void                        (case c)
  //   7: payload: ident, size=3, first_key=0, targets {4,5,6} rel to offset 1
  std::vector<std::uint16_t> units = {
      0x0012,
      0x002b, 0x0006, 0x0000,
      0x000e,
      0x000e,
      0x000e,
      0x0100, 0x0003, 0x0000, 0x0000,
      0x0003, 0x0000,  // +3 -> 4
      0x0004, 0x0000,  // +4 -> 5
      0x0005, 0x0000,  // +5 -> 6
  };
  Bytes raw;
  for (std::uint16_t u : units) {
    raw.push_back(static_cast<std::uint8_t>(u));
    raw.push_back(static_cast<std::uint8_t>(u >> 8));
  }
  auto decoded = detail::decode_instructions(ByteSpan(raw.data(), raw.size()));
  // payload itself must not appear as a semantic instruction
  ASSERT_EQ(decoded.size(), 5u);
  EXPECT_EQ(decoded[1].opcode, 0x2b);
  ASSERT_EQ(decoded[1].branch_targets.size(), 3u);
  EXPECT_EQ(decoded[1].branch_targets[0], 4u);
  EXPECT_EQ(decoded[1].branch_targets[1], 5u);
  EXPECT_EQ(decoded[1].branch_targets[2], 6u);

  // Branch-target validity: every target is an instruction boundary.
  std::set<std::uint32_t> offsets;
  for (const auto& ins : decoded) offsets.insert(ins.offset);
  for (const auto& ins : decoded) {
    for (std::uint32_t t : ins.branch_targets) EXPECT_TRUE(offsets.count(t));
  }
}

}  // namespace
}  // namespace riderscope::dex
