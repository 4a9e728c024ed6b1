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

#include "riderscope/digest.hpp"
#include "riderscope/fraction.hpp"
#include "riderscope/hash.hpp"
#include "riderscope/utc.hpp"

namespace riderscope {
namespace {

TEST(Fraction, ParsesDecimals) {
  EXPECT_EQ(Fraction::parse("0.9"), Fraction(9, 10));
  EXPECT_EQ(Fraction::parse("0.45"), Fraction(45, 100));
  EXPECT_EQ(Fraction::parse("1"), Fraction(1, 1));
  EXPECT_EQ(Fraction::parse("1.0"), Fraction(1, 1));
  EXPECT_EQ(Fraction::parse("30%"), Fraction(3, 10));
  EXPECT_THROW(Fraction::parse("abc"), std::invalid_argument);
  EXPECT_THROW(Fraction::parse(""), std::invalid_argument);
}

TEST(Fraction, ExactBoundaries) {
  Fraction f(9, 10);
  // 9 of 10 meets the 0.9 cutoff exactly; 8 does not.
  EXPECT_TRUE(f.meets(9, 10));
  EXPECT_FALSE(f.meets(8, 10));
  EXPECT_EQ(f.ceil_mul(10), 9);
  EXPECT_EQ(f.ceil_mul(11), 10);  // ceil(9.9)
  Fraction resource(3, 10);
  EXPECT_TRUE(resource.meets(30, 100));
  EXPECT_FALSE(resource.meets(29, 100));
  EXPECT_TRUE(resource.meets(3, 10));
  EXPECT_FALSE(resource.meets(2, 10));
}

TEST(Fraction, Ordering) {
  EXPECT_TRUE(Fraction(1, 5) < Fraction(45, 100));
  EXPECT_TRUE(Fraction(45, 100) < Fraction(7, 10));
  EXPECT_TRUE(Fraction(7, 10) <= Fraction(9, 10));
  EXPECT_TRUE(Fraction(9, 10) <= Fraction(9, 10));
}

TEST(Utc, ParseAndFormatRoundTrip) {
  auto t = parse_utc("2014-02-01T00:00:00Z");
  ASSERT_TRUE(t.has_value());
  EXPECT_EQ(format_utc(*t), "2014-02-01T00:00:00Z");
  EXPECT_EQ(*parse_utc("1970-01-01T00:00:00Z"), 0);
  EXPECT_EQ(*parse_utc("1970-01-02T00:00:00Z"), 86400);
  EXPECT_TRUE(parse_utc("2014-01-20 10:00:00").has_value());
  EXPECT_FALSE(parse_utc("not-a-date").has_value());
  EXPECT_FALSE(parse_utc("2014-13-01T00:00:00Z").has_value());
  EXPECT_FALSE(parse_utc("2014-02-01T25:00:00Z").has_value());
}

TEST(Utc, QuarterBucketing) {
  // Half-open quarters: midnight of Apr 1 belongs to Q2.
  auto q1_end = parse_utc("2014-03-31T23:59:59Z");
  auto q2_start = parse_utc("2014-04-01T00:00:00Z");
  EXPECT_EQ(quarter_label(quarter_of(*q1_end)), "2014Q1");
  EXPECT_EQ(quarter_label(quarter_of(*q2_start)), "2014Q2");
  EXPECT_EQ(parse_quarter("2014Q2"), quarter_of(*q2_start));
  EXPECT_EQ(quarter_start(*parse_quarter("2014Q2")), *q2_start);
  EXPECT_FALSE(parse_quarter("2014").has_value());
  EXPECT_FALSE(parse_quarter("2014Q5").has_value());
}

// Reference values computed with an independent MurmurHash64A
// implementation (seed 0).
TEST(Hash, Murmur64KnownValues) {
  EXPECT_EQ(murmur64(std::string_view("")), 0x0ull);
  EXPECT_EQ(murmur64(std::string_view("a")), 0x071717d2d36b6b11ull);
  EXPECT_EQ(murmur64(std::string_view("android.telephony.TelephonyManager.getDeviceId")),
            0x9e520923546056e4ull);
  EXPECT_EQ(murmur64(std::string_view("The quick brown fox jumps over the lazy dog")),
            0x5589ca33042a861bull);
}

// FIPS 180-2 test vector.
TEST(Digest, Sha256KnownValue) {
  const char* abc = "abc";
  EXPECT_EQ(sha256_hex(ByteSpan(reinterpret_cast<const std::uint8_t*>(abc), 3)),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex({}),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Common, HexHelpers) {
  EXPECT_EQ(u64_hex(0x0123456789abcdefull), "0123456789abcdef");
  EXPECT_TRUE(is_hex_digest(std::string(64, 'a')));
  EXPECT_FALSE(is_hex_digest(std::string(63, 'a')));
  EXPECT_FALSE(is_hex_digest(std::string(64, 'G')));
}

}  // namespace
}  // namespace riderscope
