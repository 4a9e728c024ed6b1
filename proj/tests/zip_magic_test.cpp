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
#include <random>

#include "riderscope/ingest.hpp"
#include "riderscope/magic.hpp"
#include "riderscope/zip.hpp"

namespace riderscope {
namespace {

const std::filesystem::path kFixtures = RIDERSCOPE_FIXTURE_DIR;

Bytes bytes_of(std::initializer_list<int> vals) {
  Bytes out;
  for (int v : vals) out.push_back(static_cast<std::uint8_t>(v));
  return out;
}

TEST(Magic, KnownPrefixes) {
  EXPECT_EQ(classify_magic(bytes_of({0x7f, 0x45, 0x4c, 0x46, 1, 1, 1, 0})),
            FileType::kElfExec);
  EXPECT_EQ(classify_magic(bytes_of({0x64, 0x65, 0x78, 0x0a, 0x30, 0x33, 0x35, 0x00})),
            FileType::kDalvikExec);
  EXPECT_EQ(classify_magic(bytes_of({0x23, 0x21})), FileType::kTextExec);
  EXPECT_EQ(classify_magic(bytes_of({0x50, 0x4b, 0x03, 0x04})), FileType::kAppArchive);
  EXPECT_EQ(classify_magic(bytes_of({0x00, 0x00, 0x00, 0x00})), FileType::kOther);
}

TEST(Magic, TotalOnShortAndEmptyInput) {
  EXPECT_EQ(classify_magic({}), FileType::kOther);
  EXPECT_EQ(classify_magic(bytes_of({0x64})), FileType::kOther);
  // "dex\n03" without the version tail is not yet a Dalvik magic
  EXPECT_EQ(classify_magic(bytes_of({0x64, 0x65, 0x78, 0x0a, 0x30, 0x33})),
            FileType::kOther);
  EXPECT_EQ(classify_magic(bytes_of({0x23})), FileType::kOther);
}

TEST(Magic, DeterministicOverRandomInput) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Bytes data(rng() % 16);
    for (auto& b : data) b = static_cast<std::uint8_t>(rng());
    FileType a = classify_magic(data);
    FileType b = classify_magic(data);
    EXPECT_EQ(a, b);
  }
}

TEST(Zip, ReadsExternalFixture) {
  Bytes data = read_file(kFixtures / "nested.zip");
  ZipReader reader(ByteSpan(data.data(), data.size()));
  ASSERT_EQ(reader.entries().size(), 7u);

  const ZipEntry* dex = nullptr;
  for (const ZipEntry& e : reader.entries()) {
    if (e.name == "classes.dex") dex = &e;
  }
  ASSERT_NE(dex, nullptr);
  EXPECT_EQ(dex->method, 8) << "fixture stores classes.dex deflated";
  Bytes content = reader.read(*dex, 1 << 20);
  EXPECT_EQ(content.size(), 560u);
  EXPECT_EQ(classify_magic(ByteSpan(content.data(), content.size())),
            FileType::kDalvikExec);
  EXPECT_EQ(dos_to_utc(dex->dos_date, dex->dos_time),
            *parse_utc("2014-01-20T10:00:00Z"));
}

TEST(Zip, WriterReaderRoundTrip) {
  std::mt19937 rng(11);
  ZipWriter writer;
  std::vector<std::pair<std::string, Bytes>> members;
  for (int i = 0; i < 10; ++i) {
    std::string name = "member_" + std::to_string(i);
    Bytes content(rng() % 2048);
    for (auto& b : content) b = static_cast<std::uint8_t>(rng());
    writer.add(name, ByteSpan(content.data(), content.size()),
               *parse_utc("2015-06-01T12:00:00Z"));
    members.emplace_back(name, std::move(content));
  }
  Bytes archive = writer.finish();
  ZipReader reader(ByteSpan(archive.data(), archive.size()));
  ASSERT_EQ(reader.entries().size(), members.size());
  for (size_t i = 0; i < members.size(); ++i) {
    const ZipEntry& e = reader.entries()[i];
    EXPECT_EQ(e.name, members[i].first);
    EXPECT_EQ(reader.read(e, 1 << 20), members[i].second);
  }
}

TEST(Zip, EmptyArchive) {
  ZipWriter writer;
  Bytes archive = writer.finish();
  EXPECT_EQ(classify_magic(ByteSpan(archive.data(), archive.size())),
            FileType::kAppArchive);
  ZipReader reader(ByteSpan(archive.data(), archive.size()));
  EXPECT_TRUE(reader.entries().empty());
}

TEST(Zip, GarbageRejected) {
  Bytes junk(100, 0xaa);
  EXPECT_THROW(ZipReader(ByteSpan(junk.data(), junk.size())), Error);
  Bytes tiny = {0x50, 0x4b};
  EXPECT_THROW(ZipReader(ByteSpan(tiny.data(), tiny.size())), Error);
}

TEST(Zip, SizeCeilingEnforced) {
  ZipWriter writer;
  Bytes big(4096, 0x42);
  writer.add("big.bin", ByteSpan(big.data(), big.size()));
  Bytes archive = writer.finish();
  ZipReader reader(ByteSpan(archive.data(), archive.size()));
  EXPECT_THROW(reader.read(reader.entries()[0], 1024), Error);
  EXPECT_EQ(reader.read(reader.entries()[0], 4096), big);
}

TEST(Walk, NestedFixture) {
  WalkResult walked = walk_archive(kFixtures / "nested.zip");
  // classes.dex at depth 0, plus the incognito classes.dex inside inner.apk.
  ASSERT_EQ(walked.executables.size(), 2u);
  EXPECT_EQ(walked.executables[0].member_path, "assets/inner.apk!/classes.dex");
  EXPECT_EQ(walked.executables[0].depth, 1);
  EXPECT_EQ(walked.executables[1].member_path, "classes.dex");
  EXPECT_EQ(walked.executables[1].depth, 0);
  // Identical bytes, identical digests.
  EXPECT_EQ(walked.executables[0].content_digest, walked.executables[1].content_digest);

  std::map<std::string, FileType> types;
  for (const ResourceRef& r : walked.resources) types[r.member_path] = r.file_type;
  EXPECT_EQ(types.at("assets/inner.apk"), FileType::kAppArchive);
  EXPECT_EQ(types.at("res/icon.png"), FileType::kOther);
  EXPECT_EQ(types.at("scripts/run.sh"), FileType::kTextExec);
  EXPECT_EQ(types.at("noshebang.sh"), FileType::kTextExec);
  EXPECT_EQ(types.at("lib/arm/libfix.so"), FileType::kElfExec);
  EXPECT_EQ(types.at("data.bin"), FileType::kOther);
  EXPECT_TRUE(walked.diagnostics.empty());
}

TEST(Walk, DepthZeroStopsExpansion) {
  WalkOptions opts;
  opts.max_depth = 0;
  WalkResult walked = walk_archive(kFixtures / "nested.zip", opts);
  ASSERT_EQ(walked.executables.size(), 1u);
  EXPECT_EQ(walked.executables[0].depth, 0);
  ASSERT_EQ(walked.diagnostics.size(), 1u);
  EXPECT_EQ(walked.diagnostics[0].code, ErrorCode::kDepthExceeded);
  EXPECT_EQ(walked.diagnostics[0].context, "assets/inner.apk");
}

// Recursion soundness: no emitted ref may exceed the requested depth.
TEST(Walk, DepthBoundHolds) {
  for (int d = 0; d <= 3; ++d) {
    WalkOptions opts;
    opts.max_depth = d;
    WalkResult walked = walk_archive(kFixtures / "nested.zip", opts);
    for (const auto& e : walked.executables) EXPECT_LE(e.depth, d);
    for (const auto& r : walked.resources) EXPECT_LE(r.depth, d);
  }
}

// Digest stability: re-walking yields identical digests in identical order.
TEST(Walk, Deterministic) {
  WalkResult a = walk_archive(kFixtures / "nested.zip");
  WalkResult b = walk_archive(kFixtures / "nested.zip");
  ASSERT_EQ(a.executables.size(), b.executables.size());
  ASSERT_EQ(a.resources.size(), b.resources.size());
  for (size_t i = 0; i < a.executables.size(); ++i) {
    EXPECT_EQ(a.executables[i].member_path, b.executables[i].member_path);
    EXPECT_EQ(a.executables[i].content_digest, b.executables[i].content_digest);
  }
  for (size_t i = 0; i < a.resources.size(); ++i) {
    EXPECT_EQ(a.resources[i].member_path, b.resources[i].member_path);
    EXPECT_EQ(a.resources[i].content_digest, b.resources[i].content_digest);
  }
}

TEST(Walk, ZeroMemberArchive) {
  ZipWriter writer;
  Bytes archive = writer.finish();
  WalkResult walked = walk_archive(ByteSpan(archive.data(), archive.size()));
  EXPECT_TRUE(walked.executables.empty());
  EXPECT_TRUE(walked.resources.empty());
  EXPECT_TRUE(walked.diagnostics.empty());
}

TEST(Walk, OversizedMemberSkippedAlone) {
  // The size ceiling fails one member, not the sample.
  ZipWriter writer;
  Bytes small(64, 0x11);
  Bytes big(4096, 0x22);
  writer.add("big.bin", ByteSpan(big.data(), big.size()));
  writer.add("small.bin", ByteSpan(small.data(), small.size()));
  Bytes archive = writer.finish();
  WalkOptions opts;
  opts.member_size_ceiling = 1024;
  WalkResult walked = walk_archive(ByteSpan(archive.data(), archive.size()), opts);
  ASSERT_EQ(walked.resources.size(), 1u);
  EXPECT_EQ(walked.resources[0].member_path, "small.bin");
  ASSERT_EQ(walked.diagnostics.size(), 1u);
  EXPECT_EQ(walked.diagnostics[0].code, ErrorCode::kArchiveCorrupt);
  EXPECT_EQ(walked.diagnostics[0].context, "big.bin");
}

TEST(Walk, IngestSampleFlagsMalformed) {
  // An archive with no classes.dex is not a usable app package.
  ZipWriter writer;
  Bytes png = bytes_of({0x89, 0x50, 0x4e, 0x47});
  writer.add("res/icon.png", ByteSpan(png.data(), png.size()));
  Bytes archive = writer.finish();
  auto tmp = std::filesystem::temp_directory_path() / "riderscope_nodex.zip";
  write_file(tmp, ByteSpan(archive.data(), archive.size()));

  SampleRecord record;
  record.sample_id = std::string(64, 'a');
  std::vector<Diagnostic> diagnostics;
  ingest_sample(&record, tmp, WalkOptions{}, &diagnostics);
  EXPECT_TRUE(record.malformed);
  ASSERT_EQ(diagnostics.size(), 1u);
  EXPECT_EQ(diagnostics[0].code, ErrorCode::kArchiveCorrupt);
}

TEST(Walk, DexDateProxyFromArchiveTimestamp) {
  SampleRecord record;
  record.sample_id = std::string(64, 'b');
  std::vector<Diagnostic> diagnostics;
  ingest_sample(&record, kFixtures / "nested.zip", WalkOptions{}, &diagnostics);
  EXPECT_FALSE(record.malformed);
  ASSERT_TRUE(record.dex_date.has_value());
  EXPECT_EQ(format_utc(*record.dex_date), "2014-01-20T10:00:00Z");
}

}  // namespace
}  // namespace riderscope
