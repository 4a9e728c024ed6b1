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

#ifndef RIDERSCOPE_INGEST_HPP_
#define RIDERSCOPE_INGEST_HPP_

#include <algorithm>
#include <string>
#include <vector>

#include "riderscope/common.hpp"
#include "riderscope/digest.hpp"
#include "riderscope/magic.hpp"
#include "riderscope/manifest.hpp"
#include "riderscope/zip.hpp"

namespace riderscope {

struct WalkOptions {
  int max_depth = 3;  // incognito apps nest shallow; anything deeper is a bomb
  std::uint64_t member_size_ceiling = 256ull * 1024 * 1024;
  bool keep_exec_bytes = false;      // DALVIK_EXEC payloads
  bool keep_resource_bytes = false;  // ELF_EXEC / TEXT_EXEC payloads
};

struct WalkResult {
  std::vector<ExecutableRef> executables;
  std::vector<ResourceRef> resources;
  std::vector<Diagnostic> diagnostics;
};

namespace detail {

// Shebang magic, or a .sh path whose bytes look like text: many corpus
// scripts ship without a shebang.
inline bool printable_heuristic(ByteSpan bytes) {
  std::uint64_t considered = 0;
  std::uint64_t printable = 0;
  for (std::uint8_t b : bytes) {
    if (b == ' ' || b == '\t' || b == '\r' || b == '\n') continue;
    ++considered;
    if (b >= 0x20 && b <= 0x7e) ++printable;
  }
  return considered == 0 || printable * 10 >= considered * 9;
}

inline FileType classify_member(const std::string& path, ByteSpan bytes) {
  FileType t = classify_magic(bytes);
  if (t == FileType::kOther && path.size() >= 3 &&
      path.compare(path.size() - 3, 3, ".sh") == 0 && printable_heuristic(bytes)) {
    return FileType::kTextExec;
  }
  return t;
}

inline void walk_container(ByteSpan container, const std::string& prefix, int depth,
                           const WalkOptions& opts, WalkResult* out) {
  ZipReader reader(container);

  std::vector<const ZipEntry*> order;
  order.reserve(reader.entries().size());
  for (const ZipEntry& e : reader.entries()) order.push_back(&e);
  std::sort(order.begin(), order.end(),
            [](const ZipEntry* a, const ZipEntry* b) { return a->name < b->name; });

  for (const ZipEntry* entry : order) {
    if (!entry->name.empty() && entry->name.back() == '/') continue;  // directory
    std::string member_path = prefix.empty() ? entry->name : prefix + "!/" + entry->name;
    Bytes bytes;
    try {
      bytes = reader.read(*entry, opts.member_size_ceiling);
    } catch (const Error& e) {
      out->diagnostics.push_back({ErrorCode::kArchiveCorrupt, member_path, e.what()});
      continue;
    }
    FileType type = classify_member(entry->name, bytes);
    std::string digest = sha256_hex(bytes);

    if (type == FileType::kDalvikExec) {
      ExecutableRef ref;
      ref.member_path = member_path;
      ref.content_digest = digest;
      ref.depth = depth;
      ref.mod_time = dos_to_utc(entry->dos_date, entry->dos_time);
      if (opts.keep_exec_bytes) ref.bytes = std::move(bytes);
      out->executables.push_back(std::move(ref));
      continue;
    }

    ResourceRef ref;
    ref.member_path = member_path;
    ref.file_type = type;
    ref.content_digest = digest;
    ref.depth = depth;
    if (opts.keep_resource_bytes &&
        (type == FileType::kElfExec || type == FileType::kTextExec)) {
      ref.bytes = bytes;
    }
    out->resources.push_back(std::move(ref));

    if (type == FileType::kAppArchive) {
      if (depth + 1 > opts.max_depth) {
        out->diagnostics.push_back({ErrorCode::kDepthExceeded, member_path,
                                    "nested archive left unexpanded"});
        continue;
      }
      try {
        walk_container(ByteSpan(bytes.data(), bytes.size()), member_path, depth + 1,
                       opts, out);
      } catch (const Error& e) {
        out->diagnostics.push_back({ErrorCode::kArchiveCorrupt, member_path, e.what()});
      }
    }
  }
}

}  // namespace detail

// Walks an app package: every member typed by magic, digests over the
// decompressed bytes, nested archives expanded up to max_depth, members
// visited in bytewise path order. Throws ARCHIVE_CORRUPT only when the
// top-level container itself is unwalkable.
inline WalkResult walk_archive(ByteSpan container, const WalkOptions& opts = {}) {
  WalkResult result;
  detail::walk_container(container, "", 0, opts, &result);
  return result;
}

inline WalkResult walk_archive(const std::filesystem::path& path,
                               const WalkOptions& opts = {}) {
  Bytes data = read_file(path);
  return walk_archive(ByteSpan(data.data(), data.size()), opts);
}

// Fills a manifest record with its archive contents. A container that cannot
// be walked, or one without a top-level Dalvik executable, flags the record
// malformed instead of failing the run.
inline void ingest_sample(SampleRecord* record, const std::filesystem::path& archive,
                          const WalkOptions& opts, std::vector<Diagnostic>* diagnostics) {
  try {
    WalkResult walked = walk_archive(archive, opts);
    record->executables = std::move(walked.executables);
    record->resources = std::move(walked.resources);
    for (Diagnostic& d : walked.diagnostics) diagnostics->push_back(std::move(d));
  } catch (const Error& e) {
    record->malformed = true;
    diagnostics->push_back({ErrorCode::kArchiveCorrupt, record->sample_id, e.what()});
    return;
  }

  const ExecutableRef* main_exec = nullptr;
  for (const ExecutableRef& exec : record->executables) {
    if (exec.depth == 0 && (main_exec == nullptr || exec.member_path < main_exec->member_path)) {
      main_exec = &exec;
    }
  }
  if (main_exec == nullptr) {
    record->malformed = true;
    diagnostics->push_back({ErrorCode::kArchiveCorrupt, record->sample_id,
                            "no top-level Dalvik executable"});
    return;
  }
  if (!record->dex_date) {
    // T_dex proxy: the main executable's archive timestamp.
    record->dex_date = main_exec->mod_time;
  }
}

}  // namespace riderscope

#endif  // RIDERSCOPE_INGEST_HPP_
