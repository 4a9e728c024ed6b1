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

#ifndef RIDERSCOPE_HASH_HPP_
#define RIDERSCOPE_HASH_HPP_

#include <cstdint>
#include <string_view>

#include "riderscope/common.hpp"

namespace riderscope {

// MurmurHash64A (Austin Appleby's public-domain constants). Fingerprints are
// corpus-wide identities, not security boundaries; seed 0 everywhere keeps
// digests reproducible across runs and platforms. Input bytes are consumed
// little-endian regardless of host order.
inline std::uint64_t murmur64(ByteSpan data, std::uint64_t seed = 0) {
  constexpr std::uint64_t kMul = 0xc6a4a7935bd1e995ULL;
  constexpr int kShift = 47;

  std::uint64_t h = seed ^ (static_cast<std::uint64_t>(data.size()) * kMul);
  const std::uint8_t* p = data.data();
  const std::uint8_t* end = p + (data.size() / 8) * 8;

  while (p != end) {
    std::uint64_t k = 0;
    for (int i = 0; i < 8; ++i) k |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    p += 8;
    k *= kMul;
    k ^= k >> kShift;
    k *= kMul;
    h ^= k;
    h *= kMul;
  }

  switch (data.size() & 7) {
    case 7: h ^= static_cast<std::uint64_t>(p[6]) << 48; [[fallthrough]];
    case 6: h ^= static_cast<std::uint64_t>(p[5]) << 40; [[fallthrough]];
    case 5: h ^= static_cast<std::uint64_t>(p[4]) << 32; [[fallthrough]];
    case 4: h ^= static_cast<std::uint64_t>(p[3]) << 24; [[fallthrough]];
    case 3: h ^= static_cast<std::uint64_t>(p[2]) << 16; [[fallthrough]];
    case 2: h ^= static_cast<std::uint64_t>(p[1]) << 8; [[fallthrough]];
    case 1: h ^= static_cast<std::uint64_t>(p[0]); h *= kMul;
  }

  h ^= h >> kShift;
  h *= kMul;
  h ^= h >> kShift;
  return h;
}

inline std::uint64_t murmur64(std::string_view text, std::uint64_t seed = 0) {
  return murmur64(ByteSpan(reinterpret_cast<const std::uint8_t*>(text.data()),
                           text.size()),
                  seed);
}

}  // namespace riderscope

#endif  // RIDERSCOPE_HASH_HPP_
