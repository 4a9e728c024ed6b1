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

#ifndef RIDERSCOPE_DIGEST_HPP_
#define RIDERSCOPE_DIGEST_HPP_

#include <openssl/evp.h>

#include <array>
#include <string>

#include "riderscope/common.hpp"

namespace riderscope {

namespace detail {

template <size_t N>
std::array<std::uint8_t, N> evp_digest(const EVP_MD* md, ByteSpan data) {
  std::array<std::uint8_t, N> out{};
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, md, nullptr);
  EVP_DigestUpdate(ctx, data.data(), data.size());
  EVP_DigestFinal_ex(ctx, out.data(), &len);
  EVP_MD_CTX_free(ctx);
  return out;
}

}  // namespace detail

// Content identity of samples and resources: SHA-256 over the decompressed
// bytes, rendered as 64 lowercase hex chars to match manifest sample ids.
inline std::string sha256_hex(ByteSpan data) {
  auto raw = detail::evp_digest<32>(EVP_sha256(), data);
  return to_hex(ByteSpan(raw.data(), raw.size()));
}

inline std::array<std::uint8_t, 20> sha1_raw(ByteSpan data) {
  return detail::evp_digest<20>(EVP_sha1(), data);
}

}  // namespace riderscope

#endif  // RIDERSCOPE_DIGEST_HPP_
