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

#ifndef RIDERSCOPE_FRACTION_HPP_
#define RIDERSCOPE_FRACTION_HPP_

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace riderscope {

// Exact rational in [0, +inf). Share cutoffs are compared with integer
// arithmetic so that boundaries like 9/10 of 10 samples are never subject
// to floating-point rounding.
class Fraction {
 public:
  constexpr Fraction() : num_(0), den_(1) {}

  constexpr Fraction(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ <= 0 || num_ < 0) throw std::invalid_argument("fraction out of domain");
    std::int64_t g = std::gcd(num_, den_);
    num_ /= g;
    den_ /= g;
  }

  // Parses "0.9", ".45", "1", "1.0", "30%" style decimal text.
  static Fraction parse(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty fraction");
    bool percent = text.back() == '%';
    if (percent) text.remove_suffix(1);
    std::int64_t num = 0;
    std::int64_t den = 1;
    bool seen_dot = false;
    bool seen_digit = false;
    for (char c : text) {
      if (c == '.') {
        if (seen_dot) throw std::invalid_argument("bad fraction: two dots");
        seen_dot = true;
      } else if (c >= '0' && c <= '9') {
        num = num * 10 + (c - '0');
        if (seen_dot) den *= 10;
        seen_digit = true;
      } else {
        throw std::invalid_argument("bad fraction char");
      }
      if (den > 1000000000000LL) throw std::invalid_argument("fraction too precise");
    }
    if (!seen_digit) throw std::invalid_argument("no digits in fraction");
    if (percent) den *= 100;
    return Fraction(num, den);
  }

  constexpr std::int64_t num() const { return num_; }
  constexpr std::int64_t den() const { return den_; }

  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  // ceil(this * n) without going through floating point.
  std::int64_t ceil_mul(std::int64_t n) const {
    return (num_ * n + den_ - 1) / den_;
  }

  // count >= ceil(this * total), exactly.
  bool meets(std::int64_t count, std::int64_t total) const {
    return count * den_ >= num_ * total;
  }

  friend constexpr bool operator==(const Fraction& a, const Fraction& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend constexpr bool operator<(const Fraction& a, const Fraction& b) {
    return a.num_ * b.den_ < b.num_ * a.den_;
  }
  friend constexpr bool operator<=(const Fraction& a, const Fraction& b) {
    return a.num_ * b.den_ <= b.num_ * a.den_;
  }

  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  std::int64_t num_;
  std::int64_t den_;
};

}  // namespace riderscope

#endif  // RIDERSCOPE_FRACTION_HPP_
