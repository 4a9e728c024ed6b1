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

#ifndef RIDERSCOPE_DIFF_HPP_
#define RIDERSCOPE_DIFF_HPP_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "riderscope/cfg.hpp"
#include "riderscope/common.hpp"
#include "riderscope/fraction.hpp"

namespace riderscope {

// Differential analysis over a family: a method fingerprint shared by at
// least a cutoff fraction of the family's samples is rider code; the rest is
// carrier noise and gets discarded.

struct CutoffConfig {
  Fraction hco{9, 10};   // family-level behavior
  Fraction mco{7, 10};   // variant-level
  Fraction lco{45, 100}; // small-variant-level
  Fraction gco{1, 5};    // gray zone, possibly carrier
  int min_family_size = 7;
  Fraction early_stage_fraction{9, 10};
  Fraction resource_cutoff{3, 10};

  void validate() const {
    if (!(Fraction(0, 1) < gco && gco < lco && lco < mco && mco <= hco &&
          hco <= Fraction(1, 1))) {
      throw std::invalid_argument("cutoff ledger must satisfy 0 < gco < lco < mco <= hco <= 1");
    }
    if (min_family_size < 2) {
      throw std::invalid_argument("min_family_size must be at least 2");
    }
  }
};

struct FamilyProfile {
  std::string family;
  std::set<std::string> samples;
  // fingerprint -> number of distinct samples containing it
  std::map<MethodFingerprint, std::uint32_t> prevalence;

  std::uint64_t total_distinct_methods() const { return prevalence.size(); }
};

// Prevalence counts distinct samples: a fingerprint occurring twice inside
// one sample still counts once.
inline FamilyProfile build_profile(
    const std::string& family,
    const std::map<std::string, std::set<MethodFingerprint>>& fingerprints,
    int min_family_size) {
  if (static_cast<int>(fingerprints.size()) < min_family_size) {
    throw Error(ErrorCode::kFamilyTooSmall,
                family + " has " + std::to_string(fingerprints.size()) +
                    " samples, need " + std::to_string(min_family_size));
  }
  FamilyProfile profile;
  profile.family = family;
  for (const auto& [sample_id, prints] : fingerprints) {
    profile.samples.insert(sample_id);
    for (const MethodFingerprint& fp : prints) ++profile.prevalence[fp];
  }
  return profile;
}

// { f : prevalence[f] >= ceil(cutoff * |samples|) }, compared exactly.
inline std::set<MethodFingerprint> rider_set(const FamilyProfile& profile,
                                             const Fraction& cutoff) {
  std::set<MethodFingerprint> riders;
  auto total = static_cast<std::int64_t>(profile.samples.size());
  for (const auto& [fp, count] : profile.prevalence) {
    if (cutoff.meets(count, total)) riders.insert(fp);
  }
  return riders;
}

// A family where almost every method is universal is either standalone
// malware or everyone repackaging the same carrier; differential analysis
// has nothing to separate there.
inline bool is_early_stage(const FamilyProfile& profile,
                           const Fraction& early_stage_fraction) {
  std::int64_t universal = 0;
  auto n = static_cast<std::uint32_t>(profile.samples.size());
  for (const auto& [fp, count] : profile.prevalence) {
    if (count == n) ++universal;
  }
  return early_stage_fraction.meets(
      universal, static_cast<std::int64_t>(profile.total_distinct_methods()));
}

struct CurvePoint {
  std::uint32_t shared_by;     // prevalence level k
  double share_fraction;       // k / |samples|
  std::uint64_t method_count;  // |{f : prevalence[f] >= k}|
};

// Cumulative prevalence curve, descending share. Plateau breaks in this
// curve are where variants of a family separate.
inline std::vector<CurvePoint> prevalence_curve(const FamilyProfile& profile) {
  std::map<std::uint32_t, std::uint64_t> by_level;
  for (const auto& [fp, count] : profile.prevalence) ++by_level[count];
  std::vector<CurvePoint> curve;
  std::uint64_t cumulative = 0;
  double n = static_cast<double>(profile.samples.size());
  for (auto it = by_level.rbegin(); it != by_level.rend(); ++it) {
    cumulative += it->second;
    curve.push_back({it->first, static_cast<double>(it->first) / n, cumulative});
  }
  return curve;
}

}  // namespace riderscope

#endif  // RIDERSCOPE_DIFF_HPP_
