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

#include <random>

#include "riderscope/diff.hpp"

namespace riderscope {
namespace {

MethodFingerprint fp(std::uint64_t n) { return MethodFingerprint{n, n ^ 0x5a5a}; }

std::map<std::string, std::set<MethodFingerprint>> family_of(
    const std::vector<std::vector<std::uint64_t>>& per_sample) {
  std::map<std::string, std::set<MethodFingerprint>> out;
  for (size_t i = 0; i < per_sample.size(); ++i) {
    std::set<MethodFingerprint>& prints = out["sample" + std::to_string(1000 + i)];
    for (std::uint64_t m : per_sample[i]) prints.insert(fp(m));
  }
  return out;
}

// Test-only oracle: count containing samples by brute force, no profile
// machinery involved.
std::set<MethodFingerprint> brute_force_riders(
    const std::map<std::string, std::set<MethodFingerprint>>& family,
    const Fraction& cutoff) {
  std::set<MethodFingerprint> universe;
  for (const auto& [sample, prints] : family) {
    universe.insert(prints.begin(), prints.end());
  }
  std::set<MethodFingerprint> riders;
  std::int64_t n = static_cast<std::int64_t>(family.size());
  for (const MethodFingerprint& candidate : universe) {
    std::int64_t containing = 0;
    for (const auto& [sample, prints] : family) {
      if (prints.count(candidate) > 0) ++containing;
    }
    if (cutoff.meets(containing, n)) riders.insert(candidate);
  }
  return riders;
}

TEST(CutoffConfig, ValidatesLedgerOrdering) {
  CutoffConfig config;
  EXPECT_NO_THROW(config.validate());
  config.gco = Fraction(8, 10);
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config = CutoffConfig{};
  config.min_family_size = 1;
  EXPECT_THROW(config.validate(), std::invalid_argument);
}

TEST(Profile, CountsDistinctSamples) {
  auto family = family_of({{1, 2}, {1, 2}, {1, 3}, {1}, {1}, {1}, {1}});
  FamilyProfile profile = build_profile("fam", family, 7);
  EXPECT_EQ(profile.samples.size(), 7u);
  EXPECT_EQ(profile.prevalence.at(fp(1)), 7u);
  EXPECT_EQ(profile.prevalence.at(fp(2)), 2u);
  EXPECT_EQ(profile.prevalence.at(fp(3)), 1u);
  EXPECT_EQ(profile.total_distinct_methods(), 3u);
}

TEST(Profile, TooSmallFamilyRejected) {
  auto family = family_of({{1}, {2}, {3}});
  try {
    build_profile("tiny", family, 7);
    FAIL() << "expected FAMILY_TOO_SMALL";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFamilyTooSmall);
  }
}

TEST(RiderSet, CeilBoundaryAtNinety) {
  // 10 samples; method 1 in 9 of them, method 2 in 8.
  std::vector<std::vector<std::uint64_t>> samples;
  for (int i = 0; i < 10; ++i) {
    std::vector<std::uint64_t> methods = {static_cast<std::uint64_t>(100 + i)};
    if (i < 9) methods.push_back(1);
    if (i < 8) methods.push_back(2);
    samples.push_back(methods);
  }
  FamilyProfile profile = build_profile("fam", family_of(samples), 7);
  auto riders = rider_set(profile, Fraction(9, 10));
  EXPECT_TRUE(riders.count(fp(1)));
  EXPECT_FALSE(riders.count(fp(2)));
}

TEST(RiderSet, CutoffOneIsIntersection) {
  auto family = family_of({{1, 2, 3}, {1, 2, 4}, {1, 2, 5}, {1, 6}, {1, 7},
                           {1, 8}, {1, 9}});
  FamilyProfile profile = build_profile("fam", family, 7);
  auto riders = rider_set(profile, Fraction(1, 1));
  EXPECT_EQ(riders, std::set<MethodFingerprint>{fp(1)});
}

TEST(RiderSet, MatchesBruteForceOnRandomFamilies) {
  std::mt19937 rng(101);
  const std::vector<Fraction> cutoffs = {Fraction(1, 5), Fraction(45, 100),
                                         Fraction(7, 10), Fraction(9, 10),
                                         Fraction(1, 1)};
  for (int trial = 0; trial < 100; ++trial) {
    int n_samples = 2 + static_cast<int>(rng() % 9);   // <= 10
    int n_methods = 1 + static_cast<int>(rng() % 50);  // <= 50
    std::vector<std::vector<std::uint64_t>> samples(n_samples);
    for (int s = 0; s < n_samples; ++s) {
      for (int m = 0; m < n_methods; ++m) {
        if (rng() % 3 != 0) samples[s].push_back(static_cast<std::uint64_t>(m));
      }
    }
    auto family = family_of(samples);
    FamilyProfile profile = build_profile("fam", family, 2);

    std::set<MethodFingerprint> previous;
    bool first = true;
    for (auto it = cutoffs.rbegin(); it != cutoffs.rend(); ++it) {
      auto riders = rider_set(profile, *it);
      EXPECT_EQ(riders, brute_force_riders(family, *it));
      if (!first) {
        // Monotonicity: lowering the cutoff only grows the set.
        for (const auto& r : previous) EXPECT_TRUE(riders.count(r));
      }
      previous = riders;
      first = false;
    }
  }
}

TEST(RiderSet, PermutationInvariance) {
  std::vector<std::vector<std::uint64_t>> samples = {
      {1, 2, 3}, {1, 2}, {1, 4}, {1, 2, 5}, {1}, {1, 2}, {1, 6}};
  auto family_a = family_of(samples);
  std::reverse(samples.begin(), samples.end());
  auto family_b = family_of(samples);
  FamilyProfile pa = build_profile("fam", family_a, 7);
  FamilyProfile pb = build_profile("fam", family_b, 7);
  EXPECT_EQ(rider_set(pa, Fraction(9, 10)), rider_set(pb, Fraction(9, 10)));
  EXPECT_EQ(pa.prevalence, pb.prevalence);
}

TEST(EarlyStage, Boundaries) {
  // 100 distinct methods; `shared` of them in all 7 samples, the rest in one.
  auto make_profile = [](int shared) {
    std::vector<std::vector<std::uint64_t>> samples(7);
    for (int m = 0; m < shared; ++m) {
      for (auto& s : samples) s.push_back(static_cast<std::uint64_t>(m));
    }
    for (int m = shared; m < 100; ++m) samples[0].push_back(static_cast<std::uint64_t>(m));
    return build_profile("fam", family_of(samples), 7);
  };
  Fraction early(9, 10);
  EXPECT_FALSE(is_early_stage(make_profile(89), early));
  EXPECT_TRUE(is_early_stage(make_profile(90), early));

  // Everything shared everywhere: the degenerate clone family.
  std::vector<std::vector<std::uint64_t>> clones(7, {1, 2, 3, 4, 5});
  EXPECT_TRUE(is_early_stage(build_profile("clone", family_of(clones), 7), early));
}

TEST(Curve, CumulativeCounts) {
  // 10 samples; 5 methods in all 10, 20 methods in exactly 7.
  std::vector<std::vector<std::uint64_t>> samples(10);
  for (int m = 0; m < 5; ++m) {
    for (auto& s : samples) s.push_back(static_cast<std::uint64_t>(m));
  }
  for (int m = 5; m < 25; ++m) {
    for (int s = 0; s < 7; ++s) samples[s].push_back(static_cast<std::uint64_t>(m));
  }
  FamilyProfile profile = build_profile("fam", family_of(samples), 7);
  auto curve = prevalence_curve(profile);
  ASSERT_EQ(curve.size(), 2u);
  EXPECT_DOUBLE_EQ(curve[0].share_fraction, 1.0);
  EXPECT_EQ(curve[0].method_count, 5u);
  EXPECT_DOUBLE_EQ(curve[1].share_fraction, 0.7);
  EXPECT_EQ(curve[1].method_count, 25u);

  // Method count is non-decreasing as the share fraction decreases.
  for (size_t i = 1; i < curve.size(); ++i) {
    EXPECT_LT(curve[i].share_fraction, curve[i - 1].share_fraction);
    EXPECT_GE(curve[i].method_count, curve[i - 1].method_count);
  }
}

TEST(Curve, UniformProfileIsSinglePoint) {
  std::vector<std::vector<std::uint64_t>> samples(7, {1, 2, 3});
  auto curve = prevalence_curve(build_profile("fam", family_of(samples), 7));
  ASSERT_EQ(curve.size(), 1u);
  EXPECT_DOUBLE_EQ(curve[0].share_fraction, 1.0);
  EXPECT_EQ(curve[0].method_count, 3u);
}

}  // namespace
}  // namespace riderscope
