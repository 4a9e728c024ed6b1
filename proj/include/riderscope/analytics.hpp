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

#ifndef RIDERSCOPE_ANALYTICS_HPP_
#define RIDERSCOPE_ANALYTICS_HPP_

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "riderscope/common.hpp"
#include "riderscope/fraction.hpp"
#include "riderscope/taxonomy.hpp"
#include "riderscope/utc.hpp"

namespace riderscope {

// Family rankings and the longitudinal view: calendar-quarter bucketing of
// first-seen dates, per-quarter behavior prevalence with the share cutoff
// applied to quarter-active samples, and least-squares trend fits.

struct FamilyMetrics {
  std::string family;
  std::uint64_t size = 0;          // |F_i|
  std::uint32_t quarters_active = 0;
  double virality = 0;             // size / quarters_active
  double stealth_days = 0;         // mean(T_vt - T_dex), may be negative
};

struct SampleStamp {
  std::string family;
  UtcSeconds first_seen = 0;               // T_vt
  std::optional<UtcSeconds> dex_date;      // T_dex
};

inline std::vector<FamilyMetrics> family_metrics(
    const std::vector<SampleStamp>& samples) {
  struct Acc {
    std::uint64_t size = 0;
    std::set<QuarterId> quarters;
    double delta_days_sum = 0;
  };
  std::map<std::string, Acc> by_family;
  for (const SampleStamp& s : samples) {
    Acc& acc = by_family[s.family];
    ++acc.size;
    acc.quarters.insert(quarter_of(s.first_seen));
    UtcSeconds dex = s.dex_date.value_or(s.first_seen);
    acc.delta_days_sum += static_cast<double>(s.first_seen - dex) / 86400.0;
  }
  std::vector<FamilyMetrics> out;
  for (const auto& [family, acc] : by_family) {
    FamilyMetrics m;
    m.family = family;
    m.size = acc.size;
    m.quarters_active = static_cast<std::uint32_t>(acc.quarters.size());
    m.virality = static_cast<double>(acc.size) / m.quarters_active;
    m.stealth_days = acc.delta_days_sum / static_cast<double>(acc.size);
    out.push_back(std::move(m));
  }
  return out;
}

enum class RankKey { kLargest, kPrevalent, kViral, kStealthy };

inline const char* rank_key_name(RankKey key) {
  switch (key) {
    case RankKey::kLargest: return "largest";
    case RankKey::kPrevalent: return "prevalent";
    case RankKey::kViral: return "viral";
    case RankKey::kStealthy: return "stealthy";
  }
  return "largest";
}

// Descending by the keyed metric; ties break on family name so the ranking
// never depends on input order.
inline std::vector<FamilyMetrics> top_families(std::vector<FamilyMetrics> metrics,
                                               RankKey key, size_t k) {
  auto value = [key](const FamilyMetrics& m) -> double {
    switch (key) {
      case RankKey::kLargest: return static_cast<double>(m.size);
      case RankKey::kPrevalent: return m.quarters_active;
      case RankKey::kViral: return m.virality;
      case RankKey::kStealthy: return m.stealth_days;
    }
    return 0;
  };
  std::sort(metrics.begin(), metrics.end(),
            [&](const FamilyMetrics& a, const FamilyMetrics& b) {
              double va = value(a), vb = value(b);
              if (va != vb) return va > vb;
              return a.family < b.family;
            });
  if (metrics.size() > k) metrics.resize(k);
  return metrics;
}

// ---------------------------------------------------------------------------

struct LinearFit {
  double slope = 0;
  double intercept = 0;
};

// Ordinary least squares through the normal equations.
inline LinearFit linear_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) {
    throw Error(ErrorCode::kFitDegenerate, "need at least two points");
  }
  double sx = 0, sy = 0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
  }
  double mx = sx / static_cast<double>(points.size());
  double my = sy / static_cast<double>(points.size());
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0) throw Error(ErrorCode::kFitDegenerate, "all x values equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

// ---------------------------------------------------------------------------

// A feature query is either a category token (all caps/underscores, e.g.
// JAVAX_CRYPTO) or an API name, possibly shortened to its trailing segments
// ("SmsManager.sendTextMessage").
inline bool feature_is_category(std::string_view feature) {
  if (feature.empty()) return false;
  for (char c : feature) {
    if (!(c == '_' || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'))) return false;
  }
  return true;
}

inline bool token_matches_feature(const std::string& token,
                                  const std::string& feature,
                                  const Taxonomy& taxonomy) {
  if (feature_is_category(feature)) {
    return taxonomy.api_categories(token).count(feature) > 0;
  }
  if (token == feature) return true;
  if (token.size() > feature.size() + 1 &&
      token.compare(token.size() - feature.size(), feature.size(), feature) == 0 &&
      token[token.size() - feature.size() - 1] == '.') {
    return true;
  }
  return false;
}

struct QuarterSample {
  std::string family;
  QuarterId quarter = 0;
  bool has_feature = false;  // any method of the sample carries the feature
};

struct QuarterPoint {
  QuarterId quarter = 0;
  std::uint32_t active_families = 0;
  std::uint32_t exhibiting_families = 0;
  double fraction = 0;
  // families whose activity that quarter is a single sample; the cutoff is
  // degenerate for them (the one sample decides) and callers may want to know
  std::uint32_t single_sample_families = 0;
};

struct QuarterSeries {
  std::string feature;
  std::vector<QuarterPoint> points;
  std::optional<LinearFit> fit;  // x = quarter offset from the first point
};

// A family is active in a quarter if any of its samples was first seen then;
// it exhibits the feature that quarter if at least ceil(cutoff * active)
// of its quarter-active samples carry the feature. Quarters nobody was
// active in produce no point.
inline QuarterSeries quarterly_prevalence(const std::vector<QuarterSample>& samples,
                                          const std::string& feature,
                                          const Fraction& cutoff) {
  QuarterSeries series;
  series.feature = feature;
  if (samples.empty()) return series;

  struct Cell {
    std::int64_t active = 0;
    std::int64_t carrying = 0;
  };
  std::map<QuarterId, std::map<std::string, Cell>> table;
  for (const QuarterSample& s : samples) {
    Cell& cell = table[s.quarter][s.family];
    ++cell.active;
    if (s.has_feature) ++cell.carrying;
  }

  for (const auto& [quarter, families] : table) {
    QuarterPoint point;
    point.quarter = quarter;
    for (const auto& [family, cell] : families) {
      ++point.active_families;
      if (cell.active == 1) ++point.single_sample_families;
      if (cutoff.meets(cell.carrying, cell.active)) ++point.exhibiting_families;
    }
    point.fraction = static_cast<double>(point.exhibiting_families) /
                     static_cast<double>(point.active_families);
    series.points.push_back(point);
  }

  if (series.points.size() >= 2) {
    std::vector<std::pair<double, double>> xy;
    QuarterId first = series.points.front().quarter;
    for (const QuarterPoint& p : series.points) {
      xy.emplace_back(static_cast<double>(p.quarter - first), p.fraction);
    }
    series.fit = linear_fit(xy);
  }
  return series;
}

}  // namespace riderscope

#endif  // RIDERSCOPE_ANALYTICS_HPP_
