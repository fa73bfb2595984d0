// Copyright 2026 The spatialq Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spatialq/stats.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <random>

#include "json.hpp"
#include "spatialq/errors.h"

namespace spatialq {
namespace {

double NaivePearson(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / x.size();
    my += y[i] / y.size();
  }
  double sxx = 0, syy = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double NaiveRmse(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0;
  for (size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc / a.size());
}

// Average rank by counting: rank = #less + (#equal + 1) / 2.
std::vector<double> NaiveRanks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double v : x) {
      less += v < x[i];
      equal += v == x[i];
    }
    r[i] = less + (equal + 1) / 2;
  }
  return r;
}

TEST(StatsTest, AgreesWithNaiveFormulasIncludingTies) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t n = 3 + trial % 40;
    std::vector<double> x(n), y(n);
    std::uniform_int_distribution<int> coarse(0, 6);
    std::normal_distribution<double> g;
    for (size_t i = 0; i < n; ++i) {
      x[i] = trial % 2 ? coarse(rng) : g(rng);
      y[i] = coarse(rng) + 0.3 * x[i];
    }
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) x[0] += 1;
    if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) y[0] += 1;
    EXPECT_NEAR(Pearson(x, y), NaivePearson(x, y), 1e-12);
    EXPECT_EQ(FractionalRanks(x), NaiveRanks(x));
    EXPECT_NEAR(Spearman(x, y), NaivePearson(NaiveRanks(x), NaiveRanks(y)), 1e-12);
    EXPECT_NEAR(Rmse(x, y), NaiveRmse(x, y), 1e-12);
  }
}

TEST(StatsTest, CorrelationEdgeCases) {
  const std::vector<double> a = {1, 2, 3, 4}, b = {2, 4, 6, 8.5};
  EXPECT_DOUBLE_EQ(Pearson(a, a), 1.0);
  EXPECT_DOUBLE_EQ(Spearman(a, b), 1.0);
  const std::vector<double> rev = {4, 3, 2, 1};
  EXPECT_DOUBLE_EQ(Spearman(a, rev), -1.0);
  EXPECT_THROW(Pearson(a, std::vector<double>{1, 1, 1, 1}), DataError);
  EXPECT_THROW(Pearson(std::vector<double>{1}, std::vector<double>{2}), DataError);
  EXPECT_THROW(Pearson(a, std::span<const double>(b).subspan(0, 2)), DataError);
  EXPECT_EQ(FractionalRanks(std::vector<double>{5, 1, 5, 5}),
            (std::vector<double>{3, 1, 3, 3}));
}

TEST(StatsTest, RmseStarProperties) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 100), c(0, 15);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t n = 1 + trial % 30;
    std::vector<double> s(n), p(n), ci(n), zero(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
      s[i] = u(rng);
      p[i] = u(rng);
      ci[i] = c(rng);
    }
    const double star = RmseStar(s, p, ci);
    EXPECT_NEAR(RmseStar(s, p, zero), Rmse(s, p), 1e-12);
    EXPECT_LE(star, Rmse(s, p) + 1e-12);
    EXPECT_GE(star, 0.0);
    EXPECT_NEAR(RmseStar(s, p, ci, RmseStarForm::kLiteralSum), star * std::sqrt(n), 1e-9);
    // Widening any one interval never raises the score.
    for (size_t i = 0; i < n; ++i) {
      std::vector<double> wider = ci;
      wider[i] += c(rng);
      EXPECT_LE(RmseStar(s, p, wider), star);
    }
  }
  // Every error inside its interval.
  const std::vector<double> s = {50, 60}, p = {52, 57}, ci = {2, 3};
  EXPECT_EQ(RmseStar(s, p, ci), 0.0);
  EXPECT_NEAR(RmseStar(s, std::vector<double>{55, 60}, ci), std::sqrt(9.0 / 2), 1e-12);
  EXPECT_THROW(RmseStar(s, p, std::vector<double>{-1, 0}), DataError);
  EXPECT_THROW(Rmse(std::vector<double>{}, std::vector<double>{}), DataError);
}

TEST(StatsTest, StudentQuantileAgainstBoost) {
  for (double df : {1.0, 2.0, 3.0, 7.0, 10.0, 24.0, 30.0, 60.0, 120.0, 200.0}) {
    boost::math::students_t dist(df);
    EXPECT_NEAR(StudentT975(df), boost::math::quantile(dist, 0.975), 1e-5) << df;
  }
  // Interpolated entries stay close.
  for (double df : {35.0, 45.0, 70.0, 90.0, 175.0}) {
    boost::math::students_t dist(df);
    EXPECT_NEAR(StudentT975(df), boost::math::quantile(dist, 0.975), 2e-3) << df;
  }
  EXPECT_EQ(StudentT975(5000), 1.96);
  EXPECT_THROW(StudentT975(0.5), DataError);
}

TEST(StatsTest, ConfidenceIntervalOfRatings) {
  EXPECT_NEAR(Ci95OfRatings(std::vector<double>{40, 60}), 127.062, 1e-3);
  // n = 25 with sample standard deviation 10.
  std::vector<double> r(25, 50.0);
  const double d = 10.0 * std::sqrt(24.0 / 2.0);
  r[0] = 50 + d;
  r[1] = 50 - d;
  EXPECT_NEAR(Ci95OfRatings(r), 2.063899 * 10 / 5, 1e-6);
  EXPECT_NEAR(Ci95OfRatings(r), 4.1278, 1e-4);
  EXPECT_THROW(Ci95OfRatings(std::vector<double>{1}), DataError);
}

TEST(StatsTest, SubsetFilters) {
  const ScoredRow rev{"c01_speech_rev_lp7000", "lp7000", 50, 60, 5};
  const ScoredRow dry{"c02_music_anchor", "anchor", 20, 20, 5};
  EXPECT_TRUE(SubsetFilter::Parse("all", "*").Matches(dry));
  EXPECT_TRUE(SubsetFilter::Parse("all", "").Matches(rev));
  EXPECT_FALSE(SubsetFilter::Parse("codecs", "condition!=anchor").Matches(dry));
  EXPECT_TRUE(SubsetFilter::Parse("rev", "id~_rev").Matches(rev));
  EXPECT_FALSE(SubsetFilter::Parse("rev", "id~_rev").Matches(dry));
  const SubsetFilter both = SubsetFilter::ParseSpec("x=id~_rev&condition==lp7000");
  EXPECT_EQ(both.name(), "x");
  EXPECT_TRUE(both.Matches(rev));
  EXPECT_TRUE(SubsetFilter::Parse("d", "id!~_rev").Matches(dry));
  EXPECT_THROW(SubsetFilter::Parse("bad", "mos>3"), DataError);
  EXPECT_THROW(SubsetFilter::Parse("bad", "score==1"), DataError);
  EXPECT_THROW(SubsetFilter::ParseSpec("noequals"), DataError);
  EXPECT_THROW(SubsetFilter::Parse("", "*"), DataError);
}

TEST(StatsTest, ReportOmitsUndefinedCorrelations) {
  std::vector<ScoredRow> rows = {
      {"a_rev", "lp", 40, 45, 5}, {"b", "anchor", 10, 20, 5}, {"c", "lp", 70, 80, 5}};
  const auto report = Report(rows, DefaultSubsets());
  ASSERT_EQ(report.size(), 3u);
  EXPECT_EQ(report[0].criteria.n, 3u);
  EXPECT_TRUE(report[0].criteria.pearson.has_value());
  EXPECT_EQ(report[2].name, "spat. rev.");
  EXPECT_EQ(report[2].criteria.n, 1u);
  EXPECT_FALSE(report[2].criteria.pearson.has_value());
  EXPECT_NEAR(*report[2].criteria.rmse, 5.0, 1e-12);

  const auto j = nlohmann::json::parse(ReportToJson(report));
  EXPECT_TRUE(j["spat. rev."]["pearson"].is_null());
  EXPECT_EQ(j["all"]["n"], 3);
  const std::string text = ReportToText(report);
  EXPECT_NE(text.find("spat. rev."), std::string::npos);
  EXPECT_EQ(ComputeCriteria({}).n, 0u);
}

}  // namespace
}  // namespace spatialq
