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

#ifndef SPATIALQ_STATS_H_
#define SPATIALQ_STATS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spatialq {

// Sample Pearson correlation. Throws DataError("undefined correlation") for
// fewer than two points or a constant input.
double Pearson(std::span<const double> x, std::span<const double> y);

// 1-based ranks; tied values share the average of their ranks.
std::vector<double> FractionalRanks(std::span<const double> x);

// Pearson correlation of fractional ranks.
double Spearman(std::span<const double> x, std::span<const double> y);

double Rmse(std::span<const double> truth, std::span<const double> predicted);

enum class RmseStarForm {
  // sqrt(mean_i max(0, |s_i - p_i| - ci95_i)^2); comparable to Rmse.
  kNormalized,
  // sqrt(sum_i ...), without the 1/N.
  kLiteralSum,
};

// Epsilon-insensitive RMSE: errors inside the 95 % confidence interval of
// the ground truth are forgiven. Throws DataError on a negative ci95.
double RmseStar(std::span<const double> truth, std::span<const double> predicted,
                std::span<const double> ci95,
                RmseStarForm form = RmseStarForm::kNormalized);

// Two-sided 97.5 % Student-t quantile. Tabulated for df 1-30 and sparse
// points up to 200, linearly interpolated in between; 1.96 above 200.
double StudentT975(double df);

// t(0.975, n-1) * s / sqrt(n) for n >= 2 listener ratings.
double Ci95OfRatings(std::span<const double> ratings);

// One evaluated stimulus: prediction, ground-truth mean, its ci95.
struct ScoredRow {
  std::string id;
  std::string condition;
  double predicted = 0.0;
  double mos = 0.0;
  double ci95 = 0.0;
};

// Evaluation criteria; a criterion is absent when undefined for the subset
// (empty, fewer than two rows, or constant input).
struct Criteria {
  size_t n = 0;
  std::optional<double> pearson;
  std::optional<double> spearman;
  std::optional<double> rmse;
  std::optional<double> rmse_star;
};

Criteria ComputeCriteria(std::span<const ScoredRow> rows,
                         RmseStarForm form = RmseStarForm::kNormalized);

// Row filter. Clauses joined by '&'; each clause is
//   field==value, field!=value, field~text (contains), field!~text,
// over the fields `id` and `condition`. An empty expression or "*" keeps
// every row. Throws DataError on a malformed expression.
class SubsetFilter {
 public:
  static SubsetFilter Parse(const std::string& name, const std::string& expr);
  // Parses "NAME=EXPR".
  static SubsetFilter ParseSpec(const std::string& spec);

  const std::string& name() const { return name_; }
  const std::string& expression() const { return expr_; }
  bool Matches(const ScoredRow& row) const;

 private:
  struct Clause {
    std::string field;
    std::string op;
    std::string value;
  };
  std::string name_;
  std::string expr_;
  std::vector<Clause> clauses_;
};

// all, codecs (condition != anchor), spat. rev. (id contains "_rev").
std::vector<SubsetFilter> DefaultSubsets();

struct SubsetReport {
  std::string name;
  Criteria criteria;
};

std::vector<SubsetReport> Report(std::span<const ScoredRow> rows,
                                 std::span<const SubsetFilter> subsets,
                                 RmseStarForm form = RmseStarForm::kNormalized);

// {subset: {pearson, spearman, rmse, rmse_star, n}} with null for absent
// criteria, keys in subset order.
std::string ReportToJson(std::span<const SubsetReport> report);
// Fixed-width text table.
std::string ReportToText(std::span<const SubsetReport> report);

}  // namespace spatialq

#endif  // SPATIALQ_STATS_H_
