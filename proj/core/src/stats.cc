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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "spatialq/errors.h"

namespace spatialq {

namespace {

void CheckSameLength(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("length mismatch");
}

// (df, t_0.975) pairs.
constexpr std::pair<double, double> kStudentT975[] = {
    {1, 12.706205}, {2, 4.302653},   {3, 3.182446},   {4, 2.776445},
    {5, 2.570582},  {6, 2.446912},   {7, 2.364624},   {8, 2.306004},
    {9, 2.262157},  {10, 2.228139},  {11, 2.200985},  {12, 2.178813},
    {13, 2.160369}, {14, 2.144787},  {15, 2.131450},  {16, 2.119905},
    {17, 2.109816}, {18, 2.100922},  {19, 2.093024},  {20, 2.085963},
    {21, 2.079614}, {22, 2.073873},  {23, 2.068658},  {24, 2.063899},
    {25, 2.059539}, {26, 2.055529},  {27, 2.051831},  {28, 2.048407},
    {29, 2.045230}, {30, 2.042272},  {40, 2.021075},  {50, 2.008559},
    {60, 2.000298}, {80, 1.990063},  {100, 1.983972}, {120, 1.979930},
    {150, 1.975905}, {200, 1.971896},
};

}  // namespace

double Pearson(std::span<const double> x, std::span<const double> y) {
  CheckSameLength(x, y);
  const size_t n = x.size();
  if (n < 2) throw DataError("undefined correlation: fewer than two points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw DataError("undefined correlation: constant input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> FractionalRanks(std::span<const double> x) {
  std::vector<size_t> order(x.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&x](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i + 1;
    while (j < order.size() && x[order[j]] == x[order[i]]) ++j;
    // Positions i..j-1 share ranks i+1..j.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double Spearman(std::span<const double> x, std::span<const double> y) {
  CheckSameLength(x, y);
  return Pearson(FractionalRanks(x), FractionalRanks(y));
}

double Rmse(std::span<const double> truth, std::span<const double> predicted) {
  CheckSameLength(truth, predicted);
  if (truth.empty()) throw DataError("rmse of an empty set");
  double acc = 0.0;
  for (size_t i = 0; i < truth.size(); ++i) {
    const double d = truth[i] - predicted[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(truth.size()));
}

double RmseStar(std::span<const double> truth, std::span<const double> predicted,
                std::span<const double> ci95, RmseStarForm form) {
  CheckSameLength(truth, predicted);
  CheckSameLength(truth, ci95);
  if (truth.empty()) throw DataError("rmse* of an empty set");
  double acc = 0.0;
  for (size_t i = 0; i < truth.size(); ++i) {
    if (ci95[i] < 0.0) throw DataError("negative ci95");
    const double excess =
        std::max(0.0, std::abs(truth[i] - predicted[i]) - ci95[i]);
    acc += excess * excess;
  }
  if (form == RmseStarForm::kNormalized) acc /= static_cast<double>(truth.size());
  return std::sqrt(acc);
}

double StudentT975(double df) {
  if (!(df >= 1.0)) throw DataError("degrees of freedom must be >= 1");
  const auto& last = std::end(kStudentT975)[-1];
  if (df > last.first) return 1.96;
  auto hi = std::lower_bound(
      std::begin(kStudentT975), std::end(kStudentT975), df,
      [](const std::pair<double, double>& e, double v) { return e.first < v; });
  if (hi->first == df) return hi->second;
  const auto lo = hi - 1;
  const double w = (df - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

double Ci95OfRatings(std::span<const double> ratings) {
  const size_t n = ratings.size();
  if (n < 2) throw DataError("ci95 needs at least two ratings");
  const double mean = std::accumulate(ratings.begin(), ratings.end(), 0.0) / n;
  double ss = 0.0;
  for (double r : ratings) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return StudentT975(static_cast<double>(n - 1)) * sd /
         std::sqrt(static_cast<double>(n));
}

Criteria ComputeCriteria(std::span<const ScoredRow> rows, RmseStarForm form) {
  Criteria c;
  c.n = rows.size();
  if (rows.empty()) return c;
  std::vector<double> s, p, ci;
  for (const ScoredRow& r : rows) {
    s.push_back(r.mos);
    p.push_back(r.predicted);
    ci.push_back(r.ci95);
  }
  c.rmse = Rmse(s, p);
  c.rmse_star = RmseStar(s, p, ci, form);
  try {
    c.pearson = Pearson(s, p);
    c.spearman = Spearman(s, p);
  } catch (const DataError&) {
    // Undefined for this subset; leave absent.
  }
  return c;
}

SubsetFilter SubsetFilter::Parse(const std::string& name,
                                 const std::string& expr) {
  SubsetFilter filter;
  filter.name_ = name;
  filter.expr_ = expr;
  if (name.empty()) throw DataError("subset name is empty");
  if (expr.empty() || expr == "*") return filter;
  std::stringstream ss(expr);
  std::string clause;
  while (std::getline(ss, clause, '&')) {
    size_t pos = std::string::npos;
    std::string op;
    for (const char* candidate : {"==", "!=", "!~", "~"}) {
      pos = clause.find(candidate);
      if (pos != std::string::npos) {
        op = candidate;
        break;
      }
    }
    if (op.empty() || pos == 0) {
      throw DataError("malformed subset clause '" + clause + "'");
    }
    Clause c{clause.substr(0, pos), op, clause.substr(pos + op.size())};
    if (c.field != "id" && c.field != "condition") {
      throw DataError("unknown subset field '" + c.field + "'");
    }
    filter.clauses_.push_back(std::move(c));
  }
  return filter;
}

SubsetFilter SubsetFilter::ParseSpec(const std::string& spec) {
  const size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw DataError("subset must be NAME=EXPR, got '" + spec + "'");
  }
  return Parse(spec.substr(0, eq), spec.substr(eq + 1));
}

bool SubsetFilter::Matches(const ScoredRow& row) const {
  for (const Clause& c : clauses_) {
    const std::string& v = c.field == "id" ? row.id : row.condition;
    bool ok = false;
    if (c.op == "==") ok = v == c.value;
    if (c.op == "!=") ok = v != c.value;
    if (c.op == "~") ok = v.find(c.value) != std::string::npos;
    if (c.op == "!~") ok = v.find(c.value) == std::string::npos;
    if (!ok) return false;
  }
  return true;
}

std::vector<SubsetFilter> DefaultSubsets() {
  return {SubsetFilter::Parse("all", "*"),
          SubsetFilter::Parse("codecs", "condition!=anchor"),
          SubsetFilter::Parse("spat. rev.", "id~_rev")};
}

std::vector<SubsetReport> Report(std::span<const ScoredRow> rows,
                                 std::span<const SubsetFilter> subsets,
                                 RmseStarForm form) {
  std::vector<SubsetReport> report;
  for (const SubsetFilter& f : subsets) {
    std::vector<ScoredRow> kept;
    for (const ScoredRow& r : rows) {
      if (f.Matches(r)) kept.push_back(r);
    }
    report.push_back({f.name(), ComputeCriteria(kept, form)});
  }
  return report;
}

std::string ReportToJson(std::span<const SubsetReport> report) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  auto value = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  for (const SubsetReport& r : report) {
    j[r.name] = {{"pearson", value(r.criteria.pearson)},
                 {"spearman", value(r.criteria.spearman)},
                 {"rmse", value(r.criteria.rmse)},
                 {"rmse_star", value(r.criteria.rmse_star)},
                 {"n", r.criteria.n}};
  }
  return j.dump(2);
}

std::string ReportToText(std::span<const SubsetReport> report) {
  auto cell = [](const std::optional<double>& v, int precision) {
    char buf[32];
    if (!v) return std::string("-");
    std::snprintf(buf, sizeof(buf), "%.*f", precision, *v);
    return std::string(buf);
  };
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-14s %6s %9s %9s %8s %8s\n", "subset",
                "n", "pearson", "spearman", "rmse", "rmse*");
  out << line;
  for (const SubsetReport& r : report) {
    std::snprintf(line, sizeof(line), "%-14s %6zu %9s %9s %8s %8s\n",
                  r.name.c_str(), r.criteria.n,
                  cell(r.criteria.pearson, 3).c_str(),
                  cell(r.criteria.spearman, 3).c_str(),
                  cell(r.criteria.rmse, 2).c_str(),
                  cell(r.criteria.rmse_star, 2).c_str());
    out << line;
  }
  return out.str();
}

}  // namespace spatialq
