#pragma once

#include <optional>
#include <string>
#include <vector>

#include "melcond/eval/divergence.h"

namespace melcond {

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

// Welch two-sample t-test with sample variances and the
// Welch-Satterthwaite degrees of freedom. Two constant groups with equal
// means give t = 0, p = 1; with different means DegenerateVariance.
// Each group needs at least 2 values.
TTest welch_ttest(const std::vector<double>& a, const std::vector<double>& b);

// Column-wise z-scores (population standard deviation). Rows are
// configurations, columns metrics. Constant columns are dropped; throws
// DegenerateVariance when nothing remains.
std::vector<std::vector<double>> zscore_columns(const std::vector<std::vector<double>>& rows);

struct ConditionTest {
  FeatureGroup group = FeatureGroup::Pitch;
  char condition = 'I';
  std::size_t with = 0, without = 0;  // configurations on each side
  std::optional<TTest> test;          // null when degenerate
  std::string note;
};

// For each feature group and input, z-normalizes the group's KL columns over
// the configurations with a complete row, then compares the pooled scores of
// configurations with and without the input. Negative t favors the input.
std::vector<ConditionTest> condition_ttests(const DivergenceTable& table);

struct NllRow {
  std::string config;
  std::optional<double> pitch;
  std::optional<double> duration;
  bool pitch_top3 = false;
  bool duration_top3 = false;
};

// Flags the three lowest values per column; ties with the third are flagged too.
std::vector<NllRow> nll_summary(std::vector<NllRow> rows);

}  // namespace melcond
