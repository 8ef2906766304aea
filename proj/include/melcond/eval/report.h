#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "melcond/eval/analysis.h"
#include "melcond/eval/bleu.h"
#include "melcond/eval/divergence.h"

namespace melcond {

struct BleuRow {
  std::string config;
  std::optional<BleuResult> pitch;
  std::optional<BleuResult> duration;
};

struct EvalReport {
  std::vector<NllRow> nll;
  DivergenceTable divergence;
  std::optional<AggregateScores> aggregates;
  std::vector<BleuRow> bleu;
  std::vector<ConditionTest> ttests;
  std::vector<std::string> warnings;
};

// CSV columns (empty cell = null):
//   divergence.csv   config, then one column per feature; last row "stddev"
//   aggregates.csv   group, input, raw, normalized
//   bleu.csv         config, pitch_bleu, pitch_bleu_smoothed, duration_bleu, duration_bleu_smoothed
//   nll_summary.csv  config, pitch_val_nll, pitch_top3, duration_val_nll, duration_top3
//   ttests.csv       group, condition, n_with, n_without, t, df, p, note
std::string divergence_csv(const DivergenceTable& table);
std::string aggregates_csv(const std::optional<AggregateScores>& scores);
std::string bleu_csv(const std::vector<BleuRow>& rows);
std::string nll_summary_csv(const std::vector<NllRow>& rows);
std::string ttests_csv(const std::vector<ConditionTest>& tests);

// Everything above in one document; see schemas/report.schema.json.
nlohmann::ordered_json report_json(const EvalReport& report);

}  // namespace melcond
