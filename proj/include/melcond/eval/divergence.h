#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "melcond/eval/features.h"

namespace melcond {

// KL(p || q) in nats after adding eps to every bin of both and
// renormalizing. Throws SupportMismatch on size mismatch or empty input.
double kl_divergence(const std::vector<double>& p, const std::vector<double>& q, double eps = 1e-6);

inline constexpr int kScalarBins = 30;

// Per-song features of one corpus.
using FeatureSet = std::vector<SongFeatures>;
FeatureSet extract_feature_set(const std::vector<TokenizedSong>& songs);

// KL of one feature between a generated set and the reference set. Scalars
// are histogrammed into 30 equal-width bins over the pooled range;
// distributions are averaged per set. Null songs are ignored; std::nullopt
// when either side has no defined value.
std::optional<double> feature_divergence(Feature f, const FeatureSet& generated, const FeatureSet& reference);

struct DivergenceTable {
  std::vector<std::string> configs;                             // row labels
  std::vector<std::array<std::optional<double>, kFeatureCount>> kl;  // null = missing or undefined
  std::array<std::optional<double>, kFeatureCount> stddev{};    // population, over present rows
  std::vector<std::string> warnings;
};

// Rows whose generated set is std::nullopt are null-filled with a warning.
DivergenceTable divergence_table(const std::vector<std::string>& configs,
                                 const std::vector<std::optional<FeatureSet>>& generated, const FeatureSet& reference);

// Conditioning inputs in report order.
inline constexpr std::array<char, 4> kInputs = {'I', 'C', 'N', 'B'};

struct GroupScores {
  std::array<double, 4> raw{};         // summed shares, order of kInputs
  std::array<double, 4> normalized{};  // raw / sum(raw), zeros when nothing was awarded
};

struct AggregateScores {
  GroupScores pitch;
  GroupScores duration;
  // Winning configurations per feature (empty for features with no data).
  std::array<std::vector<std::string>, kFeatureCount> winners;
};

// Per feature, every configuration with KL <= min + stddev shares a score of
// 1 equally; each share is split equally among the configuration's inputs
// (No-Cond passes nothing on). Shares are summed per feature group and
// normalized. Row labels must be configuration abbreviations.
AggregateScores aggregate_scores(const DivergenceTable& table);

}  // namespace melcond
