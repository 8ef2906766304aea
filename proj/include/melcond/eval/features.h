#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "melcond/tokenizer.h"

namespace melcond {

// The eleven melody descriptors, pitch-based first.
enum class Feature { PC, PCPerBar, PCH, PCTM, PR, PI, IOI, NLH, NLTM, NC, NCPerBar };
inline constexpr int kFeatureCount = 11;

enum class FeatureGroup { Pitch, Duration };

std::string_view feature_name(Feature f);  // "PC", "PC/bar", ...
FeatureGroup feature_group(Feature f);
// True for histogram/transition features (values sum to 1).
bool is_distribution(Feature f);
// 1 for scalars, 12, 144, 19 or 361 for the distributions.
int feature_width(Feature f);
const std::array<Feature, kFeatureCount>& all_features();

// A null entry means the feature is undefined for that song (no pitched
// notes, or fewer than two for interval/transition features).
using FeatureValue = std::optional<std::vector<double>>;
using SongFeatures = std::array<FeatureValue, kFeatureCount>;

// Notes are the non-rest tokens. Onsets come from the running sum of
// duration ticks from 0; the song spans ceil(total / 96) bars.
//   PC      distinct pitches            PC/bar  mean distinct pitches per bar
//   PCH     pitch-class histogram       PCTM    12x12 pitch-class transitions
//   PR      highest - lowest pitch      PI      mean |interval| between notes
//   IOI     mean ticks between onsets   NLH     duration-token histogram
//   NLTM    19x19 duration transitions  NC      note count
//   NC/bar  notes per bar
// Transitions pair consecutive notes with rests skipped. Throws EmptySong.
SongFeatures extract_features(const TokenizedSong& song);

}  // namespace melcond
