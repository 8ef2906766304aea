#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "melcond/chord_kinds.h"
#include "melcond/lead_sheet.h"

namespace melcond {

inline constexpr int kPitchVocab = 89;  // 88 keys + rest
inline constexpr int kRestToken = 88;
inline constexpr int kDurationVocab = 19;
inline constexpr int kBarposVocab = kTicksPerBar;
inline constexpr int kRootVocab = 12;

struct ChordSymbol {
  int root_token = 0;
  PitchClassSet pitch_classes = 0;  // absolute pitch classes, bit 0 = C

  bool operator==(const ChordSymbol&) const = default;
};

struct TokenizedSong {
  std::string title;
  std::vector<int> pitch;
  std::vector<int> duration;
  std::vector<ChordSymbol> chord;
  std::vector<int> barpos;

  std::size_t size() const { return pitch.size(); }
  bool operator==(const TokenizedSong&) const = default;
};

// 19 tick values, strictly decreasing; the token is the table index.
class DurationDictionary {
 public:
  explicit DurationDictionary(std::array<int, kDurationVocab> ticks);

  int ticks(int token) const;
  // Nearest entry; equidistant candidates resolve to the shorter duration.
  int token_for(int ticks) const;
  bool contains(int ticks) const;
  int shortest_token() const { return kDurationVocab - 1; }
  const std::array<int, kDurationVocab>& table() const { return ticks_; }

 private:
  std::array<int, kDurationVocab> ticks_;
};

const DurationDictionary& default_duration_dictionary();

int pitch_token(int midi_or_rest);
int pitch_from_token(int token);

TokenizedSong tokenize(const LeadSheet& song, const DurationDictionary& durations = default_duration_dictionary(),
                       const ChordKindDictionary& kinds = ChordKindDictionary::builtin());

// Rebuilds bars by accumulating token durations from tick 0. Each bar opens
// with the chord of the note sounding at its downbeat; further chord events
// appear where consecutive notes change chord. Throws IndexOutOfRange for
// bad tokens and UnknownChordKind for pitch-class sets not in the dictionary.
LeadSheet detokenize(const TokenizedSong& tokens, const DurationDictionary& durations = default_duration_dictionary(),
                     const ChordKindDictionary& kinds = ChordKindDictionary::builtin());

// JSON with four parallel arrays; chords as {"root": r, "pcs": [0/1 x12]}.
std::string serialize_tokens(const TokenizedSong& song);
TokenizedSong parse_tokens(std::string_view document);

// True when every note duration of `song` is an exact dictionary entry.
bool is_dictionary_exact(const LeadSheet& song, const DurationDictionary& durations = default_duration_dictionary());

}  // namespace melcond
