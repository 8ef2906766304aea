#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "melcond/chord_kinds.h"
#include "melcond/lead_sheet.h"

namespace melcond {

// --- parsing -----------------------------------------------------------------

// Reads a score-partwise MusicXML document with a single part. Honors
// divisions, time, note (pitch/rest, duration, tie) and harmony (root, kind);
// every other element is skipped. Durations are rescaled to 24 ticks per beat.
LeadSheet parse_musicxml(std::string_view document,
                         const ChordKindDictionary& kinds = ChordKindDictionary::builtin());

// Canonical JSON song format:
//   {"title": str, "time_signature": "4/4",
//    "bars": [{"chords": [{"root": 0-11, "kind": str, "onset": 0-95}],
//              "notes":  [{"pitch": 21-108 | "rest", "onset": 0-95, "duration": >=1}]}]}
LeadSheet parse_canonical(std::string_view document,
                          const ChordKindDictionary& kinds = ChordKindDictionary::builtin());
std::string serialize_canonical(const LeadSheet& sheet);

// Dispatches on file extension (.xml/.musicxml vs .json).
LeadSheet load_song(const std::string& path,
                    const ChordKindDictionary& kinds = ChordKindDictionary::builtin());

// --- augmentation ------------------------------------------------------------

inline constexpr int kMinShift = -6;
inline constexpr int kMaxShift = 5;

// Shifts pitches by `semitones` (chord roots mod 12). nullopt when any pitch
// would leave the piano range. Throws InvalidArgument outside [-6,+5].
std::optional<LeadSheet> transpose(const LeadSheet& song, int semitones);

struct AugmentedSong {
  LeadSheet sheet;
  std::size_t base_index = 0;  // position in the input list
  int shift = 0;
};

// Every in-range shift in [-6,+5] for each song, song order then ascending shift.
std::vector<AugmentedSong> augment_corpus_tagged(const std::vector<LeadSheet>& songs);
std::vector<LeadSheet> augment_corpus(const std::vector<LeadSheet>& songs);

// --- statistics --------------------------------------------------------------

struct StatsReport {
  std::size_t song_count = 0;
  std::size_t unique_chords = 0;
  std::size_t unique_chord_kinds = 0;
  std::size_t bars_min = 0;
  std::size_t bars_max = 0;
  std::optional<double> bars_mean;
  // Pitched notes (rests excluded) by onset bar.
  std::size_t notes_per_bar_min = 0;
  std::size_t notes_per_bar_max = 0;
  std::optional<double> notes_per_bar_mean;
  std::optional<std::size_t> augmented_count;

  std::string to_json() const;
  std::string to_table() const;
};

StatsReport corpus_stats(const std::vector<LeadSheet>& songs);

// --- synthetic corpora -------------------------------------------------------

enum class SyntheticStyle { Diatonic, ChordLocked };

SyntheticStyle parse_synthetic_style(std::string_view name);
std::string_view to_string(SyntheticStyle style);

// Deterministic stand-in corpus. Songs are 8-16 bars of 4/4, pitches in
// [48,84] (so all twelve transpositions stay in range), every duration is a
// duration-dictionary entry and no note crosses a bar line.
//
// ChordLocked plants two learnable dependencies:
//  - each pitched note's pitch class is a chord tone of the active chord with
//    probability 0.9;
//  - the duration class of a note (long: >= a quarter, short: otherwise) follows
//    the register of the previous note (>= G4 -> long) with probability 0.85.
// Throws InvalidArgument when n_songs < 1.
std::vector<LeadSheet> generate_synthetic_corpus(std::uint64_t seed, int n_songs, SyntheticStyle style);

}  // namespace melcond
