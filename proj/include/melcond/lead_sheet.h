#pragma once

#include <optional>
#include <string>
#include <vector>

#include "melcond/chord_kinds.h"

namespace melcond {

inline constexpr int kTicksPerBeat = 24;
inline constexpr int kTicksPerBar = 96;
inline constexpr int kLowestPitch = 21;   // A0
inline constexpr int kHighestPitch = 108; // C8
inline constexpr int kRest = -1;

struct TimeSignature {
  int numerator = 4;
  int denominator = 4;
  bool operator==(const TimeSignature&) const = default;
};

struct NoteEvent {
  int pitch = kRest;  // MIDI number in [21,108] or kRest
  int onset = 0;      // ticks from bar start, [0,96)
  int duration = 1;   // ticks, may extend past the bar end for tied notes

  bool is_rest() const { return pitch == kRest; }
  bool operator==(const NoteEvent&) const = default;
};

struct ChordEvent {
  int root = 0;  // pitch class
  std::string kind;
  int onset = 0;
  bool operator==(const ChordEvent&) const = default;
};

struct Bar {
  std::vector<NoteEvent> notes;
  std::vector<ChordEvent> chords;
  bool operator==(const Bar&) const = default;
};

struct LeadSheet {
  std::string title;
  TimeSignature time_signature;
  std::vector<Bar> bars;

  std::size_t note_count() const;
  int total_ticks() const { return static_cast<int>(bars.size()) * kTicksPerBar; }
  bool operator==(const LeadSheet&) const = default;
};

// A bar as read from a source document, before normalization. A missing
// chord list is distinct from an empty one only for error reporting.
struct RawBar {
  std::vector<NoteEvent> notes;
  std::vector<ChordEvent> chords;
};

// Applies the shared normalization pass and checks every LeadSheet invariant:
//  - time signature must be 4/4
//  - onsets strictly increasing, notes non-overlapping across the whole song
//  - gaps (including leading and trailing space in a bar) become explicit rests,
//    split at bar lines
//  - chord fill: each bar starts with a chord at onset 0, inherited from the
//    previous bar when absent; consecutive duplicate chords in a bar dropped
//  - chord kinds must exist in the dictionary
// Throws Error with the matching kind on violation.
LeadSheet normalize(std::string title, TimeSignature ts, std::vector<RawBar> bars,
                    const ChordKindDictionary& kinds = ChordKindDictionary::builtin());

// Re-runs normalize() on an existing sheet.
LeadSheet normalize(const LeadSheet& sheet,
                    const ChordKindDictionary& kinds = ChordKindDictionary::builtin());

// Chord sounding at a global tick (bar * 96 + onset); the last chord of the
// song is returned past the end.
const ChordEvent& chord_at(const LeadSheet& sheet, int global_tick);

}  // namespace melcond
