#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace melcond {

// 12-bit pitch-class set, bit i = pitch class i (C = 0).
using PitchClassSet = std::uint16_t;

PitchClassSet rotate_pcs(PitchClassSet set, int semitones);
int pcs_size(PitchClassSet set);

// Maps MusicXML <kind> strings to interval sets relative to the chord root.
// Interval sets must be pairwise distinct so a (root, absolute set) pair maps
// back to exactly one kind.
class ChordKindDictionary {
 public:
  ChordKindDictionary() = default;

  // The 20-entry table shipped in data/chord_kinds.json.
  static const ChordKindDictionary& builtin();

  // {"kinds": {"major": [0,4,7], ...}}. Throws SchemaViolation.
  static ChordKindDictionary from_json(std::string_view text);
  static ChordKindDictionary load(const std::string& path);

  void add(const std::string& kind, PitchClassSet intervals);

  bool contains(std::string_view kind) const;
  // Interval set relative to the root. Throws UnknownChordKind.
  PitchClassSet intervals(std::string_view kind) const;
  // Absolute pitch-class set of root + kind.
  PitchClassSet absolute(int root, std::string_view kind) const;
  std::optional<std::string> kind_for(int root, PitchClassSet absolute_set) const;

  std::size_t size() const { return kinds_.size(); }
  std::vector<std::string> kinds() const;

 private:
  std::map<std::string, PitchClassSet, std::less<>> kinds_;
  std::map<PitchClassSet, std::string> by_intervals_;
};

}  // namespace melcond
