#include <array>
#include <cmath>

#include "melcond/error.h"
#include "melcond/ingest.h"
#include "melcond/rng.h"

namespace melcond {

SyntheticStyle parse_synthetic_style(std::string_view name) {
  if (name == "diatonic") return SyntheticStyle::Diatonic;
  if (name == "chord-locked") return SyntheticStyle::ChordLocked;
  fail(ErrorKind::InvalidArgument, "unknown synthetic style '" + std::string(name) + "' (diatonic|chord-locked)");
}

std::string_view to_string(SyntheticStyle style) {
  return style == SyntheticStyle::Diatonic ? "diatonic" : "chord-locked";
}

namespace {

constexpr int kLowSynth = 48;
constexpr int kHighSynth = 84;
constexpr int kRegisterSplit = 67;  // G4
constexpr std::array<int, 7> kMajorScale = {0, 2, 4, 5, 7, 9, 11};

struct Degree {
  int offset;
  const char* kind;
};

// Diatonic seventh/triad qualities on each scale degree.
constexpr std::array<Degree, 7> kDegrees = {{{0, "major-seventh"},
                                             {2, "minor-seventh"},
                                             {4, "minor"},
                                             {5, "major"},
                                             {7, "dominant"},
                                             {9, "minor"},
                                             {11, "half-diminished"}}};

// Degree transition preferences (row = current degree).
constexpr std::array<std::array<double, 7>, 7> kProgression = {{
    {1, 3, 1, 4, 4, 3, 0.5},
    {1, 0.5, 0.5, 1, 6, 0.5, 1},
    {1, 1, 0.5, 2, 1, 4, 0.2},
    {3, 2, 0.5, 0.5, 4, 1, 0.5},
    {6, 0.5, 0.5, 1, 0.5, 2, 0.2},
    {1, 4, 0.5, 3, 1, 0.5, 0.2},
    {4, 0.5, 2, 0.5, 1, 0.5, 0.2},
}};

int pick_pitch(Rng& rng, int pc, int previous) {
  std::vector<int> candidates;
  std::vector<double> weights;
  for (int p = kLowSynth; p <= kHighSynth; ++p) {
    if (p % 12 != pc) continue;
    candidates.push_back(p);
    weights.push_back(std::exp(-std::abs(p - previous) / 4.0));
  }
  return candidates[rng.categorical(weights)];
}

// Fills [0, length) with dictionary durations; `want_long` picks the class
// of each note given the previous note.
template <typename ChooseLong>
int pick_duration(Rng& rng, int remaining, ChooseLong&& want_long) {
  static constexpr std::array<int, 2> kLong = {24, 48};
  static constexpr std::array<int, 2> kShort = {12, 6};
  const auto& cls = want_long() ? kLong : kShort;
  std::vector<int> fits;
  for (int d : cls) {
    if (d <= remaining) fits.push_back(d);
  }
  if (!fits.empty()) return fits[rng.below(fits.size())];
  for (int d : {48, 24, 12, 6}) {
    if (d <= remaining) return d;
  }
  return remaining;
}

LeadSheet make_song(Rng& rng, SyntheticStyle style, const std::string& title) {
  const int key = static_cast<int>(rng.below(12));
  const int n_bars = 8 + static_cast<int>(rng.below(9));
  int degree = 0;
  int previous = kLowSynth + 12 + key;
  bool previous_rest = false;
  int scale_pos = 7;  // index into an extended scale for the diatonic walk

  std::vector<RawBar> bars(static_cast<std::size_t>(n_bars));
  for (int b = 0; b < n_bars; ++b) {
    RawBar& bar = bars[static_cast<std::size_t>(b)];
    const bool split = b > 0 && rng.bernoulli(0.3);
    const std::vector<int> segment_starts = split ? std::vector<int>{0, 48} : std::vector<int>{0};
    for (std::size_t s = 0; s < segment_starts.size(); ++s) {
      if (b > 0 || s > 0) {
        std::vector<double> w(kProgression[static_cast<std::size_t>(degree)].begin(),
                              kProgression[static_cast<std::size_t>(degree)].end());
        degree = static_cast<int>(rng.categorical(w));
      }
      const Degree& d = kDegrees[static_cast<std::size_t>(degree)];
      const int root = (key + d.offset) % 12;
      bar.chords.push_back({root, d.kind, segment_starts[s]});
      const PitchClassSet chord_pcs = ChordKindDictionary::builtin().absolute(root, d.kind);

      const int seg_begin = segment_starts[s];
      const int seg_end = s + 1 < segment_starts.size() ? segment_starts[s + 1] : kTicksPerBar;
      int t = seg_begin;
      while (t < seg_end) {
        int dur = 0;
        if (style == SyntheticStyle::ChordLocked) {
          dur = pick_duration(rng, seg_end - t, [&] {
            const bool high = previous_rest || previous >= kRegisterSplit;
            return rng.bernoulli(0.85) ? high : !high;
          });
        } else {
          dur = pick_duration(rng, seg_end - t, [&] { return rng.bernoulli(0.5); });
        }

        NoteEvent note{kRest, t, dur};
        if (!rng.bernoulli(0.05)) {
          if (style == SyntheticStyle::ChordLocked) {
            std::vector<int> in, out;
            for (int pc = 0; pc < 12; ++pc) ((chord_pcs >> pc) & 1u ? in : out).push_back(pc);
            const auto& pool = rng.bernoulli(0.9) ? in : out;
            note.pitch = pick_pitch(rng, pool[rng.below(pool.size())], previous);
          } else {
            const int step = static_cast<int>(rng.below(5)) - 2;
            scale_pos = std::clamp(scale_pos + step, 0, 20);
            const int pitch = kLowSynth + 12 * (scale_pos / 7) + key + kMajorScale[static_cast<std::size_t>(scale_pos % 7)];
            note.pitch = std::clamp(pitch, kLowSynth, kHighSynth);
          }
          previous = note.pitch;
          previous_rest = false;
        } else {
          previous_rest = true;
        }
        bar.notes.push_back(note);
        t += dur;
      }
    }
  }
  return normalize(title, TimeSignature{4, 4}, std::move(bars));
}

}  // namespace

std::vector<LeadSheet> generate_synthetic_corpus(std::uint64_t seed, int n_songs, SyntheticStyle style) {
  if (n_songs < 1) fail(ErrorKind::InvalidArgument, "n_songs must be >= 1");
  std::vector<LeadSheet> out;
  out.reserve(static_cast<std::size_t>(n_songs));
  for (int i = 0; i < n_songs; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    out.push_back(make_song(rng, style,
                            "synthetic-" + std::string(to_string(style)) + "-" + std::to_string(seed) + "-" +
                                std::to_string(i)));
  }
  return out;
}

}  // namespace melcond
