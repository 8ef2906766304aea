#include "melcond/lead_sheet.h"

#include <algorithm>

#include "melcond/error.h"

namespace melcond {

std::size_t LeadSheet::note_count() const {
  std::size_t n = 0;
  for (const auto& bar : bars) n += bar.notes.size();
  return n;
}

namespace {

std::string where(std::size_t bar, std::size_t idx, const char* what) {
  return "bars[" + std::to_string(bar) + "]." + what + "[" + std::to_string(idx) + "]";
}

void validate_note(const NoteEvent& n, std::size_t bar, std::size_t idx) {
  if (!n.is_rest() && (n.pitch < kLowestPitch || n.pitch > kHighestPitch)) {
    fail(ErrorKind::SchemaViolation,
         where(bar, idx, "notes") + ".pitch: " + std::to_string(n.pitch) + " outside [21,108]");
  }
  if (n.onset < 0 || n.onset >= kTicksPerBar) {
    fail(ErrorKind::SchemaViolation, where(bar, idx, "notes") + ".onset: outside [0,96)");
  }
  if (n.duration < 1) fail(ErrorKind::SchemaViolation, where(bar, idx, "notes") + ".duration: must be >= 1");
}

void push_rests(std::vector<Bar>& bars, int from, int to) {
  while (from < to) {
    const int bar = from / kTicksPerBar;
    const int bar_end = (bar + 1) * kTicksPerBar;
    const int end = std::min(to, bar_end);
    bars[static_cast<std::size_t>(bar)].notes.push_back({kRest, from - bar * kTicksPerBar, end - from});
    from = end;
  }
}

}  // namespace

LeadSheet normalize(std::string title, TimeSignature ts, std::vector<RawBar> raw,
                    const ChordKindDictionary& kinds) {
  if (ts.numerator != 4 || ts.denominator != 4) {
    fail(ErrorKind::UnsupportedTimeSignature,
         std::to_string(ts.numerator) + "/" + std::to_string(ts.denominator));
  }
  if (raw.empty()) fail(ErrorKind::EmptyScore, "no bars");

  LeadSheet out;
  out.title = std::move(title);
  out.time_signature = ts;
  out.bars.resize(raw.size());

  // Notes: validate, then rebuild each bar with gaps filled by rests.
  int cursor = 0;
  for (std::size_t b = 0; b < raw.size(); ++b) {
    const auto& notes = raw[b].notes;
    for (std::size_t i = 0; i < notes.size(); ++i) {
      const NoteEvent& n = notes[i];
      validate_note(n, b, i);
      if (i > 0 && n.onset <= notes[i - 1].onset) {
        fail(ErrorKind::UnsupportedScore, where(b, i, "notes") + ": onsets must be strictly increasing");
      }
      const int global = static_cast<int>(b) * kTicksPerBar + n.onset;
      if (global < cursor) {
        fail(ErrorKind::UnsupportedScore, where(b, i, "notes") + ": overlaps the previous note");
      }
      push_rests(out.bars, cursor, global);
      out.bars[b].notes.push_back(n);
      cursor = global + n.duration;
    }
  }
  push_rests(out.bars, cursor, out.total_ticks());

  // Chords.
  const ChordEvent* last = nullptr;
  for (std::size_t b = 0; b < raw.size(); ++b) {
    const auto& chords = raw[b].chords;
    auto& dst = out.bars[b].chords;
    for (std::size_t i = 0; i < chords.size(); ++i) {
      const ChordEvent& c = chords[i];
      if (c.root < 0 || c.root > 11) fail(ErrorKind::SchemaViolation, where(b, i, "chords") + ".root: outside [0,11]");
      if (c.onset < 0 || c.onset >= kTicksPerBar) {
        fail(ErrorKind::SchemaViolation, where(b, i, "chords") + ".onset: outside [0,96)");
      }
      if (!kinds.contains(c.kind)) fail(ErrorKind::UnknownChordKind, where(b, i, "chords") + ".kind: '" + c.kind + "'");
      if (i > 0 && c.onset <= chords[i - 1].onset) {
        fail(ErrorKind::SchemaViolation, where(b, i, "chords") + ": onsets must be strictly increasing");
      }
    }
    if (chords.empty() || chords.front().onset > 0) {
      if (last != nullptr) {
        ChordEvent inherited = *last;
        inherited.onset = 0;
        dst.push_back(inherited);
      } else if (chords.empty()) {
        fail(ErrorKind::MissingHarmony, "bars[" + std::to_string(b) + "]: no chord and no earlier chord to inherit");
      }
    }
    for (const auto& c : chords) {
      ChordEvent e = c;
      if (dst.empty()) e.onset = 0;  // song's first chord is pulled back to the downbeat
      if (!dst.empty() && dst.back().root == e.root && dst.back().kind == e.kind) continue;
      dst.push_back(e);
    }
    last = &dst.back();
  }
  return out;
}

LeadSheet normalize(const LeadSheet& sheet, const ChordKindDictionary& kinds) {
  std::vector<RawBar> raw;
  raw.reserve(sheet.bars.size());
  for (const auto& bar : sheet.bars) raw.push_back({bar.notes, bar.chords});
  return normalize(sheet.title, sheet.time_signature, std::move(raw), kinds);
}

const ChordEvent& chord_at(const LeadSheet& sheet, int global_tick) {
  if (sheet.bars.empty()) fail(ErrorKind::EmptyScore, "no bars");
  int bar = std::clamp(global_tick / kTicksPerBar, 0, static_cast<int>(sheet.bars.size()) - 1);
  const int in_bar = global_tick >= sheet.total_ticks() ? kTicksPerBar : global_tick - bar * kTicksPerBar;
  const auto& chords = sheet.bars[static_cast<std::size_t>(bar)].chords;
  const ChordEvent* found = &chords.front();
  for (const auto& c : chords) {
    if (c.onset <= in_bar) found = &c;
  }
  return *found;
}

}  // namespace melcond
