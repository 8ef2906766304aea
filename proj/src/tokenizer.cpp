#include "melcond/tokenizer.h"

#include <cstdlib>
#include <nlohmann/json.hpp>

#include "melcond/error.h"

namespace melcond {

DurationDictionary::DurationDictionary(std::array<int, kDurationVocab> ticks) : ticks_(ticks) {
  for (std::size_t i = 0; i < ticks_.size(); ++i) {
    if (ticks_[i] <= 0) fail(ErrorKind::InvalidArgument, "duration dictionary entries must be positive");
    if (i > 0 && ticks_[i] >= ticks_[i - 1]) {
      fail(ErrorKind::InvalidArgument, "duration dictionary must be strictly decreasing");
    }
  }
}

int DurationDictionary::ticks(int token) const {
  if (token < 0 || token >= kDurationVocab) fail(ErrorKind::IndexOutOfRange, "duration token " + std::to_string(token));
  return ticks_[static_cast<std::size_t>(token)];
}

int DurationDictionary::token_for(int t) const {
  int best = 0;
  int best_dist = std::abs(t - ticks_[0]);
  for (int i = 1; i < kDurationVocab; ++i) {
    const int dist = std::abs(t - ticks_[static_cast<std::size_t>(i)]);
    // Later entries are shorter, so `<=` sends ties to the shorter one.
    if (dist <= best_dist) {
      best = i;
      best_dist = dist;
    }
  }
  return best;
}

bool DurationDictionary::contains(int t) const {
  for (int v : ticks_) {
    if (v == t) return true;
  }
  return false;
}

const DurationDictionary& default_duration_dictionary() {
  static const DurationDictionary dict({192, 144, 96, 72, 64, 48, 36, 32, 24, 18, 16, 12, 9, 8, 6, 4, 3, 2, 1});
  return dict;
}

int pitch_token(int midi_or_rest) {
  if (midi_or_rest == kRest) return kRestToken;
  if (midi_or_rest < kLowestPitch || midi_or_rest > kHighestPitch) {
    fail(ErrorKind::IndexOutOfRange, "pitch " + std::to_string(midi_or_rest));
  }
  return midi_or_rest - kLowestPitch;
}

int pitch_from_token(int token) {
  if (token < 0 || token >= kPitchVocab) fail(ErrorKind::IndexOutOfRange, "pitch token " + std::to_string(token));
  return token == kRestToken ? kRest : token + kLowestPitch;
}

TokenizedSong tokenize(const LeadSheet& song, const DurationDictionary& durations, const ChordKindDictionary& kinds) {
  TokenizedSong out;
  out.title = song.title;
  const std::size_t n = song.note_count();
  out.pitch.reserve(n);
  out.duration.reserve(n);
  out.chord.reserve(n);
  out.barpos.reserve(n);
  for (const auto& bar : song.bars) {
    std::size_t ci = 0;
    for (const auto& note : bar.notes) {
      while (ci + 1 < bar.chords.size() && bar.chords[ci + 1].onset <= note.onset) ++ci;
      const ChordEvent& c = bar.chords[ci];
      out.pitch.push_back(pitch_token(note.pitch));
      out.duration.push_back(durations.token_for(note.duration));
      out.chord.push_back({c.root, kinds.absolute(c.root, c.kind)});
      out.barpos.push_back(note.onset);
    }
  }
  return out;
}

LeadSheet detokenize(const TokenizedSong& tokens, const DurationDictionary& durations,
                     const ChordKindDictionary& kinds) {
  const std::size_t n = tokens.size();
  if (tokens.duration.size() != n || tokens.chord.size() != n || tokens.barpos.size() != n) {
    fail(ErrorKind::ShapeMismatch, "token sequences differ in length");
  }
  if (n == 0) fail(ErrorKind::EmptyScore, "no tokens");

  std::vector<int> onsets(n);
  std::vector<ChordEvent> chords(n);
  int clock = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (tokens.barpos[t] < 0 || tokens.barpos[t] >= kBarposVocab) {
      fail(ErrorKind::IndexOutOfRange, "barpos token " + std::to_string(tokens.barpos[t]));
    }
    const ChordSymbol& cs = tokens.chord[t];
    if (cs.root_token < 0 || cs.root_token >= kRootVocab) {
      fail(ErrorKind::IndexOutOfRange, "chord root token " + std::to_string(cs.root_token));
    }
    auto kind = kinds.kind_for(cs.root_token, cs.pitch_classes);
    if (!kind) fail(ErrorKind::UnknownChordKind, "no chord kind matches the pitch-class set at step " + std::to_string(t));
    chords[t] = {cs.root_token, *kind, 0};
    pitch_from_token(tokens.pitch[t]);
    onsets[t] = clock;
    clock += durations.ticks(tokens.duration[t]);
  }

  const int n_bars = std::max((clock + kTicksPerBar - 1) / kTicksPerBar, onsets.back() / kTicksPerBar + 1);
  std::vector<RawBar> bars(static_cast<std::size_t>(n_bars));
  std::size_t sounding = 0;  // note covering the current downbeat
  for (std::size_t t = 0; t < n; ++t) {
    const int bar = onsets[t] / kTicksPerBar;
    RawBar& rb = bars[static_cast<std::size_t>(bar)];
    NoteEvent note{pitch_from_token(tokens.pitch[t]), onsets[t] % kTicksPerBar, durations.ticks(tokens.duration[t])};
    rb.notes.push_back(note);
  }
  for (int b = 0; b < n_bars; ++b) {
    const int downbeat = b * kTicksPerBar;
    while (sounding + 1 < n && onsets[sounding + 1] <= downbeat) ++sounding;
    RawBar& rb = bars[static_cast<std::size_t>(b)];
    ChordEvent first = chords[sounding];
    first.onset = 0;
    rb.chords.push_back(first);
    for (std::size_t t = sounding; t < n && onsets[t] < downbeat + kTicksPerBar; ++t) {
      if (onsets[t] <= downbeat) continue;
      const ChordEvent& prev = rb.chords.back();
      if (prev.root == chords[t].root && prev.kind == chords[t].kind) continue;
      ChordEvent e = chords[t];
      e.onset = onsets[t] - downbeat;
      rb.chords.push_back(e);
    }
  }
  return normalize(tokens.title, TimeSignature{4, 4}, std::move(bars), kinds);
}

std::string serialize_tokens(const TokenizedSong& song) {
  nlohmann::ordered_json j;
  j["title"] = song.title;
  j["pitch"] = song.pitch;
  j["duration"] = song.duration;
  j["barpos"] = song.barpos;
  auto chords = nlohmann::ordered_json::array();
  for (const auto& c : song.chord) {
    nlohmann::ordered_json jc;
    jc["root"] = c.root_token;
    std::vector<int> bits(12);
    for (int i = 0; i < 12; ++i) bits[static_cast<std::size_t>(i)] = (c.pitch_classes >> i) & 1;
    jc["pcs"] = bits;
    chords.push_back(std::move(jc));
  }
  j["chord"] = std::move(chords);
  return j.dump() + "\n";
}

TokenizedSong parse_tokens(std::string_view document) {
  TokenizedSong s;
  try {
    const auto j = nlohmann::json::parse(document);
    s.title = j.at("title").get<std::string>();
    s.pitch = j.at("pitch").get<std::vector<int>>();
    s.duration = j.at("duration").get<std::vector<int>>();
    s.barpos = j.at("barpos").get<std::vector<int>>();
    for (const auto& jc : j.at("chord")) {
      ChordSymbol c;
      c.root_token = jc.at("root").get<int>();
      const auto bits = jc.at("pcs").get<std::vector<int>>();
      if (bits.size() != 12) fail(ErrorKind::SchemaViolation, "chord.pcs must have 12 entries");
      for (int i = 0; i < 12; ++i) {
        if (bits[static_cast<std::size_t>(i)]) c.pitch_classes |= static_cast<PitchClassSet>(1u << i);
      }
      s.chord.push_back(c);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::SchemaViolation, std::string("token file: ") + e.what());
  }
  const std::size_t n = s.pitch.size();
  if (s.duration.size() != n || s.barpos.size() != n || s.chord.size() != n) {
    fail(ErrorKind::SchemaViolation, "token arrays differ in length");
  }
  return s;
}

bool is_dictionary_exact(const LeadSheet& song, const DurationDictionary& durations) {
  for (const auto& bar : song.bars) {
    for (const auto& n : bar.notes) {
      if (!durations.contains(n.duration)) return false;
    }
  }
  return true;
}

}  // namespace melcond
