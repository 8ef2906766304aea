#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "melcond/error.h"
#include "melcond/ingest.h"

namespace melcond {

std::optional<LeadSheet> transpose(const LeadSheet& song, int semitones) {
  if (semitones < kMinShift || semitones > kMaxShift) {
    fail(ErrorKind::InvalidArgument, "transposition " + std::to_string(semitones) + " outside [-6,+5]");
  }
  LeadSheet out = song;
  for (auto& bar : out.bars) {
    for (auto& n : bar.notes) {
      if (n.is_rest()) continue;
      n.pitch += semitones;
      if (n.pitch < kLowestPitch || n.pitch > kHighestPitch) return std::nullopt;
    }
    for (auto& c : bar.chords) c.root = ((c.root + semitones) % 12 + 12) % 12;
  }
  return out;
}

std::vector<AugmentedSong> augment_corpus_tagged(const std::vector<LeadSheet>& songs) {
  std::vector<AugmentedSong> out;
  out.reserve(songs.size() * 12);
  for (std::size_t i = 0; i < songs.size(); ++i) {
    for (int shift = kMinShift; shift <= kMaxShift; ++shift) {
      if (auto t = transpose(songs[i], shift)) out.push_back({std::move(*t), i, shift});
    }
  }
  return out;
}

std::vector<LeadSheet> augment_corpus(const std::vector<LeadSheet>& songs) {
  std::vector<LeadSheet> out;
  for (auto& a : augment_corpus_tagged(songs)) out.push_back(std::move(a.sheet));
  return out;
}

StatsReport corpus_stats(const std::vector<LeadSheet>& songs) {
  StatsReport r;
  r.song_count = songs.size();
  if (songs.empty()) return r;

  std::set<std::pair<int, std::string>> chords;
  std::set<std::string> kinds;
  std::size_t total_bars = 0, total_notes = 0;
  r.bars_min = SIZE_MAX;
  r.notes_per_bar_min = SIZE_MAX;
  for (const auto& s : songs) {
    r.bars_min = std::min(r.bars_min, s.bars.size());
    r.bars_max = std::max(r.bars_max, s.bars.size());
    total_bars += s.bars.size();
    for (const auto& bar : s.bars) {
      std::size_t pitched = 0;
      for (const auto& n : bar.notes) pitched += n.is_rest() ? 0 : 1;
      r.notes_per_bar_min = std::min(r.notes_per_bar_min, pitched);
      r.notes_per_bar_max = std::max(r.notes_per_bar_max, pitched);
      total_notes += pitched;
      for (const auto& c : bar.chords) {
        chords.emplace(c.root, c.kind);
        kinds.insert(c.kind);
      }
    }
  }
  r.unique_chords = chords.size();
  r.unique_chord_kinds = kinds.size();
  r.bars_mean = static_cast<double>(total_bars) / static_cast<double>(songs.size());
  if (total_bars > 0) {
    r.notes_per_bar_mean = static_cast<double>(total_notes) / static_cast<double>(total_bars);
  } else {
    r.notes_per_bar_min = 0;
  }
  return r;
}

std::string StatsReport::to_json() const {
  nlohmann::ordered_json j;
  j["song_count"] = song_count;
  j["unique_chords"] = unique_chords;
  j["unique_chord_kinds"] = unique_chord_kinds;
  j["bars_min"] = bars_min;
  j["bars_max"] = bars_max;
  j["bars_mean"] = bars_mean ? nlohmann::ordered_json(*bars_mean) : nlohmann::ordered_json(nullptr);
  j["notes_per_bar_min"] = notes_per_bar_min;
  j["notes_per_bar_max"] = notes_per_bar_max;
  j["notes_per_bar_mean"] =
      notes_per_bar_mean ? nlohmann::ordered_json(*notes_per_bar_mean) : nlohmann::ordered_json(nullptr);
  j["augmented_count"] = augmented_count ? nlohmann::ordered_json(*augmented_count) : nlohmann::ordered_json(nullptr);
  return j.dump(2) + "\n";
}

std::string StatsReport::to_table() const {
  auto opt = [](const std::optional<double>& v) {
    if (!v) return std::string("null");
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << *v;
    return os.str();
  };
  const std::vector<std::pair<std::string, std::string>> rows = {
      {"songs", std::to_string(song_count)},
      {"augmented songs", augmented_count ? std::to_string(*augmented_count) : "null"},
      {"unique chords", std::to_string(unique_chords)},
      {"unique chord kinds", std::to_string(unique_chord_kinds)},
      {"bars min", std::to_string(bars_min)},
      {"bars max", std::to_string(bars_max)},
      {"bars mean", opt(bars_mean)},
      {"notes/bar min", std::to_string(notes_per_bar_min)},
      {"notes/bar max", std::to_string(notes_per_bar_max)},
      {"notes/bar mean", opt(notes_per_bar_mean)},
  };
  std::size_t width = 0;
  for (const auto& [k, _] : rows) width = std::max(width, k.size());
  std::ostringstream os;
  for (const auto& [k, v] : rows) os << std::left << std::setw(static_cast<int>(width) + 2) << k << v << "\n";
  return os.str();
}

}  // namespace melcond
