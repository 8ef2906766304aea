#include "melcond/eval/features.h"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "melcond/error.h"

namespace melcond {

std::string_view feature_name(Feature f) {
  switch (f) {
    case Feature::PC: return "PC";
    case Feature::PCPerBar: return "PC/bar";
    case Feature::PCH: return "PCH";
    case Feature::PCTM: return "PCTM";
    case Feature::PR: return "PR";
    case Feature::PI: return "PI";
    case Feature::IOI: return "IOI";
    case Feature::NLH: return "NLH";
    case Feature::NLTM: return "NLTM";
    case Feature::NC: return "NC";
    case Feature::NCPerBar: return "NC/bar";
  }
  return "?";
}

FeatureGroup feature_group(Feature f) {
  return static_cast<int>(f) <= static_cast<int>(Feature::PI) ? FeatureGroup::Pitch : FeatureGroup::Duration;
}

bool is_distribution(Feature f) {
  return f == Feature::PCH || f == Feature::PCTM || f == Feature::NLH || f == Feature::NLTM;
}

int feature_width(Feature f) {
  switch (f) {
    case Feature::PCH: return 12;
    case Feature::PCTM: return 144;
    case Feature::NLH: return kDurationVocab;
    case Feature::NLTM: return kDurationVocab * kDurationVocab;
    default: return 1;
  }
}

const std::array<Feature, kFeatureCount>& all_features() {
  static const std::array<Feature, kFeatureCount> list = {Feature::PC,  Feature::PCPerBar, Feature::PCH, Feature::PCTM,
                                                          Feature::PR,  Feature::PI,       Feature::IOI, Feature::NLH,
                                                          Feature::NLTM, Feature::NC,      Feature::NCPerBar};
  return list;
}

namespace {

std::vector<double> normalized(std::vector<double> v) {
  double total = 0.0;
  for (double x : v) total += x;
  for (double& x : v) x /= total;
  return v;
}

}  // namespace

SongFeatures extract_features(const TokenizedSong& song) {
  if (song.size() == 0) fail(ErrorKind::EmptySong, "cannot extract features from an empty song");
  const auto& durations = default_duration_dictionary();

  std::vector<int> midi, dur, onset;
  int clock = 0;
  for (std::size_t i = 0; i < song.size(); ++i) {
    if (song.pitch[i] != kRestToken) {
      midi.push_back(pitch_from_token(song.pitch[i]));
      dur.push_back(song.duration[i]);
      onset.push_back(clock);
    }
    clock += durations.ticks(song.duration[i]);
  }
  const int bars = std::max(1, (clock + kTicksPerBar - 1) / kTicksPerBar);
  const std::size_t n = midi.size();

  SongFeatures f;
  auto set = [&](Feature id, std::vector<double> v) { f[static_cast<std::size_t>(id)] = std::move(v); };

  set(Feature::NC, {static_cast<double>(n)});
  set(Feature::NCPerBar, {static_cast<double>(n) / bars});
  if (n == 0) return f;

  set(Feature::PC, {static_cast<double>(std::set<int>(midi.begin(), midi.end()).size())});
  std::vector<std::set<int>> per_bar(static_cast<std::size_t>(bars));
  for (std::size_t i = 0; i < n; ++i) per_bar[static_cast<std::size_t>(onset[i] / kTicksPerBar)].insert(midi[i]);
  double distinct = 0.0;
  for (const auto& b : per_bar) distinct += static_cast<double>(b.size());
  set(Feature::PCPerBar, {distinct / bars});

  std::vector<double> pch(12, 0.0), nlh(kDurationVocab, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    pch[static_cast<std::size_t>(midi[i] % 12)] += 1.0;
    nlh[static_cast<std::size_t>(dur[i])] += 1.0;
  }
  set(Feature::PCH, normalized(pch));
  set(Feature::NLH, normalized(nlh));
  const auto [lo, hi] = std::minmax_element(midi.begin(), midi.end());
  set(Feature::PR, {static_cast<double>(*hi - *lo)});
  if (n < 2) return f;

  std::vector<double> pctm(144, 0.0), nltm(static_cast<std::size_t>(kDurationVocab * kDurationVocab), 0.0);
  double interval = 0.0, ioi = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    pctm[static_cast<std::size_t>((midi[i] % 12) * 12 + midi[i + 1] % 12)] += 1.0;
    nltm[static_cast<std::size_t>(dur[i] * kDurationVocab + dur[i + 1])] += 1.0;
    interval += std::abs(midi[i + 1] - midi[i]);
    ioi += onset[i + 1] - onset[i];
  }
  const double pairs = static_cast<double>(n - 1);
  set(Feature::PCTM, normalized(pctm));
  set(Feature::NLTM, normalized(nltm));
  set(Feature::PI, {interval / pairs});
  set(Feature::IOI, {ioi / pairs});
  return f;
}

}  // namespace melcond
