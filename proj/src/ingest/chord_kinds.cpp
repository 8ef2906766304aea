#include "melcond/chord_kinds.h"

#include <bit>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "melcond/error.h"

namespace melcond {

PitchClassSet rotate_pcs(PitchClassSet set, int semitones) {
  const int s = ((semitones % 12) + 12) % 12;
  const unsigned v = set & 0xFFFu;
  return static_cast<PitchClassSet>(((v << s) | (v >> (12 - s))) & 0xFFFu);
}

int pcs_size(PitchClassSet set) { return std::popcount(static_cast<unsigned>(set & 0xFFFu)); }

namespace {

PitchClassSet make_set(std::initializer_list<int> intervals) {
  PitchClassSet s = 0;
  for (int i : intervals) s |= static_cast<PitchClassSet>(1u << i);
  return s;
}

}  // namespace

const ChordKindDictionary& ChordKindDictionary::builtin() {
  static const ChordKindDictionary dict = [] {
    ChordKindDictionary d;
    d.add("major", make_set({0, 4, 7}));
    d.add("minor", make_set({0, 3, 7}));
    d.add("dominant", make_set({0, 4, 7, 10}));
    d.add("major-seventh", make_set({0, 4, 7, 11}));
    d.add("minor-seventh", make_set({0, 3, 7, 10}));
    d.add("half-diminished", make_set({0, 3, 6, 10}));
    d.add("diminished", make_set({0, 3, 6}));
    d.add("diminished-seventh", make_set({0, 3, 6, 9}));
    d.add("augmented", make_set({0, 4, 8}));
    d.add("suspended-second", make_set({0, 2, 7}));
    d.add("suspended-fourth", make_set({0, 5, 7}));
    d.add("major-sixth", make_set({0, 4, 7, 9}));
    d.add("minor-sixth", make_set({0, 3, 7, 9}));
    d.add("dominant-ninth", make_set({0, 2, 4, 7, 10}));
    d.add("major-ninth", make_set({0, 2, 4, 7, 11}));
    d.add("minor-ninth", make_set({0, 2, 3, 7, 10}));
    d.add("dominant-13th", make_set({0, 2, 4, 7, 9, 10}));
    d.add("minor-major-seventh", make_set({0, 3, 7, 11}));
    d.add("augmented-seventh", make_set({0, 4, 8, 10}));
    d.add("power", make_set({0, 7}));
    return d;
  }();
  return dict;
}

ChordKindDictionary ChordKindDictionary::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::SchemaViolation, std::string("chord-kind table: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("kinds") || !doc["kinds"].is_object()) {
    fail(ErrorKind::SchemaViolation, "kinds: expected object");
  }
  ChordKindDictionary d;
  for (const auto& [name, arr] : doc["kinds"].items()) {
    if (!arr.is_array() || arr.empty()) {
      fail(ErrorKind::SchemaViolation, "kinds." + name + ": expected non-empty array");
    }
    PitchClassSet s = 0;
    for (const auto& v : arr) {
      if (!v.is_number_integer() || v.get<int>() < 0 || v.get<int>() > 11) {
        fail(ErrorKind::SchemaViolation, "kinds." + name + ": intervals must be integers in [0,11]");
      }
      s |= static_cast<PitchClassSet>(1u << v.get<int>());
    }
    if (!(s & 1u)) fail(ErrorKind::SchemaViolation, "kinds." + name + ": interval set must contain the root (0)");
    d.add(name, s);
  }
  return d;
}

ChordKindDictionary ChordKindDictionary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void ChordKindDictionary::add(const std::string& kind, PitchClassSet intervals) {
  if (auto it = by_intervals_.find(intervals); it != by_intervals_.end() && it->second != kind) {
    fail(ErrorKind::SchemaViolation,
         "chord kinds '" + it->second + "' and '" + kind + "' share an interval set");
  }
  if (auto it = kinds_.find(kind); it != kinds_.end()) by_intervals_.erase(it->second);
  kinds_[kind] = intervals;
  by_intervals_[intervals] = kind;
}

bool ChordKindDictionary::contains(std::string_view kind) const { return kinds_.find(kind) != kinds_.end(); }

PitchClassSet ChordKindDictionary::intervals(std::string_view kind) const {
  auto it = kinds_.find(kind);
  if (it == kinds_.end()) fail(ErrorKind::UnknownChordKind, std::string(kind));
  return it->second;
}

PitchClassSet ChordKindDictionary::absolute(int root, std::string_view kind) const {
  return rotate_pcs(intervals(kind), root);
}

std::optional<std::string> ChordKindDictionary::kind_for(int root, PitchClassSet absolute_set) const {
  auto it = by_intervals_.find(rotate_pcs(absolute_set, -root));
  if (it == by_intervals_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> ChordKindDictionary::kinds() const {
  std::vector<std::string> out;
  out.reserve(kinds_.size());
  for (const auto& [k, _] : kinds_) out.push_back(k);
  return out;
}

}  // namespace melcond
