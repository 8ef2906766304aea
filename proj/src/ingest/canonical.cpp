#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "melcond/error.h"
#include "melcond/ingest.h"

namespace melcond {

namespace {

using nlohmann::json;

[[noreturn]] void schema(const std::string& path, const std::string& what) {
  fail(ErrorKind::SchemaViolation, path + ": " + what);
}

int get_int(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) schema(path + "." + key, "missing");
  const json& v = obj.at(key);
  if (!v.is_number_integer()) schema(path + "." + key, "expected integer");
  return v.get<int>();
}

TimeSignature parse_time_signature(const json& v) {
  if (!v.is_string()) schema("time_signature", "expected string \"N/D\"");
  const auto s = v.get<std::string>();
  const auto slash = s.find('/');
  TimeSignature ts{};
  try {
    if (slash == std::string::npos) throw std::invalid_argument(s);
    std::size_t used = 0;
    ts.numerator = std::stoi(s.substr(0, slash), &used);
    if (used != slash) throw std::invalid_argument(s);
    const auto rest = s.substr(slash + 1);
    ts.denominator = std::stoi(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(s);
  } catch (const std::exception&) {
    schema("time_signature", "expected \"N/D\", got \"" + s + "\"");
  }
  return ts;
}

}  // namespace

LeadSheet parse_canonical(std::string_view document, const ChordKindDictionary& kinds) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    schema("$", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) schema("$", "expected object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "title" && key != "time_signature" && key != "bars") schema(key, "unknown field");
  }
  if (!doc.contains("title") || !doc["title"].is_string()) schema("title", "expected string");
  if (!doc.contains("time_signature")) schema("time_signature", "missing");
  const TimeSignature ts = parse_time_signature(doc["time_signature"]);
  if (!doc.contains("bars") || !doc["bars"].is_array()) schema("bars", "expected array");

  std::vector<RawBar> bars;
  const auto& jbars = doc["bars"];
  bars.reserve(jbars.size());
  for (std::size_t b = 0; b < jbars.size(); ++b) {
    const std::string bpath = "bars[" + std::to_string(b) + "]";
    const json& jb = jbars[b];
    if (!jb.is_object()) schema(bpath, "expected object");
    for (const auto& [key, _] : jb.items()) {
      if (key != "notes" && key != "chords") schema(bpath + "." + key, "unknown field");
    }
    RawBar bar;
    if (jb.contains("notes")) {
      const json& jn = jb["notes"];
      if (!jn.is_array()) schema(bpath + ".notes", "expected array");
      for (std::size_t i = 0; i < jn.size(); ++i) {
        const std::string npath = bpath + ".notes[" + std::to_string(i) + "]";
        const json& n = jn[i];
        if (!n.is_object()) schema(npath, "expected object");
        NoteEvent e;
        if (!n.contains("pitch")) schema(npath + ".pitch", "missing");
        const json& p = n["pitch"];
        if (p.is_string() && p.get<std::string>() == "rest") {
          e.pitch = kRest;
        } else if (p.is_number_integer()) {
          e.pitch = p.get<int>();
          if (e.pitch < kLowestPitch || e.pitch > kHighestPitch) schema(npath + ".pitch", "outside [21,108]");
        } else {
          schema(npath + ".pitch", "expected integer or \"rest\"");
        }
        e.onset = get_int(n, "onset", npath);
        e.duration = get_int(n, "duration", npath);
        bar.notes.push_back(e);
      }
    }
    if (jb.contains("chords")) {
      const json& jc = jb["chords"];
      if (!jc.is_array()) schema(bpath + ".chords", "expected array");
      for (std::size_t i = 0; i < jc.size(); ++i) {
        const std::string cpath = bpath + ".chords[" + std::to_string(i) + "]";
        const json& c = jc[i];
        if (!c.is_object()) schema(cpath, "expected object");
        ChordEvent e;
        e.root = get_int(c, "root", cpath);
        if (!c.contains("kind") || !c["kind"].is_string()) schema(cpath + ".kind", "expected string");
        e.kind = c["kind"].get<std::string>();
        e.onset = get_int(c, "onset", cpath);
        bar.chords.push_back(std::move(e));
      }
    }
    bars.push_back(std::move(bar));
  }
  return normalize(doc["title"].get<std::string>(), ts, std::move(bars), kinds);
}

std::string serialize_canonical(const LeadSheet& sheet) {
  nlohmann::ordered_json doc;
  doc["title"] = sheet.title;
  doc["time_signature"] =
      std::to_string(sheet.time_signature.numerator) + "/" + std::to_string(sheet.time_signature.denominator);
  auto bars = nlohmann::ordered_json::array();
  for (const auto& bar : sheet.bars) {
    nlohmann::ordered_json jb;
    auto chords = nlohmann::ordered_json::array();
    for (const auto& c : bar.chords) {
      nlohmann::ordered_json jc;
      jc["root"] = c.root;
      jc["kind"] = c.kind;
      jc["onset"] = c.onset;
      chords.push_back(std::move(jc));
    }
    auto notes = nlohmann::ordered_json::array();
    for (const auto& n : bar.notes) {
      nlohmann::ordered_json jn;
      if (n.is_rest()) {
        jn["pitch"] = "rest";
      } else {
        jn["pitch"] = n.pitch;
      }
      jn["onset"] = n.onset;
      jn["duration"] = n.duration;
      notes.push_back(std::move(jn));
    }
    jb["chords"] = std::move(chords);
    jb["notes"] = std::move(notes);
    bars.push_back(std::move(jb));
  }
  doc["bars"] = std::move(bars);
  return doc.dump(1) + "\n";
}

LeadSheet load_song(const std::string& path, const ChordKindDictionary& kinds) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with(".json")) return parse_canonical(text, kinds);
  if (ends_with(".xml") || ends_with(".musicxml")) return parse_musicxml(text, kinds);
  fail(ErrorKind::InvalidArgument, "unrecognized song file extension: " + path);
}

}  // namespace melcond
