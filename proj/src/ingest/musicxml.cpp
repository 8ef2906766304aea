#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cmath>
#include <optional>
#include <sstream>

#include "melcond/error.h"
#include "melcond/ingest.h"

namespace melcond {

namespace {

namespace pt = boost::property_tree;

// x = num / den rounded to the nearest integer; ties go up for onsets and
// down for note ends, so a tie always yields the shorter note.
long long round_half_up(long long num, long long den) {
  const long long n = 2 * num + den, d = 2 * den;
  return n >= 0 ? n / d : -((-n + d - 1) / d);
}

long long round_half_down(long long num, long long den) {
  const long long n = 2 * num - den, d = 2 * den;
  return n >= 0 ? (n + d - 1) / d : -((-n) / d);
}

int step_to_pc(const std::string& step) {
  static constexpr int kPc[] = {9, 11, 0, 2, 4, 5, 7};  // A..G
  if (step.size() != 1 || step[0] < 'A' || step[0] > 'G') fail(ErrorKind::MalformedXml, "bad step '" + step + "'");
  return kPc[step[0] - 'A'];
}

int parse_alter(const pt::ptree& node, const char* key) {
  const auto v = node.get_optional<double>(key);
  return v ? static_cast<int>(std::lround(*v)) : 0;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct PendingTie {
  std::size_t bar;
  std::size_t index;
  long long onset_global;
  int pitch;
};

}  // namespace

LeadSheet parse_musicxml(std::string_view document, const ChordKindDictionary& kinds) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(document)};
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    fail(ErrorKind::MalformedXml, e.what());
  }
  const auto score = tree.get_child_optional("score-partwise");
  if (!score) fail(ErrorKind::MalformedXml, "root element must be score-partwise");

  std::string title = trim(score->get("work.work-title", score->get("movement-title", "")));

  const pt::ptree* part = nullptr;
  int part_count = 0;
  for (const auto& [name, child] : *score) {
    if (name == "part") {
      ++part_count;
      part = &child;
    }
  }
  if (part_count == 0) fail(ErrorKind::EmptyScore, "score has no part");
  if (part_count > 1) fail(ErrorKind::UnsupportedScore, "expected a single part, found " + std::to_string(part_count));

  std::optional<TimeSignature> ts;
  long long divisions = 0;
  std::vector<RawBar> bars;
  std::optional<PendingTie> tie;
  bool any_measure = false;

  for (const auto& [mname, measure] : *part) {
    if (mname != "measure") continue;
    any_measure = true;
    const std::size_t bar_index = bars.size();
    bars.emplace_back();
    RawBar& bar = bars.back();
    const bool pickup = measure.get("<xmlattr>.implicit", "no") == "yes" && bar_index == 0;
    long long pos_num = 0;  // position in divisions

    auto to_ticks_onset = [&](long long div_pos) { return round_half_up(div_pos * kTicksPerBeat, divisions); };
    auto to_ticks_end = [&](long long div_pos) { return round_half_down(div_pos * kTicksPerBeat, divisions); };

    for (const auto& [ename, elem] : measure) {
      if (ename == "attributes") {
        if (auto d = elem.get_optional<long long>("divisions")) {
          if (*d <= 0) fail(ErrorKind::MalformedXml, "divisions must be positive");
          divisions = *d;
        }
        if (auto time = elem.get_child_optional("time")) {
          TimeSignature t{time->get<int>("beats", 0), time->get<int>("beat-type", 0)};
          if (t.numerator != 4 || t.denominator != 4) {
            fail(ErrorKind::UnsupportedTimeSignature,
                 std::to_string(t.numerator) + "/" + std::to_string(t.denominator) + " in measure " +
                     std::to_string(bar_index + 1));
          }
          ts = t;
        }
      } else if (ename == "harmony") {
        if (divisions == 0) fail(ErrorKind::MalformedXml, "harmony before divisions");
        ChordEvent c;
        c.root = ((step_to_pc(trim(elem.get<std::string>("root.root-step", ""))) + parse_alter(elem, "root.root-alter")) %
                      12 +
                  12) %
                 12;
        c.kind = trim(elem.get<std::string>("kind", ""));
        if (!kinds.contains(c.kind)) {
          fail(ErrorKind::UnknownChordKind, "'" + c.kind + "' in measure " + std::to_string(bar_index + 1));
        }
        c.onset = static_cast<int>(to_ticks_onset(pos_num));
        if (c.onset >= kTicksPerBar) c.onset = kTicksPerBar - 1;
        if (!bar.chords.empty() && bar.chords.back().onset == c.onset) {
          bar.chords.back() = c;  // two symbols on one tick: the later wins
        } else {
          bar.chords.push_back(c);
        }
      } else if (ename == "backup") {
        fail(ErrorKind::UnsupportedScore, "backup element (multiple voices) in measure " + std::to_string(bar_index + 1));
      } else if (ename == "forward") {
        pos_num += elem.get<long long>("duration", 0);
      } else if (ename == "note") {
        if (elem.get_child_optional("grace") || elem.get_child_optional("cue")) continue;
        if (elem.get_child_optional("chord")) {
          fail(ErrorKind::UnsupportedScore, "simultaneous notes in measure " + std::to_string(bar_index + 1));
        }
        if (divisions == 0) fail(ErrorKind::MalformedXml, "note before divisions");
        const long long dur = elem.get<long long>("duration", -1);
        if (dur < 0) fail(ErrorKind::MalformedXml, "note without duration in measure " + std::to_string(bar_index + 1));

        int pitch = kRest;
        if (auto p = elem.get_child_optional("pitch")) {
          const int octave = p->get<int>("octave");
          pitch = (octave + 1) * 12 + step_to_pc(trim(p->get<std::string>("step"))) + parse_alter(*p, "alter");
        } else if (!elem.get_child_optional("rest")) {
          fail(ErrorKind::MalformedXml, "note without pitch or rest");
        }

        bool tie_start = false, tie_stop = false;
        for (const auto& [tname, t] : elem) {
          if (tname != "tie") continue;
          const auto type = t.get("<xmlattr>.type", "");
          tie_start |= type == "start";
          tie_stop |= type == "stop";
        }

        const long long onset = to_ticks_onset(pos_num);
        const long long end = to_ticks_end(pos_num + dur);
        pos_num += dur;
        const long long global_onset = static_cast<long long>(bar_index) * kTicksPerBar + onset;
        const long long global_end = static_cast<long long>(bar_index) * kTicksPerBar + end;

        if (tie_stop && tie && tie->pitch == pitch && pitch != kRest) {
          auto& first = bars[tie->bar].notes[tie->index];
          first.duration = static_cast<int>(std::max(global_end, tie->onset_global + 1) - tie->onset_global);
          if (!tie_start) tie.reset();
          continue;
        }
        tie.reset();
        if (end <= onset) continue;  // shorter than one tick after quantization
        bar.notes.push_back({pitch, static_cast<int>(onset), static_cast<int>(end - onset)});
        if (tie_start && pitch != kRest) tie = PendingTie{bar_index, bar.notes.size() - 1, global_onset, pitch};
      }
    }

    if (pickup) {
      const int length = static_cast<int>(to_ticks_end(pos_num));
      const int shift = kTicksPerBar - length;
      if (shift > 0 && length > 0) {
        for (auto& n : bar.notes) n.onset += shift;
        for (auto& c : bar.chords) c.onset = c.onset == 0 ? 0 : c.onset + shift;
        if (tie && tie->bar == 0) tie->onset_global += shift;
      }
    }
    for (const auto& n : bar.notes) {
      if (n.onset >= kTicksPerBar) {
        fail(ErrorKind::UnsupportedScore, "measure " + std::to_string(bar_index + 1) + " is longer than a 4/4 bar");
      }
    }
  }

  if (!any_measure) fail(ErrorKind::EmptyScore, "part has no measures");
  if (!ts) fail(ErrorKind::UnsupportedTimeSignature, "no time signature");
  std::size_t total_notes = 0;
  for (const auto& b : bars) total_notes += b.notes.size();
  if (total_notes == 0) fail(ErrorKind::EmptyScore, "no notes");
  return normalize(std::move(title), *ts, std::move(bars), kinds);
}

}  // namespace melcond
