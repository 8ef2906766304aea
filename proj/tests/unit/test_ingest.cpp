#include <gtest/gtest.h>

#include <set>

#include "melcond/error.h"
#include "melcond/ingest.h"

using namespace melcond;

namespace {

std::string score(const std::string& attributes, const std::string& measures) {
  return R"(<?xml version="1.0"?>
<score-partwise version="3.1">
  <work><work-title>t</work-title></work>
  <part-list><score-part id="P1"><part-name>M</part-name></score-part></part-list>
  <part id="P1">
    <measure number="1">
      <attributes>)" +
         attributes + R"(</attributes>)" + measures + R"(
  </part>
</score-partwise>)";
}

const std::string kFourFour = "<divisions>1</divisions><time><beats>4</beats><beat-type>4</beat-type></time>";

std::string harmony(const std::string& step, const std::string& kind) {
  return "<harmony><root><root-step>" + step + "</root-step></root><kind>" + kind + "</kind></harmony>";
}

std::string note(const std::string& step, int octave, int duration, const std::string& extra = "") {
  return "<note><pitch><step>" + step + "</step><octave>" + std::to_string(octave) + "</octave></pitch><duration>" +
         std::to_string(duration) + "</duration>" + extra + "</note>";
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::Io;
}

LeadSheet one_bar(std::vector<NoteEvent> notes, std::vector<ChordEvent> chords) {
  return normalize("s", {4, 4}, {RawBar{std::move(notes), std::move(chords)}});
}

}  // namespace

TEST(MusicXml, QuarterNoteOverCMajor) {
  const auto doc = score(kFourFour, harmony("C", "major") + note("C", 4, 1) + "<note><rest/><duration>3</duration></note></measure>");
  const LeadSheet s = parse_musicxml(doc);
  ASSERT_EQ(s.bars.size(), 1u);
  ASSERT_EQ(s.bars[0].chords.size(), 1u);
  EXPECT_EQ(s.bars[0].chords[0], (ChordEvent{0, "major", 0}));
  ASSERT_EQ(s.bars[0].notes.size(), 2u);
  EXPECT_EQ(s.bars[0].notes[0], (NoteEvent{60, 0, 24}));
  EXPECT_TRUE(s.bars[0].notes[1].is_rest());
}

TEST(MusicXml, TrailingGapBecomesRest) {
  const LeadSheet s = parse_musicxml(score(kFourFour, harmony("C", "major") + note("C", 4, 1) + "</measure>"));
  ASSERT_EQ(s.bars[0].notes.size(), 2u);
  EXPECT_EQ(s.bars[0].notes[1], (NoteEvent{kRest, 24, 72}));
}

TEST(MusicXml, DivisionsRescaleToTicks) {
  const std::string attrs = "<divisions>8</divisions><time><beats>4</beats><beat-type>4</beat-type></time>";
  const LeadSheet s = parse_musicxml(score(attrs, harmony("C", "major") + note("E", 4, 4) + note("G", 4, 28) + "</measure>"));
  EXPECT_EQ(s.bars[0].notes[0].duration, 12);
  EXPECT_EQ(s.bars[0].notes[1].onset, 12);
  EXPECT_EQ(s.bars[0].notes[1].duration, 84);
}

TEST(MusicXml, RejectsThreeFour) {
  const std::string attrs = "<divisions>1</divisions><time><beats>3</beats><beat-type>4</beat-type></time>";
  EXPECT_EQ(kind_of([&] { parse_musicxml(score(attrs, harmony("C", "major") + note("C", 4, 3) + "</measure>")); }),
            ErrorKind::UnsupportedTimeSignature);
}

TEST(MusicXml, RejectsUnknownKindMalformedAndEmpty) {
  EXPECT_EQ(kind_of([&] { parse_musicxml(score(kFourFour, harmony("C", "bogus") + note("C", 4, 4) + "</measure>")); }),
            ErrorKind::UnknownChordKind);
  EXPECT_EQ(kind_of([] { parse_musicxml("<score-partwise><part"); }), ErrorKind::MalformedXml);
  EXPECT_EQ(kind_of([&] { parse_musicxml(score(kFourFour, harmony("C", "major") + "</measure>")); }), ErrorKind::EmptyScore);
}

TEST(MusicXml, RejectsChordedNotes) {
  const auto doc = score(kFourFour, harmony("C", "major") + note("C", 4, 4) + note("E", 4, 4, "<chord/>") + "</measure>");
  EXPECT_EQ(kind_of([&] { parse_musicxml(doc); }), ErrorKind::UnsupportedScore);
}

TEST(MusicXml, TieAcrossBarMergesIntoOnsetBar) {
  const auto doc = score(kFourFour, harmony("F", "major-seventh") + note("C", 4, 2) +
                                        note("F", 4, 2, "<tie type=\"start\"/>") + "</measure><measure number=\"2\">" +
                                        note("F", 4, 1, "<tie type=\"stop\"/>") + note("A", 4, 3) + "</measure>");
  const LeadSheet s = parse_musicxml(doc);
  ASSERT_EQ(s.bars.size(), 2u);
  ASSERT_EQ(s.bars[0].notes.size(), 2u);
  EXPECT_EQ(s.bars[0].notes[1], (NoteEvent{65, 48, 72}));
  ASSERT_EQ(s.bars[1].notes.size(), 1u);
  EXPECT_EQ(s.bars[1].notes[0], (NoteEvent{69, 24, 72}));
  ASSERT_EQ(s.bars[1].chords.size(), 1u);
  EXPECT_EQ(s.bars[1].chords[0], (ChordEvent{5, "major-seventh", 0}));
}

TEST(MusicXml, AlterAndSecondChord) {
  const auto doc =
      score(kFourFour, harmony("C", "major") + note("C", 4, 2) +
                           "<harmony><root><root-step>B</root-step><root-alter>-1</root-alter></root><kind>dominant</kind></harmony>" +
                           "<note><pitch><step>B</step><alter>-1</alter><octave>3</octave></pitch><duration>2</duration></note></measure>");
  const LeadSheet s = parse_musicxml(doc);
  EXPECT_EQ(s.bars[0].notes[1].pitch, 58);
  ASSERT_EQ(s.bars[0].chords.size(), 2u);
  EXPECT_EQ(s.bars[0].chords[1], (ChordEvent{10, "dominant", 48}));
}

TEST(Canonical, MinimalDocument) {
  const std::string doc = R"({"title": "x", "time_signature": "4/4", "bars": [
      {"chords": [{"root": 0, "kind": "major", "onset": 0}],
       "notes": [{"pitch": 60, "onset": 0, "duration": 96}]}]})";
  const LeadSheet s = parse_canonical(doc);
  ASSERT_EQ(s.bars.size(), 1u);
  EXPECT_EQ(s.bars[0].notes[0], (NoteEvent{60, 0, 96}));
}

TEST(Canonical, MissingHarmony) {
  const std::string doc = R"({"title": "x", "time_signature": "4/4", "bars": [
      {"notes": [{"pitch": 60, "onset": 0, "duration": 96}]}]})";
  EXPECT_EQ(kind_of([&] { parse_canonical(doc); }), ErrorKind::MissingHarmony);
}

TEST(Canonical, SchemaViolationNamesField) {
  const std::string doc = R"({"title": "x", "time_signature": "4/4", "bars": [
      {"chords": [{"root": 0, "kind": "major", "onset": 0}],
       "notes": [{"pitch": "C4", "onset": 0, "duration": 96}]}]})";
  try {
    parse_canonical(doc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SchemaViolation);
    EXPECT_NE(std::string(e.what()).find("bars[0].notes[0].pitch"), std::string::npos);
  }
  EXPECT_EQ(kind_of([] { parse_canonical(R"({"title": "x", "time_signature": "4/4", "bars": [], "extra": 1})"); }),
            ErrorKind::SchemaViolation);
}

TEST(Canonical, RoundTripIsFixedPoint) {
  const auto songs = generate_synthetic_corpus(3, 20, SyntheticStyle::ChordLocked);
  for (const auto& s : songs) {
    const std::string text = serialize_canonical(s);
    const LeadSheet back = parse_canonical(text);
    EXPECT_EQ(back, s);
    EXPECT_EQ(serialize_canonical(back), text);
  }
}

TEST(Canonical, MusicXmlAndCanonicalAgree) {
  const auto doc = score(kFourFour, harmony("C", "major") + note("C", 4, 1) + note("D", 4, 3) + "</measure>");
  const LeadSheet a = parse_musicxml(doc);
  const LeadSheet b = parse_canonical(serialize_canonical(a));
  EXPECT_EQ(a, b);
}

TEST(Normalize, ChordFillAndRests) {
  std::vector<RawBar> bars(2);
  bars[0].notes = {{60, 24, 24}};
  bars[0].chords = {{2, "minor-seventh", 0}};
  bars[1].notes = {{62, 0, 48}};
  const LeadSheet s = normalize("n", {4, 4}, bars);
  ASSERT_EQ(s.bars[0].notes.size(), 3u);
  EXPECT_EQ(s.bars[0].notes[0], (NoteEvent{kRest, 0, 24}));
  EXPECT_EQ(s.bars[0].notes[2], (NoteEvent{kRest, 48, 48}));
  ASSERT_EQ(s.bars[1].chords.size(), 1u);
  EXPECT_EQ(s.bars[1].chords[0], (ChordEvent{2, "minor-seventh", 0}));
  EXPECT_EQ(s.bars[1].notes.back(), (NoteEvent{kRest, 48, 48}));
}

TEST(Normalize, OverlapRejected) {
  EXPECT_EQ(kind_of([] { one_bar({{60, 0, 48}, {62, 24, 24}}, {{0, "major", 0}}); }), ErrorKind::UnsupportedScore);
}

TEST(Normalize, ChordAt) {
  std::vector<RawBar> bars(2);
  bars[0].notes = {{60, 0, 96}};
  bars[0].chords = {{0, "major", 0}, {7, "dominant", 48}};
  bars[1].notes = {{60, 0, 96}};
  const LeadSheet s = normalize("n", {4, 4}, bars);
  EXPECT_EQ(chord_at(s, 0).root, 0);
  EXPECT_EQ(chord_at(s, 47).root, 0);
  EXPECT_EQ(chord_at(s, 48).root, 7);
  EXPECT_EQ(chord_at(s, 100).root, 7);
  EXPECT_EQ(chord_at(s, 10000).root, 7);
}

TEST(Transpose, UpFiveIsFOverFmaj7) {
  const LeadSheet s = one_bar({{60, 0, 96}}, {{0, "major-seventh", 0}});
  const auto t = transpose(s, 5);
  ASSERT_TRUE(t);
  EXPECT_EQ(t->bars[0].notes[0].pitch, 65);
  EXPECT_EQ(t->bars[0].chords[0], (ChordEvent{5, "major-seventh", 0}));
}

TEST(Transpose, IdentityInverseAndRange) {
  const LeadSheet s = one_bar({{21, 0, 48}, {kRest, 48, 24}, {70, 72, 24}}, {{9, "minor", 0}});
  EXPECT_EQ(*transpose(s, 0), s);
  EXPECT_FALSE(transpose(s, -1));
  const auto up = transpose(s, 4);
  ASSERT_TRUE(up);
  EXPECT_EQ(*transpose(*up, -4), s);
  EXPECT_TRUE(up->bars[0].notes[1].is_rest());
  EXPECT_EQ(up->bars[0].chords[0].root, 1);
  EXPECT_EQ(kind_of([&] { transpose(s, 6); }), ErrorKind::InvalidArgument);
}

TEST(Augment, CountsAndOrder) {
  const LeadSheet mid = one_bar({{60, 0, 96}}, {{0, "major", 0}});
  const auto twelve = augment_corpus_tagged({mid});
  ASSERT_EQ(twelve.size(), 12u);
  for (std::size_t i = 0; i < twelve.size(); ++i) EXPECT_EQ(twelve[i].shift, static_cast<int>(i) - 6);
  EXPECT_EQ(twelve[6].sheet, mid);

  const LeadSheet full = one_bar({{21, 0, 48}, {108, 48, 48}}, {{0, "major", 0}});
  EXPECT_EQ(augment_corpus({full}).size(), 1u);
}

TEST(Stats, EmptyAndSimple) {
  const StatsReport empty = corpus_stats({});
  EXPECT_EQ(empty.song_count, 0u);
  EXPECT_FALSE(empty.bars_mean);
  EXPECT_NE(empty.to_json().find("null"), std::string::npos);

  std::vector<RawBar> bars(2);
  bars[0].notes = {{60, 0, 24}, {62, 24, 24}, {64, 48, 48}};
  bars[0].chords = {{0, "major", 0}};
  bars[1].notes = {{60, 0, 12}, {62, 12, 12}, {64, 24, 24}, {65, 48, 24}, {67, 72, 24}};
  const StatsReport r = corpus_stats({normalize("s", {4, 4}, bars)});
  EXPECT_EQ(r.song_count, 1u);
  EXPECT_DOUBLE_EQ(*r.notes_per_bar_mean, 4.0);
  EXPECT_EQ(r.notes_per_bar_min, 3u);
  EXPECT_EQ(r.notes_per_bar_max, 5u);
  EXPECT_EQ(r.unique_chords, 1u);
  EXPECT_FALSE(r.to_table().empty());
}

TEST(Synthetic, DeterministicAndValid) {
  const auto a = generate_synthetic_corpus(11, 30, SyntheticStyle::ChordLocked);
  const auto b = generate_synthetic_corpus(11, 30, SyntheticStyle::ChordLocked);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, generate_synthetic_corpus(12, 30, SyntheticStyle::ChordLocked));
  for (const auto& s : a) {
    EXPECT_GE(s.bars.size(), 8u);
    EXPECT_LE(s.bars.size(), 16u);
    EXPECT_EQ(normalize(s), s);
    EXPECT_EQ(augment_corpus({s}).size(), 12u);
  }
  EXPECT_EQ(kind_of([] { generate_synthetic_corpus(1, 0, SyntheticStyle::Diatonic); }), ErrorKind::InvalidArgument);
}

TEST(Synthetic, ChordLockedPitchClasses) {
  const auto songs = generate_synthetic_corpus(5, 100, SyntheticStyle::ChordLocked);
  const auto& kinds = ChordKindDictionary::builtin();
  std::size_t in_chord = 0, total = 0;
  for (const auto& s : songs) {
    for (std::size_t b = 0; b < s.bars.size(); ++b) {
      for (const auto& n : s.bars[b].notes) {
        if (n.is_rest()) continue;
        const auto& c = chord_at(s, static_cast<int>(b) * kTicksPerBar + n.onset);
        ++total;
        if ((kinds.absolute(c.root, c.kind) >> (n.pitch % 12)) & 1u) ++in_chord;
      }
    }
  }
  ASSERT_GT(total, 1000u);
  EXPECT_GE(static_cast<double>(in_chord) / static_cast<double>(total), 0.85);
}

TEST(ChordKinds, BuiltinTable) {
  const auto& k = ChordKindDictionary::builtin();
  EXPECT_EQ(k.size(), 20u);
  EXPECT_EQ(k.absolute(0, "dominant"), (1u << 0) | (1u << 4) | (1u << 7) | (1u << 10));
  EXPECT_EQ(*k.kind_for(9, k.absolute(9, "minor-seventh")), "minor-seventh");
  EXPECT_EQ(*k.kind_for(0, k.absolute(9, "minor-seventh")), "major-sixth");
  std::set<PitchClassSet> distinct;
  for (const auto& name : k.kinds()) distinct.insert(k.intervals(name));
  EXPECT_EQ(distinct.size(), 20u);
  const auto loaded = ChordKindDictionary::load(std::string(MELCOND_DATA_DIR) + "/chord_kinds.json");
  EXPECT_EQ(loaded.kinds(), k.kinds());
}
