#include <gtest/gtest.h>

#include "melcond/error.h"
#include "melcond/ingest.h"
#include "melcond/tokenizer.h"

using namespace melcond;

namespace {

LeadSheet sheet(std::vector<RawBar> bars) { return normalize("tok", {4, 4}, std::move(bars)); }

}  // namespace

TEST(Tokenizer, PitchTokens) {
  EXPECT_EQ(pitch_token(60), 39);
  EXPECT_EQ(pitch_token(21), 0);
  EXPECT_EQ(pitch_token(108), 87);
  EXPECT_EQ(pitch_token(kRest), kRestToken);
  EXPECT_EQ(pitch_from_token(88), kRest);
  EXPECT_THROW(pitch_token(20), Error);
  EXPECT_THROW(pitch_from_token(89), Error);
}

TEST(Tokenizer, DurationDictionary) {
  const auto& d = default_duration_dictionary();
  const std::array<int, 19> expected{192, 144, 96, 72, 64, 48, 36, 32, 24, 18, 16, 12, 9, 8, 6, 4, 3, 2, 1};
  EXPECT_EQ(d.table(), expected);
  EXPECT_EQ(d.ticks(d.token_for(24)), 24);
  EXPECT_EQ(d.token_for(24), 8);
  EXPECT_EQ(d.ticks(d.token_for(25)), 24);
  EXPECT_EQ(d.ticks(d.token_for(14)), 12);   // 12 and 16 equidistant
  EXPECT_EQ(d.ticks(d.token_for(168)), 144);  // 144 and 192 equidistant
  EXPECT_EQ(d.ticks(d.token_for(500)), 192);
  EXPECT_EQ(d.shortest_token(), 18);
  EXPECT_THROW(DurationDictionary({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19}), Error);
}

TEST(Tokenizer, WorkedExampleSequences) {
  std::vector<RawBar> bars(1);
  bars[0].notes = {{60, 0, 24}, {64, 24, 24}, {kRest, 48, 24}, {67, 72, 24}};
  bars[0].chords = {{0, "dominant", 0}, {5, "major", 48}};
  const TokenizedSong t = tokenize(sheet(bars));
  EXPECT_EQ(t.pitch, (std::vector<int>{39, 43, 88, 46}));
  EXPECT_EQ(t.duration, (std::vector<int>{8, 8, 8, 8}));
  EXPECT_EQ(t.barpos, (std::vector<int>{0, 24, 48, 72}));
  EXPECT_EQ(t.chord[0].root_token, 0);
  EXPECT_EQ(t.chord[0].pitch_classes, (1u << 0) | (1u << 4) | (1u << 7) | (1u << 10));
  EXPECT_EQ(t.chord[2].root_token, 5);  // rest carries the active chord
  EXPECT_EQ(t.chord[3].root_token, 5);
  EXPECT_EQ(t.title, "tok");
}

TEST(Tokenizer, DetokenizeOneBarAndRest) {
  TokenizedSong t;
  const ChordSymbol c{0, ChordKindDictionary::builtin().absolute(0, "major")};
  t.pitch = {39, 88, 41};
  t.duration = {5, 8, 8};  // 48 + 24 + 24 = 96
  t.barpos = {0, 48, 72};
  t.chord = {c, c, c};
  const LeadSheet s = detokenize(t);
  ASSERT_EQ(s.bars.size(), 1u);
  EXPECT_TRUE(s.bars[0].notes[1].is_rest());
  EXPECT_EQ(s.bars[0].notes[2], (NoteEvent{62, 72, 24}));

  t.pitch[0] = 89;
  EXPECT_THROW(detokenize(t), Error);
  t.pitch[0] = 39;
  t.duration[0] = 19;
  EXPECT_THROW(detokenize(t), Error);
}

TEST(Tokenizer, RoundTripSynthetic) {
  for (const auto style : {SyntheticStyle::Diatonic, SyntheticStyle::ChordLocked}) {
    for (const auto& s : generate_synthetic_corpus(21, 60, style)) {
      ASSERT_TRUE(is_dictionary_exact(s));
      const TokenizedSong t = tokenize(s);
      EXPECT_EQ(t.size(), s.note_count());
      EXPECT_EQ(detokenize(t), s);
      const auto& d = default_duration_dictionary();
      for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        EXPECT_EQ(t.barpos[i + 1], (t.barpos[i] + d.ticks(t.duration[i])) % kTicksPerBar);
      }
    }
  }
}

TEST(Tokenizer, ChordChangeOnSustainedNoteIsNotRepresentable) {
  std::vector<RawBar> bars(1);
  bars[0].notes = {{60, 0, 96}};
  bars[0].chords = {{0, "major", 0}, {7, "major", 48}};
  const LeadSheet s = sheet(bars);
  EXPECT_NE(detokenize(tokenize(s)), s);
}

TEST(Tokenizer, QuantizesOffDictionaryDurations) {
  std::vector<RawBar> bars(1);
  bars[0].notes = {{60, 0, 25}, {62, 25, 71}};
  bars[0].chords = {{0, "major", 0}};
  const LeadSheet s = sheet(bars);
  EXPECT_FALSE(is_dictionary_exact(s));
  const TokenizedSong t = tokenize(s);
  EXPECT_EQ(default_duration_dictionary().ticks(t.duration[0]), 24);
  EXPECT_EQ(t.barpos[1], 25);
}

TEST(Tokenizer, JsonRoundTrip) {
  const auto songs = generate_synthetic_corpus(4, 5, SyntheticStyle::ChordLocked);
  for (const auto& s : songs) {
    const TokenizedSong t = tokenize(s);
    EXPECT_EQ(parse_tokens(serialize_tokens(t)), t);
  }
  EXPECT_THROW(parse_tokens(R"({"title":"x","pitch":[1],"duration":[],"barpos":[0],"chord":[]})"), Error);
}
