#include <gtest/gtest.h>

#include <cmath>

#include "melcond/error.h"
#include "melcond/generate/generator.h"
#include "melcond/ingest.h"

using namespace melcond;

namespace {

nn::Checkpoint fresh(Target target, const std::string& abbrev, std::uint64_t seed) {
  NetworkSpec s;
  s.target = target;
  s.config = *parse_abbreviation(abbrev);
  s.hidden = 16;
  ConditionedNetwork net(s, seed);
  return make_checkpoint(net, nn::OptimizerState{}, 1, nlohmann::ordered_json::object());
}

MelodyGenerator pair(const std::string& abbrev) {
  return MelodyGenerator(fresh(Target::Pitch, abbrev, 1), fresh(Target::Duration, abbrev, 2));
}

LeadSheet source(std::uint64_t seed) { return generate_synthetic_corpus(seed, 1, SyntheticStyle::ChordLocked)[0]; }

}  // namespace

TEST(Sampling, ArgmaxAndFrequencies) {
  const std::vector<float> lp{std::log(0.2f), std::log(0.5f), std::log(0.3f)};
  Rng rng(3);
  EXPECT_EQ(sample_token(lp.data(), 3, 0.0, rng), 1);
  EXPECT_EQ(sample_token(lp.data(), 3, 1e-4, rng), 1);
  std::array<int, 3> hits{};
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++hits[static_cast<std::size_t>(sample_token(lp.data(), 3, 1.0, rng))];
  EXPECT_NEAR(hits[0] / double(n), 0.2, 0.01);
  EXPECT_NEAR(hits[1] / double(n), 0.5, 0.01);
  EXPECT_NEAR(hits[2] / double(n), 0.3, 0.01);

  // T = 2 flattens: p_i proportional to sqrt(q_i)
  hits = {};
  for (int i = 0; i < n; ++i) ++hits[static_cast<std::size_t>(sample_token(lp.data(), 3, 2.0, rng))];
  const double z = std::sqrt(0.2) + std::sqrt(0.5) + std::sqrt(0.3);
  EXPECT_NEAR(hits[0] / double(n), std::sqrt(0.2) / z, 0.01);
}

TEST(Generator, DeterministicAndSeedPrefix) {
  MelodyGenerator gen = pair("CNIB");
  const LeadSheet src = source(4);
  const GenerationSettings settings;
  const GeneratedMelody a = gen.generate(src, settings, 9);
  const GeneratedMelody b = gen.generate(src, settings, 9);
  const GeneratedMelody c = gen.generate(src, settings, 10);
  EXPECT_EQ(a.song, b.song);
  EXPECT_NE(a.song, c.song);
  const TokenizedSong tok = tokenize(src);
  for (std::size_t t = 0; t < 10; ++t) {
    EXPECT_EQ(a.song.pitch[t], tok.pitch[t]);
    EXPECT_EQ(a.song.duration[t], tok.duration[t]);
  }
  EXPECT_EQ(a.seed_len, 10u);
  EXPECT_EQ(a.provenance["rng_seed"].get<std::uint64_t>(), 9u);
  EXPECT_EQ(a.provenance["fingerprint"].get<std::string>(), "P|D:CNIB");
}

TEST(Generator, GreedyIgnoresRng) {
  MelodyGenerator gen = pair("CI");
  GenerationSettings settings;
  settings.temperature = 0.0;
  const LeadSheet src = source(5);
  EXPECT_EQ(gen.generate(src, settings, 1).song, gen.generate(src, settings, 2).song);
}

TEST(Generator, ClockBarposAndChords) {
  MelodyGenerator gen = pair("CNIB");
  const auto& durations = default_duration_dictionary();
  for (std::uint64_t s = 0; s < 5; ++s) {
    const LeadSheet src = source(20 + s);
    std::size_t checked = 0;
    const auto observer = [&](std::size_t, const StepInputs& fed, int clock) {
      ++checked;
      EXPECT_EQ(fed.barpos[0], clock % kTicksPerBar);
      const ChordEvent& c = chord_at(src, clock);
      EXPECT_EQ(fed.chord[0].root_token, c.root);
      EXPECT_EQ(fed.chord[0].pitch_classes, ChordKindDictionary::builtin().absolute(c.root, c.kind));
      const ChordEvent& n = chord_at(src, clock + durations.ticks(fed.duration[0]));
      EXPECT_EQ(fed.next_chord[0].root_token, n.root);
    };
    const GeneratedMelody m = gen.generate(src, {}, s, observer);
    EXPECT_EQ(checked, m.song.size() - 1);
    int clock = 0;
    for (std::size_t t = 0; t < m.song.size(); ++t) {
      EXPECT_EQ(m.song.barpos[t], clock % kTicksPerBar);
      clock += durations.ticks(m.song.duration[t]);
    }
    EXPECT_LE(clock, src.total_ticks() + durations.ticks(0));
    EXPECT_GE(clock, src.total_ticks());
    for (int p : m.song.pitch) EXPECT_TRUE(p >= 0 && p < kPitchVocab);
  }
}

TEST(Generator, MaxNotesCap) {
  MelodyGenerator gen = pair("No-Cond");
  GenerationSettings settings;
  settings.max_notes = 12;
  EXPECT_EQ(gen.generate(source(6), settings, 0).song.size(), 12u);
}

TEST(Generator, Errors) {
  EXPECT_THROW(MelodyGenerator(fresh(Target::Pitch, "CNIB", 1), fresh(Target::Duration, "C", 2)), Error);
  try {
    MelodyGenerator(fresh(Target::Pitch, "C", 1), fresh(Target::Pitch, "C", 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FingerprintMismatch);
  }
  MelodyGenerator gen = pair("C");
  GenerationSettings settings;
  settings.seed_len = 10000;
  settings.max_notes = 20000;
  try {
    gen.generate(source(7), settings, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SeedTooShort);
  }
  settings.seed_len = 0;
  EXPECT_THROW(gen.generate(source(7), settings, 0), Error);
}

TEST(Generator, EvalSetSkipsFailures) {
  MelodyGenerator gen = pair("CB");
  auto sources = generate_synthetic_corpus(30, 5, SyntheticStyle::ChordLocked);
  LeadSheet tiny = sources[0];
  tiny.bars.resize(1);
  tiny.bars[0].notes.resize(3);
  sources.insert(sources.begin() + 2, tiny);
  const EvalSet set = generate_eval_set(gen, sources, {}, 77);
  EXPECT_EQ(set.melodies.size(), 5u);
  ASSERT_EQ(set.failures.size(), 1u);
  EXPECT_EQ(set.failures[0].index, 2u);
  EXPECT_EQ(set.source_index, (std::vector<std::size_t>{0, 1, 3, 4, 5}));
  for (std::size_t k = 0; k < set.melodies.size(); ++k) {
    EXPECT_EQ(set.melodies[k].provenance["rng_seed"].get<std::uint64_t>(), derive_seed(77, set.source_index[k]));
    EXPECT_EQ(set.melodies[k].provenance["source_index"].get<std::size_t>(), set.source_index[k]);
  }
  EXPECT_EQ(generate_eval_set(gen, sources, {}, 77).melodies[3].song, set.melodies[3].song);
}
