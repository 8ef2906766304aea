#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "melcond/error.h"
#include "melcond/ingest.h"
#include "melcond/model/network.h"

using namespace melcond;
using nn::Tensor;

namespace {

NetworkSpec tiny(Target target, const std::string& abbrev, int hidden = 16) {
  NetworkSpec s;
  s.target = target;
  s.config = *parse_abbreviation(abbrev);
  s.hidden = hidden;
  return s;
}

TokenizedSong random_song(std::uint64_t seed) {
  return tokenize(generate_synthetic_corpus(seed, 1, SyntheticStyle::ChordLocked)[0]);
}

}  // namespace

TEST(Conditioning, ThirteenConfigurations) {
  const auto names = valid_abbreviations();
  EXPECT_EQ(names, (std::vector<std::string>{"No-Cond", "I", "C", "N", "B", "CI", "CN", "CB", "IB", "CNI", "CNB", "CIB",
                                             "CNIB"}));
  int valid = 0;
  for (int m = 0; m < 16; ++m) {
    const ConditioningConfig c{(m & 1) != 0, (m & 2) != 0, (m & 4) != 0, (m & 8) != 0};
    if (is_valid(c)) ++valid;
    if (c.next_chord && !c.chord && (c.inter || c.barpos)) EXPECT_FALSE(is_valid(c));
  }
  EXPECT_EQ(valid, 13);
  EXPECT_FALSE(parse_abbreviation("NI"));
  EXPECT_EQ(fingerprint(*parse_abbreviation("CNIB")), "P|D:CNIB");
}

TEST(Spec, InformationWidths) {
  EXPECT_EQ(tiny(Target::Pitch, "No-Cond").info_width(), 8);
  EXPECT_EQ(tiny(Target::Pitch, "CNIB").info_width(), 36);
  EXPECT_EQ(tiny(Target::Duration, "I").info_width(), 12);
  EXPECT_EQ(tiny(Target::Duration, "No-Cond").info_width(), 4);
  EXPECT_EQ(paired_hidden_width(256, 89), 173);
  EXPECT_EQ(paired_hidden_width(256, 19), 138);
  EXPECT_EQ(paired_hidden_width(12, 4), 8);
  EXPECT_EQ(paired_hidden_width(6, 8), 7);

  const NetworkSpec s = tiny(Target::Duration, "CIB", 32);
  const NetworkSpec back = NetworkSpec::from_json(s.to_json());
  EXPECT_EQ(back.to_json(), s.to_json());
}

TEST(Network, OutputShapesAndNormalization) {
  for (const auto target : {Target::Pitch, Target::Duration}) {
    ConditionedNetwork net(tiny(target, "CNIB"), 3);
    const TokenizedSong song = random_song(1);
    const StepInputs in = song_inputs(song, 0, 12);
    const Tensor lp = net.forward(in, nn::Mode::Eval, nullptr);
    EXPECT_EQ(lp.rows(), 12);
    EXPECT_EQ(lp.cols(), vocab_size(target));
    for (int r = 0; r < lp.rows(); ++r) {
      double s = 0;
      for (int c = 0; c < lp.cols(); ++c) s += std::exp(static_cast<double>(lp.at(r, c)));
      EXPECT_NEAR(s, 1.0, 1e-5);
    }
    EXPECT_EQ(build_info_sequence(net, song).cols(), net.spec().info_width());
  }
}

TEST(Network, DefaultDimensions) {
  NetworkSpec s;
  s.config = *parse_abbreviation("CNIB");
  ConditionedNetwork net(s, 0);
  EXPECT_EQ(net.params().at("decoder/fc1.W").value.shape(), (std::vector<int>{173, 256}));
  EXPECT_EQ(net.params().at("decoder/fc2.W").value.shape(), (std::vector<int>{89, 173}));
  EXPECT_EQ(net.params().at("encoder/fc.W").value.shape(), (std::vector<int>{256, 36}));
  EXPECT_EQ(net.params().at("chord/pcv/fc2.W").value.shape(), (std::vector<int>{4, 8}));
  EXPECT_EQ(net.params().at("chord/merge/fc2.W").value.shape(), (std::vector<int>{8, 7}));
  EXPECT_EQ(net.params().at("lstm/l1.w_ih").value.shape(), (std::vector<int>{1024, 256}));
  EXPECT_TRUE(net.params().contains("next_chord/root"));
  EXPECT_FALSE(net.params().at("encoder/bn.running_var").trainable);
}

TEST(Network, ChordEncoderDeterministicWidth) {
  ConditionedNetwork net(tiny(Target::Pitch, "C"), 5);
  const auto& kinds = ChordKindDictionary::builtin();
  StepInputs in = song_inputs(random_song(2), 0, 4);
  in.chord[0] = {2, kinds.absolute(2, "minor-seventh")};
  in.chord[3] = in.chord[0];
  const Tensor info = net.info_vectors(in, nn::Mode::Eval);
  ASSERT_EQ(info.cols(), 16);
  for (int c = 8; c < 16; ++c) EXPECT_EQ(info.at(0, c), info.at(3, c));
}

TEST(Network, SameSeedSameParameters) {
  ConditionedNetwork a(tiny(Target::Pitch, "CIB"), 42), b(tiny(Target::Pitch, "CIB"), 42), c(tiny(Target::Pitch, "CIB"), 43);
  EXPECT_EQ(a.params(), b.params());
  EXPECT_NE(a.params(), c.params());
  const StepInputs in = song_inputs(random_song(3), 0, 8);
  EXPECT_EQ(a.forward(in, nn::Mode::Eval, nullptr), b.forward(in, nn::Mode::Eval, nullptr));
}

TEST(Network, InitialNllNearUniform) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ConditionedNetwork net(tiny(Target::Pitch, "CNIB", 64), seed);
    const TokenizedSong song = random_song(seed + 100);
    const std::size_t len = std::min<std::size_t>(song.size() - 1, 64);
    const Tensor lp = net.forward(song_inputs(song, 0, len), nn::Mode::Eval, nullptr);
    std::vector<int> targets(song.pitch.begin() + 1, song.pitch.begin() + 1 + static_cast<long>(len));
    const std::vector<std::uint8_t> mask(len, 1);
    EXPECT_NEAR(nn::nll_loss(lp, targets, mask).loss, std::log(89.0), 0.5) << "seed " << seed;
  }
}

TEST(Network, OverfitsConstantSong) {
  ConditionedNetwork net(tiny(Target::Pitch, "No-Cond", 16), 7);
  TokenizedSong song = random_song(4);
  std::fill(song.pitch.begin(), song.pitch.end(), 39);
  const std::size_t len = std::min<std::size_t>(song.size() - 1, 32);
  StepInputs in = song_inputs(song, 0, len);
  std::vector<int> targets(len, 39);
  const std::vector<std::uint8_t> mask(len, 1);
  nn::OptimizerState opt;
  nn::AmsGradConfig cfg;
  cfg.lr = 1e-2f;
  Rng rng(1);
  for (int step = 0; step < 1200; ++step) {
    net.params().zero_grad();
    const auto r = nn::nll_loss(net.forward(in, nn::Mode::Train, &rng), targets, mask);
    net.backward(r.grad);
    nn::amsgrad_step(net.params(), opt, cfg);
  }
  const Tensor lp = net.forward(in, nn::Mode::Eval, nullptr);
  EXPECT_LT(nn::nll_loss(lp, targets, mask).loss, 0.05);
}

TEST(Network, Causality) {
  for (const std::string abbrev : {"CNIB", "CIB", "N"}) {
    ConditionedNetwork net(tiny(Target::Pitch, abbrev), 9);
    const TokenizedSong song = random_song(5);
    const std::size_t len = 20;
    const StepInputs base = song_inputs(song, 0, len);
    const Tensor ref = net.forward(base, nn::Mode::Eval, nullptr);
    Rng rng(11);
    const auto& kinds = ChordKindDictionary::builtin();
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t t = rng.below(len - 1);
      StepInputs p = base;
      for (std::size_t k = t + 1; k < len; ++k) {
        p.pitch[k] = static_cast<int>(rng.below(kPitchVocab));
        p.duration[k] = static_cast<int>(rng.below(kDurationVocab));
        p.barpos[k] = static_cast<int>(rng.below(kBarposVocab));
        p.chord[k] = {static_cast<int>(rng.below(12)), kinds.absolute(0, "diminished")};
      }
      for (std::size_t k = t + 1; k < len; ++k) p.next_chord[k] = p.chord[k];
      const Tensor out = net.forward(p, nn::Mode::Eval, nullptr);
      for (std::size_t r = 0; r <= t; ++r) {
        for (int c = 0; c < out.cols(); ++c) {
          ASSERT_EQ(out.at(static_cast<int>(r), c), ref.at(static_cast<int>(r), c)) << abbrev << " t=" << t;
        }
      }
    }
  }
}

TEST(Network, CheckpointRoundTrip) {
  ConditionedNetwork net(tiny(Target::Duration, "CI"), 12);
  nn::OptimizerState opt;
  const nn::Checkpoint ck = make_checkpoint(net, opt, 3, {{"val_nll", 2.5}});
  const nn::Checkpoint back = nn::decode_checkpoint(nn::encode_checkpoint(ck));
  ConditionedNetwork restored = network_from_checkpoint(back);
  EXPECT_EQ(restored.params(), net.params());
  const StepInputs in = song_inputs(random_song(6), 0, 6);
  EXPECT_EQ(restored.forward(in, nn::Mode::Eval, nullptr), net.forward(in, nn::Mode::Eval, nullptr));

  nn::Checkpoint wrong = back;
  wrong.fingerprint = "P|D:CNIB";
  EXPECT_THROW(network_from_checkpoint(wrong), Error);

  nn::Checkpoint missing = back;
  missing.model = tiny(Target::Duration, "CIB").to_json();
  missing.fingerprint = "P|D:CIB";
  try {
    network_from_checkpoint(missing);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
  }
}

TEST(Network, RejectsInvalidConfig) {
  NetworkSpec s;
  s.config = {true, false, true, false};
  EXPECT_THROW(ConditionedNetwork(s, 0), Error);
}
