#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "melcond/lead_sheet.h"
#include "melcond/model/network.h"
#include "melcond/nn/checkpoint.h"
#include "melcond/tokenizer.h"

namespace melcond {

struct GenerationSettings {
  int seed_len = 10;
  double temperature = 1.0;  // <= 0 means greedy argmax
  std::size_t max_notes = 1024;  // total length cap, seed included

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static GenerationSettings from_json(const nlohmann::ordered_json& j);
};

struct GeneratedMelody {
  TokenizedSong song;  // seed prefix followed by the sampled continuation
  std::size_t seed_len = 0;
  nlohmann::ordered_json provenance;
};

// Observer for the inputs fed to the networks at each step (one row).
using StepObserver = std::function<void(std::size_t step, const StepInputs& fed, int clock)>;

// Samples an index from a log-probability row. Temperature <= 0 returns the
// argmax (lowest index on ties); otherwise probabilities are exp(lp / T)
// renormalized and drawn by inverse CDF with one uniform.
int sample_token(const float* log_probs, int n, double temperature, Rng& rng);

// A Pitch/Duration network pair restored from checkpoints of the same
// configuration. Throws FingerprintMismatch when they disagree or a
// checkpoint holds the wrong target.
class MelodyGenerator {
 public:
  MelodyGenerator(const nn::Checkpoint& pitch, const nn::Checkpoint& duration);

  const ConditioningConfig& config() const { return pitch_.spec().config; }
  const std::string& fingerprint() const { return fingerprint_; }

  // Warms both LSTMs on the first seed_len notes of `source`, then samples
  // pitch then duration per step, following the source's chords along a
  // tick clock until the progression ends or max_notes is reached.
  // Throws SeedTooShort.
  GeneratedMelody generate(const LeadSheet& source, const GenerationSettings& settings, std::uint64_t seed,
                           const StepObserver& observer = {});

 private:
  ConditionedNetwork pitch_, duration_;
  std::string fingerprint_;
};

struct GenerationFailure {
  std::size_t index = 0;
  std::string title;
  std::string error;
};

struct EvalSet {
  std::vector<GeneratedMelody> melodies;   // source order, failures skipped
  std::vector<std::size_t> source_index;   // source position of each melody
  std::vector<GenerationFailure> failures;
};

// One melody per source song; song i uses derive_seed(master_seed, i).
EvalSet generate_eval_set(MelodyGenerator& generator, const std::vector<LeadSheet>& sources,
                          const GenerationSettings& settings, std::uint64_t master_seed);

}  // namespace melcond
