#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "melcond/ingest.h"
#include "melcond/model/network.h"
#include "melcond/nn/checkpoint.h"
#include "melcond/tokenizer.h"

namespace melcond {

struct TrainPlan {
  int window_len = 64;
  int hop = 1;
  int batch_size = 64;
  int epochs = 30;
  float lr = 1e-3f;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
  int hidden = 256;
  float dropout = 0.2f;
  bool augment = true;  // transpose both sides of the split to all in-range keys

  // Throws InvalidArgument.
  void validate() const;
  nlohmann::ordered_json to_json() const;
  // Starts from the defaults; unknown keys are rejected (SchemaViolation).
  static TrainPlan from_json(const nlohmann::ordered_json& j);
};

// --- data --------------------------------------------------------------------

struct CorpusSplit {
  std::vector<std::size_t> train;  // indices into the base corpus, ascending
  std::vector<std::size_t> val;
};

// Splits base songs (before any augmentation) so that every transposition of
// a song stays on one side. Throws CorpusTooSmall for fewer than 2 songs.
CorpusSplit split_corpus(std::size_t n_songs, double val_fraction, std::uint64_t seed);

struct Dataset {
  std::vector<TokenizedSong> train;
  std::vector<TokenizedSong> val;
  std::vector<std::size_t> train_base;  // base-song index of every entry
  std::vector<std::size_t> val_base;
};

Dataset build_dataset(const std::vector<LeadSheet>& songs, const TrainPlan& plan);

// Inputs [begin, begin + window_len), targets shifted by one. Targets at
// positions >= valid are padding and masked out of the loss.
struct Window {
  std::size_t song = 0;
  std::size_t begin = 0;
  int valid = 0;
};

// All n with n + window_len < L stepping by hop; a song with L < window_len + 1
// yields one window with L - 1 valid targets (none for L = 1).
std::vector<Window> make_windows(const TokenizedSong& song, int window_len, int hop, std::size_t song_index = 0);
std::vector<Window> make_windows(const std::vector<TokenizedSong>& songs, int window_len, int hop);

// Time-major batch of windows plus per-row targets and mask for `target`.
// Padding steps use the rest token, the shortest duration, the song's last
// chord and a bar position continuing the clock.
struct Batch {
  StepInputs inputs;
  std::vector<int> targets;
  std::vector<std::uint8_t> mask;
};

Batch make_batch(const std::vector<TokenizedSong>& songs, std::span<const Window> windows, int window_len,
                 Target target);

// Masked mean NLL of a network over windows, eval mode.
double evaluate_nll(ConditionedNetwork& net, const std::vector<TokenizedSong>& songs, const std::vector<Window>& windows,
                    int window_len, int batch_size);

// --- training ----------------------------------------------------------------

struct EpochRecord {
  int epoch = 0;  // 0 = before the first update, both values measured in eval mode
  double train_nll = 0.0;
  double val_nll = 0.0;
  double seconds = 0.0;
};

struct NetworkLog {
  Target target = Target::Pitch;
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_val_nll = 0.0;
  bool diverged = false;
  std::string error;

  // Fraction of epoch transitions (from epoch 1 on) where train NLL did not rise.
  double monotone_fraction() const;
};

struct NetworkResult {
  NetworkLog log;
  std::optional<nn::Checkpoint> best;  // absent when training diverged before any epoch finished
};

using ProgressFn = std::function<void(const std::string&)>;

// Trains one network with teacher forcing and keeps the best-validation
// parameters. A non-finite loss stops training (log.diverged) and the partial
// log is returned.
NetworkResult train_network(Target target, const ConditioningConfig& config, const Dataset& data, const TrainPlan& plan,
                            const ProgressFn& progress = {});

struct TrainTargets {
  bool pitch = true;
  bool duration = true;
};

struct TrainResult {
  ConditioningConfig config;
  std::optional<NetworkResult> pitch;
  std::optional<NetworkResult> duration;
};

TrainResult train(const ConditioningConfig& config, const Dataset& data, const TrainPlan& plan,
                  TrainTargets targets = {}, const ProgressFn& progress = {});

// Trains each configuration in `configs` (default: all 13) with the same plan
// and split. Cells run on up to `jobs` threads; results keep the input order.
std::vector<TrainResult> run_experiment_matrix(const Dataset& data, const TrainPlan& plan,
                                               const std::vector<ConditioningConfig>& configs, int jobs = 1,
                                               const ProgressFn& progress = {});

// One row per result: config, then train/val NLL at the best epoch for each
// network; "diverged" or empty cells where training failed or was skipped.
std::string summary_csv(const std::vector<TrainResult>& results);
std::string logs_csv(const NetworkLog& log);

}  // namespace melcond
