#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "melcond/model/conditioning.h"
#include "melcond/nn/checkpoint.h"
#include "melcond/nn/layers.h"
#include "melcond/nn/lstm.h"
#include "melcond/nn/parameters.h"
#include "melcond/tokenizer.h"

namespace melcond {

enum class Target { Pitch, Duration };

std::string_view to_string(Target target);
int vocab_size(Target target);

struct EmbeddingDims {
  int pitch = 8;
  int duration = 4;
  int chord_root = 2;
  int barpos = 8;
  int chord_pcv = 4;    // pitch-class vector encoding
  int chord_final = 8;  // root + pcv merged
};

struct NetworkSpec {
  Target target = Target::Pitch;
  ConditioningConfig config;
  EmbeddingDims dims;
  int hidden = 256;  // LSTM input and hidden size
  int lstm_layers = 2;
  float dropout = 0.2f;

  int self_width() const;
  int inter_width() const;
  int info_width() const;
  int vocab() const { return vocab_size(target); }

  nlohmann::ordered_json to_json() const;
  static NetworkSpec from_json(const nlohmann::ordered_json& j);
};

// First width of a linear pair: mean of input and output, halves rounded up.
int paired_hidden_width(int in, int out);

// Inputs for T steps of N sequences, time-major: row r = t * batch + n.
// next_chord[r] is the chord of the note after step t.
struct StepInputs {
  int steps = 0;
  int batch = 0;
  std::vector<int> pitch;
  std::vector<int> duration;
  std::vector<int> barpos;
  std::vector<ChordSymbol> chord;
  std::vector<ChordSymbol> next_chord;

  std::size_t rows() const { return static_cast<std::size_t>(steps) * static_cast<std::size_t>(batch); }
};

// Steps [begin, begin+length) of one song as a batch of 1. The chord
// lookahead at the final note of the song reuses that note's chord.
StepInputs song_inputs(const TokenizedSong& song, std::size_t begin, std::size_t length);

// fc1 -> batch-norm -> ReLU -> fc2, with fc1's width the mean of in and out.
class LinearPair {
 public:
  LinearPair() = default;
  LinearPair(std::string prefix, int in, int out) : prefix_(std::move(prefix)), in_(in), out_(out) {}

  void create(nn::ParameterStore& store, Rng& rng) const;
  nn::Tensor forward(nn::ParameterStore& store, const nn::Tensor& x, nn::Mode mode);
  nn::Tensor backward(nn::ParameterStore& store, const nn::Tensor& dy);
  int hidden_width() const { return paired_hidden_width(in_, out_); }
  // Hash of the ReLU on/off pattern of the last forward call.
  std::uint64_t relu_pattern(std::uint64_t seed) const;

 private:
  std::string prefix_;
  int in_ = 0, out_ = 0;
  nn::Tensor x_, relu_out_;
  nn::BatchNormCache bn_;
};

// Root embedding (12 -> 2) and pitch-class vector (12 -> 4 via a linear
// pair), concatenated and merged by a second pair to the final chord width.
class ChordEncoder {
 public:
  ChordEncoder() = default;
  ChordEncoder(std::string prefix, const EmbeddingDims& dims);

  void create(nn::ParameterStore& store, Rng& rng) const;
  nn::Tensor forward(nn::ParameterStore& store, const std::vector<ChordSymbol>& chords, nn::Mode mode);
  void backward(nn::ParameterStore& store, const nn::Tensor& dy);

  // Width of the pitch-class encoding (for tests).
  int pcv_width() const { return dims_.chord_pcv; }
  std::uint64_t relu_pattern(std::uint64_t seed) const;

 private:
  std::string prefix_;
  EmbeddingDims dims_;
  LinearPair pcv_, merge_;
  std::vector<int> roots_;
};

// One Pitch or Duration network: embeddings -> information vector ->
// linear/batch-norm/ReLU -> stacked LSTM -> linear pair -> log-softmax.
// The output row for step t is the distribution over the token at t+1.
class ConditionedNetwork {
 public:
  ConditionedNetwork(NetworkSpec spec, std::uint64_t seed);
  // Adopts parameters from a checkpoint; throws ShapeMismatch when they do
  // not fit `spec`.
  ConditionedNetwork(NetworkSpec spec, nn::ParameterStore params);

  const NetworkSpec& spec() const { return spec_; }
  nn::ParameterStore& params() { return params_; }
  const nn::ParameterStore& params() const { return params_; }

  // Information vectors [rows, info_width].
  nn::Tensor info_vectors(const StepInputs& in, nn::Mode mode);

  // Log-probabilities [rows, vocab]. When `state` is non-null it is used as
  // the initial LSTM state and replaced by the final one (generation).
  // Train mode draws dropout masks from `rng`.
  nn::Tensor forward(const StepInputs& in, nn::Mode mode, Rng* rng, nn::LstmState* state = nullptr);

  // Backpropagates d loss / d log_probs of the last forward call,
  // accumulating into params().
  void backward(const nn::Tensor& d_log_probs);

  nn::LstmState zero_state(int batch) const;

  // Hash of every ReLU on/off decision in the last forward call; equal
  // patterns mean the network is locally linear in the same pieces.
  std::uint64_t relu_pattern() const;

 private:
  void create_parameters(std::uint64_t seed);
  std::vector<nn::LstmLayerWeights> lstm_weights() const;

  NetworkSpec spec_;
  nn::ParameterStore params_;

  ChordEncoder chord_enc_, next_chord_enc_;
  LinearPair decoder_;

  // forward caches
  StepInputs inputs_;
  std::vector<int> part_widths_;
  nn::Tensor info_, enc_relu_;
  nn::BatchNormCache enc_bn_;
  nn::LstmCache lstm_cache_;
  nn::Tensor log_probs_;
};

// Per-step information vectors of a single song (eval-mode chord encoders).
nn::Tensor build_info_sequence(ConditionedNetwork& network, const TokenizedSong& song);

// Checkpoint glue.
nn::Checkpoint make_checkpoint(const ConditionedNetwork& network, const nn::OptimizerState& optimizer, int epoch,
                               nlohmann::ordered_json metrics);
// Throws FingerprintMismatch when the checkpoint belongs to another
// configuration or target.
ConditionedNetwork network_from_checkpoint(const nn::Checkpoint& ckpt);

}  // namespace melcond
