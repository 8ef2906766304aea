#include "melcond/model/network.h"

#include <cmath>

#include "melcond/error.h"

namespace melcond {

using nn::Mode;
using nn::ParameterStore;
using nn::Tensor;

std::string_view to_string(Target target) { return target == Target::Pitch ? "pitch" : "duration"; }

int vocab_size(Target target) { return target == Target::Pitch ? kPitchVocab : kDurationVocab; }

int paired_hidden_width(int in, int out) { return (in + out + 1) / 2; }

int NetworkSpec::self_width() const { return target == Target::Pitch ? dims.pitch : dims.duration; }

int NetworkSpec::inter_width() const { return target == Target::Pitch ? dims.duration : dims.pitch; }

int NetworkSpec::info_width() const {
  int w = self_width();
  if (config.inter) w += inter_width();
  if (config.chord) w += dims.chord_final;
  if (config.next_chord) w += dims.chord_final;
  if (config.barpos) w += dims.barpos;
  return w;
}

nlohmann::ordered_json NetworkSpec::to_json() const {
  nlohmann::ordered_json j;
  j["target"] = std::string(to_string(target));
  j["config"] = abbreviation(config);
  j["hidden"] = hidden;
  j["lstm_layers"] = lstm_layers;
  j["dropout"] = dropout;
  j["dims"] = {{"pitch", dims.pitch},         {"duration", dims.duration},   {"chord_root", dims.chord_root},
               {"barpos", dims.barpos},       {"chord_pcv", dims.chord_pcv}, {"chord_final", dims.chord_final}};
  return j;
}

NetworkSpec NetworkSpec::from_json(const nlohmann::ordered_json& j) {
  NetworkSpec s;
  try {
    const auto target = j.at("target").get<std::string>();
    if (target != "pitch" && target != "duration") fail(ErrorKind::SchemaViolation, "model.target: " + target);
    s.target = target == "pitch" ? Target::Pitch : Target::Duration;
    const auto cfg = parse_abbreviation(j.at("config").get<std::string>());
    if (!cfg) fail(ErrorKind::SchemaViolation, "model.config: " + j.at("config").get<std::string>());
    s.config = *cfg;
    s.hidden = j.at("hidden").get<int>();
    s.lstm_layers = j.at("lstm_layers").get<int>();
    s.dropout = j.at("dropout").get<float>();
    const auto& d = j.at("dims");
    s.dims = {d.at("pitch").get<int>(),  d.at("duration").get<int>(),  d.at("chord_root").get<int>(),
              d.at("barpos").get<int>(), d.at("chord_pcv").get<int>(), d.at("chord_final").get<int>()};
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::SchemaViolation, std::string("model spec: ") + e.what());
  }
  return s;
}

StepInputs song_inputs(const TokenizedSong& song, std::size_t begin, std::size_t length) {
  if (begin + length > song.size()) fail(ErrorKind::ShapeMismatch, "step range exceeds the song");
  StepInputs in;
  in.steps = static_cast<int>(length);
  in.batch = 1;
  for (std::size_t t = begin; t < begin + length; ++t) {
    in.pitch.push_back(song.pitch[t]);
    in.duration.push_back(song.duration[t]);
    in.barpos.push_back(song.barpos[t]);
    in.chord.push_back(song.chord[t]);
    in.next_chord.push_back(t + 1 < song.size() ? song.chord[t + 1] : song.chord[t]);
  }
  return in;
}

namespace {

void add_batchnorm(ParameterStore& store, const std::string& prefix, int width) {
  store.add(prefix + ".scale", {width}).value.fill(1.0f);
  store.add(prefix + ".shift", {width});
  store.add(prefix + ".running_mean", {width}, false);
  store.add(prefix + ".running_var", {width}, false).value.fill(1.0f);
}

void add_linear(ParameterStore& store, const std::string& prefix, int in, int out, Rng& rng) {
  nn::init_uniform(store.add(prefix + ".W", {out, in}).value, 1.0f / std::sqrt(static_cast<float>(in)), rng);
  store.add(prefix + ".b", {out});
}

void add_embedding(ParameterStore& store, const std::string& path, int vocab, int width, Rng& rng) {
  nn::init_uniform(store.add(path, {vocab, width}).value, 1.0f / std::sqrt(static_cast<float>(vocab)), rng);
}

Tensor batchnorm(ParameterStore& s, const std::string& prefix, const Tensor& x, Mode mode, nn::BatchNormCache* cache) {
  return nn::batchnorm_forward(x, s.at(prefix + ".scale").value, s.at(prefix + ".shift").value,
                               s.at(prefix + ".running_mean").value, s.at(prefix + ".running_var").value, mode, cache);
}

Tensor batchnorm_grad(ParameterStore& s, const std::string& prefix, const Tensor& dy, const nn::BatchNormCache& cache) {
  return nn::batchnorm_backward(dy, s.at(prefix + ".scale").value, cache, s.at(prefix + ".scale").grad,
                                s.at(prefix + ".shift").grad);
}

Tensor linear(ParameterStore& s, const std::string& prefix, const Tensor& x) {
  return nn::linear_forward(s.at(prefix + ".W").value, s.at(prefix + ".b").value, x);
}

Tensor linear_grad(ParameterStore& s, const std::string& prefix, const Tensor& x, const Tensor& dy) {
  auto& w = s.at(prefix + ".W");
  return nn::linear_backward(w.value, x, dy, w.grad, s.at(prefix + ".b").grad);
}

std::uint64_t hash_signs(std::uint64_t h, const Tensor& relu_out) {
  std::uint64_t word = 0;
  int bits = 0;
  for (float v : relu_out.values()) {
    word = (word << 1) | (v > 0.0f ? 1u : 0u);
    if (++bits == 64) {
      h = splitmix64(h ^ word);
      word = 0;
      bits = 0;
    }
  }
  return splitmix64(h ^ word ^ static_cast<std::uint64_t>(bits));
}

}  // namespace

std::uint64_t LinearPair::relu_pattern(std::uint64_t seed) const { return hash_signs(seed, relu_out_); }

std::uint64_t ChordEncoder::relu_pattern(std::uint64_t seed) const {
  return merge_.relu_pattern(pcv_.relu_pattern(seed));
}

void LinearPair::create(ParameterStore& store, Rng& rng) const {
  const int mid = hidden_width();
  add_linear(store, prefix_ + "/fc1", in_, mid, rng);
  add_batchnorm(store, prefix_ + "/bn", mid);
  add_linear(store, prefix_ + "/fc2", mid, out_, rng);
}

Tensor LinearPair::forward(ParameterStore& store, const Tensor& x, Mode mode) {
  x_ = x;
  relu_out_ = nn::relu_forward(batchnorm(store, prefix_ + "/bn", linear(store, prefix_ + "/fc1", x), mode, &bn_));
  return linear(store, prefix_ + "/fc2", relu_out_);
}

Tensor LinearPair::backward(ParameterStore& store, const Tensor& dy) {
  Tensor d_relu = linear_grad(store, prefix_ + "/fc2", relu_out_, dy);
  Tensor d_bn = batchnorm_grad(store, prefix_ + "/bn", nn::relu_backward(relu_out_, d_relu), bn_);
  return linear_grad(store, prefix_ + "/fc1", x_, d_bn);
}

ChordEncoder::ChordEncoder(std::string prefix, const EmbeddingDims& dims)
    : prefix_(std::move(prefix)),
      dims_(dims),
      pcv_(prefix_ + "/pcv", 12, dims.chord_pcv),
      merge_(prefix_ + "/merge", dims.chord_root + dims.chord_pcv, dims.chord_final) {}

void ChordEncoder::create(ParameterStore& store, Rng& rng) const {
  add_embedding(store, prefix_ + "/root", kRootVocab, dims_.chord_root, rng);
  pcv_.create(store, rng);
  merge_.create(store, rng);
}

Tensor ChordEncoder::forward(ParameterStore& store, const std::vector<ChordSymbol>& chords, Mode mode) {
  roots_.resize(chords.size());
  Tensor pcv({static_cast<int>(chords.size()), 12});
  for (std::size_t r = 0; r < chords.size(); ++r) {
    roots_[r] = chords[r].root_token;
    for (int k = 0; k < 12; ++k) pcv.at(static_cast<int>(r), k) = ((chords[r].pitch_classes >> k) & 1u) ? 1.0f : 0.0f;
  }
  Tensor root = nn::embedding_forward(store.at(prefix_ + "/root").value, roots_);
  Tensor enc = pcv_.forward(store, pcv, mode);
  const Tensor* parts[] = {&root, &enc};
  return merge_.forward(store, nn::concat_columns(parts), mode);
}

void ChordEncoder::backward(ParameterStore& store, const Tensor& dy) {
  Tensor d_cat = merge_.backward(store, dy);
  const int widths[] = {dims_.chord_root, dims_.chord_pcv};
  auto parts = nn::split_columns(d_cat, widths);
  nn::embedding_backward(parts[0], roots_, store.at(prefix_ + "/root").grad);
  pcv_.backward(store, parts[1]);
}

ConditionedNetwork::ConditionedNetwork(NetworkSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)),
      chord_enc_("chord", spec_.dims),
      next_chord_enc_("next_chord", spec_.dims),
      decoder_("decoder", spec_.hidden, spec_.vocab()) {
  if (!is_valid(spec_.config)) fail(ErrorKind::InvalidArgument, "configuration is not one of the 13 listed");
  if (spec_.hidden < 1 || spec_.lstm_layers < 1) fail(ErrorKind::InvalidArgument, "bad network dimensions");
  create_parameters(seed);
}

ConditionedNetwork::ConditionedNetwork(NetworkSpec spec, ParameterStore params) : ConditionedNetwork(spec, 0) {
  for (const auto& [path, p] : params_.entries()) {
    if (!params.contains(path)) fail(ErrorKind::ShapeMismatch, "checkpoint lacks parameter " + path);
    if (params.at(path).value.shape() != p.value.shape()) {
      fail(ErrorKind::ShapeMismatch, "parameter " + path + " has shape " + params.at(path).value.shape_string() +
                                         ", expected " + p.value.shape_string());
    }
  }
  if (params.entries().size() != params_.entries().size()) {
    fail(ErrorKind::ShapeMismatch, "checkpoint has parameters this configuration does not use");
  }
  for (auto& [path, p] : params.entries()) p.grad = Tensor(p.value.shape());
  params_ = std::move(params);
}

void ConditionedNetwork::create_parameters(std::uint64_t seed) {
  Rng rng(seed);
  const bool pitch = spec_.target == Target::Pitch;
  const auto self_path = pitch ? "embed/pitch" : "embed/duration";
  const auto inter_path = pitch ? "embed/duration" : "embed/pitch";
  add_embedding(params_, self_path, spec_.vocab(), spec_.self_width(), rng);
  if (spec_.config.inter) {
    add_embedding(params_, inter_path, vocab_size(pitch ? Target::Duration : Target::Pitch), spec_.inter_width(), rng);
  }
  if (spec_.config.chord) chord_enc_.create(params_, rng);
  if (spec_.config.next_chord) next_chord_enc_.create(params_, rng);
  if (spec_.config.barpos) add_embedding(params_, "embed/barpos", kBarposVocab, spec_.dims.barpos, rng);

  add_linear(params_, "encoder/fc", spec_.info_width(), spec_.hidden, rng);
  add_batchnorm(params_, "encoder/bn", spec_.hidden);

  const int h = spec_.hidden;
  const float bound = 1.0f / std::sqrt(static_cast<float>(h));
  for (int l = 0; l < spec_.lstm_layers; ++l) {
    const std::string p = "lstm/l" + std::to_string(l);
    nn::init_uniform(params_.add(p + ".w_ih", {4 * h, h}).value, bound, rng);
    nn::init_uniform(params_.add(p + ".w_hh", {4 * h, h}).value, bound, rng);
    auto& bias = params_.add(p + ".bias", {4 * h}).value;
    for (int k = h; k < 2 * h; ++k) bias[static_cast<std::size_t>(k)] = 1.0f;  // forget gate
  }
  decoder_.create(params_, rng);
}

std::vector<nn::LstmLayerWeights> ConditionedNetwork::lstm_weights() const {
  std::vector<nn::LstmLayerWeights> w;
  for (int l = 0; l < spec_.lstm_layers; ++l) {
    const std::string p = "lstm/l" + std::to_string(l);
    w.push_back({&params_.at(p + ".w_ih").value, &params_.at(p + ".w_hh").value, &params_.at(p + ".bias").value});
  }
  return w;
}

nn::LstmState ConditionedNetwork::zero_state(int batch) const {
  return nn::LstmState::zeros(spec_.lstm_layers, batch, spec_.hidden);
}

std::uint64_t ConditionedNetwork::relu_pattern() const {
  std::uint64_t h = hash_signs(0, enc_relu_);
  if (spec_.config.chord) h = chord_enc_.relu_pattern(h);
  if (spec_.config.next_chord) h = next_chord_enc_.relu_pattern(h);
  return decoder_.relu_pattern(h);
}

Tensor ConditionedNetwork::info_vectors(const StepInputs& in, Mode mode) {
  const std::size_t rows = in.rows();
  if (in.pitch.size() != rows || in.duration.size() != rows || in.barpos.size() != rows || in.chord.size() != rows ||
      in.next_chord.size() != rows) {
    fail(ErrorKind::ShapeMismatch, "step inputs do not match steps x batch");
  }
  const bool pitch = spec_.target == Target::Pitch;
  const auto& self_idx = pitch ? in.pitch : in.duration;
  const auto& inter_idx = pitch ? in.duration : in.pitch;

  std::vector<Tensor> parts;
  part_widths_.clear();
  parts.push_back(nn::embedding_forward(params_.at(pitch ? "embed/pitch" : "embed/duration").value, self_idx));
  if (spec_.config.inter) {
    parts.push_back(nn::embedding_forward(params_.at(pitch ? "embed/duration" : "embed/pitch").value, inter_idx));
  }
  if (spec_.config.chord) parts.push_back(chord_enc_.forward(params_, in.chord, mode));
  if (spec_.config.next_chord) parts.push_back(next_chord_enc_.forward(params_, in.next_chord, mode));
  if (spec_.config.barpos) parts.push_back(nn::embedding_forward(params_.at("embed/barpos").value, in.barpos));

  std::vector<const Tensor*> ptrs;
  for (const auto& p : parts) {
    ptrs.push_back(&p);
    part_widths_.push_back(p.cols());
  }
  return nn::concat_columns(ptrs);
}

Tensor ConditionedNetwork::forward(const StepInputs& in, Mode mode, Rng* rng, nn::LstmState* state) {
  inputs_ = in;
  info_ = info_vectors(in, mode);
  enc_relu_ = nn::relu_forward(batchnorm(params_, "encoder/bn", linear(params_, "encoder/fc", info_), mode, &enc_bn_));

  const auto weights = lstm_weights();
  const nn::LstmState initial = state ? *state : zero_state(in.batch);
  auto out = nn::lstm_forward(weights, enc_relu_.reshaped({in.steps, in.batch, spec_.hidden}), initial, spec_.dropout,
                              mode, rng, &lstm_cache_);
  if (state) *state = std::move(out.final_state);

  log_probs_ = nn::log_softmax_forward(decoder_.forward(params_, out.y.reshaped({in.steps * in.batch, spec_.hidden}), mode));
  return log_probs_;
}

void ConditionedNetwork::backward(const Tensor& d_log_probs) {
  Tensor d_logits = nn::log_softmax_backward(log_probs_, d_log_probs);
  Tensor d_y = decoder_.backward(params_, d_logits);

  const auto weights = lstm_weights();
  std::vector<nn::LstmLayerGrads> grads;
  for (int l = 0; l < spec_.lstm_layers; ++l) {
    const std::string p = "lstm/l" + std::to_string(l);
    grads.push_back({&params_.at(p + ".w_ih").grad, &params_.at(p + ".w_hh").grad, &params_.at(p + ".bias").grad});
  }
  Tensor d_x = nn::lstm_backward(weights, grads, lstm_cache_, d_y);
  Tensor d_enc = nn::relu_backward(enc_relu_, d_x.reshaped({enc_relu_.rows(), enc_relu_.cols()}));
  Tensor d_info = linear_grad(params_, "encoder/fc", info_, batchnorm_grad(params_, "encoder/bn", d_enc, enc_bn_));

  auto parts = nn::split_columns(d_info, part_widths_);
  const bool pitch = spec_.target == Target::Pitch;
  std::size_t k = 0;
  nn::embedding_backward(parts[k++], pitch ? inputs_.pitch : inputs_.duration,
                         params_.at(pitch ? "embed/pitch" : "embed/duration").grad);
  if (spec_.config.inter) {
    nn::embedding_backward(parts[k++], pitch ? inputs_.duration : inputs_.pitch,
                           params_.at(pitch ? "embed/duration" : "embed/pitch").grad);
  }
  if (spec_.config.chord) chord_enc_.backward(params_, parts[k++]);
  if (spec_.config.next_chord) next_chord_enc_.backward(params_, parts[k++]);
  if (spec_.config.barpos) nn::embedding_backward(parts[k++], inputs_.barpos, params_.at("embed/barpos").grad);
}

Tensor build_info_sequence(ConditionedNetwork& network, const TokenizedSong& song) {
  return network.info_vectors(song_inputs(song, 0, song.size()), Mode::Eval);
}

nn::Checkpoint make_checkpoint(const ConditionedNetwork& network, const nn::OptimizerState& optimizer, int epoch,
                               nlohmann::ordered_json metrics) {
  nn::Checkpoint ckpt;
  ckpt.fingerprint = fingerprint(network.spec().config);
  ckpt.epoch = epoch;
  ckpt.metrics = std::move(metrics);
  ckpt.model = network.spec().to_json();
  ckpt.params = network.params();
  ckpt.optimizer = optimizer;
  return ckpt;
}

ConditionedNetwork network_from_checkpoint(const nn::Checkpoint& ckpt) {
  NetworkSpec spec = NetworkSpec::from_json(ckpt.model);
  if (ckpt.fingerprint != fingerprint(spec.config)) {
    fail(ErrorKind::FingerprintMismatch,
         "checkpoint fingerprint '" + ckpt.fingerprint + "' does not match its model '" + fingerprint(spec.config) + "'");
  }
  return ConditionedNetwork(spec, ckpt.params);
}

}  // namespace melcond
