#pragma once

#include <vector>

#include "melcond/nn/layers.h"
#include "melcond/nn/tensor.h"
#include "melcond/rng.h"

namespace melcond::nn {

// Gate layout along the 4H axis: [input, forget, cell-candidate, output].
struct LstmLayerWeights {
  const Tensor* w_ih = nullptr;  // [4H, I]
  const Tensor* w_hh = nullptr;  // [4H, H]
  const Tensor* bias = nullptr;  // [4H]
};

struct LstmLayerGrads {
  Tensor* w_ih = nullptr;
  Tensor* w_hh = nullptr;
  Tensor* bias = nullptr;
};

// h and c are [layers, N, H].
struct LstmState {
  Tensor h;
  Tensor c;
  static LstmState zeros(int layers, int batch, int hidden);
};

struct LstmLayerCache {
  Tensor input;   // [T*N, I]
  Tensor gates;   // post-activation [T*N, 4H]
  Tensor cell;    // c_t [T*N, H]
  Tensor tanh_cell;
  Tensor hidden;  // h_t [T*N, H]
  Tensor h0, c0;  // [N, H]
};

struct LstmCache {
  int steps = 0;
  int batch = 0;
  std::vector<LstmLayerCache> layers;
  std::vector<Tensor> dropout_masks;  // one per gap between layers, [T*N, H]
};

struct LstmOutput {
  Tensor y;  // [T, N, H] output of the top layer
  LstmState final_state;
};

// Stacked unidirectional LSTM. x is [T, N, I]. Dropout with rate
// `inter_layer_dropout` is applied to each non-final layer's output in train
// mode (masks drawn from `rng`, or taken from `fixed_masks` when given).
// The cache is filled when non-null.
LstmOutput lstm_forward(std::span<const LstmLayerWeights> layers, const Tensor& x, const LstmState& initial,
                        float inter_layer_dropout, Mode mode, Rng* rng, LstmCache* cache,
                        const std::vector<Tensor>* fixed_masks = nullptr);

// Backpropagation through time from dy [T, N, H] (and optional gradients of
// the final state). Accumulates weight gradients; returns dx [T, N, I]. The
// gradient of the initial state is written to `d_initial` when non-null.
Tensor lstm_backward(std::span<const LstmLayerWeights> layers, std::span<const LstmLayerGrads> grads,
                     const LstmCache& cache, const Tensor& dy, const LstmState* d_final = nullptr,
                     LstmState* d_initial = nullptr);

}  // namespace melcond::nn
