#include "melcond/nn/lstm.h"

#include <cmath>

#include "melcond/error.h"

namespace melcond::nn {

namespace {

inline float sigmoid(float v) { return 1.0f / (1.0f + std::exp(-v)); }

Tensor slice_layer(const Tensor& state, int layer) {
  const int n = state.dim(1), h = state.dim(2);
  const std::size_t stride = static_cast<std::size_t>(n) * h;
  Tensor out({n, h});
  std::copy_n(state.data() + stride * layer, stride, out.data());
  return out;
}

void store_layer(Tensor& state, int layer, const float* src) {
  const std::size_t stride = static_cast<std::size_t>(state.dim(1)) * state.dim(2);
  std::copy_n(src, stride, state.data() + stride * layer);
}

}  // namespace

LstmState LstmState::zeros(int layers, int batch, int hidden) {
  return {Tensor({layers, batch, hidden}), Tensor({layers, batch, hidden})};
}

LstmOutput lstm_forward(std::span<const LstmLayerWeights> layers, const Tensor& x, const LstmState& initial,
                        float inter_layer_dropout, Mode mode, Rng* rng, LstmCache* cache,
                        const std::vector<Tensor>* fixed_masks) {
  if (x.rank() != 3) fail(ErrorKind::ShapeMismatch, "lstm input must be [T,N,I], got " + x.shape_string());
  const int steps = x.dim(0), batch = x.dim(1);
  const int n_layers = static_cast<int>(layers.size());
  const int hidden = layers[0].w_hh->dim(1);
  if (initial.h.shape() != std::vector<int>{n_layers, batch, hidden} || initial.c.shape() != initial.h.shape()) {
    fail(ErrorKind::ShapeMismatch, "lstm initial state " + initial.h.shape_string());
  }

  LstmOutput out;
  out.final_state = LstmState::zeros(n_layers, batch, hidden);
  if (cache) {
    cache->steps = steps;
    cache->batch = batch;
    cache->layers.assign(static_cast<std::size_t>(n_layers), {});
    cache->dropout_masks.clear();
  }

  Tensor input = x.reshaped({steps * batch, x.dim(2)});
  for (int l = 0; l < n_layers; ++l) {
    const LstmLayerWeights& w = layers[static_cast<std::size_t>(l)];
    const int in_width = input.cols();
    if (w.w_ih->dim(0) != 4 * hidden || w.w_ih->dim(1) != in_width || w.w_hh->dim(0) != 4 * hidden ||
        w.bias->size() != static_cast<std::size_t>(4 * hidden)) {
      fail(ErrorKind::ShapeMismatch, "lstm layer " + std::to_string(l) + " weights " + w.w_ih->shape_string() +
                                         " for input width " + std::to_string(in_width));
    }

    // Input contribution for all steps at once.
    Tensor gates = linear_forward(*w.w_ih, *w.bias, input);
    Tensor cell({steps * batch, hidden}), tanh_cell({steps * batch, hidden}), hid({steps * batch, hidden});
    Tensor h_prev = slice_layer(initial.h, l);
    Tensor c_prev = slice_layer(initial.c, l);
    const auto whh = as_matrix(*w.w_hh);
    RowMatrix recur(batch, 4 * hidden);

    for (int t = 0; t < steps; ++t) {
      recur.noalias() = as_matrix(h_prev) * whh.transpose();
      for (int n = 0; n < batch; ++n) {
        const std::size_t row = static_cast<std::size_t>(t) * batch + n;
        float* g = gates.data() + row * 4 * hidden;
        const float* r = recur.data() + static_cast<std::size_t>(n) * 4 * hidden;
        float* cr = cell.data() + row * hidden;
        float* tc = tanh_cell.data() + row * hidden;
        float* hr = hid.data() + row * hidden;
        const float* cp = c_prev.data() + static_cast<std::size_t>(n) * hidden;
        for (int k = 0; k < hidden; ++k) {
          const float gi = sigmoid(g[k] + r[k]);
          const float gf = sigmoid(g[hidden + k] + r[hidden + k]);
          const float gg = std::tanh(g[2 * hidden + k] + r[2 * hidden + k]);
          const float go = sigmoid(g[3 * hidden + k] + r[3 * hidden + k]);
          g[k] = gi;
          g[hidden + k] = gf;
          g[2 * hidden + k] = gg;
          g[3 * hidden + k] = go;
          cr[k] = gf * cp[k] + gi * gg;
          tc[k] = std::tanh(cr[k]);
          hr[k] = go * tc[k];
        }
      }
      const std::size_t off = static_cast<std::size_t>(t) * batch * hidden;
      std::copy_n(hid.data() + off, static_cast<std::size_t>(batch) * hidden, h_prev.data());
      std::copy_n(cell.data() + off, static_cast<std::size_t>(batch) * hidden, c_prev.data());
    }
    store_layer(out.final_state.h, l, h_prev.data());
    store_layer(out.final_state.c, l, c_prev.data());

    Tensor next = hid;
    if (l + 1 < n_layers && mode == Mode::Train && inter_layer_dropout > 0.0f) {
      Tensor mask;
      if (fixed_masks) {
        mask = fixed_masks->at(static_cast<std::size_t>(l));
      } else {
        if (!rng) fail(ErrorKind::InvalidArgument, "train-mode dropout needs an rng");
        mask = dropout_mask({steps * batch, hidden}, inter_layer_dropout, *rng);
      }
      next = dropout_forward(hid, mask);
      if (cache) cache->dropout_masks.push_back(std::move(mask));
    } else if (l + 1 < n_layers && cache) {
      cache->dropout_masks.emplace_back();
    }

    if (cache) {
      auto& lc = cache->layers[static_cast<std::size_t>(l)];
      lc.input = std::move(input);
      lc.gates = std::move(gates);
      lc.cell = std::move(cell);
      lc.tanh_cell = std::move(tanh_cell);
      lc.hidden = std::move(hid);
      lc.h0 = slice_layer(initial.h, l);
      lc.c0 = slice_layer(initial.c, l);
    }
    input = std::move(next);
  }
  out.y = input.reshaped({steps, batch, hidden});
  return out;
}

Tensor lstm_backward(std::span<const LstmLayerWeights> layers, std::span<const LstmLayerGrads> grads,
                     const LstmCache& cache, const Tensor& dy, const LstmState* d_final, LstmState* d_initial) {
  const int steps = cache.steps, batch = cache.batch;
  const int n_layers = static_cast<int>(layers.size());
  const int hidden = layers[0].w_hh->dim(1);
  if (dy.size() != static_cast<std::size_t>(steps) * batch * hidden) {
    fail(ErrorKind::ShapeMismatch, "lstm output gradient " + dy.shape_string());
  }
  if (d_initial) *d_initial = LstmState::zeros(n_layers, batch, hidden);

  Tensor d_out = dy.reshaped({steps * batch, hidden});
  for (int l = n_layers - 1; l >= 0; --l) {
    const auto& lc = cache.layers[static_cast<std::size_t>(l)];
    const LstmLayerWeights& w = layers[static_cast<std::size_t>(l)];
    const LstmLayerGrads& g = grads[static_cast<std::size_t>(l)];

    Tensor d_gates({steps * batch, 4 * hidden});
    Tensor dh_next = d_final ? slice_layer(d_final->h, l) : Tensor({batch, hidden});
    Tensor dc_next = d_final ? slice_layer(d_final->c, l) : Tensor({batch, hidden});
    const auto whh = as_matrix(*w.w_hh);

    for (int t = steps - 1; t >= 0; --t) {
      for (int n = 0; n < batch; ++n) {
        const std::size_t row = static_cast<std::size_t>(t) * batch + n;
        const float* gt = lc.gates.data() + row * 4 * hidden;
        const float* tc = lc.tanh_cell.data() + row * hidden;
        const float* c_prev = t > 0 ? lc.cell.data() + (row - batch) * hidden
                                    : lc.c0.data() + static_cast<std::size_t>(n) * hidden;
        const float* dyr = d_out.data() + row * hidden;
        float* dhn = dh_next.data() + static_cast<std::size_t>(n) * hidden;
        float* dcn = dc_next.data() + static_cast<std::size_t>(n) * hidden;
        float* dg = d_gates.data() + row * 4 * hidden;
        for (int k = 0; k < hidden; ++k) {
          const float gi = gt[k], gf = gt[hidden + k], gg = gt[2 * hidden + k], go = gt[3 * hidden + k];
          const float dh = dyr[k] + dhn[k];
          const float dc = dcn[k] + dh * go * (1.0f - tc[k] * tc[k]);
          dg[k] = dc * gg * gi * (1.0f - gi);
          dg[hidden + k] = dc * c_prev[k] * gf * (1.0f - gf);
          dg[2 * hidden + k] = dc * gi * (1.0f - gg * gg);
          dg[3 * hidden + k] = dh * tc[k] * go * (1.0f - go);
          dcn[k] = dc * gf;
        }
      }
      // dh for step t-1 comes through the recurrent weights.
      Eigen::Map<const RowMatrix> dg_t(d_gates.data() + static_cast<std::size_t>(t) * batch * 4 * hidden, batch,
                                       4 * hidden);
      as_matrix(dh_next).noalias() = dg_t * whh;
    }
    if (d_initial) {
      store_layer(d_initial->h, l, dh_next.data());
      store_layer(d_initial->c, l, dc_next.data());
    }

    // Weight gradients in bulk. Row r of h_shift holds h_{t-1} for row r.
    Tensor h_shift({steps * batch, hidden});
    std::copy_n(lc.h0.data(), static_cast<std::size_t>(batch) * hidden, h_shift.data());
    if (steps > 1) {
      std::copy_n(lc.hidden.data(), static_cast<std::size_t>(steps - 1) * batch * hidden,
                  h_shift.data() + static_cast<std::size_t>(batch) * hidden);
    }
    const auto dgm = as_matrix(d_gates);
    as_matrix(*g.w_hh).noalias() += dgm.transpose() * as_matrix(h_shift);
    Tensor d_input = linear_backward(*w.w_ih, lc.input, d_gates, *g.w_ih, *g.bias);

    if (l > 0) {
      const Tensor& mask = cache.dropout_masks[static_cast<std::size_t>(l - 1)];
      d_out = mask.empty() ? std::move(d_input) : dropout_backward(d_input, mask);
    } else {
      d_out = std::move(d_input);
    }
  }
  return d_out.reshaped({steps, batch, d_out.cols()});
}

}  // namespace melcond::nn
