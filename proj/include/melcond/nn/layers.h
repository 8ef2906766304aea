#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "melcond/nn/tensor.h"
#include "melcond/rng.h"

namespace melcond::nn {

enum class Mode { Train, Eval };

// Layer kernels are free functions. Forward returns the output; backward
// takes whatever forward cached and accumulates parameter gradients into the
// caller's grad tensors (+=), returning the input gradient.

// table [V,E], indices in [0,V) -> [L,E]. Throws IndexOutOfRange.
Tensor embedding_forward(const Tensor& table, std::span<const int> indices);
void embedding_backward(const Tensor& dy, std::span<const int> indices, Tensor& dtable);

// y = x W^T + b; W [O,I], b [O], x [N,I]. Throws ShapeMismatch.
Tensor linear_forward(const Tensor& w, const Tensor& b, const Tensor& x);
Tensor linear_backward(const Tensor& w, const Tensor& x, const Tensor& dy, Tensor& dw, Tensor& db);

inline constexpr float kBatchNormEps = 1e-5f;
inline constexpr float kBatchNormMomentum = 0.1f;

struct BatchNormCache {
  Mode mode = Mode::Train;
  Tensor x_hat;                 // normalized input [N,F]
  std::vector<float> inv_std;   // per feature
};

// Per-feature normalization over the rows of x [N,F]. Train mode uses batch
// statistics (biased variance) and moves the running estimates by momentum,
// storing the unbiased variance; eval mode uses the running estimates.
// Train mode with N < 2 throws DegenerateBatch.
Tensor batchnorm_forward(const Tensor& x, const Tensor& scale, const Tensor& shift, Tensor& running_mean,
                         Tensor& running_var, Mode mode, BatchNormCache* cache);
Tensor batchnorm_backward(const Tensor& dy, const Tensor& scale, const BatchNormCache& cache, Tensor& dscale,
                          Tensor& dshift);

Tensor relu_forward(const Tensor& x);
Tensor relu_backward(const Tensor& y, const Tensor& dy);

// Along the last axis.
Tensor log_softmax_forward(const Tensor& x);
Tensor log_softmax_backward(const Tensor& y, const Tensor& dy);

// Kept units are scaled by 1/(1-p), so the mask holds 0 or 1/(1-p).
Tensor dropout_mask(const std::vector<int>& shape, float p, Rng& rng);
Tensor dropout_forward(const Tensor& x, const Tensor& mask);
Tensor dropout_backward(const Tensor& dy, const Tensor& mask);

struct NllResult {
  double loss = 0.0;
  Tensor grad;        // d loss / d log_probs
  std::size_t count = 0;  // masked-in rows
};

// Mean over rows with mask[n] != 0 of -log_probs[n, targets[n]].
// Throws AllMasked when no row is selected.
NllResult nll_loss(const Tensor& log_probs, std::span<const int> targets, std::span<const std::uint8_t> mask);

// Column-wise concatenation of [N,*] tensors, and the inverse split.
Tensor concat_columns(std::span<const Tensor* const> parts);
std::vector<Tensor> split_columns(const Tensor& x, std::span<const int> widths);

void add_inplace(Tensor& dst, const Tensor& src);

}  // namespace melcond::nn
