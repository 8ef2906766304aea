#pragma once

#include <map>
#include <string>

#include "melcond/nn/parameters.h"

namespace melcond::nn {

struct AmsGradConfig {
  float lr = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
};

struct MomentBuffers {
  Tensor m;
  Tensor v;
  Tensor v_max;  // elementwise running maximum of v
};

struct OptimizerState {
  std::map<std::string, MomentBuffers> moments;
  long long step = 0;
};

// One AMSGrad update over every trainable parameter of the store, using the
// gradients currently held in it:
//   m = b1 m + (1-b1) g;  v = b2 v + (1-b2) g^2;  v_max = max(v_max, v)
//   p -= lr * (m / (1-b1^t)) / (sqrt(v_max / (1-b2^t)) + eps)
// Missing state entries are created as zeros. Throws ShapeMismatch when an
// existing entry disagrees with its parameter.
void amsgrad_step(ParameterStore& params, OptimizerState& state, const AmsGradConfig& config = {});

}  // namespace melcond::nn
