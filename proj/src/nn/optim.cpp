#include "melcond/nn/optim.h"

#include <algorithm>
#include <cmath>

#include "melcond/error.h"

namespace melcond::nn {

void amsgrad_step(ParameterStore& params, OptimizerState& state, const AmsGradConfig& config) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(static_cast<double>(config.beta1), static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(static_cast<double>(config.beta2), static_cast<double>(state.step));
  const float step_size = static_cast<float>(config.lr / bc1);
  const float inv_sqrt_bc2 = static_cast<float>(1.0 / std::sqrt(bc2));

  for (auto& [path, p] : params.entries()) {
    if (!p.trainable) continue;
    auto [it, inserted] = state.moments.try_emplace(path);
    MomentBuffers& mb = it->second;
    if (inserted) {
      mb.m = Tensor(p.value.shape());
      mb.v = Tensor(p.value.shape());
      mb.v_max = Tensor(p.value.shape());
    } else if (mb.m.shape() != p.value.shape() || mb.v.shape() != p.value.shape() ||
               mb.v_max.shape() != p.value.shape()) {
      fail(ErrorKind::ShapeMismatch, "optimizer state for " + path + " has shape " + mb.m.shape_string());
    }
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const float g = p.grad[i];
      mb.m[i] = config.beta1 * mb.m[i] + (1.0f - config.beta1) * g;
      mb.v[i] = config.beta2 * mb.v[i] + (1.0f - config.beta2) * g * g;
      mb.v_max[i] = std::max(mb.v_max[i], mb.v[i]);
      const float denom = std::sqrt(mb.v_max[i]) * inv_sqrt_bc2 + config.eps;
      p.value[i] -= step_size * mb.m[i] / denom;
    }
  }
}

}  // namespace melcond::nn
