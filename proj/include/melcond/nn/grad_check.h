#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace melcond::nn {

// One block of differentiable values: perturbed in place through `values`
// and compared against `analytic`, which must outlive the check.
struct GradCheckSlot {
  std::string name;
  std::span<float> values;
  std::span<const float> analytic;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_slot;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // elements whose finite-difference interval crosses a kink
};

// Central differences (f(x+h) - f(x-h)) / 2h for every element of every slot.
// Per-element error is |a - n| / max(|a|, |n|, floor); the floor keeps
// float32 round-off on near-zero gradients from dominating. `loss` must be a
// deterministic function of the slot values.
//
// `kink_signature`, when given, is read after every loss evaluation and
// summarizes the active pieces of piecewise-linear units (e.g. ReLU signs).
// Elements whose perturbed evaluations land on a different piece than the
// unperturbed point are non-differentiable within the interval and skipped.
GradCheckResult gradient_check(const std::function<double()>& loss, std::span<const GradCheckSlot> slots,
                               float h = 1e-3f, double floor = 1.0,
                               const std::function<std::uint64_t()>& kink_signature = {});

}  // namespace melcond::nn
