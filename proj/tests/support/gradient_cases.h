#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "melcond/nn/grad_check.h"

namespace melcond::fixtures {

// Finite-difference fixtures, one per layer plus composed graphs. Each draws
// its inputs and parameters from `seed` and reports the worst relative error.
nn::GradCheckResult check_embedding(std::uint64_t seed);
nn::GradCheckResult check_linear(std::uint64_t seed);
nn::GradCheckResult check_identity_linear(std::uint64_t seed);
nn::GradCheckResult check_batchnorm(std::uint64_t seed);
nn::GradCheckResult check_relu(std::uint64_t seed);
nn::GradCheckResult check_log_softmax(std::uint64_t seed);
nn::GradCheckResult check_dropout(std::uint64_t seed);
nn::GradCheckResult check_lstm(std::uint64_t seed);
nn::GradCheckResult check_composed(std::uint64_t seed);
nn::GradCheckResult check_cnib_network(std::uint64_t seed);

struct GradCase {
  std::string name;
  nn::GradCheckResult (*run)(std::uint64_t);
  double tolerance;
};

// Per-layer cases at 1e-3 and the composed network at 1e-2.
const std::vector<GradCase>& gradient_cases();

}  // namespace melcond::fixtures
