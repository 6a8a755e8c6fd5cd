#pragma once

#include "egat/autodiff.hpp"

#include <cstdint>
#include <vector>

namespace egat {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::int64_t t = 0;
  AdamConfig config;
};

// Bias-corrected Adam update of every parameter from its accumulated gradient.
// State is sized on first use; later calls throw ShapeMismatch if parameter
// shapes change.
void adam_step(std::vector<Var>& params, AdamState& state, double lr);

// Same update with explicit gradients.
void adam_step(std::vector<Var>& params, const std::vector<Matrix>& grads, AdamState& state, double lr);

}  // namespace egat
