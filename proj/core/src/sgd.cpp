// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "unguide/sgd.hpp"

#include <cmath>
#include <string>

#include "unguide/errors.hpp"

namespace unguide {

void sgd_step(std::span<Tensor* const> params, std::span<const Tensor> grads,
              float lr) {
  if (params.size() != grads.size()) {
    throw ContractError("sgd_step: " + std::to_string(params.size()) +
                        " params but " + std::to_string(grads.size()) + " grads");
  }
  if (!(lr >= 0.0F) || !std::isfinite(lr)) {
    throw ContractError("sgd_step: learning rate must be finite and >= 0");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i] == nullptr) throw ContractError("sgd_step: null parameter");
    require_same_shape(*params[i], grads[i], "sgd_step");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = grads[i];
    for (std::size_t j = 0; j < p.size(); ++j) p[j] -= lr * g[j];
  }
}

void sgd_step(const Gradients& grads, float lr) {
  sgd_step(grads.params(), grads.grads(), lr);
}

}  // namespace unguide
