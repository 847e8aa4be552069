// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "unguide/tape.hpp"
#include "unguide/tensor.hpp"

namespace unguide {

/// p <- p - lr * g for every aligned (param, grad) pair. lr must be >= 0.
void sgd_step(std::span<Tensor* const> params, std::span<const Tensor> grads,
              float lr);

/// Applies a Gradients set to the parameters it was computed for.
void sgd_step(const Gradients& grads, float lr);

}  // namespace unguide
