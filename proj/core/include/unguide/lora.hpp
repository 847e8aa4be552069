// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <variant>
#include <vector>

#include "unguide/tensor.hpp"

namespace unguide {

/// Low-rank pair for one target layer: delta W = scale * B A with
/// B [out x rank] and A [rank x in].
struct LoraFactor {
  std::size_t layer = 0;
  Tensor b;
  Tensor a;
};

/// A rank-r adapter over a set of target layers.
struct LoraAdapter {
  std::size_t rank = 1;
  float scale = 8.0F;
  std::vector<LoraFactor> factors;

  const LoraFactor* find(std::size_t layer) const;
  std::vector<std::size_t> target_layers() const;
  /// Trainable tensors in a stable order (B then A per factor).
  std::vector<Tensor*> parameters();
};

/// Dense per-layer weight updates, e.g. the weighted sum of two adapters.
struct WeightDelta {
  std::map<std::size_t, Tensor> deltas;

  const Tensor* find(std::size_t layer) const;
};

using Adapter = std::variant<LoraAdapter, WeightDelta>;

/// scale * B A for one factor.
Tensor materialize(const LoraFactor& factor, float scale);
/// Dense updates of any adapter.
WeightDelta materialize(const Adapter& adapter);

/// a * dW1 + (1 - a) * dW2 per layer; a layer missing from one side counts as
/// a zero update there. a must lie in [0, 1].
WeightDelta merge_adapters(const Adapter& first, const Adapter& second, double a);

}  // namespace unguide
