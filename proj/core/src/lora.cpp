// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "unguide/lora.hpp"

#include <set>
#include <string>

#include "unguide/errors.hpp"

namespace unguide {

const LoraFactor* LoraAdapter::find(std::size_t layer) const {
  for (const LoraFactor& f : factors) {
    if (f.layer == layer) return &f;
  }
  return nullptr;
}

std::vector<std::size_t> LoraAdapter::target_layers() const {
  std::vector<std::size_t> out;
  out.reserve(factors.size());
  for (const LoraFactor& f : factors) out.push_back(f.layer);
  return out;
}

std::vector<Tensor*> LoraAdapter::parameters() {
  std::vector<Tensor*> out;
  for (LoraFactor& f : factors) {
    out.push_back(&f.b);
    out.push_back(&f.a);
  }
  return out;
}

const Tensor* WeightDelta::find(std::size_t layer) const {
  auto it = deltas.find(layer);
  return it == deltas.end() ? nullptr : &it->second;
}

Tensor materialize(const LoraFactor& factor, float scale) {
  return unguide::scale(matmul(factor.b, factor.a), scale);
}

WeightDelta materialize(const Adapter& adapter) {
  if (const auto* delta = std::get_if<WeightDelta>(&adapter)) return *delta;
  const auto& lora = std::get<LoraAdapter>(adapter);
  WeightDelta out;
  for (const LoraFactor& f : lora.factors) out.deltas.emplace(f.layer, materialize(f, lora.scale));
  return out;
}

WeightDelta merge_adapters(const Adapter& first, const Adapter& second, double a) {
  if (!(a >= 0.0 && a <= 1.0)) {
    throw ContractError("merge_adapters: weight " + std::to_string(a) +
                        " outside [0, 1]");
  }
  const WeightDelta d1 = materialize(first);
  const WeightDelta d2 = materialize(second);
  std::set<std::size_t> layers;
  for (const auto& [layer, _] : d1.deltas) layers.insert(layer);
  for (const auto& [layer, _] : d2.deltas) layers.insert(layer);

  WeightDelta out;
  for (std::size_t layer : layers) {
    const Tensor* w1 = d1.find(layer);
    const Tensor* w2 = d2.find(layer);
    if (w1 != nullptr && w2 != nullptr) require_same_shape(*w1, *w2, "merge_adapters");
    const Shape& shape = w1 != nullptr ? w1->shape() : w2->shape();
    Tensor merged(shape);
    // Endpoints copy the surviving side so signed zeros are preserved too.
    if (a == 1.0 || a == 0.0) {
      const Tensor* keep = a == 1.0 ? w1 : w2;
      if (keep != nullptr) merged = *keep;
      out.deltas.emplace(layer, std::move(merged));
      continue;
    }
    for (std::size_t i = 0; i < merged.size(); ++i) {
      const double v1 = w1 != nullptr ? (*w1)[i] : 0.0;
      const double v2 = w2 != nullptr ? (*w2)[i] : 0.0;
      merged[i] = static_cast<float>(a * v1 + (1.0 - a) * v2);
    }
    out.deltas.emplace(layer, std::move(merged));
  }
  return out;
}

}  // namespace unguide
