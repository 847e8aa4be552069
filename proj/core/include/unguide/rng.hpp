// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "unguide/tensor.hpp"

namespace unguide {

/// Derives an independent stream seed from a master seed and a path of
/// indices (branch, trial, step, ...). splitmix64 finalizer per component.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  float normal();
  double uniform();
  /// Uniform integer in the closed range [lo, hi].
  int uniform_int(int lo, int hi);
  bool bernoulli(double p);

 private:
  std::mt19937_64 engine_;
};

/// Standard normal tensor.
Tensor randn(Shape shape, Rng& rng, float stddev = 1.0F);

}  // namespace unguide
