// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "unguide/denoiser.hpp"
#include "unguide/schedule.hpp"

namespace unguide {

struct UnlearnConfig {
  ConceptId target = 0;
  ConceptId mapping = 1;
  float alpha = 9.0F;  // start guidance for latent generation
  float gamma = 2.0F;  // negative guidance in the target
  std::int64_t iterations = 200;
  float lr = 5e-3F;
  int probe_min = 5;  // k ~ U[probe_min, probe_max] inference steps
  int probe_max = 40;
  std::size_t rank = 1;
  float scale = 8.0F;
  float a_init_std = 0.003F;
  TargetMode target_mode = TargetMode::kCond;
  std::uint64_t seed = 1;
};

/// Predictions at one latent: eps_m = base(c_m), eps_p = base(c),
/// eps_n = adapted(c), all raw conditional outputs.
struct TargetTriple {
  Tensor eps_m;
  Tensor eps_p;
  Tensor eps_n;
};

/// Throws ContractError unless cfg is usable with this vocabulary.
void validate(const UnlearnConfig& cfg, const ConceptVocabulary& vocab);

/// z_t after k guided DDIM steps of the frozen base model at scale alpha,
/// conditioned on c, from a single seeded z_T.
LatentState generate_training_latent(const DenoiserModel& base, ConceptId c,
                                     const NoiseSchedule& sched, float alpha, int k,
                                     std::uint64_t seed);

TargetTriple compute_targets(const DenoiserModel& base, const DenoiserModel& adapted,
                             const Tensor& z, int t, ConceptId c, ConceptId c_m);

/// ||eps_n - (eps_m - gamma (eps_p - eps_m))||^2
double unlearn_loss(const TargetTriple& triple, float gamma);

struct UnlearnResult {
  LoraAdapter adapter;
  std::vector<double> loss;
};

/// Fresh LoRA adapter trained against the frozen base; the base model is not
/// modified. Iteration i draws its latent from derive_seed(cfg.seed, {i}).
UnlearnResult train_lora(const DenoiserModel& base, const NoiseSchedule& sched,
                         const UnlearnConfig& cfg);

}  // namespace unguide
