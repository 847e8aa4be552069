// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "unguide/schedule.hpp"
#include "unguide/tensor.hpp"

namespace unguide {

using ConceptId = std::uint32_t;

/// A batch of latent points z (one row per point) at timestep t.
struct LatentState {
  Tensor z;
  int t = 0;
};

struct CfgParams {
  float scale = 7.5F;

  bool operator==(const CfgParams&) const = default;
};

/// Anything that predicts eps(z, t, c) for a batch of rows sharing t and c.
class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;
  virtual Tensor predict_eps(const Tensor& z, int t, ConceptId c) const = 0;
  /// Concept used for the unconditional branch of guidance.
  virtual ConceptId neutral() const = 0;
};

/// Noise prediction as a function of (z, t) only, guidance already applied.
using EpsFn = std::function<Tensor(const Tensor& z, int t)>;

/// z_T ~ N(0, I) with `rows` points of dimension `dim`. Row i depends only on
/// (seed, i), so a larger batch extends a smaller one.
Tensor initial_noise(std::size_t rows, std::size_t dim, std::uint64_t seed);

/// z_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.
LatentState forward_noise(const Tensor& x0, int t, const Tensor& eps,
                          const NoiseSchedule& sched);

/// eps_u + scale (eps_c - eps_u), evaluated in double per element.
Tensor cfg_predict(const Tensor& eps_uncond, const Tensor& eps_cond,
                   const CfgParams& params);

/// Deterministic (eta = 0) DDIM update from state.t to t_next < state.t.
LatentState ddim_step(const LatentState& state, const Tensor& eps_hat, int t_next,
                      const NoiseSchedule& sched);

/// Runs DDIM along `plan`, whose first entry must equal start.t.
LatentState denoise(const EpsFn& eps, LatentState start, std::span<const int> plan,
                    const NoiseSchedule& sched);

/// Classifier-free guided noise function for concept c.
EpsFn guided_eps(const NoisePredictor& predictor, ConceptId c, CfgParams cfg);

/// Full DDIM trajectory from z_T ~ N(0, I) along `steps` (strictly
/// decreasing, ending at 0) under classifier-free guidance.
Tensor sample(const NoisePredictor& predictor, ConceptId c, std::span<const int> steps,
              const CfgParams& cfg, std::uint64_t seed, std::size_t n,
              std::size_t dim, const NoiseSchedule& sched);

/// The latent after exactly k guided DDIM steps of sched.step_plan(),
/// starting from pure noise. k must lie in [1, inference_steps].
LatentState partial_denoise(const NoisePredictor& predictor, ConceptId c, int k,
                            const CfgParams& cfg, std::uint64_t seed, std::size_t n,
                            std::size_t dim, const NoiseSchedule& sched);

/// Throws ContractError unless `steps` is strictly decreasing and ends at 0.
void require_valid_plan(std::span<const int> steps, const NoiseSchedule& sched);

}  // namespace unguide
