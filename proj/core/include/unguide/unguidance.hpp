// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "unguide/denoiser.hpp"
#include "unguide/schedule.hpp"

namespace unguide {

struct ProbeConfig {
  std::size_t trials = 30;
  int probe_steps = 25;  // inference steps before the measurement
  double w_erase = -1.0;
  double w_retain = 2.0;
  float cfg_scale = 7.5F;  // guidance used while partially denoising
  std::uint64_t seed = 1;

  bool operator==(const ProbeConfig&) const = default;
};

void validate(const ProbeConfig& cfg, const NoiseSchedule& sched);

struct DivergenceStats {
  std::vector<double> norms;
  double mean = 0.0;
};

enum class Route { kErase, kRetain };
std::string_view to_string(Route route);

struct GuidanceDecision {
  ConceptId concept_id = 0;
  double mean_c = 0.0;
  double mean_c0 = 0.0;
  double w = 0.0;
  Route route = Route::kRetain;
};

struct ProbeResult {
  GuidanceDecision decision;
  DivergenceStats concept_stats;
  DivergenceStats neutral_stats;
  /// Partially denoised latents of the concept branch, one row per trial.
  LatentState concept_latents;
};

/// ||eps_adapted(z, t, c) - eps_base(z, t, c)||_2 over the whole latent.
double divergence_norm(const DenoiserModel& base, const DenoiserModel& adapted,
                       const Tensor& z, int t, ConceptId c);
/// The same norm taken per row.
std::vector<double> divergence_norms(const DenoiserModel& base, const DenoiserModel& adapted,
                                     const Tensor& z, int t, ConceptId c);

/// Trial latents for one probe branch (0 = concept, 1 = neutral): row i starts
/// from z_T seeded by derive_seed(seed, {branch, i}) and is denoised
/// probe_steps steps by the base model under guidance toward c.
LatentState probe_latents(const DenoiserModel& base, ConceptId c, std::uint64_t branch,
                          const ProbeConfig& cfg, const NoiseSchedule& sched);

DivergenceStats divergence_stats(const DenoiserModel& base, const DenoiserModel& adapted,
                                 ConceptId c, std::uint64_t branch, const ProbeConfig& cfg,
                                 const NoiseSchedule& sched,
                                 LatentState* latents = nullptr);

/// Routes erase when mean_c > mean_c0 strictly, otherwise retain.
GuidanceDecision decide(ConceptId c, double mean_c, double mean_c0, const ProbeConfig& cfg);

ProbeResult probe(const DenoiserModel& base, const DenoiserModel& adapted, ConceptId c,
                  const ProbeConfig& cfg, const NoiseSchedule& sched);

/// w * cfg_base + (1 - w) * cfg_adapted
Tensor unguided_predict(const DenoiserModel& base, const DenoiserModel& adapted,
                        const Tensor& z, int t, ConceptId c, double w,
                        const CfgParams& cfg);

struct SamplerConfig {
  CfgParams cfg;
  /// Skip the probe and use this weight.
  std::optional<double> forced_w;
  /// Continue the probe's partially denoised concept latents instead of
  /// drawing fresh noise; n must not exceed the probe's trial count.
  bool reuse_probe_latents = false;
};

struct UnguidedSamples {
  Tensor samples;
  std::optional<GuidanceDecision> decision;
};

UnguidedSamples generate_unguided(const DenoiserModel& base, const DenoiserModel& adapted,
                                  ConceptId c, const ProbeConfig& probe_cfg,
                                  const SamplerConfig& sampler_cfg, std::size_t n,
                                  std::uint64_t seed, const NoiseSchedule& sched);

}  // namespace unguide
