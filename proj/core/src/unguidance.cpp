// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "unguide/unguidance.hpp"

#include <cmath>
#include <string>

#include "unguide/diffusion.hpp"
#include "unguide/errors.hpp"
#include "unguide/rng.hpp"

namespace unguide {

std::string_view to_string(Route route) {
  return route == Route::kErase ? "erase" : "retain";
}

void validate(const ProbeConfig& cfg, const NoiseSchedule& sched) {
  if (cfg.trials == 0) throw ContractError("probe needs at least one trial");
  if (cfg.probe_steps < 1 || cfg.probe_steps > sched.inference_steps()) {
    throw ContractError("probe steps must lie in [1, " +
                        std::to_string(sched.inference_steps()) + "]");
  }
  if (!(cfg.w_erase <= -1.0)) throw ContractError("w_erase must be <= -1");
  if (!(cfg.w_retain >= 1.0)) throw ContractError("w_retain must be >= 1");
}

namespace {

void require_pair(const DenoiserModel& base, const DenoiserModel& adapted) {
  if (base.has_adapter()) throw ContractError("the base model must not carry an adapter");
  if (!adapted.has_adapter()) throw ContractError("the adapted model has no adapter");
}

}  // namespace

std::vector<double> divergence_norms(const DenoiserModel& base, const DenoiserModel& adapted,
                                     const Tensor& z, int t, ConceptId c) {
  require_pair(base, adapted);
  const Tensor a = adapted.predict_eps(z, t, c);
  const Tensor b = base.predict_eps(z, t, c);
  std::vector<double> out(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double total = 0.0;
    for (std::size_t d = 0; d < a.cols(); ++d) {
      const double diff = static_cast<double>(a(r, d)) - b(r, d);
      total += diff * diff;
    }
    out[r] = std::sqrt(total);
  }
  return out;
}

double divergence_norm(const DenoiserModel& base, const DenoiserModel& adapted,
                       const Tensor& z, int t, ConceptId c) {
  double total = 0.0;
  for (double v : divergence_norms(base, adapted, z, t, c)) total += v * v;
  return std::sqrt(total);
}

LatentState probe_latents(const DenoiserModel& base, ConceptId c, std::uint64_t branch,
                          const ProbeConfig& cfg, const NoiseSchedule& sched) {
  validate(cfg, sched);
  const std::size_t dim = base.config().data_dim;
  Tensor z(Shape{cfg.trials, dim});
  for (std::size_t i = 0; i < cfg.trials; ++i) {
    const Tensor row = initial_noise(1, dim, derive_seed(cfg.seed, {branch, i}));
    for (std::size_t d = 0; d < dim; ++d) z(i, d) = row[d];
  }
  const auto plan = sched.step_plan();
  return denoise(guided_eps(base, c, CfgParams{cfg.cfg_scale}),
                 LatentState{std::move(z), plan.front()},
                 std::span(plan).first(static_cast<std::size_t>(cfg.probe_steps) + 1), sched);
}

DivergenceStats divergence_stats(const DenoiserModel& base, const DenoiserModel& adapted,
                                 ConceptId c, std::uint64_t branch, const ProbeConfig& cfg,
                                 const NoiseSchedule& sched, LatentState* latents) {
  require_pair(base, adapted);
  LatentState zt = probe_latents(base, c, branch, cfg, sched);
  DivergenceStats stats;
  stats.norms = divergence_norms(base, adapted, zt.z, zt.t, c);
  double total = 0.0;
  for (double v : stats.norms) total += v;
  stats.mean = total / static_cast<double>(stats.norms.size());
  if (latents != nullptr) *latents = std::move(zt);
  return stats;
}

GuidanceDecision decide(ConceptId c, double mean_c, double mean_c0, const ProbeConfig& cfg) {
  GuidanceDecision d;
  d.concept_id = c;
  d.mean_c = mean_c;
  d.mean_c0 = mean_c0;
  d.route = mean_c > mean_c0 ? Route::kErase : Route::kRetain;
  d.w = d.route == Route::kErase ? cfg.w_erase : cfg.w_retain;
  return d;
}

ProbeResult probe(const DenoiserModel& base, const DenoiserModel& adapted, ConceptId c,
                  const ProbeConfig& cfg, const NoiseSchedule& sched) {
  base.vocab().at(c);
  ProbeResult r;
  r.concept_stats = divergence_stats(base, adapted, c, 0, cfg, sched, &r.concept_latents);
  r.neutral_stats = divergence_stats(base, adapted, base.neutral(), 1, cfg, sched);
  r.decision = decide(c, r.concept_stats.mean, r.neutral_stats.mean, cfg);
  return r;
}

Tensor unguided_predict(const DenoiserModel& base, const DenoiserModel& adapted,
                        const Tensor& z, int t, ConceptId c, double w,
                        const CfgParams& cfg) {
  const Tensor b = guided_eps(base, c, cfg)(z, t);
  const Tensor a = guided_eps(adapted, c, cfg)(z, t);
  require_same_shape(a, b, "unguided_predict");
  Tensor out(b.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(w * b[i] + (1.0 - w) * a[i]);
  }
  return out;
}

UnguidedSamples generate_unguided(const DenoiserModel& base, const DenoiserModel& adapted,
                                  ConceptId c, const ProbeConfig& probe_cfg,
                                  const SamplerConfig& sampler_cfg, std::size_t n,
                                  std::uint64_t seed, const NoiseSchedule& sched) {
  require_pair(base, adapted);
  base.vocab().at(c);
  UnguidedSamples out;
  double w = 0.0;
  std::optional<LatentState> resume;
  if (sampler_cfg.forced_w) {
    if (sampler_cfg.reuse_probe_latents) {
      throw ContractError("probe latents are unavailable when w is forced");
    }
    w = *sampler_cfg.forced_w;
  } else {
    ProbeResult pr = probe(base, adapted, c, probe_cfg, sched);
    out.decision = pr.decision;
    w = pr.decision.w;
    if (sampler_cfg.reuse_probe_latents) {
      if (n > probe_cfg.trials) {
        throw ContractError("cannot reuse " + std::to_string(probe_cfg.trials) +
                            " probe latents for " + std::to_string(n) + " samples");
      }
      resume = LatentState{slice_rows(pr.concept_latents.z, 0, n), pr.concept_latents.t};
    }
  }

  const EpsFn eps = [&](const Tensor& z, int t) {
    return unguided_predict(base, adapted, z, t, c, w, sampler_cfg.cfg);
  };
  const auto plan = sched.step_plan();
  std::span<const int> steps(plan);
  LatentState start;
  if (resume) {
    steps = steps.subspan(static_cast<std::size_t>(probe_cfg.probe_steps));
    start = std::move(*resume);
  } else {
    start = LatentState{initial_noise(n, base.config().data_dim, seed), plan.front()};
  }
  out.samples = denoise(eps, std::move(start), steps, sched).z;
  return out;
}

}  // namespace unguide
