// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "unguide/diffusion.hpp"

#include <cmath>
#include <string>

#include "unguide/errors.hpp"
#include "unguide/rng.hpp"

namespace unguide {

Tensor initial_noise(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  Tensor z(Shape{rows, dim});
  for (std::size_t i = 0; i < rows; ++i) {
    Rng rng(derive_seed(seed, {i}));
    for (float& v : z.row(i)) v = rng.normal();
  }
  return z;
}

LatentState forward_noise(const Tensor& x0, int t, const Tensor& eps,
                          const NoiseSchedule& sched) {
  require_same_shape(x0, eps, "forward_noise");
  if (!sched.contains(t)) {
    throw ContractError("forward_noise: timestep " + std::to_string(t) +
                        " out of range");
  }
  const double ab = sched.alpha_bar(t);
  const double signal = std::sqrt(ab);
  const double noise = std::sqrt(1.0 - ab);
  Tensor z(x0.shape());
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = static_cast<float>(signal * x0[i] + noise * eps[i]);
  }
  return {std::move(z), t};
}

Tensor cfg_predict(const Tensor& eps_uncond, const Tensor& eps_cond,
                   const CfgParams& params) {
  require_same_shape(eps_uncond, eps_cond, "cfg_predict");
  if (!std::isfinite(params.scale)) throw ContractError("cfg_predict: scale must be finite");
  const double a = params.scale;
  Tensor out(eps_uncond.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double u = eps_uncond[i];
    out[i] = static_cast<float>(u + a * (static_cast<double>(eps_cond[i]) - u));
  }
  return out;
}

LatentState ddim_step(const LatentState& state, const Tensor& eps_hat, int t_next,
                      const NoiseSchedule& sched) {
  require_same_shape(state.z, eps_hat, "ddim_step");
  if (t_next >= state.t || t_next < 0) {
    throw ContractError("ddim_step: t_next " + std::to_string(t_next) +
                        " must lie in [0, " + std::to_string(state.t) + ")");
  }
  const double ab = sched.alpha_bar(state.t);
  const double ab_next = sched.alpha_bar(t_next);
  const double inv_signal = 1.0 / std::sqrt(ab);
  const double noise = std::sqrt(1.0 - ab);
  const double signal_next = std::sqrt(ab_next);
  const double noise_next = std::sqrt(1.0 - ab_next);
  Tensor z(state.z.shape());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double e = eps_hat[i];
    const double x0 = (state.z[i] - noise * e) * inv_signal;
    z[i] = static_cast<float>(signal_next * x0 + noise_next * e);
  }
  return {std::move(z), t_next};
}

void require_valid_plan(std::span<const int> steps, const NoiseSchedule& sched) {
  if (steps.size() < 2) throw ContractError("step plan needs at least two entries");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!sched.contains(steps[i])) {
      throw ContractError("step plan entry " + std::to_string(steps[i]) +
                          " out of range");
    }
    if (i > 0 && steps[i] >= steps[i - 1]) {
      throw ContractError("step plan must be strictly decreasing");
    }
  }
  if (steps.back() != 0) throw ContractError("step plan must end at 0");
}

LatentState denoise(const EpsFn& eps, LatentState start, std::span<const int> plan,
                    const NoiseSchedule& sched) {
  if (plan.empty() || plan.front() != start.t) {
    throw ContractError("denoise: plan must start at the current timestep");
  }
  for (std::size_t i = 1; i < plan.size(); ++i) {
    const Tensor e = eps(start.z, start.t);
    start = ddim_step(start, e, plan[i], sched);
  }
  return start;
}

EpsFn guided_eps(const NoisePredictor& predictor, ConceptId c, CfgParams cfg) {
  return [&predictor, c, cfg](const Tensor& z, int t) {
    const Tensor uncond = predictor.predict_eps(z, t, predictor.neutral());
    const Tensor cond = predictor.predict_eps(z, t, c);
    return cfg_predict(uncond, cond, cfg);
  };
}

Tensor sample(const NoisePredictor& predictor, ConceptId c, std::span<const int> steps,
              const CfgParams& cfg, std::uint64_t seed, std::size_t n,
              std::size_t dim, const NoiseSchedule& sched) {
  require_valid_plan(steps, sched);
  LatentState start{initial_noise(n, dim, seed), steps.front()};
  return denoise(guided_eps(predictor, c, cfg), std::move(start), steps, sched).z;
}

LatentState partial_denoise(const NoisePredictor& predictor, ConceptId c, int k,
                            const CfgParams& cfg, std::uint64_t seed, std::size_t n,
                            std::size_t dim, const NoiseSchedule& sched) {
  if (k < 1 || k > sched.inference_steps()) {
    throw ContractError("partial_denoise: step count " + std::to_string(k) +
                        " outside [1, " + std::to_string(sched.inference_steps()) +
                        "]");
  }
  const std::vector<int> plan = sched.step_plan();
  LatentState start{initial_noise(n, dim, seed), plan.front()};
  return denoise(guided_eps(predictor, c, cfg), std::move(start),
                 std::span<const int>(plan).first(k + 1), sched);
}

}  // namespace unguide
