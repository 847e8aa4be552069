// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "unguide/unlearn.hpp"

#include <cmath>
#include <string>

#include "unguide/base_trainer.hpp"
#include "unguide/diffusion.hpp"
#include "unguide/errors.hpp"
#include "unguide/rng.hpp"
#include "unguide/sgd.hpp"

namespace unguide {

void validate(const UnlearnConfig& cfg, const ConceptVocabulary& vocab) {
  vocab.at(cfg.target);
  vocab.at(cfg.mapping);
  if (cfg.target == cfg.mapping) throw ContractError("target and mapping concept coincide");
  if (cfg.target == vocab.neutral()) throw ContractError("the neutral concept cannot be erased");
  if (!(cfg.gamma >= 0.0F)) throw ContractError("negative guidance gamma must be >= 0");
  if (cfg.iterations < 0) throw ContractError("iterations must be >= 0");
  if (!(cfg.lr >= 0.0F) || !std::isfinite(cfg.lr)) {
    throw ContractError("learning rate must be finite and >= 0");
  }
  if (cfg.probe_min < 1 || cfg.probe_max < cfg.probe_min) {
    throw ContractError("probe step range must satisfy 1 <= min <= max");
  }
}

LatentState generate_training_latent(const DenoiserModel& base, ConceptId c,
                                     const NoiseSchedule& sched, float alpha, int k,
                                     std::uint64_t seed) {
  if (base.trained_steps() == 0) {
    throw ContractError("latent generation needs a trained base model");
  }
  if (base.has_adapter()) throw ContractError("latent generation uses the frozen base model");
  return partial_denoise(base, c, k, CfgParams{alpha}, seed, 1, base.config().data_dim,
                         sched);
}

TargetTriple compute_targets(const DenoiserModel& base, const DenoiserModel& adapted,
                             const Tensor& z, int t, ConceptId c, ConceptId c_m) {
  if (base.has_adapter()) throw ContractError("compute_targets: base model carries an adapter");
  if (!adapted.has_adapter()) throw ContractError("compute_targets: adapter missing");
  return TargetTriple{base.predict_eps(z, t, c_m), base.predict_eps(z, t, c),
                      adapted.predict_eps(z, t, c)};
}

namespace {

Tensor repelled_target(const Tensor& eps_m, const Tensor& eps_p, float gamma) {
  require_same_shape(eps_m, eps_p, "unlearn target");
  Tensor out(eps_m.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double m = eps_m[i];
    out[i] = static_cast<float>(m - static_cast<double>(gamma) * (eps_p[i] - m));
  }
  return out;
}

}  // namespace

double unlearn_loss(const TargetTriple& triple, float gamma) {
  require_same_shape(triple.eps_n, triple.eps_m, "unlearn_loss");
  const Tensor target = repelled_target(triple.eps_m, triple.eps_p, gamma);
  double total = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = static_cast<double>(triple.eps_n[i]) - target[i];
    total += d * d;
  }
  return total;
}

UnlearnResult train_lora(const DenoiserModel& base, const NoiseSchedule& sched,
                         const UnlearnConfig& cfg) {
  validate(cfg, base.vocab());
  if (base.has_adapter()) throw ContractError("train_lora: base model carries an adapter");
  if (base.trained_steps() == 0) throw ContractError("train_lora: base model is untrained");
  if (cfg.probe_max > sched.inference_steps()) {
    throw ContractError("probe step range exceeds the inference plan");
  }

  DenoiserModel adapted = base;
  adapted.attach(make_lora_adapter(base, cfg.target_mode, cfg.rank, cfg.scale,
                                   cfg.a_init_std, derive_seed(cfg.seed, {0xADA})));
  UnlearnResult result;
  DivergenceMonitor monitor;
  const std::vector<ConceptId> cs{cfg.target};
  for (std::int64_t i = 0; i < cfg.iterations; ++i) {
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(i)}));
    const int k = rng.uniform_int(cfg.probe_min, cfg.probe_max);
    const LatentState zt = generate_training_latent(
        base, cfg.target, sched, cfg.alpha, k,
        derive_seed(cfg.seed, {static_cast<std::uint64_t>(i), 1}));
    const Tensor eps_m = base.predict_eps(zt.z, zt.t, cfg.mapping);
    const Tensor eps_p = base.predict_eps(zt.z, zt.t, cfg.target);
    const Tensor target = repelled_target(eps_m, eps_p, cfg.gamma);

    Tape tape;
    const std::vector<int> ts{zt.t};
    Var eps_n = adapted.forward(tape, tape.borrow(zt.z), ts, cs, Trainable::kAdapter);
    Var loss = tape.sum_squares(tape.sub(eps_n, tape.borrow(target)));
    const double value = tape.value(loss).item();
    monitor.observe(value);
    result.loss.push_back(value);
    sgd_step(tape.backward(loss), cfg.lr);
  }
  result.adapter = *adapted.lora();
  return result;
}

}  // namespace unguide
