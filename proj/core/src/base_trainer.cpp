// Copyright 2026 The UnGuide Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "unguide/base_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "unguide/errors.hpp"
#include "unguide/rng.hpp"
#include "unguide/sgd.hpp"

namespace unguide {

void DivergenceMonitor::observe(double loss) {
  if (!std::isfinite(loss)) throw TrainingDivergedError("loss became non-finite");
  if (head_.size() < 10) {
    head_.push_back(loss);
    double total = 0.0;
    for (double v : head_) total += v;
    reference_ = total / static_cast<double>(head_.size());
    return;
  }
  above_ = loss > factor_ * reference_ ? above_ + 1 : 0;
  if (above_ >= window_) {
    throw TrainingDivergedError("loss above " + std::to_string(factor_) +
                                "x its initial level for " + std::to_string(window_) +
                                " consecutive steps");
  }
}

double tail_mean(const std::vector<double>& trace, std::size_t window) {
  if (trace.empty()) return 0.0;
  const std::size_t n = std::min(window, trace.size());
  double total = 0.0;
  for (std::size_t i = trace.size() - n; i < trace.size(); ++i) total += trace[i];
  return total / static_cast<double>(n);
}

std::vector<double> train_base(DenoiserModel& model, const ToyDataset& data,
                               const NoiseSchedule& sched, const BaseTrainConfig& cfg) {
  if (!(cfg.p_uncond >= 0.0 && cfg.p_uncond <= 1.0)) {
    throw ContractError("p_uncond must lie in [0, 1]");
  }
  if (cfg.steps < 0 || cfg.batch == 0) {
    throw ContractError("train_base: steps must be >= 0 and batch positive");
  }
  if (model.has_adapter()) throw ContractError("train_base: detach the adapter first");
  if (data.dim() != model.config().data_dim) {
    throw ShapeError("train_base: dataset and model dimensions differ");
  }
  const auto& concepts = data.trainable();
  const ConceptId neutral = model.neutral();
  const std::size_t dim = data.dim();
  const int T = sched.total_steps();

  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(cfg.steps));
  DivergenceMonitor monitor;
  std::vector<int> ts(cfg.batch);
  std::vector<ConceptId> cs(cfg.batch);
  Tensor z(Shape{cfg.batch, dim});
  Tensor eps(Shape{cfg.batch, dim});

  for (std::int64_t s = 0; s < cfg.steps; ++s) {
    const auto step = static_cast<std::uint64_t>(model.trained_steps());
    for (std::size_t i = 0; i < cfg.batch; ++i) {
      Rng rng(derive_seed(cfg.seed, {step, i}));
      const ConceptId c = concepts[rng.uniform_int(0, static_cast<int>(concepts.size()) - 1)];
      const Cluster& cl = data.cluster_of(c);
      const int t = rng.uniform_int(1, T);
      const double ab = sched.alpha_bar(t);
      const double sd = std::sqrt(cl.variance);
      for (std::size_t d = 0; d < dim; ++d) {
        const double x0 = cl.mean[d] + sd * rng.normal();
        const float e = rng.normal();
        eps(i, d) = e;
        z(i, d) = static_cast<float>(std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * e);
      }
      ts[i] = t;
      cs[i] = rng.bernoulli(cfg.p_uncond) ? neutral : c;
    }

    Tape tape;
    Var pred = model.forward(tape, tape.borrow(z), ts, cs, Trainable::kBase);
    Var loss = tape.scale(tape.sum_squares(tape.sub(pred, tape.borrow(eps))),
                          1.0F / static_cast<float>(cfg.batch * dim));
    const double value = tape.value(loss).item();
    monitor.observe(value);
    trace.push_back(value);
    sgd_step(tape.backward(loss), cfg.lr);
    model.set_trained_steps(model.trained_steps() + 1);
  }

  if (cfg.loss_threshold > 0.0 && !trace.empty() &&
      tail_mean(trace) > cfg.loss_threshold) {
    throw TrainingNotConvergedError("final mean loss " + std::to_string(tail_mean(trace)) +
                                    " above threshold " +
                                    std::to_string(cfg.loss_threshold));
  }
  return trace;
}

}  // namespace unguide
